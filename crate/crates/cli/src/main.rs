//! Command-line front end for the peak-shaving solver: instance generation,
//! approximate and exact solving, schedule verification, and side-by-side
//! comparison. All file I/O lives here; the library stays I/O-free.
//!
//! Exit codes: 0 success, 1 validation or verification failure (also bad
//! input), 2 infeasible instance, 3 enumeration cap exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use peakshave::generate::{BaseProfile, GenConfig};
use peakshave::instance::{simulate_states, split_zero_e, validate_instance, ZeroESplit};
use peakshave::oracle::DEFAULT_ENUMERATION_CAP;
use peakshave::{
    check_feasible, evaluate_binary, exact_solve_with_cap, generate_instance, solve_detailed,
    Instance, ObjectiveKind, OracleError, SolveError, SolveOptions,
};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_CAP: u8 = 3;

/// Comparison tolerance for objective values; matches the library's
/// certificate checks.
const TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(
    name = "peakshave",
    version,
    about = "Peak-shaving on/off schedules for heat-converter fleets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a guaranteed-feasible random instance as JSON.
    Gen(GenArgs),
    /// Solve an instance with the relaxation-and-rounding pipeline.
    Solve(SolveArgs),
    /// Solve a small instance exactly by exhaustive enumeration.
    Oracle(OracleArgs),
    /// Re-check a schedule against an instance and the error certificates.
    Verify(VerifyArgs),
    /// Run the pipeline and the exact solver side by side.
    Compare(CompareArgs),
}

fn parse_objective(s: &str) -> Result<ObjectiveKind, String> {
    s.parse()
}

fn parse_profile(s: &str) -> Result<BaseProfile, String> {
    match s {
        "zero" => Ok(BaseProfile::Zero),
        "diurnal" => Ok(BaseProfile::Diurnal),
        other => Err(format!("unknown profile {other:?} (expected zero or diurnal)")),
    }
}

#[derive(Args)]
struct GenArgs {
    /// Number of converters.
    #[arg(long, short = 'c')]
    converters: usize,
    /// Number of time intervals.
    #[arg(long, short = 't')]
    horizon: usize,
    /// RNG seed; identical seeds and flags give byte-identical output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Base-load profile: zero | diurnal.
    #[arg(long, default_value = "zero", value_parser = parse_profile)]
    profile: BaseProfile,
    /// Force every converter to run at least once, with positive draws and
    /// no base load.
    #[arg(long)]
    force_run: bool,
    /// Restrict electricity draws to positive values.
    #[arg(long)]
    positive_e: bool,
    /// Output path; stdout when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON path.
    input: PathBuf,
    /// Objective: basic | maximal | absolute | fluctuation.
    #[arg(long, default_value = "maximal", value_parser = parse_objective)]
    objective: ObjectiveKind,
    /// Near-integer snap tolerance applied to the relaxation.
    #[arg(long)]
    snap_tol: Option<f64>,
    /// Log each support-reduction move to stderr.
    #[arg(long)]
    trace: bool,
    /// Output path; stdout when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Instance JSON path.
    input: PathBuf,
    /// Objective: basic | maximal | absolute | fluctuation.
    #[arg(long, default_value = "maximal", value_parser = parse_objective)]
    objective: ObjectiveKind,
    /// Largest converter-interval cell count the enumeration will attempt.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    oracle_cap: usize,
    /// Output path; stdout when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance JSON path.
    input: PathBuf,
    /// Schedule to verify: either a solve report or a bare 0/1 matrix.
    #[arg(long)]
    schedule: PathBuf,
    /// Objective: basic | maximal | absolute | fluctuation.
    #[arg(long, default_value = "maximal", value_parser = parse_objective)]
    objective: ObjectiveKind,
    /// Near-integer snap tolerance applied to the relaxation.
    #[arg(long)]
    snap_tol: Option<f64>,
    /// Output path; stdout when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Instance JSON path; omit when generating a batch with --batch.
    input: Option<PathBuf>,
    /// Objective: basic | maximal | absolute | fluctuation.
    #[arg(long, default_value = "maximal", value_parser = parse_objective)]
    objective: ObjectiveKind,
    /// Largest converter-interval cell count the enumeration will attempt.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    oracle_cap: usize,
    /// Near-integer snap tolerance applied to the relaxation.
    #[arg(long)]
    snap_tol: Option<f64>,
    /// Compare this many generated instances (seeds seed, seed+1, …)
    /// instead of reading a file.
    #[arg(long)]
    batch: Option<usize>,
    /// Converters per generated instance (batch mode).
    #[arg(long, short = 'c', default_value_t = 2)]
    converters: usize,
    /// Intervals per generated instance (batch mode).
    #[arg(long, short = 't', default_value_t = 4)]
    horizon: usize,
    /// First seed (batch mode).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Base-load profile for generated instances: zero | diurnal.
    #[arg(long, default_value = "zero", value_parser = parse_profile)]
    profile: BaseProfile,
    /// Generated instances force every converter to run at least once.
    #[arg(long)]
    force_run: bool,
    /// Generated instances use positive draws only.
    #[arg(long)]
    positive_e: bool,
    /// Output path; stdout when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

/// A failure with its exit code; the message goes to stderr.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => run_gen(a),
        Command::Solve(a) => run_solve(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Verify(a) => run_verify(a),
        Command::Compare(a) => run_compare(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_instance(path: &Path) -> CliResult<Instance> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INVALID, format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::new(EXIT_INVALID, format!("cannot parse {}: {e}", path.display())))
}

fn write_output(out: &Option<PathBuf>, json: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, format!("{json}\n")).map_err(|e| {
            Failure::new(EXIT_INVALID, format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Failure::new(EXIT_INVALID, format!("cannot serialize output: {e}")))
}

fn map_solve_err(e: SolveError) -> Failure {
    match e {
        SolveError::Invalid(m) => Failure::new(EXIT_INVALID, m),
        SolveError::Infeasible(m) => Failure::new(EXIT_INFEASIBLE, m),
        SolveError::Internal(m) => Failure::new(EXIT_INVALID, format!("internal error: {m}")),
    }
}

fn map_oracle_err(e: OracleError) -> Failure {
    match e {
        OracleError::Infeasible => Failure::new(EXIT_INFEASIBLE, e.to_string()),
        OracleError::CapExceeded { .. } => Failure::new(EXIT_CAP, e.to_string()),
    }
}

fn solve_options(snap_tol: Option<f64>, trace: bool) -> SolveOptions {
    let mut opts = SolveOptions::default();
    if let Some(s) = snap_tol {
        opts.snap_tol = s;
    }
    opts.trace = trace;
    opts
}

// ---------------------------------------------------------------------------
// gen

fn run_gen(a: GenArgs) -> CliResult<u8> {
    if a.converters == 0 || a.horizon == 0 {
        return Err(Failure::new(
            EXIT_INVALID,
            "need at least one converter and one interval",
        ));
    }
    let cfg = GenConfig {
        converters: a.converters,
        horizon: a.horizon,
        seed: a.seed,
        profile: a.profile,
        force_run: a.force_run,
        positive_e: a.positive_e,
    };
    let inst = generate_instance(&cfg);
    write_output(&a.out, &to_json(&inst)?)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// solve

#[derive(Serialize, Deserialize)]
struct ObjectivesJson {
    basic: f64,
    maximal: f64,
    absolute: f64,
    fluctuation: f64,
}

#[derive(Serialize, Deserialize)]
struct SolveOutput {
    objective: ObjectiveKind,
    /// Value of the rounded schedule under `objective`.
    value: f64,
    /// Optimal value of the relaxation; a lower bound on any schedule.
    lp_bound: f64,
    /// `value - lp_bound`; certified to stay at or below `bound_limit`.
    gap: f64,
    /// Largest draw magnitude, doubled for the band-width objective.
    bound_limit: f64,
    /// The schedule evaluated under all four objectives.
    objectives: ObjectivesJson,
    /// Conserving moves the support reduction needed.
    reduction_moves: usize,
    /// Converters with zero draw, scheduled separately from the relaxation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    zero_draw_converters: Vec<String>,
    schedule: Vec<Vec<u8>>,
    /// Relaxed activation levels (for zero-draw rows: their fixed schedule).
    relaxation: Vec<Vec<f64>>,
}

/// Everything a solve produces, with zero-draw converters spliced back in.
struct FullSolve {
    value: f64,
    lp_bound: f64,
    bound_limit: f64,
    reduction_moves: usize,
    schedule: Vec<Vec<u8>>,
    relaxation: Vec<Vec<f64>>,
    zero_draw: Vec<String>,
    zero_rows: Vec<usize>,
}

fn merge_float_rows(split: &ZeroESplit, active: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let total = active.len() + split.removed_indices.len();
    let mut merged = Vec::with_capacity(total);
    let mut active_iter = active.iter();
    let mut removed_iter = split.removed_indices.iter().zip(&split.removed_schedules);
    let mut next_removed = removed_iter.next();
    for c in 0..total {
        match next_removed {
            Some((&idx, row)) if idx == c => {
                merged.push(row.iter().map(|&b| f64::from(b)).collect());
                next_removed = removed_iter.next();
            }
            _ => merged.push(active_iter.next().expect("row count").clone()),
        }
    }
    merged
}

fn solve_full(inst: &Instance, kind: ObjectiveKind, opts: &SolveOptions) -> CliResult<FullSolve> {
    let validation = validate_instance(inst);
    if validation.is_ok() {
        let rep = solve_detailed(inst, kind, opts).map_err(map_solve_err)?;
        return Ok(FullSolve {
            value: rep.schedule.objective_value,
            lp_bound: rep.lp_bound,
            bound_limit: rep.bound_limit,
            reduction_moves: rep.reduction.moves.len(),
            schedule: rep.schedule.x,
            relaxation: rep.y_relaxed,
            zero_draw: Vec::new(),
            zero_rows: Vec::new(),
        });
    }
    if !validation.only_zero_electricity() {
        return Err(Failure::new(EXIT_INVALID, validation.to_string()));
    }

    // Zero-draw converters never move the electric load, so each is
    // scheduled on its own and the relaxation only sees the rest.
    let split = split_zero_e(inst).map_err(|i| {
        Failure::new(
            EXIT_INFEASIBLE,
            format!(
                "infeasible: converter {} cannot satisfy its storage window at interval {}",
                inst.converters[i.converter].id, i.t
            ),
        )
    })?;
    let zero_draw: Vec<String> = split
        .removed_indices
        .iter()
        .map(|&i| inst.converters[i].id.clone())
        .collect();
    let internal =
        |m: String| Failure::new(EXIT_INVALID, format!("internal error: {m}"));

    if split.active.converters.is_empty() {
        // Every load is fixed; the schedule itself is the optimum.
        let schedule = split.merge(&[]);
        let value =
            evaluate_binary(inst, &schedule, kind).map_err(|e| internal(e.to_string()))?;
        let relaxation = merge_float_rows(&split, &[]);
        return Ok(FullSolve {
            value,
            lp_bound: value,
            bound_limit: 0.0,
            reduction_moves: 0,
            schedule,
            relaxation,
            zero_draw,
            zero_rows: split.removed_indices.clone(),
        });
    }

    let rep = solve_detailed(&split.active, kind, opts).map_err(map_solve_err)?;
    let schedule = split.merge(&rep.schedule.x);
    let value = evaluate_binary(inst, &schedule, kind).map_err(|e| internal(e.to_string()))?;
    let relaxation = merge_float_rows(&split, &rep.y_relaxed);
    Ok(FullSolve {
        value,
        lp_bound: rep.lp_bound,
        bound_limit: rep.bound_limit,
        reduction_moves: rep.reduction.moves.len(),
        schedule,
        relaxation,
        zero_draw,
        zero_rows: split.removed_indices.clone(),
    })
}

fn solve_output(inst: &Instance, kind: ObjectiveKind, full: &FullSolve) -> CliResult<SolveOutput> {
    let eval = |k: ObjectiveKind| {
        evaluate_binary(inst, &full.schedule, k)
            .map_err(|e| Failure::new(EXIT_INVALID, format!("internal error: {e}")))
    };
    Ok(SolveOutput {
        objective: kind,
        value: full.value,
        lp_bound: full.lp_bound,
        gap: full.value - full.lp_bound,
        bound_limit: full.bound_limit,
        objectives: ObjectivesJson {
            basic: eval(ObjectiveKind::Basic)?,
            maximal: eval(ObjectiveKind::Maximal)?,
            absolute: eval(ObjectiveKind::Absolute)?,
            fluctuation: eval(ObjectiveKind::Fluctuation)?,
        },
        reduction_moves: full.reduction_moves,
        zero_draw_converters: full.zero_draw.clone(),
        schedule: full.schedule.clone(),
        relaxation: full.relaxation.clone(),
    })
}

fn run_solve(a: SolveArgs) -> CliResult<u8> {
    let inst = read_instance(&a.input)?;
    let opts = solve_options(a.snap_tol, a.trace);
    let full = solve_full(&inst, a.objective, &opts)?;
    let output = solve_output(&inst, a.objective, &full)?;
    write_output(&a.out, &to_json(&output)?)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// oracle

#[derive(Serialize)]
struct OracleOutput {
    objective: ObjectiveKind,
    value: f64,
    /// Feasible schedules examined by the enumeration.
    examined: u64,
    schedule: Vec<Vec<u8>>,
}

fn run_oracle(a: OracleArgs) -> CliResult<u8> {
    let inst = read_instance(&a.input)?;
    let validation = validate_instance(&inst);
    if !validation.is_ok() && !validation.only_zero_electricity() {
        return Err(Failure::new(EXIT_INVALID, validation.to_string()));
    }
    let result = exact_solve_with_cap(&inst, a.objective, a.oracle_cap).map_err(map_oracle_err)?;
    let output = OracleOutput {
        objective: a.objective,
        value: result.value,
        examined: result.examined,
        schedule: result.schedule,
    };
    write_output(&a.out, &to_json(&output)?)?;
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// verify

/// Accepts either a full solve report or a bare 0/1 matrix.
#[derive(Deserialize)]
#[serde(untagged)]
enum ScheduleFile {
    Report { schedule: Vec<Vec<u8>> },
    Bare(Vec<Vec<u8>>),
}

#[derive(Serialize)]
struct ViolationJson {
    converter: String,
    interval: usize,
}

#[derive(Serialize)]
struct VerifyOutput {
    objective: ObjectiveKind,
    /// The schedule keeps every buffer inside its storage window.
    feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_violation: Option<ViolationJson>,
    value: f64,
    lp_bound: f64,
    gap: f64,
    bound_limit: f64,
    /// `gap` within [0, bound_limit] up to tolerance.
    certificate_ok: bool,
    /// Run-count prefixes within one unit of the relaxation's.
    prefix_band_ok: bool,
    /// No interval's load moved by more than the largest draw.
    load_shift_ok: bool,
    verified: bool,
}

fn read_schedule(path: &Path) -> CliResult<Vec<Vec<u8>>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INVALID, format!("cannot read {}: {e}", path.display())))?;
    let parsed: ScheduleFile = serde_json::from_str(&text)
        .map_err(|e| Failure::new(EXIT_INVALID, format!("cannot parse {}: {e}", path.display())))?;
    let x = match parsed {
        ScheduleFile::Report { schedule } => schedule,
        ScheduleFile::Bare(schedule) => schedule,
    };
    for row in &x {
        if row.iter().any(|&b| b > 1) {
            return Err(Failure::new(
                EXIT_INVALID,
                format!("{}: schedule entries must be 0 or 1", path.display()),
            ));
        }
    }
    Ok(x)
}

fn first_violation(inst: &Instance, x: &[Vec<u8>]) -> Option<ViolationJson> {
    let traj = simulate_states(inst, x).ok()?;
    for (c, conv) in inst.converters.iter().enumerate() {
        for t in 0..inst.horizon {
            let s = &traj.states[c][t + 1];
            if *s < conv.soc_lower[t + 1] || *s > conv.soc_upper[t + 1] {
                return Some(ViolationJson {
                    converter: conv.id.clone(),
                    interval: t,
                });
            }
        }
    }
    None
}

fn run_verify(a: VerifyArgs) -> CliResult<u8> {
    let inst = read_instance(&a.input)?;
    let x = read_schedule(&a.schedule)?;
    if x.len() != inst.converter_count() || x.iter().any(|r| r.len() != inst.horizon) {
        return Err(Failure::new(
            EXIT_INVALID,
            format!(
                "schedule shape {}x{} does not match the instance ({} converters, {} intervals)",
                x.len(),
                x.first().map_or(0, Vec::len),
                inst.converter_count(),
                inst.horizon
            ),
        ));
    }

    let feasible = check_feasible(&inst, &x);
    let violation = if feasible { None } else { first_violation(&inst, &x) };

    let opts = solve_options(a.snap_tol, false);
    let full = solve_full(&inst, a.objective, &opts)?;
    let value = evaluate_binary(&inst, &x, a.objective)
        .map_err(|e| Failure::new(EXIT_INVALID, format!("internal error: {e}")))?;
    let gap = value - full.lp_bound;
    let certificate_ok = gap >= -TOL && gap <= full.bound_limit + TOL;

    // Run-count prefixes must stay within one unit of the relaxation's
    // prefixes; zero-draw rows are scheduled outside the relaxation and are
    // only constrained by feasibility.
    let snap = opts.snap_tol;
    let mut prefix_band_ok = true;
    'rows: for (c, row) in x.iter().enumerate() {
        if full.zero_rows.contains(&c) {
            continue;
        }
        let mut py = 0.0f64;
        let mut px = 0i64;
        for (t, &bit) in row.iter().enumerate() {
            py += full.relaxation[c][t];
            let r = py.round();
            if (py - r).abs() <= snap {
                py = r + 0.0;
            }
            px += i64::from(bit);
            if (px as f64) < py.floor() || (px as f64) > py.ceil() {
                prefix_band_ok = false;
                break 'rows;
            }
        }
    }
    let e = inst.electricity_f64();
    let mut load_shift_ok = true;
    for t in 0..inst.horizon {
        let dev: f64 = (0..inst.converter_count())
            .map(|c| e[c] * (f64::from(x[c][t]) - full.relaxation[c][t]))
            .sum();
        if dev.abs() > inst.max_abs_electricity() + TOL {
            load_shift_ok = false;
            break;
        }
    }

    let verified = feasible && certificate_ok && prefix_band_ok && load_shift_ok;
    let output = VerifyOutput {
        objective: a.objective,
        feasible,
        first_violation: violation,
        value,
        lp_bound: full.lp_bound,
        gap,
        bound_limit: full.bound_limit,
        certificate_ok,
        prefix_band_ok,
        load_shift_ok,
        verified,
    };
    write_output(&a.out, &to_json(&output)?)?;
    Ok(if verified { EXIT_OK } else { EXIT_INVALID })
}

// ---------------------------------------------------------------------------
// compare

#[derive(Serialize)]
struct CompareCase {
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    converters: usize,
    horizon: usize,
    approx_value: f64,
    exact_value: f64,
    lp_bound: f64,
    /// `approx_value - exact_value`.
    gap: f64,
    bound_limit: f64,
    bound_respected: bool,
    examined: u64,
}

#[derive(Serialize)]
struct CompareOutput {
    objective: ObjectiveKind,
    cases: Vec<CompareCase>,
    worst_gap: f64,
    all_respected: bool,
}

fn run_compare(a: CompareArgs) -> CliResult<u8> {
    let opts = solve_options(a.snap_tol, false);
    let mut inputs: Vec<(Option<u64>, Instance)> = Vec::new();
    match (&a.input, a.batch) {
        (Some(_), Some(_)) => {
            return Err(Failure::new(
                EXIT_INVALID,
                "give either an instance path or --batch, not both",
            ));
        }
        (Some(path), None) => inputs.push((None, read_instance(path)?)),
        (None, Some(0)) => {
            return Err(Failure::new(EXIT_INVALID, "--batch must be at least 1"));
        }
        (None, Some(n)) => {
            if a.converters == 0 || a.horizon == 0 {
                return Err(Failure::new(
                    EXIT_INVALID,
                    "need at least one converter and one interval",
                ));
            }
            for k in 0..n as u64 {
                let cfg = GenConfig {
                    converters: a.converters,
                    horizon: a.horizon,
                    seed: a.seed + k,
                    profile: a.profile,
                    force_run: a.force_run,
                    positive_e: a.positive_e,
                };
                inputs.push((Some(cfg.seed), generate_instance(&cfg)));
            }
        }
        (None, None) => {
            return Err(Failure::new(
                EXIT_INVALID,
                "give an instance path or --batch N",
            ));
        }
    }

    let mut cases = Vec::with_capacity(inputs.len());
    let mut all_respected = true;
    let mut worst_gap = f64::NEG_INFINITY;
    for (seed, inst) in &inputs {
        let full = solve_full(inst, a.objective, &opts)?;
        let exact =
            exact_solve_with_cap(inst, a.objective, a.oracle_cap).map_err(map_oracle_err)?;
        let gap = full.value - exact.value;
        let respected = gap >= -TOL && gap <= full.bound_limit + TOL;
        all_respected &= respected;
        worst_gap = worst_gap.max(gap);
        cases.push(CompareCase {
            seed: *seed,
            converters: inst.converter_count(),
            horizon: inst.horizon,
            approx_value: full.value,
            exact_value: exact.value,
            lp_bound: full.lp_bound,
            gap,
            bound_limit: full.bound_limit,
            bound_respected: respected,
            examined: exact.examined,
        });
    }
    let output = CompareOutput {
        objective: a.objective,
        cases,
        worst_gap,
        all_respected,
    };
    write_output(&a.out, &to_json(&output)?)?;
    Ok(if all_respected { EXIT_OK } else { EXIT_INVALID })
}
