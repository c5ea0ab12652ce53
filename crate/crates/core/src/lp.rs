//! Linear-programming layer: builds the continuous relaxation of the
//! scheduling problem, solves it with the bundled simplex, and packages the
//! result (with integrality bookkeeping) for the rounding pipeline.
//!
//! Two equivalent formulations exist. [`build_relaxation`] produces the
//! documented model over interval variables `x_{c,t} ∈ [0,1]` with explicit
//! prefix-sum rows — easy to inspect and dump. [`solve_relaxation`] uses an
//! internal change of variables `u_{c,t} = Σ_{i≤t} x_{c,i}` whose constraint
//! matrix is mostly unit bidiagonal, plus a starting basis derived from a
//! greedy feasible schedule, which keeps fleet-sized instances fast. Both
//! yield the same optimum; tests pin that equivalence.

use crate::instance::{chain_schedule, Instance, ObjectiveKind, PrefixBounds};
use crate::numeric::near_integer;
use crate::simplex::{self, CrashBasis, SolveStatus, StandardForm};

/// Default width of the band around an integer inside which a solution
/// component is treated as integral and snapped exactly.
pub const DEFAULT_SNAP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// One linear constraint `Σ coeffs·x  (≤ | ≥ | =)  rhs`.
#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A minimization LP over named, box-bounded variables.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub names: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("the relaxation has no feasible point")]
    Infeasible,
    #[error("internal solver failure: {0}")]
    Internal(String),
}

/// Builds the relaxation over interval variables. Variables are `x_{c,t}`
/// (index `c·T + t`, bounds `[0,1]`) followed by the peak variable(s):
/// a single `m` for [`ObjectiveKind::Basic`], [`ObjectiveKind::Maximal`]
/// and [`ObjectiveKind::Absolute`], or `m_lo` then `m_hi` for
/// [`ObjectiveKind::Fluctuation`]. Rows are the per-interval peak
/// constraints (in time order) followed by two prefix-sum rows per
/// converter and interval enforcing the cumulative run-count window.
pub fn build_relaxation(
    inst: &Instance,
    bounds: &PrefixBounds,
    kind: ObjectiveKind,
) -> LinearProgram {
    let c_count = inst.converter_count();
    let horizon = inst.horizon;
    let nx = c_count * horizon;
    let e: Vec<f64> = inst.electricity_f64();
    let base: Vec<f64> = inst.base_load_f64();

    let (extra, objective_tail): (usize, Vec<f64>) = match kind {
        ObjectiveKind::Fluctuation => (2, vec![-1.0, 1.0]),
        _ => (1, vec![1.0]),
    };
    let num_vars = nx + extra;

    let mut names = Vec::with_capacity(num_vars);
    for c in 0..c_count {
        for t in 0..horizon {
            names.push(format!("x_c{c}_t{t}"));
        }
    }
    match kind {
        ObjectiveKind::Fluctuation => {
            names.push("m_lo".to_string());
            names.push("m_hi".to_string());
        }
        _ => names.push("m".to_string()),
    }

    let mut lower = vec![0.0; nx];
    let mut upper = vec![1.0; nx];
    lower.extend(std::iter::repeat(f64::NEG_INFINITY).take(extra));
    upper.extend(std::iter::repeat(f64::INFINITY).take(extra));

    let mut objective = vec![0.0; nx];
    objective.extend(objective_tail);

    let mut rows = Vec::new();
    for t in 0..horizon {
        let load: Vec<(usize, f64)> = (0..c_count).map(|c| (c * horizon + t, e[c])).collect();
        match kind {
            ObjectiveKind::Basic => {
                let mut coeffs = load.clone();
                coeffs.push((nx, -1.0));
                rows.push(LpRow {
                    coeffs,
                    relation: Relation::Le,
                    rhs: 0.0,
                });
            }
            ObjectiveKind::Maximal => {
                let mut coeffs = load.clone();
                coeffs.push((nx, -1.0));
                rows.push(LpRow {
                    coeffs,
                    relation: Relation::Le,
                    rhs: -base[t],
                });
            }
            ObjectiveKind::Absolute => {
                let mut coeffs = load.clone();
                coeffs.push((nx, -1.0));
                rows.push(LpRow {
                    coeffs,
                    relation: Relation::Le,
                    rhs: -base[t],
                });
                let mut coeffs: Vec<(usize, f64)> =
                    load.iter().map(|&(j, v)| (j, -v)).collect();
                coeffs.push((nx, -1.0));
                rows.push(LpRow {
                    coeffs,
                    relation: Relation::Le,
                    rhs: base[t],
                });
            }
            ObjectiveKind::Fluctuation => {
                let mut coeffs = load.clone();
                coeffs.push((nx + 1, -1.0));
                rows.push(LpRow {
                    coeffs,
                    relation: Relation::Le,
                    rhs: -base[t],
                });
                let mut coeffs = load.clone();
                coeffs.push((nx, -1.0));
                rows.push(LpRow {
                    coeffs,
                    relation: Relation::Ge,
                    rhs: -base[t],
                });
            }
        }
    }
    for c in 0..c_count {
        for t in 0..horizon {
            let coeffs: Vec<(usize, f64)> = (0..=t).map(|i| (c * horizon + i, 1.0)).collect();
            rows.push(LpRow {
                coeffs: coeffs.clone(),
                relation: Relation::Ge,
                rhs: bounds.lower[c][t] as f64,
            });
            rows.push(LpRow {
                coeffs,
                relation: Relation::Le,
                rhs: bounds.upper[c][t] as f64,
            });
        }
    }

    LinearProgram {
        num_vars,
        lower,
        upper,
        objective,
        rows,
        names,
    }
}

/// Solves an arbitrary [`LinearProgram`] from a cold start.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let m = lp.rows.len();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_vars];
    let mut row_lower = Vec::with_capacity(m);
    let mut row_upper = Vec::with_capacity(m);
    for (i, row) in lp.rows.iter().enumerate() {
        for &(j, v) in &row.coeffs {
            cols[j].push((i, v));
        }
        match row.relation {
            Relation::Le => {
                row_lower.push(f64::NEG_INFINITY);
                row_upper.push(row.rhs);
            }
            Relation::Ge => {
                row_lower.push(row.rhs);
                row_upper.push(f64::INFINITY);
            }
            Relation::Eq => {
                row_lower.push(row.rhs);
                row_upper.push(row.rhs);
            }
        }
    }
    let form = StandardForm {
        num_vars: lp.num_vars,
        col_lower: lp.lower.clone(),
        col_upper: lp.upper.clone(),
        cost: lp.objective.clone(),
        cols,
        row_lower,
        row_upper,
    };
    let out = simplex::solve(&form, None).map_err(|e| LpError::Internal(e.to_string()))?;
    match out.status {
        SolveStatus::Infeasible => Err(LpError::Infeasible),
        SolveStatus::Optimal => Ok(LpSolution {
            values: out.values[..lp.num_vars].to_vec(),
            objective: out.objective,
            iterations: out.iterations,
        }),
    }
}

fn fmt_num(v: f64) -> String {
    let mut s = format!("{v:.9}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

fn fmt_terms(coeffs: &[(usize, f64)], names: &[String]) -> String {
    let mut out = String::new();
    for &(j, v) in coeffs {
        if v == 0.0 {
            continue;
        }
        if out.is_empty() {
            if v == 1.0 {
                out.push_str(&names[j]);
            } else if v == -1.0 {
                out.push_str(&format!("- {}", names[j]));
            } else {
                out.push_str(&format!("{} {}", fmt_num(v), names[j]));
            }
        } else if v == 1.0 {
            out.push_str(&format!(" + {}", names[j]));
        } else if v == -1.0 {
            out.push_str(&format!(" - {}", names[j]));
        } else if v < 0.0 {
            out.push_str(&format!(" - {} {}", fmt_num(-v), names[j]));
        } else {
            out.push_str(&format!(" + {} {}", fmt_num(v), names[j]));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Renders the LP as plain text, one constraint per line.
pub fn dump_lp(lp: &LinearProgram) -> String {
    let mut out = String::new();
    let obj: Vec<(usize, f64)> = lp
        .objective
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v != 0.0)
        .map(|(j, &v)| (j, v))
        .collect();
    out.push_str(&format!("minimize {}\n", fmt_terms(&obj, &lp.names)));
    out.push_str("subject to\n");
    for row in &lp.rows {
        let rel = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        out.push_str(&format!(
            "  {} {} {}\n",
            fmt_terms(&row.coeffs, &lp.names),
            rel,
            fmt_num(row.rhs)
        ));
    }
    out.push_str("bounds\n");
    for j in 0..lp.num_vars {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        let line = if lo.is_infinite() && hi.is_infinite() {
            format!("  {} free\n", lp.names[j])
        } else if lo == hi {
            format!("  {} = {}\n", lp.names[j], fmt_num(lo))
        } else if lo.is_infinite() {
            format!("  {} <= {}\n", lp.names[j], fmt_num(hi))
        } else if hi.is_infinite() {
            format!("  {} >= {}\n", lp.names[j], fmt_num(lo))
        } else {
            format!("  {} <= {} <= {}\n", fmt_num(lo), lp.names[j], fmt_num(hi))
        };
        out.push_str(&line);
    }
    out
}

/// A solved relaxation with near-integer components snapped exactly and
/// flagged. Invariant: wherever `y_integral` (resp. `prefix_integral`) is
/// true, the stored value is exactly an integer; `prefix` is always the
/// snapped running sum of the snapped `y`.
#[derive(Debug, Clone)]
pub struct RelaxedSolution {
    pub kind: ObjectiveKind,
    /// Per-interval activation levels, `y[c][t] ∈ [0,1]`.
    pub y: Vec<Vec<f64>>,
    /// Running sums `prefix[c][t] = Σ_{i≤t} y[c][i]`, snapped.
    pub prefix: Vec<Vec<f64>>,
    pub y_integral: Vec<Vec<bool>>,
    pub prefix_integral: Vec<Vec<bool>>,
    pub objective: f64,
    pub snap_tol: f64,
}

impl RelaxedSolution {
    /// Wraps a raw activation matrix: snaps near-integer entries, then
    /// derives and snaps the prefix sums.
    pub fn from_y(
        kind: ObjectiveKind,
        mut y: Vec<Vec<f64>>,
        objective: f64,
        snap_tol: f64,
    ) -> RelaxedSolution {
        let mut y_integral = Vec::with_capacity(y.len());
        for row in &mut y {
            let mut flags = Vec::with_capacity(row.len());
            for v in row.iter_mut() {
                if near_integer(*v, snap_tol) {
                    *v = v.round() + 0.0; // normalizes -0.0 to 0.0
                    flags.push(true);
                } else {
                    flags.push(false);
                }
            }
            y_integral.push(flags);
        }
        let converters = y.len();
        let horizon = y.first().map_or(0, Vec::len);
        let mut sol = RelaxedSolution {
            kind,
            y,
            prefix: vec![vec![0.0; horizon]; converters],
            y_integral,
            prefix_integral: vec![vec![false; horizon]; converters],
            objective,
            snap_tol,
        };
        for c in 0..converters {
            sol.recompute_prefix(c);
        }
        sol
    }

    pub fn converter_count(&self) -> usize {
        self.y.len()
    }

    pub fn horizon(&self) -> usize {
        self.y.first().map_or(0, Vec::len)
    }

    /// Rebuilds `prefix[c]` from the current `y[c]`, snapping as it goes so
    /// the stored prefixes stay exactly integral wherever flagged.
    pub(crate) fn recompute_prefix(&mut self, c: usize) {
        let mut acc = 0.0f64;
        for t in 0..self.y[c].len() {
            acc += self.y[c][t];
            if near_integer(acc, self.snap_tol) {
                acc = acc.round() + 0.0;
                self.prefix_integral[c][t] = true;
            } else {
                self.prefix_integral[c][t] = false;
            }
            self.prefix[c][t] = acc;
        }
    }
}

/// Reads the activation matrix out of a solved interval-variable LP.
pub fn extract_relaxed(
    sol: &LpSolution,
    inst: &Instance,
    kind: ObjectiveKind,
    snap_tol: f64,
) -> RelaxedSolution {
    let c_count = inst.converter_count();
    let horizon = inst.horizon;
    let y: Vec<Vec<f64>> = (0..c_count)
        .map(|c| sol.values[c * horizon..(c + 1) * horizon].to_vec())
        .collect();
    RelaxedSolution::from_y(kind, y, sol.objective, snap_tol)
}

/// Solves the relaxation through the internal prefix-variable formulation:
/// variables `u_{c,t}` with bounds given by the run-count window, rows
/// `u_{c,t} − u_{c,t−1} ∈ [0,1]` whose slacks are the activations, and the
/// per-interval peak rows. A greedy feasible schedule seeds the starting
/// basis, so the solver skips phase 1 entirely. Equivalent to solving
/// [`build_relaxation`]'s program, but much faster on fleet-sized input.
pub fn solve_relaxation(
    inst: &Instance,
    bounds: &PrefixBounds,
    kind: ObjectiveKind,
    snap_tol: f64,
) -> Result<RelaxedSolution, LpError> {
    let c_count = inst.converter_count();
    let horizon = inst.horizon;
    let nu = c_count * horizon;
    let e: Vec<f64> = inst.electricity_f64();
    let base: Vec<f64> = inst.base_load_f64();

    // Greedy probe doubles as the crash-basis seed.
    let seed = chain_schedule(bounds).map_err(|_| LpError::Infeasible)?;

    let extra = if kind == ObjectiveKind::Fluctuation { 2 } else { 1 };
    let num_vars = nu + extra;
    let mut col_lower = Vec::with_capacity(num_vars);
    let mut col_upper = Vec::with_capacity(num_vars);
    for c in 0..c_count {
        for t in 0..horizon {
            col_lower.push(bounds.lower[c][t] as f64);
            col_upper.push(bounds.upper[c][t] as f64);
        }
    }
    col_lower.extend(std::iter::repeat(f64::NEG_INFINITY).take(extra));
    col_upper.extend(std::iter::repeat(f64::INFINITY).take(extra));

    let mut cost = vec![0.0; nu];
    if kind == ObjectiveKind::Fluctuation {
        cost.push(-1.0); // m_lo
        cost.push(1.0); // m_hi
    } else {
        cost.push(1.0); // m
    }

    let peak_rows_per_t = match kind {
        ObjectiveKind::Absolute | ObjectiveKind::Fluctuation => 2,
        _ => 1,
    };
    let num_rows = nu + peak_rows_per_t * horizon;
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); num_vars];
    let mut row_lower = vec![0.0; num_rows];
    let mut row_upper = vec![0.0; num_rows];

    // Difference rows, one per (c, t): u_{c,t} − u_{c,t−1} ∈ [0,1].
    for c in 0..c_count {
        for t in 0..horizon {
            let r = c * horizon + t;
            cols[c * horizon + t].push((r, 1.0));
            if t > 0 {
                cols[c * horizon + t - 1].push((r, -1.0));
            }
            row_lower[r] = 0.0;
            row_upper[r] = 1.0;
        }
    }

    // Peak rows: the per-interval load is Σ_c e_c·(u_{c,t} − u_{c,t−1}).
    let push_load = |cols: &mut Vec<Vec<(usize, f64)>>, r: usize, t: usize, sign: f64| {
        for c in 0..c_count {
            cols[c * horizon + t].push((r, sign * e[c]));
            if t > 0 {
                cols[c * horizon + t - 1].push((r, -sign * e[c]));
            }
        }
    };
    for t in 0..horizon {
        let r0 = nu + peak_rows_per_t * t;
        match kind {
            ObjectiveKind::Basic => {
                push_load(&mut cols, r0, t, 1.0);
                cols[nu].push((r0, -1.0));
                row_lower[r0] = f64::NEG_INFINITY;
                row_upper[r0] = 0.0;
            }
            ObjectiveKind::Maximal => {
                push_load(&mut cols, r0, t, 1.0);
                cols[nu].push((r0, -1.0));
                row_lower[r0] = f64::NEG_INFINITY;
                row_upper[r0] = -base[t];
            }
            ObjectiveKind::Absolute => {
                push_load(&mut cols, r0, t, 1.0);
                cols[nu].push((r0, -1.0));
                row_lower[r0] = f64::NEG_INFINITY;
                row_upper[r0] = -base[t];
                push_load(&mut cols, r0 + 1, t, -1.0);
                cols[nu].push((r0 + 1, -1.0));
                row_lower[r0 + 1] = f64::NEG_INFINITY;
                row_upper[r0 + 1] = base[t];
            }
            ObjectiveKind::Fluctuation => {
                // Upper envelope row (m_hi), then lower envelope row (m_lo).
                push_load(&mut cols, r0, t, 1.0);
                cols[nu + 1].push((r0, -1.0));
                row_lower[r0] = f64::NEG_INFINITY;
                row_upper[r0] = -base[t];
                push_load(&mut cols, r0 + 1, t, 1.0);
                cols[nu].push((r0 + 1, -1.0));
                row_lower[r0 + 1] = -base[t];
                row_upper[r0 + 1] = f64::INFINITY;
            }
        }
    }

    let form = StandardForm {
        num_vars,
        col_lower,
        col_upper,
        cost,
        cols,
        row_lower,
        row_upper,
    };

    let crash = build_crash_basis(&form, inst, kind, &seed, peak_rows_per_t);
    let out =
        simplex::solve(&form, Some(&crash)).map_err(|e| LpError::Internal(e.to_string()))?;
    if out.status != SolveStatus::Optimal {
        // The greedy schedule certifies feasibility, so this is a solver bug.
        return Err(LpError::Internal(
            "relaxation reported infeasible despite a feasible schedule".to_string(),
        ));
    }

    // Activations are exactly the difference-row slacks.
    let y: Vec<Vec<f64>> = (0..c_count)
        .map(|c| {
            (0..horizon)
                .map(|t| out.values[num_vars + c * horizon + t])
                .collect()
        })
        .collect();
    Ok(RelaxedSolution::from_y(kind, y, out.objective, snap_tol))
}

/// Starting basis from a feasible binary schedule: every `u` is basic in
/// its own difference row (a unit bidiagonal block), difference slacks sit
/// at the schedule's bit, and the peak variable(s) are made basic in the
/// row(s) that bind at that schedule.
fn build_crash_basis(
    form: &StandardForm,
    inst: &Instance,
    kind: ObjectiveKind,
    seed: &[Vec<u8>],
    peak_rows_per_t: usize,
) -> CrashBasis {
    let c_count = inst.converter_count();
    let horizon = inst.horizon;
    let nu = c_count * horizon;
    let n = form.num_vars;
    let m = form.num_rows();
    let e: Vec<f64> = inst.electricity_f64();
    let base: Vec<f64> = inst.base_load_f64();

    let mut basic = Vec::with_capacity(m);
    let mut at_upper = vec![false; n + m];

    for c in 0..c_count {
        for t in 0..horizon {
            let r = c * horizon + t;
            basic.push(c * horizon + t); // u_{c,t} basic in its own row
            at_upper[n + r] = seed[c][t] == 1;
        }
    }
    // Remaining peak rows default to their own slack.
    for r in nu..m {
        basic.push(n + r);
    }

    let loads: Vec<f64> = (0..horizon)
        .map(|t| {
            let fleet: f64 = (0..c_count)
                .map(|c| if seed[c][t] == 1 { e[c] } else { 0.0 })
                .sum();
            if kind == ObjectiveKind::Basic {
                fleet
            } else {
                fleet + base[t]
            }
        })
        .collect();
    let argmax = |key: &dyn Fn(usize) -> f64| -> usize {
        let mut best = 0usize;
        for t in 1..horizon {
            if key(t) > key(best) {
                best = t;
            }
        }
        best
    };

    match kind {
        ObjectiveKind::Basic | ObjectiveKind::Maximal => {
            let t = argmax(&|t| loads[t]);
            let row = nu + t;
            basic[row] = nu; // m
            at_upper[n + row] = true; // displaced slack binds the row
        }
        ObjectiveKind::Absolute => {
            let t = argmax(&|t| loads[t].abs());
            let row = if loads[t] >= 0.0 {
                nu + peak_rows_per_t * t
            } else {
                nu + peak_rows_per_t * t + 1
            };
            basic[row] = nu; // m
            at_upper[n + row] = true;
        }
        ObjectiveKind::Fluctuation => {
            let t_hi = argmax(&|t| loads[t]);
            let row_hi = nu + peak_rows_per_t * t_hi;
            basic[row_hi] = nu + 1; // m_hi
            at_upper[n + row_hi] = true;
            let t_lo = argmax(&|t| -loads[t]);
            let row_lo = nu + peak_rows_per_t * t_lo + 1;
            basic[row_lo] = nu; // m_lo
            // The displaced lower-envelope slack rests at its lower bound,
            // which is the default state.
        }
    }

    CrashBasis { basic, at_upper }
}
