//! Fleet model: converters with thermal buffers, demands and base load.
//!
//! Alongside the data types this module owns the exact reformulation of
//! buffer feasibility into integral prefix bounds: a binary schedule keeps
//! every buffer within its state-of-charge band iff each converter's running
//! count after the first t intervals stays within [A[c][t], B[c][t]]. All
//! reformulation arithmetic is rational, because those integer bounds are
//! what the rest of the pipeline trusts.
//!
//! Indexing is 0-based throughout: interval t ∈ 0..T, SoC index k ∈ 0..=T
//! with k = 0 the (fixed) initial state.

use crate::numeric::Real;
use num::bigint::BigInt;
use num::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Which peak measure the solver minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    /// Highest per-interval converter load, ignoring base load.
    Basic,
    /// Highest per-interval total load including base load.
    Maximal,
    /// Highest per-interval |total load|.
    Absolute,
    /// Difference between the highest and lowest per-interval total load.
    Fluctuation,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 4] = [
        ObjectiveKind::Basic,
        ObjectiveKind::Maximal,
        ObjectiveKind::Absolute,
        ObjectiveKind::Fluctuation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::Basic => "basic",
            ObjectiveKind::Maximal => "maximal",
            ObjectiveKind::Absolute => "absolute",
            ObjectiveKind::Fluctuation => "fluctuation",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "basic" => Ok(ObjectiveKind::Basic),
            "maximal" => Ok(ObjectiveKind::Maximal),
            "absolute" => Ok(ObjectiveKind::Absolute),
            "fluctuation" => Ok(ObjectiveKind::Fluctuation),
            other => Err(format!(
                "unknown objective {other:?} (expected basic, maximal, absolute or fluctuation)"
            )),
        }
    }
}

/// One on/off heat converter with its buffer description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Converter {
    pub id: String,
    /// Electricity consumed per running interval; negative means production.
    #[serde(rename = "E")]
    pub electricity: Real,
    /// Heat produced per running interval; must be positive.
    #[serde(rename = "H")]
    pub heat: Real,
    /// Heat demand per interval, length T.
    pub demand: Vec<Real>,
    /// State-of-charge lower bounds, length T+1 (index 0 = initial state).
    pub soc_lower: Vec<Real>,
    /// State-of-charge upper bounds, length T+1.
    pub soc_upper: Vec<Real>,
}

/// A scheduling problem over a fleet of converters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(rename = "T")]
    pub horizon: usize,
    /// Uncontrolled electricity consumption per interval, length T.
    pub base_load: Vec<Real>,
    pub converters: Vec<Converter>,
}

impl Instance {
    pub fn converter_count(&self) -> usize {
        self.converters.len()
    }

    /// Per-converter electricity rates as f64, in converter order.
    pub fn electricity_f64(&self) -> Vec<f64> {
        self.converters
            .iter()
            .map(|c| c.electricity.to_f64())
            .collect()
    }

    /// Base load as f64, in interval order.
    pub fn base_load_f64(&self) -> Vec<f64> {
        self.base_load.iter().map(Real::to_f64).collect()
    }

    /// max_c |E_c|: the certified absolute error scale.
    pub fn max_abs_electricity(&self) -> f64 {
        self.converters
            .iter()
            .map(|c| c.electricity.abs().to_f64())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    Shape,
    NonPositiveHeat,
    ZeroElectricity,
    NegativeDemand,
    BoundOrder,
    InitialSoc,
}

#[derive(Debug, Clone)]
pub struct ValidationIssue {
    pub kind: IssueKind,
    pub location: String,
    pub message: String,
}

/// Outcome of [`validate_instance`]; empty means every invariant holds.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    /// True when the only failures are zero-E converters, which callers may
    /// split off with [`split_zero_e`] and still solve the rest.
    pub fn only_zero_electricity(&self) -> bool {
        !self.issues.is_empty()
            && self
                .issues
                .iter()
                .all(|i| i.kind == IssueKind::ZeroElectricity)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return f.write_str("instance valid");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}", issue.location, issue.message)?;
        }
        Ok(())
    }
}

/// Checks every `Instance`/`Converter` invariant and reports all violations.
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    let mut issues = Vec::new();
    let mut push = |kind, location: String, message: String| {
        issues.push(ValidationIssue {
            kind,
            location,
            message,
        })
    };

    let t_len = inst.horizon;
    if t_len == 0 {
        push(
            IssueKind::Shape,
            "instance".into(),
            "horizon must be at least 1".into(),
        );
    }
    if inst.converters.is_empty() {
        push(
            IssueKind::Shape,
            "instance".into(),
            "at least one converter is required".into(),
        );
    }
    if inst.base_load.len() != t_len {
        push(
            IssueKind::Shape,
            "base_load".into(),
            format!("expected {} entries, found {}", t_len, inst.base_load.len()),
        );
    }

    for (c, conv) in inst.converters.iter().enumerate() {
        let here = format!("converter {c} ({:?})", conv.id);
        let mut shape_ok = true;
        if conv.demand.len() != t_len {
            shape_ok = false;
            push(
                IssueKind::Shape,
                format!("{here} demand"),
                format!("expected {} entries, found {}", t_len, conv.demand.len()),
            );
        }
        for (name, seq) in [("soc_lower", &conv.soc_lower), ("soc_upper", &conv.soc_upper)] {
            if seq.len() != t_len + 1 {
                shape_ok = false;
                push(
                    IssueKind::Shape,
                    format!("{here} {name}"),
                    format!("expected {} entries, found {}", t_len + 1, seq.len()),
                );
            }
        }
        if !conv.heat.is_positive() {
            push(
                IssueKind::NonPositiveHeat,
                format!("{here} H"),
                "heat per interval must be positive".into(),
            );
        }
        if conv.electricity.is_zero() {
            push(
                IssueKind::ZeroElectricity,
                format!("{here} E"),
                "electricity rate is zero; split this converter off and schedule it \
                 independently — it cannot affect the objective"
                    .into(),
            );
        }
        if !shape_ok {
            continue;
        }
        for (t, d) in conv.demand.iter().enumerate() {
            if d.is_negative() {
                push(
                    IssueKind::NegativeDemand,
                    format!("{here} demand[{t}]"),
                    "demand must be nonnegative".into(),
                );
            }
        }
        for k in 0..=t_len {
            if conv.soc_lower[k] > conv.soc_upper[k] {
                push(
                    IssueKind::BoundOrder,
                    format!("{here} soc[{k}]"),
                    format!(
                        "lower bound {} exceeds upper bound {}",
                        conv.soc_lower[k], conv.soc_upper[k]
                    ),
                );
            }
        }
        if conv.soc_lower[0] != conv.soc_upper[0] {
            push(
                IssueKind::InitialSoc,
                format!("{here} soc[0]"),
                "initial SoC not fixed (soc_lower[0] must equal soc_upper[0])".into(),
            );
        }
    }

    ValidationReport { issues }
}

#[derive(Debug, thiserror::Error)]
#[error("shape mismatch: {0}")]
pub struct ShapeError(pub String);

/// Buffer states over time for every converter, C×(T+1) exact values.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    pub states: Vec<Vec<Real>>,
}

fn check_shape(inst: &Instance, rows: usize, cols: impl Fn(usize) -> usize) -> Result<(), ShapeError> {
    if rows != inst.converters.len() {
        return Err(ShapeError(format!(
            "expected {} schedule rows, found {rows}",
            inst.converters.len()
        )));
    }
    for c in 0..rows {
        if cols(c) != inst.horizon {
            return Err(ShapeError(format!(
                "schedule row {c} has {} entries, expected {}",
                cols(c),
                inst.horizon
            )));
        }
    }
    Ok(())
}

/// Runs the buffer recurrence s[t+1] = s[t] + H·x[t] − D[t] exactly.
pub fn simulate_states(inst: &Instance, x: &[Vec<u8>]) -> Result<StateTrajectory, ShapeError> {
    check_shape(inst, x.len(), |c| x[c].len())?;
    let states = inst
        .converters
        .iter()
        .zip(x)
        .map(|(conv, row)| {
            let mut s = Vec::with_capacity(inst.horizon + 1);
            s.push(conv.soc_lower[0].clone());
            for t in 0..inst.horizon {
                let mut next = s[t].clone();
                if row[t] != 0 {
                    next += &conv.heat;
                }
                next -= &conv.demand[t];
                s.push(next);
            }
            s
        })
        .collect();
    Ok(StateTrajectory { states })
}

/// True iff `x` is a binary C×T schedule whose buffer states stay within
/// [soc_lower, soc_upper] at every index, decided by exact arithmetic.
pub fn check_feasible(inst: &Instance, x: &[Vec<u8>]) -> bool {
    if x.iter().flatten().any(|&v| v > 1) {
        return false;
    }
    let Ok(traj) = simulate_states(inst, x) else {
        return false;
    };
    inst.converters.iter().enumerate().all(|(c, conv)| {
        traj.states[c]
            .iter()
            .enumerate()
            .all(|(k, s)| conv.soc_lower[k] <= *s && *s <= conv.soc_upper[k])
    })
}

/// Integral bounds on running-count prefixes: a binary schedule is feasible
/// iff A[c][t] ≤ x[c][0] + … + x[c][t] ≤ B[c][t] for all c, t.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixBounds {
    pub lower: Vec<Vec<i64>>,
    pub upper: Vec<Vec<i64>>,
}

impl PrefixBounds {
    pub fn converter_count(&self) -> usize {
        self.lower.len()
    }

    pub fn horizon(&self) -> usize {
        self.lower.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("infeasible: converter {converter} has no valid running count for interval {t}")]
pub struct Infeasibility {
    pub converter: usize,
    pub t: usize,
}

/// Snap tolerance for rational floor/ceil in the reformulation; inputs whose
/// ratio lands within 1e−9 of an integer are treated as that integer.
fn reform_tol() -> Real {
    Real::ratio(1, 1_000_000_000)
}

/// Derives the prefix bounds of the buffer constraints:
/// A[c][t] = max(0, ceil((L[c][t+1] − L[c][0] + Σ_{i≤t} D[c][i]) / H_c)),
/// B[c][t] = min(t+1, floor((U[c][t+1] − L[c][0] + Σ_{i≤t} D[c][i]) / H_c)).
pub fn reformulate(inst: &Instance) -> Result<PrefixBounds, Infeasibility> {
    let tol = reform_tol();
    let mut lower = Vec::with_capacity(inst.converters.len());
    let mut upper = Vec::with_capacity(inst.converters.len());
    for (c, conv) in inst.converters.iter().enumerate() {
        let mut a_row = Vec::with_capacity(inst.horizon);
        let mut b_row = Vec::with_capacity(inst.horizon);
        let initial = conv.soc_lower[0].clone();
        let mut cum_demand = Real::zero();
        for t in 0..inst.horizon {
            cum_demand += &conv.demand[t];
            let shifted_lower = &(&conv.soc_lower[t + 1] - &initial) + &cum_demand;
            let shifted_upper = &(&conv.soc_upper[t + 1] - &initial) + &cum_demand;
            let a_raw = (&shifted_lower / &conv.heat).snapped_ceil(&tol);
            let b_raw = (&shifted_upper / &conv.heat).snapped_floor(&tol);
            let a = a_raw.max(BigInt::from(0));
            let b = b_raw.min(BigInt::from(t as i64 + 1));
            if a > b {
                return Err(Infeasibility { converter: c, t });
            }
            // Both clipped into [0, t+1], so i64 cannot overflow.
            a_row.push(a.to_i64().expect("clipped bound fits i64"));
            b_row.push(b.to_i64().expect("clipped bound fits i64"));
        }
        lower.push(a_row);
        upper.push(b_row);
    }
    Ok(PrefixBounds { lower, upper })
}

/// Greedy feasible schedule for one converter's prefix bounds: run at t only
/// when staying off would make some current-or-future lower bound
/// unreachable. Returns the interval where the chain of bounds conflicts.
fn chain_row(a: &[i64], b: &[i64]) -> Result<Vec<u8>, usize> {
    let t_len = a.len();
    // need[t]: smallest running count at t from which all later lower bounds
    // remain reachable at one run per interval.
    let mut need = vec![0i64; t_len];
    need[t_len - 1] = a[t_len - 1];
    for t in (0..t_len - 1).rev() {
        need[t] = a[t].max(need[t + 1] - 1);
    }
    let mut row = vec![0u8; t_len];
    let mut count = 0i64;
    for t in 0..t_len {
        let target = count.max(need[t]);
        if target - count > 1 {
            return Err(t); // would require two runs in one interval
        }
        if target > count {
            row[t] = 1;
            count = target;
        }
        if count > b[t] {
            return Err(t);
        }
    }
    Ok(row)
}

/// Greedy binary schedule satisfying `bounds`, or the conflict location.
/// Succeeds exactly when a feasible schedule exists, so this doubles as the
/// feasibility test for reformulated instances.
pub fn chain_schedule(bounds: &PrefixBounds) -> Result<Vec<Vec<u8>>, Infeasibility> {
    let mut rows = Vec::with_capacity(bounds.lower.len());
    for c in 0..bounds.lower.len() {
        let row = chain_row(&bounds.lower[c], &bounds.upper[c])
            .map_err(|t| Infeasibility { converter: c, t })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Zero-E converters removed from an instance, each with a feasible schedule
/// chosen greedily. They consume no electricity, so any feasible schedule is
/// optimal for them.
#[derive(Debug, Clone)]
pub struct ZeroESplit {
    /// The instance with zero-E converters removed.
    pub active: Instance,
    /// Original indices of the removed converters, ascending.
    pub removed_indices: Vec<usize>,
    /// One feasible schedule row per removed converter.
    pub removed_schedules: Vec<Vec<u8>>,
}

impl ZeroESplit {
    /// Reassembles a full C×T schedule from a schedule for `active`.
    pub fn merge(&self, active_x: &[Vec<u8>]) -> Vec<Vec<u8>> {
        let total = active_x.len() + self.removed_indices.len();
        let mut merged = Vec::with_capacity(total);
        let mut active_iter = active_x.iter();
        let mut removed_iter = self.removed_indices.iter().zip(&self.removed_schedules);
        let mut next_removed = removed_iter.next();
        for c in 0..total {
            match next_removed {
                Some((&idx, row)) if idx == c => {
                    merged.push(row.clone());
                    next_removed = removed_iter.next();
                }
                _ => merged.push(active_iter.next().expect("row count").clone()),
            }
        }
        merged
    }
}

/// Splits off converters with E = 0 and schedules each independently.
pub fn split_zero_e(inst: &Instance) -> Result<ZeroESplit, Infeasibility> {
    let mut active = inst.clone();
    let mut removed_indices = Vec::new();
    let mut removed_schedules = Vec::new();
    active.converters.clear();
    for (c, conv) in inst.converters.iter().enumerate() {
        if conv.electricity.is_zero() {
            let solo = Instance {
                horizon: inst.horizon,
                base_load: vec![Real::zero(); inst.horizon],
                converters: vec![conv.clone()],
            };
            let bounds = reformulate(&solo).map_err(|e| Infeasibility {
                converter: c,
                t: e.t,
            })?;
            let row = chain_row(&bounds.lower[0], &bounds.upper[0])
                .map_err(|t| Infeasibility { converter: c, t })?;
            removed_indices.push(c);
            removed_schedules.push(row);
        } else {
            active.converters.push(conv.clone());
        }
    }
    Ok(ZeroESplit {
        active,
        removed_indices,
        removed_schedules,
    })
}

/// Per-interval total load F_t + Σ_c E_c·x[c][t] for a fractional schedule.
pub fn interval_loads(inst: &Instance, x: &[Vec<f64>]) -> Result<Vec<f64>, ShapeError> {
    check_shape(inst, x.len(), |c| x[c].len())?;
    let rates = inst.electricity_f64();
    let base = inst.base_load_f64();
    Ok((0..inst.horizon)
        .map(|t| base[t] + x.iter().zip(&rates).map(|(row, e)| e * row[t]).sum::<f64>())
        .collect())
}

/// [`interval_loads`] for a binary schedule.
pub fn binary_loads(inst: &Instance, x: &[Vec<u8>]) -> Result<Vec<f64>, ShapeError> {
    let as_f64: Vec<Vec<f64>> = x
        .iter()
        .map(|row| row.iter().map(|&v| v as f64).collect())
        .collect();
    interval_loads(inst, &as_f64)
}

fn objective_from_loads(kind: ObjectiveKind, with_base: &[f64], without_base: &[f64]) -> f64 {
    let max = |vals: &[f64]| vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = |vals: &[f64]| vals.iter().copied().fold(f64::INFINITY, f64::min);
    match kind {
        ObjectiveKind::Basic => max(without_base),
        ObjectiveKind::Maximal => max(with_base),
        ObjectiveKind::Absolute => with_base.iter().map(|v| v.abs()).fold(f64::NEG_INFINITY, f64::max),
        ObjectiveKind::Fluctuation => max(with_base) - min(with_base),
    }
}

/// Evaluates the chosen peak measure for a fractional (or binary) schedule.
pub fn evaluate_objective(
    inst: &Instance,
    x: &[Vec<f64>],
    kind: ObjectiveKind,
) -> Result<f64, ShapeError> {
    let with_base = interval_loads(inst, x)?;
    let base = inst.base_load_f64();
    let without_base: Vec<f64> = with_base
        .iter()
        .zip(&base)
        .map(|(load, f)| load - f)
        .collect();
    Ok(objective_from_loads(kind, &with_base, &without_base))
}

/// [`evaluate_objective`] for a binary schedule.
pub fn evaluate_binary(
    inst: &Instance,
    x: &[Vec<u8>],
    kind: ObjectiveKind,
) -> Result<f64, ShapeError> {
    let as_f64: Vec<Vec<f64>> = x
        .iter()
        .map(|row| row.iter().map(|&v| v as f64).collect())
        .collect();
    evaluate_objective(inst, &as_f64, kind)
}


#[cfg(test)]
mod tests {
    use super::fixtures::{converter, one, two};
    use super::*;

    #[test]
    fn validates_reference_instances() {
        assert!(validate_instance(&one()).is_ok());
        assert!(validate_instance(&two()).is_ok());
    }

    #[test]
    fn rejects_unfixed_initial_soc() {
        let mut inst = one();
        inst.converters[0].soc_upper[0] = Real::from_int(1);
        let report = validate_instance(&inst);
        assert!(!report.is_ok());
        assert!(report.issues.iter().any(|i| i.kind == IssueKind::InitialSoc));
        assert!(report.to_string().contains("initial SoC not fixed"));
    }

    #[test]
    fn rejects_zero_electricity_with_advisory() {
        let mut inst = one();
        inst.converters[0].electricity = Real::zero();
        let report = validate_instance(&inst);
        assert!(!report.is_ok());
        assert!(report.only_zero_electricity());
        assert!(report.to_string().contains("independently"));
    }

    #[test]
    fn reports_every_shape_problem() {
        let inst = Instance {
            horizon: 3,
            base_load: vec![Real::zero()],
            converters: vec![converter("bad", 1, 0, &[1], &[0, 0], &[0])],
        };
        let report = validate_instance(&inst);
        let kinds: Vec<_> = report.issues.iter().map(|i| i.kind).collect();
        assert!(kinds.contains(&IssueKind::Shape));
        assert!(kinds.contains(&IssueKind::NonPositiveHeat));
        assert!(report.issues.len() >= 4); // base_load, demand, both soc rows, heat
    }

    #[test]
    fn simulates_reference_trajectories() {
        let inst = one();
        let s = simulate_states(&inst, &[vec![1, 0]]).unwrap();
        assert_eq!(s.states[0], vec![Real::zero(), Real::zero(), Real::zero()]);
        let s = simulate_states(&inst, &[vec![1, 1]]).unwrap();
        assert_eq!(
            s.states[0],
            vec![Real::zero(), Real::zero(), Real::from_int(1)]
        );
    }

    #[test]
    fn idle_fleet_holds_state_without_demand() {
        let inst = Instance {
            horizon: 3,
            base_load: vec![Real::zero(); 3],
            converters: vec![converter("idle", 1, 2, &[0, 0, 0], &[1, 0, 0, 0], &[1, 5, 5, 5])],
        };
        let s = simulate_states(&inst, &[vec![0, 0, 0]]).unwrap();
        assert!(s.states[0].iter().all(|v| *v == Real::from_int(1)));
    }

    #[test]
    fn simulate_rejects_bad_shapes() {
        assert!(simulate_states(&one(), &[vec![1, 0, 0]]).is_err());
        assert!(simulate_states(&one(), &[]).is_err());
    }

    #[test]
    fn feasibility_matches_hand_checked_schedules() {
        let inst = one();
        assert!(check_feasible(&inst, &[vec![1, 0]]));
        assert!(check_feasible(&inst, &[vec![1, 1]]));
        assert!(!check_feasible(&inst, &[vec![0, 1]]));
        assert!(!check_feasible(&inst, &[vec![0, 0]]));
        assert!(!check_feasible(&inst, &[vec![2, 0]])); // not binary
    }

    #[test]
    fn reformulates_reference_instances() {
        let b = reformulate(&one()).unwrap();
        assert_eq!(b.lower, vec![vec![1, 1]]);
        assert_eq!(b.upper, vec![vec![1, 2]]);

        let b = reformulate(&two()).unwrap();
        assert_eq!(b.lower, vec![vec![0, 1], vec![0, 1]]);
        assert_eq!(b.upper, vec![vec![1, 1], vec![1, 1]]);
    }

    #[test]
    fn zero_demand_yields_zero_lower_bounds() {
        let inst = Instance {
            horizon: 3,
            base_load: vec![Real::zero(); 3],
            converters: vec![converter("z", 1, 1, &[0, 0, 0], &[0, 0, 0, 0], &[0, 9, 9, 9])],
        };
        let b = reformulate(&inst).unwrap();
        assert_eq!(b.lower, vec![vec![0, 0, 0]]);
    }

    #[test]
    fn fractional_heat_ratio_uses_exact_arithmetic() {
        // H = 3 with unit demand: bound expressions are 1/3-valued and must
        // ceil/floor exactly.
        let inst = Instance {
            horizon: 2,
            base_load: vec![Real::zero(); 2],
            converters: vec![converter("frac", 1, 3, &[1, 0], &[0, 0, 0], &[0, 2, 2])],
        };
        let b = reformulate(&inst).unwrap();
        assert_eq!(b.lower, vec![vec![1, 1]]);
        assert_eq!(b.upper, vec![vec![1, 1]]);
    }

    #[test]
    fn reformulate_detects_per_interval_conflict() {
        // Demand 5 in one interval with H = 1 forces A[0][0] = 5 > B[0][0].
        let inst = Instance {
            horizon: 2,
            base_load: vec![Real::zero(); 2],
            converters: vec![converter("hot", 1, 1, &[5, 0], &[0, 0, 0], &[0, 1, 1])],
        };
        let err = reformulate(&inst).unwrap_err();
        assert_eq!(err, Infeasibility { converter: 0, t: 0 });
    }

    #[test]
    fn feasibility_equals_prefix_bounds_exhaustively() {
        // Eq-9 equivalence on the reference instances: enumerate all binary
        // schedules and compare the two feasibility definitions.
        for inst in [one(), two()] {
            let bounds = reformulate(&inst).unwrap();
            let c_count = inst.converter_count();
            let cells = c_count * inst.horizon;
            for mask in 0..(1u32 << cells) {
                let x: Vec<Vec<u8>> = (0..c_count)
                    .map(|c| {
                        (0..inst.horizon)
                            .map(|t| ((mask >> (c * inst.horizon + t)) & 1) as u8)
                            .collect()
                    })
                    .collect();
                let by_simulation = check_feasible(&inst, &x);
                let by_prefix = (0..c_count).all(|c| {
                    let mut p = 0i64;
                    (0..inst.horizon).all(|t| {
                        p += x[c][t] as i64;
                        bounds.lower[c][t] <= p && p <= bounds.upper[c][t]
                    })
                });
                assert_eq!(by_simulation, by_prefix, "mask {mask:b}");
            }
        }
    }

    #[test]
    fn chain_schedule_finds_feasible_rows() {
        let x = chain_schedule(&reformulate(&one()).unwrap()).unwrap();
        assert_eq!(x, vec![vec![1, 0]]);
        assert!(check_feasible(&one(), &x));

        let x = chain_schedule(&reformulate(&two()).unwrap()).unwrap();
        assert_eq!(x, vec![vec![0, 1], vec![0, 1]]);
        assert!(check_feasible(&two(), &x));
    }

    #[test]
    fn chain_schedule_detects_cross_interval_conflicts() {
        // Per-entry bounds are consistent but B[0][0] = 0 blocks the two runs
        // that A[0][1] = 2 requires.
        let bounds = PrefixBounds {
            lower: vec![vec![0, 2]],
            upper: vec![vec![0, 2]],
        };
        let err = chain_schedule(&bounds).unwrap_err();
        assert_eq!(err, Infeasibility { converter: 0, t: 0 });
    }

    #[test]
    fn chain_handles_nonmonotone_bounds() {
        // A dips after rising; greedy must look ahead, not just react.
        let bounds = PrefixBounds {
            lower: vec![vec![0, 0, 3]],
            upper: vec![vec![1, 3, 3]],
        };
        let x = chain_schedule(&bounds).unwrap();
        assert_eq!(x, vec![vec![1, 1, 1]]);
    }

    #[test]
    fn splits_and_merges_zero_e_converters() {
        let mut inst = two();
        inst.converters.insert(
            1,
            converter("free", 0, 1, &[1, 0], &[0, 0, 0], &[0, 1, 1]),
        );
        let split = split_zero_e(&inst).unwrap();
        assert_eq!(split.active.converter_count(), 2);
        assert_eq!(split.removed_indices, vec![1]);
        assert_eq!(split.removed_schedules, vec![vec![1, 0]]);
        let merged = split.merge(&[vec![0, 1], vec![0, 1]]);
        assert_eq!(merged, vec![vec![0, 1], vec![1, 0], vec![0, 1]]);
        assert!(check_feasible(&inst, &merged));
    }

    #[test]
    fn objective_values_match_hand_calculations() {
        let inst = one();
        let eval = |x: &[Vec<u8>], kind| evaluate_binary(&inst, x, kind).unwrap();
        assert_eq!(eval(&[vec![1, 0]], ObjectiveKind::Maximal), 2.0);
        assert_eq!(eval(&[vec![1, 1]], ObjectiveKind::Fluctuation), 0.0);
        assert_eq!(
            evaluate_binary(&two(), &[vec![1, 0], vec![0, 1]], ObjectiveKind::Maximal).unwrap(),
            1.0
        );
    }

    #[test]
    fn basic_equals_maximal_with_base_load_zeroed() {
        let mut inst = one();
        inst.base_load = vec![Real::from_int(5), Real::from_int(-1)];
        let x = vec![vec![1, 1]];
        let basic = evaluate_binary(&inst, &x, ObjectiveKind::Basic).unwrap();
        let mut zeroed = inst.clone();
        zeroed.base_load = vec![Real::zero(); 2];
        let maximal = evaluate_binary(&zeroed, &x, ObjectiveKind::Maximal).unwrap();
        assert_eq!(basic, maximal);
        // And with base load present, Maximal sees it.
        assert_eq!(evaluate_binary(&inst, &x, ObjectiveKind::Maximal).unwrap(), 7.0);
    }

    #[test]
    fn absolute_dominates_maximal_on_nonnegative_loads() {
        let inst = two();
        for mask in 0..16u32 {
            let x = vec![
                vec![(mask & 1) as u8, ((mask >> 1) & 1) as u8],
                vec![((mask >> 2) & 1) as u8, ((mask >> 3) & 1) as u8],
            ];
            let maximal = evaluate_binary(&inst, &x, ObjectiveKind::Maximal).unwrap();
            let absolute = evaluate_binary(&inst, &x, ObjectiveKind::Absolute).unwrap();
            assert!(absolute >= maximal);
        }
    }

    #[test]
    fn instance_json_round_trips() {
        let json = r#"{
            "T": 2,
            "base_load": [0, "1/2"],
            "converters": [{
                "id": "a", "E": 2, "H": 1,
                "demand": [1, 0],
                "soc_lower": [0, 0, 0],
                "soc_upper": [0, 1, 1]
            }]
        }"#;
        let inst: Instance = serde_json::from_str(json).unwrap();
        assert_eq!(inst.horizon, 2);
        assert_eq!(inst.base_load[1], Real::ratio(1, 2));
        assert_eq!(inst.converters[0].electricity, Real::from_int(2));
        let round =
            serde_json::from_str::<Instance>(&serde_json::to_string(&inst).unwrap()).unwrap();
        assert_eq!(round, inst);
    }

    #[test]
    fn objective_kind_parses_and_prints() {
        for kind in ObjectiveKind::ALL {
            assert_eq!(kind.name().parse::<ObjectiveKind>().unwrap(), kind);
        }
        assert!("peak".parse::<ObjectiveKind>().is_err());
        assert_eq!(
            serde_json::to_string(&ObjectiveKind::Fluctuation).unwrap(),
            "\"fluctuation\""
        );
    }
}
