//! Rounding of a forest-supported relaxation into a binary schedule, and
//! the end-to-end solve pipeline built on it.
//!
//! Once the fractional-support graph is a forest, its classes can be peeled
//! leaf-inward: each class has at most one interval (its *anchor*) shared
//! with classes rounded before it. Processing classes in reverse peel order,
//! the anchor activation is rounded up when the partially-rounded load at
//! that interval still sits on the favorable side of the relaxed load, down
//! otherwise; the rest of the class follows from floors/ceilings of the
//! converter's fixed prefix sums, so each converter's cumulative run counts
//! stay inside the same integer windows the relaxation satisfied. Every
//! interval then carries at most one full converter draw of rounding error,
//! which is what certifies the `max|e_c|` bound on the final gap (twice
//! that for the band-width objective, which subtracts two interval loads).

use std::collections::BTreeSet;

use crate::instance::{
    check_feasible, evaluate_binary, reformulate, validate_instance, Instance, ObjectiveKind,
};
use crate::lp::{solve_relaxation, LpError, RelaxedSolution, DEFAULT_SNAP_TOL};
use crate::numeric::{snapped_ceil, snapped_floor};
use crate::reduce::{build_graph, reduce_to_forest, NonIntegralityGraph, ReductionTrace};

/// Slack allowed when verifying the certified error bound internally.
const CERT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, thiserror::Error)]
pub enum SolveError {
    #[error("instance failed validation:\n{0}")]
    Invalid(String),
    #[error("no feasible schedule exists: {0}")]
    Infeasible(String),
    #[error("internal error: {0}")]
    Internal(String),
}

/// A binary schedule with the relaxation bound it was rounded from.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySchedule {
    pub x: Vec<Vec<u8>>,
    pub objective_value: f64,
    pub lp_bound: f64,
    pub gap: f64,
}

/// One step of the rounding order: the class to round and the interval
/// (if any) it shares with classes rounded earlier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeelStep {
    pub class: usize,
    pub anchor: Option<usize>,
}

pub type PeelOrder = Vec<PeelStep>;

/// Computes the rounding order by peeling classes with at most one
/// shared interval off the forest, then reversing, so every class after
/// the first few roots is anchored to already-rounded neighbors.
pub fn peel_order(graph: &NonIntegralityGraph) -> Result<PeelOrder, SolveError> {
    let nc = graph.classes.len();
    let mut deg: Vec<usize> = graph.by_time.iter().map(Vec::len).collect();
    let mut removed = vec![false; nc];
    let shared = |class: usize, deg: &[usize]| -> Vec<usize> {
        graph.classes[class]
            .times
            .iter()
            .copied()
            .filter(|&t| deg[t] >= 2)
            .collect()
    };
    let mut work: BTreeSet<usize> = (0..nc)
        .filter(|&i| shared(i, &deg).len() <= 1)
        .collect();
    let mut order: PeelOrder = Vec::with_capacity(nc);
    while let Some(&i) = work.iter().next() {
        work.remove(&i);
        if removed[i] {
            continue;
        }
        let anchors = shared(i, &deg);
        let anchor = match anchors.as_slice() {
            [] => None,
            [t] => Some(*t),
            _ => {
                return Err(SolveError::Internal(format!(
                    "class {i} became unpeelable; shared intervals {anchors:?}"
                )))
            }
        };
        removed[i] = true;
        order.push(PeelStep { class: i, anchor });
        for &t in &graph.classes[i].times {
            deg[t] -= 1;
            if deg[t] == 1 {
                for &j in &graph.by_time[t] {
                    if !removed[j] && shared(j, &deg).len() <= 1 {
                        work.insert(j);
                    }
                }
            }
        }
    }
    if order.len() != nc {
        return Err(SolveError::Internal(
            "support graph still contains a cycle; reduction must run first".to_string(),
        ));
    }
    order.reverse();
    Ok(order)
}

/// Rounds a forest-supported relaxation to a binary schedule following the
/// given peel order. The relaxation's prefix sums are fixed throughout;
/// only the partially-rounded interval loads evolve.
pub fn round_solution(
    inst: &Instance,
    z: &RelaxedSolution,
    graph: &NonIntegralityGraph,
    order: &PeelOrder,
) -> Result<BinarySchedule, SolveError> {
    let c_count = z.converter_count();
    let horizon = z.horizon();
    if inst.converter_count() != c_count || inst.horizon != horizon {
        return Err(SolveError::Internal(
            "relaxation shape does not match the instance".to_string(),
        ));
    }
    let e = inst.electricity_f64();

    // Floors/ceilings of the fixed prefix sums, with the virtual -1 entry 0.
    let pfloor = |c: usize, t: isize| -> f64 {
        if t < 0 {
            0.0
        } else {
            snapped_floor(z.prefix[c][t as usize], z.snap_tol)
        }
    };
    let pceil = |c: usize, t: isize| -> f64 {
        if t < 0 {
            0.0
        } else {
            snapped_ceil(z.prefix[c][t as usize], z.snap_tol)
        }
    };

    // Base load cancels in the guard, so plain converter loads suffice.
    let zload: Vec<f64> = (0..horizon)
        .map(|t| (0..c_count).map(|c| e[c] * z.y[c][t]).sum())
        .collect();

    let mut x: Vec<Vec<f64>> = z.y.clone();
    for step in order {
        let class = &graph.classes[step.class];
        let c = class.converter;
        // Roots have no shared interval; the earliest class time stands in.
        let ti = step.anchor.unwrap_or(class.times[0]);
        let xload: f64 = (0..c_count).map(|cc| e[cc] * x[cc][ti]).sum();
        let up = e[c] * (zload[ti] - xload) >= 0.0;
        let crossed = pfloor(c, ti as isize - 1) != pfloor(c, ti as isize);
        let frac_before = pfloor(c, ti as isize - 1) != pceil(c, ti as isize - 1);
        for &t in &class.times {
            let it = t as isize;
            let v = match t.cmp(&ti) {
                std::cmp::Ordering::Equal => {
                    if up {
                        1.0
                    } else {
                        0.0
                    }
                }
                std::cmp::Ordering::Less => {
                    if up {
                        pfloor(c, it) - pfloor(c, it - 1)
                    } else {
                        pceil(c, it) - pceil(c, it - 1)
                    }
                }
                std::cmp::Ordering::Greater => {
                    // After the anchor the prefix telescope must continue from
                    // the anchor's actual running prefix. With a fractional
                    // prefix just before the anchor, both directions land on
                    // floor(prefix[ti-1]) + 1 — which equals floor(prefix[ti])
                    // when the anchor crossed an integer and ceil(prefix[ti])
                    // when it did not, independent of the direction. With an
                    // integral prefix before the anchor (class head), crossing
                    // is impossible and the direction itself decides.
                    let use_ceil = if frac_before { !crossed } else { up };
                    if use_ceil {
                        pceil(c, it) - pceil(c, it - 1)
                    } else {
                        pfloor(c, it) - pfloor(c, it - 1)
                    }
                }
            };
            if v != 0.0 && v != 1.0 {
                return Err(SolveError::Internal(format!(
                    "rounded activation for converter {c} at interval {t} is {v}"
                )));
            }
            x[c][t] = v;
        }
    }

    let mut bits: Vec<Vec<u8>> = Vec::with_capacity(c_count);
    for (c, row) in x.iter().enumerate() {
        let mut out = Vec::with_capacity(horizon);
        for (t, &v) in row.iter().enumerate() {
            if v == 0.0 {
                out.push(0);
            } else if v == 1.0 {
                out.push(1);
            } else {
                return Err(SolveError::Internal(format!(
                    "activation for converter {c} at interval {t} stayed fractional ({v})"
                )));
            }
        }
        bits.push(out);
    }

    let objective_value = evaluate_binary(inst, &bits, z.kind)
        .map_err(|e| SolveError::Internal(e.to_string()))?;
    Ok(BinarySchedule {
        x: bits,
        objective_value,
        lp_bound: z.objective,
        gap: objective_value - z.objective,
    })
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub snap_tol: f64,
    /// Print one line per reduction move to stderr.
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            snap_tol: DEFAULT_SNAP_TOL,
            trace: false,
        }
    }
}

/// The final schedule evaluated under every objective.
#[derive(Debug, Clone, Copy)]
pub struct ObjectiveValues {
    pub basic: f64,
    pub maximal: f64,
    pub absolute: f64,
    pub fluctuation: f64,
}

/// Everything the pipeline produced, for reporting and verification.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub kind: ObjectiveKind,
    pub schedule: BinarySchedule,
    /// Activation levels straight out of the relaxation.
    pub y_relaxed: Vec<Vec<f64>>,
    /// Activation levels after support reduction (same interval loads).
    pub z_reduced: Vec<Vec<f64>>,
    pub lp_bound: f64,
    pub gap: f64,
    /// Certified cap on the gap: `max|e_c|`, doubled for the band width.
    pub bound_limit: f64,
    pub objectives: ObjectiveValues,
    pub reduction: ReductionTrace,
}

/// Runs the full pipeline: validate, derive run-count windows, solve the
/// relaxation, reduce its support to a forest, round, and verify the
/// feasibility and error-bound guarantees on the result.
pub fn solve_detailed(
    inst: &Instance,
    kind: ObjectiveKind,
    opts: &SolveOptions,
) -> Result<SolveReport, SolveError> {
    let validation = validate_instance(inst);
    if !validation.is_ok() {
        return Err(SolveError::Invalid(validation.to_string()));
    }
    let bounds = reformulate(inst).map_err(|e| SolveError::Infeasible(e.to_string()))?;
    let mut sol = solve_relaxation(inst, &bounds, kind, opts.snap_tol).map_err(|e| match e {
        LpError::Infeasible => SolveError::Infeasible(e.to_string()),
        LpError::Internal(m) => SolveError::Internal(m),
    })?;
    let y_relaxed = sol.y.clone();
    let lp_bound = sol.objective;

    let reduction =
        reduce_to_forest(&mut sol, inst).map_err(|e| SolveError::Internal(e.to_string()))?;
    if opts.trace {
        for (i, mv) in reduction.moves.iter().enumerate() {
            eprintln!(
                "reduce: move {}: cycle length {}, step {:.9}, potential {} -> {}",
                i + 1,
                mv.cycle_len,
                mv.alpha,
                mv.phi_before,
                mv.phi_after
            );
        }
    }
    let z_reduced = sol.y.clone();

    let graph = build_graph(&sol);
    let order = peel_order(&graph)?;
    let schedule = round_solution(inst, &sol, &graph, &order)?;

    if !check_feasible(inst, &schedule.x) {
        return Err(SolveError::Internal(
            "rounded schedule violates the storage bounds".to_string(),
        ));
    }
    let bound_limit = match kind {
        ObjectiveKind::Fluctuation => 2.0 * inst.max_abs_electricity(),
        _ => inst.max_abs_electricity(),
    };
    if schedule.objective_value < lp_bound - CERT_TOL {
        return Err(SolveError::Internal(format!(
            "schedule value {} undercuts the relaxation bound {}",
            schedule.objective_value, lp_bound
        )));
    }
    if schedule.objective_value > lp_bound + bound_limit + CERT_TOL {
        return Err(SolveError::Internal(format!(
            "gap {} exceeds the certified limit {}",
            schedule.objective_value - lp_bound,
            bound_limit
        )));
    }

    let eval = |k: ObjectiveKind| {
        evaluate_binary(inst, &schedule.x, k).map_err(|e| SolveError::Internal(e.to_string()))
    };
    let objectives = ObjectiveValues {
        basic: eval(ObjectiveKind::Basic)?,
        maximal: eval(ObjectiveKind::Maximal)?,
        absolute: eval(ObjectiveKind::Absolute)?,
        fluctuation: eval(ObjectiveKind::Fluctuation)?,
    };

    let gap = schedule.gap;
    Ok(SolveReport {
        kind,
        schedule,
        y_relaxed,
        z_reduced,
        lp_bound,
        gap,
        bound_limit,
        objectives,
        reduction,
    })
}

/// Convenience wrapper returning just the schedule.
pub fn approximate_solve(inst: &Instance, kind: ObjectiveKind) -> Result<BinarySchedule, SolveError> {
    solve_detailed(inst, kind, &SolveOptions::default()).map(|r| r.schedule)
}
