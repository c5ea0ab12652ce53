//! Support reduction: rewrites a solved relaxation into one with
//! forest-structured fractional support while preserving every per-interval
//! electricity total exactly.
//!
//! Fractional activation times of one converter are grouped into classes
//! (consecutive fractional times merge when every prefix sum between them is
//! fractional too). Classes and intervals form a bipartite graph; while that
//! graph contains a cycle, a line move shifts activation mass around the
//! cycle — each class trades `α/e_c` between its two cycle times, so the
//! interval totals cancel term by term. The step length `α` is the largest
//! that keeps activations in `[0,1]` and each prefix sum inside the integer
//! box fixed by the original solution, which makes at least one more entry
//! integral per move: the integer potential φ (count of fractional
//! activations plus fractional prefixes) strictly decreases, so at most
//! `2·C·T` moves run before the graph is a forest.

use std::collections::BTreeMap;

use crate::instance::Instance;
use crate::lp::RelaxedSolution;
use crate::numeric::{snapped_ceil, snapped_floor};

/// Rates smaller than this cancel out and place no limit on a move.
const RATE_TOL: f64 = 1e-15;

/// A maximal run of one converter's fractional activation times whose
/// intervening prefix sums are all fractional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassVertex {
    pub converter: usize,
    /// Member times, ascending.
    pub times: Vec<usize>,
}

/// Bipartite graph between intervals and fractional-support classes.
#[derive(Debug, Clone)]
pub struct NonIntegralityGraph {
    pub classes: Vec<ClassVertex>,
    /// Per interval: indices of classes containing it, ascending.
    pub by_time: Vec<Vec<usize>>,
}

impl NonIntegralityGraph {
    pub fn edge_count(&self) -> usize {
        self.classes.iter().map(|c| c.times.len()).sum()
    }
}

/// Groups each converter's fractional times into classes and records which
/// intervals they cover.
pub fn build_graph(sol: &RelaxedSolution) -> NonIntegralityGraph {
    let converters = sol.converter_count();
    let horizon = sol.horizon();
    let mut classes: Vec<ClassVertex> = Vec::new();
    for c in 0..converters {
        let mut current: Vec<usize> = Vec::new();
        let mut prev: Option<usize> = None;
        for t in 0..horizon {
            if sol.y_integral[c][t] {
                continue;
            }
            if let Some(p) = prev {
                // Same class only if every prefix between stays fractional.
                let joined = (p..t).all(|k| !sol.prefix_integral[c][k]);
                if !joined {
                    classes.push(ClassVertex {
                        converter: c,
                        times: std::mem::take(&mut current),
                    });
                }
            }
            current.push(t);
            prev = Some(t);
        }
        if !current.is_empty() {
            classes.push(ClassVertex {
                converter: c,
                times: current,
            });
        }
    }
    let mut by_time = vec![Vec::new(); horizon];
    for (i, class) in classes.iter().enumerate() {
        for &t in &class.times {
            by_time[t].push(i);
        }
    }
    NonIntegralityGraph { classes, by_time }
}

/// A cycle in the graph: `classes[i]` joins `times[i]` to
/// `times[(i+1) % len]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleWitness {
    pub times: Vec<usize>,
    /// Indices into the graph's class list.
    pub classes: Vec<usize>,
}

/// Deterministic DFS for a cycle; `None` means the graph is a forest.
pub fn find_cycle(graph: &NonIntegralityGraph) -> Option<CycleWitness> {
    let nc = graph.classes.len();
    let horizon = graph.by_time.len();
    let total = nc + horizon;
    // Node ids: classes first, then intervals.
    let neighbors = |node: usize| -> Vec<usize> {
        if node < nc {
            graph.classes[node].times.iter().map(|&t| nc + t).collect()
        } else {
            graph.by_time[node - nc].clone()
        }
    };
    let mut visited = vec![false; total];
    let mut parent = vec![usize::MAX; total];
    for start in 0..total {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        while let Some((node, idx)) = stack.pop() {
            let adj = neighbors(node);
            if idx < adj.len() {
                stack.push((node, idx + 1));
                let next = adj[idx];
                if next == parent[node] {
                    continue;
                }
                if visited[next] {
                    // Back edge: walk up from `node` to `next`.
                    let mut nodes = vec![node];
                    let mut cur = node;
                    while cur != next {
                        cur = parent[cur];
                        nodes.push(cur);
                    }
                    if nodes[0] < nc {
                        nodes.rotate_left(1);
                    }
                    let times: Vec<usize> =
                        nodes.iter().step_by(2).map(|&n| n - nc).collect();
                    let classes: Vec<usize> =
                        nodes.iter().skip(1).step_by(2).copied().collect();
                    debug_assert_eq!(times.len(), classes.len());
                    return Some(CycleWitness { times, classes });
                }
                visited[next] = true;
                parent[next] = node;
                stack.push((next, 0));
            }
        }
    }
    None
}

/// Per-entry integer box for the prefix sums, frozen from the relaxation's
/// initial point: integral prefixes may never move, fractional ones stay
/// between their floor and ceiling.
#[derive(Debug, Clone)]
pub struct PrefixBox {
    pub lo: Vec<Vec<f64>>,
    pub hi: Vec<Vec<f64>>,
}

pub fn prefix_box(sol: &RelaxedSolution) -> PrefixBox {
    let mut lo = Vec::with_capacity(sol.converter_count());
    let mut hi = Vec::with_capacity(sol.converter_count());
    for c in 0..sol.converter_count() {
        let mut row_lo = Vec::with_capacity(sol.horizon());
        let mut row_hi = Vec::with_capacity(sol.horizon());
        for t in 0..sol.horizon() {
            let p = sol.prefix[c][t];
            if sol.prefix_integral[c][t] {
                row_lo.push(p);
                row_hi.push(p);
            } else {
                row_lo.push(snapped_floor(p, sol.snap_tol) as f64);
                row_hi.push(snapped_ceil(p, sol.snap_tol) as f64);
            }
        }
        lo.push(row_lo);
        hi.push(row_hi);
    }
    PrefixBox { lo, hi }
}

#[derive(Debug, Clone, Copy)]
pub struct MoveRecord {
    pub phi_before: usize,
    pub phi_after: usize,
    pub cycle_len: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ReductionTrace {
    pub moves: Vec<MoveRecord>,
}

impl ReductionTrace {
    pub fn move_count(&self) -> usize {
        self.moves.len()
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("support reduction failed: {0}")]
pub struct ReductionError(pub String);

/// Number of fractional activations plus fractional prefix sums.
pub fn potential(sol: &RelaxedSolution) -> usize {
    let y: usize = sol
        .y_integral
        .iter()
        .flatten()
        .filter(|&&flag| !flag)
        .count();
    let p: usize = sol
        .prefix_integral
        .iter()
        .flatten()
        .filter(|&&flag| !flag)
        .count();
    y + p
}

/// Executes one maximal line move along `witness`, updating `sol` in place.
/// Returns the step length.
pub fn apply_line_move(
    sol: &mut RelaxedSolution,
    graph: &NonIntegralityGraph,
    witness: &CycleWitness,
    bx: &PrefixBox,
    inst: &Instance,
) -> Result<f64, ReductionError> {
    let e = inst.electricity_f64();
    let k = witness.classes.len();
    // Net per-unit change of each touched activation and prefix entry.
    let mut dz: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut dprefix: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for i in 0..k {
        let class = &graph.classes[witness.classes[i]];
        let c = class.converter;
        let rate = 1.0 / e[c];
        let from = witness.times[i];
        let to = witness.times[(i + 1) % k];
        *dz.entry((c, from)).or_insert(0.0) += rate;
        *dz.entry((c, to)).or_insert(0.0) -= rate;
        if from < to {
            for t in from..to {
                *dprefix.entry((c, t)).or_insert(0.0) += rate;
            }
        } else {
            for t in to..from {
                *dprefix.entry((c, t)).or_insert(0.0) -= rate;
            }
        }
    }

    // Largest step keeping activations in [0,1] and prefixes in their box.
    let mut alpha = f64::INFINITY;
    for (&(c, t), &rate) in &dz {
        if rate.abs() <= RATE_TOL {
            continue;
        }
        let v = sol.y[c][t];
        let limit = if rate > 0.0 {
            (1.0 - v) / rate
        } else {
            (0.0 - v) / rate
        };
        alpha = alpha.min(limit);
    }
    for (&(c, t), &rate) in &dprefix {
        if rate.abs() <= RATE_TOL {
            continue;
        }
        let p = sol.prefix[c][t];
        let limit = if rate > 0.0 {
            (bx.hi[c][t] - p) / rate
        } else {
            (bx.lo[c][t] - p) / rate
        };
        alpha = alpha.min(limit);
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(ReductionError(format!(
            "line move along a {k}-cycle has no positive step (alpha = {alpha})"
        )));
    }

    let mut touched: Vec<usize> = Vec::new();
    for (&(c, t), &rate) in &dz {
        let v = sol.y[c][t] + alpha * rate;
        if crate::numeric::near_integer(v, sol.snap_tol) {
            sol.y[c][t] = v.round() + 0.0;
            sol.y_integral[c][t] = true;
        } else {
            sol.y[c][t] = v;
            sol.y_integral[c][t] = false;
        }
        if touched.last() != Some(&c) {
            touched.push(c);
        }
    }
    touched.dedup();
    for c in touched {
        sol.recompute_prefix(c);
    }
    Ok(alpha)
}

/// Applies line moves until the fractional-support graph is a forest.
/// The potential strictly decreases each move, giving the `2·C·T` cap.
pub fn reduce_to_forest(
    sol: &mut RelaxedSolution,
    inst: &Instance,
) -> Result<ReductionTrace, ReductionError> {
    let bx = prefix_box(sol);
    let cap = 2 * sol.converter_count() * sol.horizon() + 1;
    let mut trace = ReductionTrace::default();
    loop {
        let graph = build_graph(sol);
        let witness = match find_cycle(&graph) {
            Some(w) => w,
            None => return Ok(trace),
        };
        if trace.moves.len() >= cap {
            return Err(ReductionError(format!(
                "exceeded the {cap}-move bound without reaching a forest"
            )));
        }
        let phi_before = potential(sol);
        let alpha = apply_line_move(sol, &graph, &witness, &bx, inst)?;
        let phi_after = potential(sol);
        if phi_after >= phi_before {
            return Err(ReductionError(format!(
                "potential did not decrease ({phi_before} -> {phi_after})"
            )));
        }
        trace.moves.push(MoveRecord {
            phi_before,
            phi_after,
            cycle_len: witness.classes.len(),
            alpha,
        });
    }
}
