//! Exact brute-force solver for small instances.
//!
//! Enumerates every binary schedule satisfying the prefix bounds and takes
//! the best objective value. Deliberately simple — this is the ground truth
//! the approximation pipeline is tested against, so it must stay obviously
//! correct. A cell cap keeps accidental exponential blowups out of test runs.

use crate::instance::{
    evaluate_binary, reformulate, Instance, ObjectiveKind, PrefixBounds,
};

/// Default limit on C·T for enumeration (2^24 leaves worst case).
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("no feasible schedule exists")]
    Infeasible,
    #[error("instance has {cells} cells, above the enumeration cap {cap}")]
    CapExceeded { cells: usize, cap: usize },
}

/// Result of exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Optimal objective value.
    pub value: f64,
    /// Lexicographically smallest optimal schedule (row-major order).
    pub schedule: Vec<Vec<u8>>,
    /// Number of feasible schedules examined.
    pub examined: u64,
}

/// Depth-first enumerator over feasible binary schedules, in ascending
/// lexicographic order of the row-major bit string.
///
/// Pruning is exact: a partial prefix count survives iff it can still reach
/// every future lower bound (one run per interval) and sits at or below every
/// future upper bound, so every search path ends in a yielded schedule.
#[derive(Debug)]
pub struct FeasibleSchedules {
    horizon: usize,
    /// Tightest reachable-from-here lower requirement per (c, t).
    need: Vec<Vec<i64>>,
    /// Minimum of the upper bounds from t onward per (c, t).
    cap_above: Vec<Vec<i64>>,
    bits: Vec<u8>,
    /// Next value to try at each cell when the search returns to it.
    pending: Vec<u8>,
    counts: Vec<i64>,
    pos: usize,
    started: bool,
    done: bool,
}

/// Streams the binary schedules satisfying `bounds`.
pub fn enumerate_feasible(
    bounds: &PrefixBounds,
    cap: usize,
) -> Result<FeasibleSchedules, OracleError> {
    let converters = bounds.converter_count();
    let horizon = bounds.horizon();
    let cells = converters * horizon;
    if cells > cap {
        return Err(OracleError::CapExceeded { cells, cap });
    }
    let mut need = Vec::with_capacity(converters);
    let mut cap_above = Vec::with_capacity(converters);
    for c in 0..converters {
        let a = &bounds.lower[c];
        let b = &bounds.upper[c];
        let mut n = vec![0i64; horizon];
        let mut m = vec![0i64; horizon];
        n[horizon - 1] = a[horizon - 1];
        m[horizon - 1] = b[horizon - 1];
        for t in (0..horizon - 1).rev() {
            n[t] = a[t].max(n[t + 1] - 1);
            m[t] = b[t].min(m[t + 1]);
        }
        need.push(n);
        cap_above.push(m);
    }
    Ok(FeasibleSchedules {
        horizon,
        need,
        cap_above,
        bits: vec![0; cells],
        pending: vec![0; cells],
        counts: vec![0; converters],
        pos: 0,
        started: false,
        done: false,
    })
}

impl FeasibleSchedules {
    fn backtrack(&mut self) -> bool {
        if self.pos == 0 {
            return false;
        }
        self.pos -= 1;
        let c = self.pos / self.horizon;
        self.counts[c] -= self.bits[self.pos] as i64;
        true
    }

    fn snapshot(&self) -> Vec<Vec<u8>> {
        self.bits.chunks(self.horizon).map(<[u8]>::to_vec).collect()
    }
}

impl Iterator for FeasibleSchedules {
    type Item = Vec<Vec<u8>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let cells = self.bits.len();
        if self.started && !self.backtrack() {
            self.done = true;
            return None;
        }
        self.started = true;
        loop {
            if self.pos == cells {
                return Some(self.snapshot());
            }
            let c = self.pos / self.horizon;
            let t = self.pos % self.horizon;
            let mut choice = None;
            for v in self.pending[self.pos]..=1 {
                let prefix = self.counts[c] + v as i64;
                if prefix >= self.need[c][t] && prefix <= self.cap_above[c][t] {
                    choice = Some(v);
                    break;
                }
            }
            match choice {
                Some(v) => {
                    self.bits[self.pos] = v;
                    self.counts[c] += v as i64;
                    self.pending[self.pos] = v + 1;
                    self.pos += 1;
                    if self.pos < cells {
                        self.pending[self.pos] = 0;
                    }
                }
                None => {
                    if !self.backtrack() {
                        self.done = true;
                        return None;
                    }
                }
            }
        }
    }
}

/// Exhaustive minimization with a custom cell cap. Ties go to the
/// lexicographically smallest schedule (the enumeration order).
pub fn exact_solve_with_cap(
    inst: &Instance,
    kind: ObjectiveKind,
    cap: usize,
) -> Result<OracleResult, OracleError> {
    let bounds = reformulate(inst).map_err(|_| OracleError::Infeasible)?;
    let mut best: Option<OracleResult> = None;
    let mut examined = 0u64;
    for schedule in enumerate_feasible(&bounds, cap)? {
        examined += 1;
        let value = evaluate_binary(inst, &schedule, kind).expect("enumerated shape");
        match &best {
            Some(b) if b.value <= value => {}
            _ => {
                best = Some(OracleResult {
                    value,
                    schedule,
                    examined: 0,
                });
            }
        }
    }
    match best {
        Some(mut b) => {
            b.examined = examined;
            Ok(b)
        }
        None => Err(OracleError::Infeasible),
    }
}

/// [`exact_solve_with_cap`] at the default cap.
pub fn exact_solve(inst: &Instance, kind: ObjectiveKind) -> Result<OracleResult, OracleError> {
    exact_solve_with_cap(inst, kind, DEFAULT_ENUMERATION_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::check_feasible;
    use crate::instance::fixtures::{one, two};

    fn all_feasible(bounds: &PrefixBounds) -> Vec<Vec<Vec<u8>>> {
        enumerate_feasible(bounds, DEFAULT_ENUMERATION_CAP)
            .unwrap()
            .collect()
    }

    #[test]
    fn enumerates_reference_instance_one() {
        let found = all_feasible(&reformulate(&one()).unwrap());
        assert_eq!(found, vec![vec![vec![1, 0]], vec![vec![1, 1]]]);
    }

    #[test]
    fn enumerates_reference_instance_two() {
        let found = all_feasible(&reformulate(&two()).unwrap());
        assert_eq!(found.len(), 4);
        // Each converter runs exactly once in every feasible schedule.
        for x in &found {
            for row in x {
                assert_eq!(row.iter().map(|&v| v as i64).sum::<i64>(), 1);
            }
        }
        // Ascending lexicographic order of the flattened bits.
        let flat: Vec<Vec<u8>> = found.iter().map(|x| x.concat()).collect();
        let mut sorted = flat.clone();
        sorted.sort();
        assert_eq!(flat, sorted);
    }

    #[test]
    fn unattainable_lower_bound_yields_empty_stream() {
        let bounds = PrefixBounds {
            lower: vec![vec![2, 2]],
            upper: vec![vec![2, 2]],
        };
        assert!(all_feasible(&bounds).is_empty());
    }

    #[test]
    fn enumeration_matches_simulation_filter() {
        for inst in [one(), two()] {
            let bounds = reformulate(&inst).unwrap();
            let enumerated = all_feasible(&bounds);
            let cells = inst.converter_count() * inst.horizon;
            let mut filtered = Vec::new();
            for mask in 0..(1u32 << cells) {
                let x: Vec<Vec<u8>> = (0..inst.converter_count())
                    .map(|c| {
                        (0..inst.horizon)
                            .map(|t| ((mask >> (c * inst.horizon + t)) & 1) as u8)
                            .collect()
                    })
                    .collect();
                if check_feasible(&inst, &x) {
                    filtered.push(x);
                }
            }
            let mut enumerated_sorted = enumerated.clone();
            enumerated_sorted.sort();
            filtered.sort();
            assert_eq!(enumerated_sorted, filtered);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let bounds = PrefixBounds {
            lower: vec![vec![0; 13], vec![0; 13]],
            upper: vec![vec![13; 13], vec![13; 13]],
        };
        match enumerate_feasible(&bounds, 24) {
            Err(OracleError::CapExceeded { cells: 26, cap: 24 }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
        assert!(matches!(
            exact_solve_with_cap(&one(), ObjectiveKind::Maximal, 1),
            Err(OracleError::CapExceeded { cells: 2, cap: 1 })
        ));
    }

    #[test]
    fn optimal_values_match_hand_enumeration() {
        let r = exact_solve(&one(), ObjectiveKind::Maximal).unwrap();
        assert_eq!(r.value, 2.0);
        assert_eq!(r.examined, 2);

        let r = exact_solve(&one(), ObjectiveKind::Fluctuation).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.schedule, vec![vec![1, 1]]);

        let r = exact_solve(&two(), ObjectiveKind::Maximal).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.examined, 4);
    }

    #[test]
    fn ties_resolve_to_lexicographically_smallest() {
        // Both optima of TWO/Maximal have value 1; the enumeration order makes
        // [[0,1],[1,0]] the first one found.
        let r = exact_solve(&two(), ObjectiveKind::Maximal).unwrap();
        assert_eq!(r.schedule, vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn infeasible_instance_is_reported() {
        let mut inst = one();
        inst.converters[0].demand[0] = crate::numeric::Real::from_int(9);
        assert_eq!(
            exact_solve(&inst, ObjectiveKind::Maximal),
            Err(OracleError::Infeasible)
        );
    }
}
