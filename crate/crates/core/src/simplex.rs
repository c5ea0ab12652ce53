//! Revised primal simplex for linear programs with bounded variables and
//! ranged rows, built on the sparse LU engine in [`crate::lu`].
//!
//! Every row `lᵢ ≤ aᵢ·x ≤ uᵢ` is held homogeneous as `aᵢ·x − sᵢ = 0` with a
//! slack variable bounded by `[lᵢ, uᵢ]`, so the basis always has full rank
//! and bound information lives in one place. Feasibility is established by
//! an explicit phase 1 that adds one artificial variable per violated row
//! and minimizes their sum; phase 2 then minimizes the real objective.
//! Entering variables are picked by largest reduced cost (Dantzig), falling
//! back to Bland's least-index rule while the objective stalls so degenerate
//! bases cannot cycle.

use crate::lu::LuFactors;

/// Reduced-cost magnitude below which a column is not considered improving.
const DUAL_TOL: f64 = 1e-8;
/// Smallest pivot magnitude accepted in the ratio test.
const PIVOT_TOL: f64 = 1e-9;
/// Remaining artificial mass above which phase 1 declares infeasibility.
const PHASE1_TOL: f64 = 1e-7;
/// Bound violation tolerated when validating a caller-provided start basis.
const CRASH_FEAS_TOL: f64 = 1e-7;
/// Objective decrease below this counts as a stalled (degenerate) pivot.
const STALL_EPS: f64 = 1e-12;
/// Stalled pivots in a row before switching to Bland's rule.
const STALL_LIMIT: u32 = 100;
/// Basis updates accumulated before refactorizing from scratch.
const REFACTOR_INTERVAL: usize = 100;

/// `min cost·x` subject to `row_lower ≤ A·x ≤ row_upper` and
/// `col_lower ≤ x ≤ col_upper`, with `A` given column-wise.
#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    pub num_vars: usize,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub cost: Vec<f64>,
    /// Column j as (row, coefficient) pairs.
    pub cols: Vec<Vec<(usize, f64)>>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
}

impl StandardForm {
    pub fn num_rows(&self) -> usize {
        self.row_lower.len()
    }
}

/// A starting basis proposed by the caller: `basic[i]` is the variable
/// (structural `j < n` or slack `n + i`) basic in row i, and `at_upper[j]`
/// says which bound each nonbasic variable rests at. The solver verifies
/// primal feasibility and silently falls back to a cold start if it does
/// not hold.
#[derive(Debug, Clone)]
pub(crate) struct CrashBasis {
    pub basic: Vec<usize>,
    pub at_upper: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SolveStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug)]
pub(crate) struct SimplexOutcome {
    pub status: SolveStatus,
    /// Values for the n structural variables followed by the m slacks.
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: u64,
}

#[derive(Debug, thiserror::Error)]
pub(crate) enum SimplexError {
    #[error("objective is unbounded below")]
    Unbounded,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    Free,
}

/// Product-form update: the column that replaced slot `pos` in the basis,
/// expressed in the pre-pivot basis coordinates.
struct Eta {
    pos: usize,
    diag: f64,
    entries: Vec<(usize, f64)>,
}

enum Pricing {
    Dantzig,
    Bland,
}

struct Solver<'a> {
    form: &'a StandardForm,
    m: usize,
    /// Structural + slack variable count; artificials are indexed above it.
    nt: usize,
    /// Per row: ±1 coefficient of that row's artificial, 0 if absent.
    art_sign: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basic: Vec<usize>,
    lu: Option<LuFactors>,
    etas: Vec<Eta>,
    phase1: bool,
    objective: f64,
    iterations: u64,
    stall: u32,
    // Dense length-m scratch buffers reused across iterations.
    buf_a: Vec<f64>,
    buf_b: Vec<f64>,
    buf_w: Vec<f64>,
}

pub(crate) fn solve(
    form: &StandardForm,
    crash: Option<&CrashBasis>,
) -> Result<SimplexOutcome, SimplexError> {
    let m = form.num_rows();
    let nt = form.num_vars + m;
    let mut solver = Solver {
        form,
        m,
        nt,
        art_sign: vec![0.0; m],
        lower: Vec::with_capacity(nt + m),
        upper: Vec::with_capacity(nt + m),
        x: vec![0.0; nt + m],
        state: vec![VarState::AtLower; nt + m],
        basic: vec![0; m],
        lu: None,
        etas: Vec::new(),
        phase1: false,
        objective: 0.0,
        iterations: 0,
        stall: 0,
        buf_a: vec![0.0; m],
        buf_b: vec![0.0; m],
        buf_w: vec![0.0; m],
    };
    solver.lower.extend_from_slice(&form.col_lower);
    solver.lower.extend_from_slice(&form.row_lower);
    solver.lower.extend(std::iter::repeat(0.0).take(m));
    solver.upper.extend_from_slice(&form.col_upper);
    solver.upper.extend_from_slice(&form.row_upper);
    solver.upper.extend(std::iter::repeat(f64::INFINITY).take(m));
    solver.run(crash)
}

impl<'a> Solver<'a> {
    fn run(&mut self, crash: Option<&CrashBasis>) -> Result<SimplexOutcome, SimplexError> {
        let warm = crash.map_or(false, |c| self.try_crash(c));
        if !warm {
            self.cold_start()?;
            if self.art_sign.iter().any(|&g| g != 0.0) {
                self.phase1 = true;
                self.recompute_objective();
                self.iterate()?;
                if self.objective > PHASE1_TOL {
                    return Ok(SimplexOutcome {
                        status: SolveStatus::Infeasible,
                        values: self.x[..self.nt].to_vec(),
                        objective: self.objective,
                        iterations: self.iterations,
                    });
                }
                // Pin the artificials at zero so later pivots push any that
                // linger in the basis straight out.
                for i in 0..self.m {
                    if self.art_sign[i] != 0.0 {
                        let j = self.nt + i;
                        self.upper[j] = 0.0;
                        if !matches!(self.state[j], VarState::Basic(_)) {
                            self.x[j] = 0.0;
                            self.state[j] = VarState::AtLower;
                        }
                    }
                }
                self.phase1 = false;
                self.stall = 0;
            }
        }
        self.recompute_objective();
        self.iterate()?;
        Ok(SimplexOutcome {
            status: SolveStatus::Optimal,
            values: self.x[..self.nt].to_vec(),
            objective: self.objective,
            iterations: self.iterations,
        })
    }

    fn cost_of(&self, j: usize) -> f64 {
        if self.phase1 {
            if j >= self.nt {
                1.0
            } else {
                0.0
            }
        } else if j < self.form.num_vars {
            self.form.cost[j]
        } else {
            0.0
        }
    }

    fn for_col(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.form.num_vars {
            for &(r, v) in &self.form.cols[j] {
                f(r, v);
            }
        } else if j < self.nt {
            f(j - self.form.num_vars, -1.0);
        } else {
            f(j - self.nt, self.art_sign[j - self.nt]);
        }
    }

    /// Places every structural variable at a bound (or zero if free) and
    /// each slack at its row's activity; rows whose activity falls outside
    /// the slack bounds get an artificial carrying the violation.
    fn cold_start(&mut self) -> Result<(), SimplexError> {
        let n = self.form.num_vars;
        for j in 0..n {
            if self.lower[j].is_finite() {
                self.state[j] = VarState::AtLower;
                self.x[j] = self.lower[j];
            } else if self.upper[j].is_finite() {
                self.state[j] = VarState::AtUpper;
                self.x[j] = self.upper[j];
            } else {
                self.state[j] = VarState::Free;
                self.x[j] = 0.0;
            }
        }
        let mut activity = vec![0.0f64; self.m];
        for j in 0..n {
            let v = self.x[j];
            if v != 0.0 {
                for &(r, c) in &self.form.cols[j] {
                    activity[r] += c * v;
                }
            }
        }
        for i in 0..self.m {
            let s = n + i;
            let a = activity[i];
            let clamped = a.clamp(self.lower[s], self.upper[s]);
            if (clamped - a).abs() <= CRASH_FEAS_TOL {
                self.basic[i] = s;
                self.state[s] = VarState::Basic(i);
                self.x[s] = a;
            } else {
                // Slack rests at its nearest bound; the artificial absorbs
                // the remaining residual with a sign that keeps it ≥ 0.
                self.state[s] = if clamped <= self.lower[s] {
                    VarState::AtLower
                } else {
                    VarState::AtUpper
                };
                self.x[s] = clamped;
                let j = self.nt + i;
                self.art_sign[i] = if clamped >= a { 1.0 } else { -1.0 };
                self.basic[i] = j;
                self.state[j] = VarState::Basic(i);
                self.x[j] = (clamped - a).abs();
            }
        }
        self.refactorize()
    }

    /// Adopts the caller's basis if it factorizes and is primal feasible.
    fn try_crash(&mut self, crash: &CrashBasis) -> bool {
        if crash.basic.len() != self.m || crash.at_upper.len() != self.nt {
            return false;
        }
        for j in 0..self.nt {
            self.state[j] = if crash.at_upper[j] {
                VarState::AtUpper
            } else if self.lower[j].is_finite() {
                VarState::AtLower
            } else {
                VarState::Free
            };
            self.x[j] = match self.state[j] {
                VarState::AtUpper => self.upper[j],
                VarState::AtLower => self.lower[j],
                _ => 0.0,
            };
        }
        for (i, &j) in crash.basic.iter().enumerate() {
            if j >= self.nt {
                return false;
            }
            self.basic[i] = j;
            self.state[j] = VarState::Basic(i);
        }
        if self.refactorize().is_err() {
            return false;
        }
        for i in 0..self.m {
            let j = self.basic[i];
            if self.x[j] < self.lower[j] - CRASH_FEAS_TOL
                || self.x[j] > self.upper[j] + CRASH_FEAS_TOL
            {
                return false;
            }
        }
        true
    }

    fn refactorize(&mut self) -> Result<(), SimplexError> {
        let cols: Vec<Vec<(usize, f64)>> = self
            .basic
            .iter()
            .map(|&j| {
                let mut col = Vec::new();
                self.for_col(j, |r, v| col.push((r, v)));
                col
            })
            .collect();
        let lu = LuFactors::factorize(&cols)
            .map_err(|e| SimplexError::Numerical(e.to_string()))?;
        self.lu = Some(lu);
        self.etas.clear();
        self.recompute_basics();
        Ok(())
    }

    /// Recomputes the basic values from the nonbasic ones: B·x_B = −N·x_N.
    fn recompute_basics(&mut self) {
        self.buf_a.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.nt + self.m {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let v = self.x[j];
            if v != 0.0 {
                let buf = &mut self.buf_a;
                if j < self.form.num_vars {
                    for &(r, c) in &self.form.cols[j] {
                        buf[r] -= c * v;
                    }
                } else if j < self.nt {
                    buf[j - self.form.num_vars] += v;
                } else {
                    buf[j - self.nt] -= self.art_sign[j - self.nt] * v;
                }
            }
        }
        self.ftran();
        for i in 0..self.m {
            self.x[self.basic[i]] = self.buf_a[i];
        }
    }

    fn recompute_objective(&mut self) {
        self.objective = (0..self.nt + self.m)
            .map(|j| self.cost_of(j) * self.x[j])
            .sum();
    }

    /// FTRAN of `buf_a` in place (row space in, basis-slot space out).
    fn ftran(&mut self) {
        self.lu
            .as_ref()
            .expect("basis factorized")
            .ftran(&mut self.buf_a, &mut self.buf_b);
        for eta in &self.etas {
            let buf = &mut self.buf_a;
            let xr = buf[eta.pos] / eta.diag;
            if xr != 0.0 {
                for &(i, v) in &eta.entries {
                    buf[i] -= v * xr;
                }
            }
            buf[eta.pos] = xr;
        }
    }

    /// BTRAN of `buf_a` in place (basis-slot space in, row space out).
    fn btran(&mut self) {
        for eta in self.etas.iter().rev() {
            let buf = &mut self.buf_a;
            let mut v = buf[eta.pos];
            for &(i, d) in &eta.entries {
                v -= d * buf[i];
            }
            buf[eta.pos] = v / eta.diag;
        }
        self.lu
            .as_ref()
            .expect("basis factorized")
            .btran(&mut self.buf_a, &mut self.buf_b);
    }

    /// One simplex phase: pivot until no nonbasic column improves the
    /// current (phase-specific) objective.
    fn iterate(&mut self) -> Result<(), SimplexError> {
        let max_iterations = 100_000 + 200 * (self.nt as u64);
        let mut pricing = Pricing::Dantzig;
        loop {
            if self.iterations >= max_iterations {
                return Err(SimplexError::Numerical(format!(
                    "no convergence within {max_iterations} pivots"
                )));
            }
            if self.etas.len() >= REFACTOR_INTERVAL {
                self.refactorize()?;
                self.recompute_objective();
            }

            // Dual prices y = Bᵀ⁻¹ c_B, then reduced costs per column.
            for i in 0..self.m {
                self.buf_a[i] = self.cost_of(self.basic[i]);
            }
            self.btran();
            let entering = self.price(&pricing);
            let (enter, dir, d_enter) = match entering {
                Some(t) => t,
                None => {
                    if matches!(pricing, Pricing::Bland) {
                        pricing = Pricing::Dantzig;
                        self.stall = 0;
                        continue; // confirm optimality under the full rule
                    }
                    return Ok(());
                }
            };

            // Column of the entering variable through the current basis.
            self.buf_a.iter_mut().for_each(|v| *v = 0.0);
            let mut col = Vec::new();
            self.for_col(enter, |r, v| col.push((r, v)));
            for &(r, v) in &col {
                self.buf_a[r] += v;
            }
            self.ftran();
            self.buf_w.copy_from_slice(&self.buf_a);

            let step = self.ratio_test(enter, dir)?;
            let delta_obj = d_enter * dir * step.alpha;
            match step.leave {
                Leave::BoundFlip => {
                    self.x[enter] += dir * step.alpha;
                    self.state[enter] = if dir > 0.0 {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    self.x[enter] = if dir > 0.0 {
                        self.upper[enter]
                    } else {
                        self.lower[enter]
                    };
                    for i in 0..self.m {
                        let w = self.buf_w[i];
                        if w != 0.0 {
                            self.x[self.basic[i]] -= dir * step.alpha * w;
                        }
                    }
                }
                Leave::Basic { pos, to_upper } => {
                    for i in 0..self.m {
                        let w = self.buf_w[i];
                        if w != 0.0 {
                            self.x[self.basic[i]] -= dir * step.alpha * w;
                        }
                    }
                    let out = self.basic[pos];
                    self.x[out] = if to_upper { self.upper[out] } else { self.lower[out] };
                    self.state[out] = if to_upper {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    self.x[enter] += dir * step.alpha;
                    self.state[enter] = VarState::Basic(pos);
                    self.basic[pos] = enter;
                    let mut entries = Vec::new();
                    for i in 0..self.m {
                        if i != pos && self.buf_w[i] != 0.0 {
                            entries.push((i, self.buf_w[i]));
                        }
                    }
                    self.etas.push(Eta {
                        pos,
                        diag: self.buf_w[pos],
                        entries,
                    });
                }
            }
            self.objective += delta_obj;
            self.iterations += 1;

            if delta_obj < -STALL_EPS {
                self.stall = 0;
                pricing = Pricing::Dantzig;
            } else {
                self.stall += 1;
                if self.stall > STALL_LIMIT {
                    pricing = Pricing::Bland;
                }
            }
        }
    }

    /// Scans nonbasic columns for one whose reduced cost improves the
    /// objective; returns (variable, direction, reduced cost). `buf_a`
    /// holds the dual prices in row space.
    fn price(&self, pricing: &Pricing) -> Option<(usize, f64, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.nt {
            match self.state[j] {
                VarState::Basic(_) => continue,
                _ => {}
            }
            if self.lower[j] == self.upper[j] {
                continue; // fixed, may never move
            }
            let mut d = self.cost_of(j);
            if j < self.form.num_vars {
                for &(r, v) in &self.form.cols[j] {
                    d -= self.buf_a[r] * v;
                }
            } else {
                d += self.buf_a[j - self.form.num_vars];
            }
            let dir = match self.state[j] {
                VarState::AtLower if d < -DUAL_TOL => 1.0,
                VarState::AtUpper if d > DUAL_TOL => -1.0,
                VarState::Free if d < -DUAL_TOL => 1.0,
                VarState::Free if d > DUAL_TOL => -1.0,
                _ => continue,
            };
            match pricing {
                Pricing::Bland => return Some((j, dir, d)),
                Pricing::Dantzig => {
                    if best.map_or(true, |(_, _, bd)| d.abs() > bd.abs()) {
                        best = Some((j, dir, d));
                    }
                }
            }
        }
        best
    }

    fn ratio_test(&self, enter: usize, dir: f64) -> Result<Step, SimplexError> {
        let mut alpha = f64::INFINITY;
        let mut leave = Leave::BoundFlip;
        let mut leave_var = usize::MAX;
        if self.lower[enter].is_finite() && self.upper[enter].is_finite() {
            alpha = self.upper[enter] - self.lower[enter];
        }
        for pos in 0..self.m {
            let w = self.buf_w[pos];
            if w.abs() <= PIVOT_TOL {
                continue;
            }
            let bvar = self.basic[pos];
            let bx = self.x[bvar];
            // The basic variable moves by −dir·w·α.
            let delta = dir * w;
            let (limit, to_upper) = if delta > 0.0 {
                if !self.lower[bvar].is_finite() {
                    continue;
                }
                ((bx - self.lower[bvar]) / delta, false)
            } else {
                if !self.upper[bvar].is_finite() {
                    continue;
                }
                ((bx - self.upper[bvar]) / delta, true)
            };
            let limit = limit.max(0.0);
            let better = limit < alpha
                || (limit == alpha && !matches!(leave, Leave::BoundFlip) && bvar < leave_var);
            if better {
                alpha = limit;
                leave = Leave::Basic { pos, to_upper };
                leave_var = bvar;
            }
        }
        if alpha.is_infinite() {
            return Err(SimplexError::Unbounded);
        }
        Ok(Step { alpha, leave })
    }
}

enum Leave {
    /// The entering variable travels to its opposite bound; basis unchanged.
    BoundFlip,
    /// The basic variable in `pos` reaches a bound and leaves.
    Basic { pos: usize, to_upper: bool },
}

struct Step {
    alpha: f64,
    leave: Leave,
}
