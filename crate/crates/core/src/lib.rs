//! Peak-shaving schedules for fleets of on/off heat converters.
//!
//! Each converter consumes a fixed amount of electricity per running interval
//! and produces heat into a bounded buffer that must cover a known demand
//! profile. The solver picks a binary on/off schedule minimizing the
//! electricity peak under one of four measures (basic, maximal, absolute,
//! fluctuation), with a certified absolute error: the returned schedule is
//! within max_c |E_c| of optimal (twice that for the fluctuation measure).
//!
//! Pipeline: exact reformulation of buffer feasibility into integral prefix
//! bounds ([`instance`]), an LP relaxation solved by an internal simplex
//! ([`lp`]), cycle cancelling until the non-integrality graph is a forest
//! ([`reduce`]), and a peel-order rounding that turns the fractional solution
//! binary without raising any per-interval load by more than max |E_c|
//! ([`round`]). A brute-force [`oracle`] provides ground truth on small
//! instances, and [`generate`] builds feasible random instances.

pub mod generate;
pub mod instance;
pub mod lp;
mod lu;
pub mod numeric;
pub mod oracle;
pub mod reduce;
pub mod round;
mod simplex;

pub use generate::{generate_instance, BaseProfile, GenConfig};
pub use instance::{
    check_feasible, evaluate_binary, evaluate_objective, reformulate, split_zero_e,
    validate_instance, Converter, Instance, ObjectiveKind, PrefixBounds, ValidationReport,
};
pub use lp::{
    build_relaxation, dump_lp, extract_relaxed, solve_lp, solve_relaxation, LinearProgram,
    LpError, LpSolution, RelaxedSolution, DEFAULT_SNAP_TOL,
};
pub use numeric::Real;
pub use oracle::{exact_solve, exact_solve_with_cap, OracleError, OracleResult};
pub use round::{
    approximate_solve, solve_detailed, BinarySchedule, SolveError, SolveOptions, SolveReport,
};
