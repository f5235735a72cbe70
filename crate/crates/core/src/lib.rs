//! Mirror descent and composite mirror descent for non-smooth convex
//! problems over compact sets, with adaptive step-size rules that never
//! consult a Lipschitz constant, weak-ergodic iterate averaging, and
//! machinery to audit finished runs against their convergence guarantees.
//!
//! The crate is organized around five pieces:
//!
//! * [`geometry`]: norms, feasible sets with exact projections, distance
//!   generating functions and their Bregman divergences, and exact solvers
//!   for the mirror-step subproblems.
//! * [`schedule`]: step-size rules (fixed, Nesterov-adaptive, and the
//!   monotone Lipschitz-free rule driven by the running statistic `G_k`),
//!   weak-ergodic weights, and online weighted averaging.
//! * [`solver`]: the iteration drivers, producing a full [`solver::RunTrace`].
//! * [`analysis`]: evaluation of the convergence-bound right-hand sides on a
//!   finished trace, per-iterate certificate audits, and empirical rate fits.
//! * [`problems`]: a registry of test problems with known optima, including
//!   instances whose subgradients are unbounded over the feasible set.
//!
//! The `md` binary wraps all of this behind `run`, `table1`, and `sweep`
//! subcommands.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod problems;
pub mod schedule;
pub mod solver;

pub use analysis::{audit_trace, AuditOutcome, BoundParams, BoundReport, ReportKind};
pub use error::{Error, Result};
pub use geometry::{
    composite_mirror_step, mirror_step, CompositeTerm, FeasibleSet, MirrorMap, NormPair, Vector,
};
pub use schedule::{ErgodicAverager, RuleKind, StepSizeRule, WeightScheme};
pub use solver::{
    composite_mirror_descent, mirror_descent, solve, IterateStorage, Objective, RunStatus,
    RunTrace, SolverConfig,
};
