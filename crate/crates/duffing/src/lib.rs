//! duffing: a solver library for vector-valued quasilinear two-point
//! boundary value problems whose forcing is a set-valued field,
//!
//! ```text
//! -a(u'(t))' + r(t) |u'(t)|^{p-2} u'(t) = f(t),  f(t) in F(t, u(t)),
//! u(0) = u(b) = 0,
//! ```
//!
//! where `a` is a monotone radial homeomorphism of R^N (p-Laplacian and
//! friends) and `F` is a parametric closed-valued field (intervals, balls,
//! boxes, finite sets, and their extreme points).
//!
//! The pieces:
//!
//! - [`grid`]: uniform grids, sampled paths, trapezoid calculus, norms.
//! - [`operators`]: the operator families, numeric inversion, and sampled
//!   coercivity / strong-monotonicity checks.
//! - [`eigen`]: the Dirichlet eigenvalue sequence of the one-dimensional
//!   p-Laplacian, generalized sine eigenfunctions, the Rayleigh quotient,
//!   and the positivity-margin estimate.
//! - [`multimap`]: set values, Hausdorff distance, projections, support and
//!   extreme points, selection strategies, sampled growth and Lipschitz
//!   checks.
//! - [`bvp`]: the auxiliary solution map, the shooting solve, the damped
//!   fixed-point iteration, the homotopy branch, and the a-priori bound.
//! - [`relaxation`]: nonconvex trajectories driven by oscillating
//!   extreme-point selections approximating the convexified solution.
//! - [`hypothesis`]: aggregated admissibility report with derived constants.
//! - [`config`] / [`output`] / [`expr`]: JSON configuration, deterministic
//!   CSV/JSON/SVG emission, and the coefficient expression grammar.
//!
//! The `duffing` binary exposes the `eigen`, `solve`, `branch`, `check`, and
//! `relax` subcommands over these pieces.

// Parameter guards are written as `!(x > 0.0)` on purpose: the negation
// rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bvp;
pub mod config;
pub mod eigen;
pub mod error;
pub mod expr;
pub mod grid;
pub mod hypothesis;
pub mod multimap;
pub mod operators;
pub mod output;
pub mod relaxation;

pub use bvp::{
    apriori_bound, shooting_constant, solve_auxiliary, solve_branch, solve_duffing,
    AuxiliarySolution, BranchPoint, Problem, SolveReport, SolveStrategy, SolverOptions,
};
pub use config::Config;
pub use eigen::{
    eigenfunction, estimate_c1, lambda_n, pi_p, psi, rayleigh, EigenParams, PsiParams,
};
pub use error::{Error, Result};
pub use grid::{c1_distance, norms, DiscreteFunction, Grid, Norms};
pub use hypothesis::{compile_report, CheckEntry, HypothesisReport, TheoremFlags};
pub use multimap::{
    hausdorff, EtaBound, GrowthWitness, Multimap, MultimapKind, ScalarField, SelectionStrategy,
    SetValue, VectorField,
};
pub use operators::{Operator, OperatorKind, RadialProfile};
pub use relaxation::{relax_experiment, weak_convergence_diagnostic, RelaxConfig, RelaxOutcome};
