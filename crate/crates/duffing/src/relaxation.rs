//! Numerical study of relaxation: trajectories of the nonconvex inclusion,
//! driven by fast-oscillating extreme-point selections, approximate the
//! convexified solution in the C^1 norm as the oscillation level grows.
//!
//! Weak convergence of the selections cannot be enforced directly on a grid;
//! it is realized by alternating between opposite support points over `2^n`
//! equal blocks, whose local averages match the convex solution's selection,
//! and certified after the fact by smooth-test-function integrals.

use crate::bvp::{solve_duffing, Problem, SolveReport, SolveStrategy, SolverOptions};
use crate::error::{Error, Result};
use crate::grid::{c1_distance, DiscreteFunction};
use crate::multimap::SelectionStrategy;
use crate::eigen::{lambda_n, EigenParams};

/// Configuration of a relaxation experiment. The problem must have `p = 2`
/// and an operator that is strongly monotone on bounded balls; the gate
/// value `xi_hat` below must come out positive before levels are run.
#[derive(Clone, Debug)]
pub struct RelaxConfig {
    pub prob: Problem,
    /// Increasing oscillation exponents; level `n` uses `2^n` blocks.
    pub levels: Vec<u32>,
    /// Base of the shrinking selection margins `eps_n = eps0 / 2^n`.
    pub eps0: f64,
    /// Ball radius for the strong-monotonicity and Lipschitz estimates.
    pub eta: f64,
    /// Oscillation direction (unit vector).
    pub direction: Vec<f64>,
    pub solver: SolverOptions,
    /// Sample count and seed for the gate estimates.
    pub samples: usize,
    pub seed: u64,
}

/// Constants assembled by the admissibility gate.
#[derive(Clone, Copy, Debug)]
pub struct RelaxGate {
    pub c_hat_eta: f64,
    pub k_eta: f64,
    pub xi_hat: f64,
}

/// Outcome of one oscillation level.
#[derive(Clone, Debug)]
pub struct RelaxLevel {
    pub level: u32,
    /// `||v_n - u||_{C^1}` between the nonconvex trajectory and the
    /// convexified solution.
    pub c1_distance: f64,
    pub residual_sup: f64,
    /// Smooth-test-function certificate for the oscillating selection.
    pub weak_diag: f64,
    pub eps_n: f64,
    pub converged: bool,
    /// The full nonconvex solve record for this level.
    pub report: SolveReport,
}

/// Full experiment outcome.
#[derive(Clone, Debug)]
pub struct RelaxOutcome {
    pub convex: SolveReport,
    pub gate: RelaxGate,
    pub levels: Vec<RelaxLevel>,
}

/// Admissibility margin
/// `xi_hat = c_hat_eta - ||r||_inf / lambda_1^{1/2} - k_eta * b^2`
/// with `lambda_1` taken at `p = 2` on `[0, b]`.
pub fn xi_hat(
    op: &crate::operators::Operator,
    r: &DiscreteFunction,
    k_eta_sup: f64,
    b: f64,
    eta: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::invalid("eta must be positive"));
    }
    let eigen = EigenParams::new(2.0, b, op.dim())?;
    let lambda1 = lambda_n(&eigen, 1)?;
    let c_hat = op.check_strong_monotonicity(eta, samples, seed).c_hat_eta;
    Ok(c_hat - r.sup_norm() / lambda1.sqrt() - k_eta_sup * b * b)
}

impl RelaxConfig {
    /// Verify the structural invariants and compute the gate constants.
    pub fn gate(&self) -> Result<RelaxGate> {
        if (self.prob.p - 2.0).abs() > 1e-12 {
            return Err(Error::invalid("relaxation experiments require p = 2"));
        }
        if self.levels.is_empty() || self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("levels must be strictly increasing"));
        }
        if !(self.eps0 > 0.0) {
            return Err(Error::invalid("eps0 must be positive"));
        }
        if self.direction.len() != self.prob.dim() {
            return Err(Error::DimensionMismatch);
        }
        let b = self.prob.grid.b();
        let k_eta = self
            .prob
            .multimap
            .check_lipschitz(b, self.eta, self.samples, self.seed)?;
        let c_hat = self
            .prob
            .op
            .check_strong_monotonicity(self.eta, self.samples, self.seed)
            .c_hat_eta;
        let eigen = EigenParams::new(2.0, b, self.prob.dim())?;
        let lambda1 = lambda_n(&eigen, 1)?;
        let value = c_hat - self.prob.r_sup() / lambda1.sqrt() - k_eta * b * b;
        Ok(RelaxGate {
            c_hat_eta: c_hat,
            k_eta,
            xi_hat: value,
        })
    }
}

/// Smooth-test-function certificate: the largest of
/// `| integral (f_n - f, sin(j pi t / b) e_k) dt |` over modes
/// `j = 1..probes` and coordinates `k`, evaluated for the last element of
/// the sequence.
pub fn weak_convergence_diagnostic(
    f_seq: &[DiscreteFunction],
    f: &DiscreteFunction,
    probes: usize,
) -> Result<f64> {
    let last = f_seq
        .last()
        .ok_or_else(|| Error::invalid("empty selection sequence"))?;
    weak_diagnostic_single(last, f, probes)
}

pub(crate) fn weak_diagnostic_single(
    fn_sel: &DiscreteFunction,
    f: &DiscreteFunction,
    probes: usize,
) -> Result<f64> {
    if fn_sel.grid() != f.grid() || fn_sel.dim() != f.dim() {
        return Err(Error::GridMismatch);
    }
    let grid = f.grid();
    let b = grid.b();
    let dim = f.dim();
    let diff = fn_sel.lin_comb(1.0, f, -1.0)?;
    let mut worst = 0.0f64;
    for j in 1..=probes.max(1) {
        for k in 0..dim {
            let probe = DiscreteFunction::from_fn(grid, 1, {
                let diff = &diff;
                let mut i = 0;
                move |t| {
                    let v = diff.value(i)[k] * (j as f64 * std::f64::consts::PI * t / b).sin();
                    i += 1;
                    vec![v]
                }
            });
            worst = worst.max(probe.integrate()?.abs());
        }
    }
    Ok(worst)
}

/// Run the relaxation experiment: solve the convexified problem once, then
/// for each level drive the nonconvex problem by a `2^n`-block oscillating
/// extreme-point selection anchored projection and record the C^1 gap.
///
/// Per-level solver failures are recorded and the experiment continues.
pub fn relax_experiment(cfg: &RelaxConfig) -> Result<RelaxOutcome> {
    let gate = cfg.gate()?;
    if !(gate.xi_hat > 0.0) {
        return Err(Error::invalid(format!(
            "admissibility margin xi_hat = {:.6e} is not positive",
            gate.xi_hat
        )));
    }

    // Convexified solve with the centroid selection.
    let convex_field = cfg.prob.multimap.convexify()?;
    let convex_prob = Problem::new(
        cfg.prob.op.clone(),
        cfg.prob.r.clone(),
        convex_field,
        cfg.prob.p,
        cfg.prob.grid,
    )?;
    let mut convex_opts = cfg.solver.clone();
    convex_opts.strategy = SolveStrategy::Centroid;
    convex_opts.warm_start = None;
    convex_opts.initial_anchor = None;
    let convex = match solve_duffing(&convex_prob, &convex_opts) {
        Ok(rep) => rep,
        Err(Error::FixedPointDidNotConverge { last }) => *last,
        Err(e) => return Err(e),
    };

    let mut levels = Vec::with_capacity(cfg.levels.len());
    for &level in &cfg.levels {
        let eps_n = cfg.eps0 / 2f64.powi(level as i32);
        let oscillating = SelectionStrategy::Oscillating {
            level,
            direction: cfg.direction.clone(),
        };
        let f_n = cfg.prob.multimap.select(&convex.u, &oscillating)?;
        let weak_diag = weak_diagnostic_single(&f_n, &convex.selection, 5)?;

        let mut opts = cfg.solver.clone();
        opts.strategy = SolveStrategy::Projection;
        opts.warm_start = Some((convex.u.clone(), convex.du.clone()));
        opts.initial_anchor = Some(f_n.clone());
        let (report, converged) = match solve_duffing(&cfg.prob, &opts) {
            Ok(rep) => (rep, true),
            Err(Error::FixedPointDidNotConverge { last }) => (*last, false),
            Err(e) => return Err(e),
        };
        let dist = c1_distance(&report.u, &report.du, &convex.u, &convex.du)?;
        levels.push(RelaxLevel {
            level,
            c1_distance: dist,
            residual_sup: report.residual_sup,
            weak_diag,
            eps_n,
            converged,
            report,
        });
    }
    Ok(RelaxOutcome {
        convex,
        gate,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::multimap::{Multimap, MultimapKind, ScalarField, VectorField};
    use crate::operators::{Operator, OperatorKind};

    fn two_point_problem(b: f64, m: usize) -> Problem {
        let grid = Grid::new(b, m).unwrap();
        let interval = Multimap::new(
            MultimapKind::Interval {
                lo: ScalarField::constant(-1.0),
                hi: ScalarField::constant(1.0),
            },
            1,
        )
        .unwrap();
        let field = Multimap::new(MultimapKind::ExtremeOf(Box::new(interval)), 1).unwrap();
        Problem::new(
            Operator::new(OperatorKind::Linear { c: 1.0 }, 1).unwrap(),
            DiscreteFunction::zeros(grid, 1),
            field,
            2.0,
            grid,
        )
        .unwrap()
    }

    fn config(prob: Problem, levels: Vec<u32>) -> RelaxConfig {
        let mut solver = SolverOptions::new(SolveStrategy::Projection);
        solver.tol = 1e-9;
        solver.damping = 1.0;
        RelaxConfig {
            prob,
            levels,
            eps0: 1e-3,
            eta: 2.0,
            direction: vec![1.0],
            solver,
            samples: 200,
            seed: 7,
        }
    }

    #[test]
    fn xi_hat_reduces_to_monotonicity_constant() {
        let grid = Grid::new(1.0, 64).unwrap();
        let op = Operator::new(OperatorKind::Linear { c: 1.0 }, 1).unwrap();
        let r = DiscreteFunction::zeros(grid, 1);
        let v = xi_hat(&op, &r, 0.0, 1.0, 1.0, 100, 1).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "xi_hat {v}");
    }

    #[test]
    fn xi_hat_subtracts_lipschitz_mass() {
        let grid = Grid::new(0.5, 64).unwrap();
        let op = Operator::new(OperatorKind::Linear { c: 1.0 }, 1).unwrap();
        let r = DiscreteFunction::zeros(grid, 1);
        let v = xi_hat(&op, &r, 1.0, 0.5, 1.0, 100, 1).unwrap();
        assert!((v - 0.75).abs() < 1e-9, "xi_hat {v}");
        let gone = xi_hat(&op, &r, 1.0, 1.0, 1.0, 100, 1).unwrap();
        assert!(gone.abs() < 1e-9, "xi_hat {gone}");
    }

    #[test]
    fn gate_refuses_vanishing_margin() {
        // k_eta = 1 at b = 1 kills the margin for the linear operator.
        let grid = Grid::new(1.0, 64).unwrap();
        let moving = Multimap::new(
            MultimapKind::Ball {
                center: VectorField::new(vec![ScalarField::new(|_, x| x[0])]),
                radius: ScalarField::constant(1.0),
            },
            1,
        )
        .unwrap();
        let prob = Problem::new(
            Operator::new(OperatorKind::Linear { c: 1.0 }, 1).unwrap(),
            DiscreteFunction::zeros(grid, 1),
            moving,
            2.0,
            grid,
        )
        .unwrap();
        let cfg = config(prob, vec![2, 3]);
        let gate = cfg.gate().unwrap();
        assert!(gate.xi_hat <= 1e-6, "gate {gate:?}");
        assert!(relax_experiment(&cfg).is_err());
    }

    #[test]
    fn two_point_field_distance_decays_with_level() {
        let cfg = config(two_point_problem(0.5, 1024), vec![2, 3, 4, 5, 6, 7, 8]);
        let outcome = relax_experiment(&cfg).unwrap();
        // The convexified centroid solution is identically zero.
        assert_eq!(outcome.convex.u.sup_norm(), 0.0);
        let dist: Vec<f64> = outcome.levels.iter().map(|l| l.c1_distance).collect();
        let d3 = outcome.levels.iter().find(|l| l.level == 3).unwrap().c1_distance;
        let d8 = outcome.levels.iter().find(|l| l.level == 8).unwrap().c1_distance;
        assert!(d8 <= 1e-2, "final distance {d8}");
        assert!(d8 < d3, "distances {dist:?}");
        // Monotone non-increase from level 3 onward, 10% slack.
        let from3: Vec<f64> = outcome
            .levels
            .iter()
            .filter(|l| l.level >= 3)
            .map(|l| l.c1_distance)
            .collect();
        for w in from3.windows(2) {
            assert!(w[1] <= w[0] * 1.10, "non-monotone: {from3:?}");
        }
    }

    #[test]
    fn every_level_trajectory_is_a_valid_solve() {
        // Boundary exactness, membership in the nonconvex field, and a small
        // residual hold for each level's trajectory; the convexified
        // solution's selection stays in the hull nodewise.
        let cfg = config(two_point_problem(0.5, 1024), vec![2, 4, 6]);
        let outcome = relax_experiment(&cfg).unwrap();
        let hull = cfg.prob.multimap.convexify().unwrap();
        let cgrid = outcome.convex.u.grid();
        for (i, t) in cgrid.nodes().enumerate() {
            let d = hull
                .distance(t, outcome.convex.u.value(i), outcome.convex.selection.value(i))
                .unwrap();
            assert!(d <= 1e-8, "hull membership at node {i}: {d}");
        }
        for level in &outcome.levels {
            let rep = &level.report;
            assert!(rep.u.value(0)[0].abs() <= 1e-8);
            assert!(rep.u.value(1024)[0].abs() <= 1e-8);
            let grid = rep.u.grid();
            for (i, t) in grid.nodes().enumerate() {
                let d = cfg
                    .prob
                    .multimap
                    .distance(t, rep.u.value(i), rep.selection.value(i))
                    .unwrap();
                assert!(d <= 1e-8, "level {} node {i}: membership {d}", level.level);
            }
            assert!(
                rep.residual_sup <= 50.0 * cfg.solver.tol,
                "level {} residual {}",
                level.level,
                rep.residual_sup
            );
        }
    }

    #[test]
    fn singleton_field_gives_zero_distance_at_every_level() {
        let grid = Grid::new(0.5, 256).unwrap();
        let field = Multimap::new(
            MultimapKind::Singleton(VectorField::new(vec![ScalarField::new(|t, _| {
                (std::f64::consts::PI * t).sin()
            })])),
            1,
        )
        .unwrap();
        let prob = Problem::new(
            Operator::new(OperatorKind::Linear { c: 1.0 }, 1).unwrap(),
            DiscreteFunction::zeros(grid, 1),
            field,
            2.0,
            grid,
        )
        .unwrap();
        let cfg = config(prob, vec![1, 4]);
        let outcome = relax_experiment(&cfg).unwrap();
        for level in &outcome.levels {
            assert!(level.c1_distance <= 1e-8, "level {} distance {}", level.level, level.c1_distance);
        }
    }

    #[test]
    fn halving_b_does_not_increase_distances() {
        let long = relax_experiment(&config(two_point_problem(0.5, 1024), vec![3, 5])).unwrap();
        let short = relax_experiment(&config(two_point_problem(0.25, 1024), vec![3, 5])).unwrap();
        for (a, b) in long.levels.iter().zip(&short.levels) {
            assert!(b.c1_distance <= a.c1_distance + 1e-12);
        }
    }

    #[test]
    fn weak_diagnostic_vanishes_for_equal_sequences() {
        let grid = Grid::new(1.0, 128).unwrap();
        let f = DiscreteFunction::from_scalar_fn(grid, |t| t.sin());
        let v = weak_convergence_diagnostic(&[f.clone(), f.clone()], &f, 5).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn weak_diagnostic_decays_for_square_waves() {
        let b = 0.5;
        let grid = Grid::new(b, 2048).unwrap();
        let prob = two_point_problem(b, 2048);
        let u = DiscreteFunction::zeros(grid, 1);
        let zero = DiscreteFunction::zeros(grid, 1);
        let sel = |level: u32| {
            prob.multimap
                .select(
                    &u,
                    &SelectionStrategy::Oscillating {
                        level,
                        direction: vec![1.0],
                    },
                )
                .unwrap()
        };
        let d4 = weak_diagnostic_single(&sel(4), &zero, 5).unwrap();
        let d8 = weak_diagnostic_single(&sel(8), &zero, 5).unwrap();
        // The L1 scale of the perturbation is b = 0.5.
        assert!(d8 <= 0.02 * 0.5, "diag(8) = {d8}");
        assert!(d4 / d8 >= 1.5, "decay {d4} -> {d8}");
    }
}
