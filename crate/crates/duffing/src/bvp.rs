//! The boundary-value solver: the auxiliary solution map, the shooting solve
//! for its integration constant, the damped fixed-point iteration for the
//! full inclusion, the homotopy branch, and the a-priori norm bound.
//!
//! The auxiliary Dirichlet problem `-a(u')' = h, u(0) = u(b) = 0` is solved
//! in closed form up to one finite-dimensional root solve: writing
//! `a(u'(t)) = c - integral_0^t h`, the constant `c` is pinned by the
//! boundary condition `integral_0^b a^{-1}(c - integral_0^t h) dt = 0`, whose
//! left side is strictly monotone in `c`.
//!
//! The full problem is solved by Picard iteration with damping,
//! `u <- (1-d) u + d K(f - r |u'|^{p-2} u')`, where `f` is a nodewise
//! selection of the set-valued field along the current iterate. Convergence
//! of this iteration is not guaranteed in general; non-convergence is
//! reported with the last iterate attached, never treated as nonexistence.

use crate::error::{Error, Result};
use crate::grid::{c1_distance, euclid, DiscreteFunction, Grid};
use crate::multimap::{GrowthWitness, Multimap, SelectionStrategy};
use crate::operators::Operator;
use crate::eigen::{lambda_n, EigenParams};

/// Problem data for `-a(u')' + r(t) |u'|^{p-2} u' = f(t), f(t) in F(t, u(t))`
/// with homogeneous Dirichlet conditions on `[0, b]`.
#[derive(Clone, Debug)]
pub struct Problem {
    pub op: Operator,
    pub r: DiscreteFunction,
    pub multimap: Multimap,
    pub p: f64,
    pub grid: Grid,
}

impl Problem {
    pub fn new(
        op: Operator,
        r: DiscreteFunction,
        multimap: Multimap,
        p: f64,
        grid: Grid,
    ) -> Result<Self> {
        if (op.p() - p).abs() > 1e-12 {
            return Err(Error::invalid("operator growth exponent must match the problem's p"));
        }
        if r.grid() != grid || r.dim() != 1 {
            return Err(Error::GridMismatch);
        }
        r.check_finite()?;
        if multimap.dim() != op.dim() {
            return Err(Error::DimensionMismatch);
        }
        Ok(Problem {
            op,
            r,
            multimap,
            p,
            grid,
        })
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Sup over nodes of `|r|`.
    pub fn r_sup(&self) -> f64 {
        self.r.sup_norm()
    }
}

/// Output of one auxiliary solve.
#[derive(Clone, Debug)]
pub struct AuxiliarySolution {
    pub u: DiscreteFunction,
    pub du: DiscreteFunction,
    pub shooting_constant: Vec<f64>,
}

/// Solution record of a fixed-point solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub u: DiscreteFunction,
    pub du: DiscreteFunction,
    /// The nodewise selection the trajectory was driven by.
    pub selection: DiscreteFunction,
    /// Sup over nodes of the first-order-system mismatch between the
    /// reported trajectory and its own data (selection plus damping term).
    pub residual_sup: f64,
    pub iterations: usize,
    /// The constant `a(u'(0))` of the final auxiliary solve.
    pub shooting_constant: Vec<f64>,
    /// A-priori bound on `||u'||_p` when the caller supplied one.
    pub apriori_bound: Option<f64>,
    /// `||u'||_p <= 1.05 * apriori_bound` (5% discretization slack).
    pub within_bound: Option<bool>,
    pub converged: bool,
    /// C^1 displacement of the last iteration.
    pub last_step: f64,
    /// Homotopy parameter the solve was run at (1 for a plain solve).
    pub lambda: f64,
}

/// Strategy selector for the fixed-point iteration. `Projection` anchors at
/// the previous iteration's selection, which keeps the iteration map
/// single-valued and is the default.
#[derive(Clone, Debug)]
pub enum SolveStrategy {
    Projection,
    Centroid,
    Extreme { direction: Vec<f64> },
    Oscillating { level: u32, direction: Vec<f64> },
}

/// Options of the fixed-point solve.
#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub strategy: SolveStrategy,
    /// Damping factor in (0, 1].
    pub damping: f64,
    /// Stop when the C^1 distance between iterates falls below this.
    pub tol: f64,
    pub max_iter: usize,
    /// A-priori bound to record in the report, if available.
    pub apriori: Option<f64>,
    /// Warm start for `(u, u')`.
    pub warm_start: Option<(DiscreteFunction, DiscreteFunction)>,
    /// Initial anchor for the projection strategy (defaults to zero).
    pub initial_anchor: Option<DiscreteFunction>,
}

impl SolverOptions {
    pub fn new(strategy: SolveStrategy) -> Self {
        SolverOptions {
            strategy,
            damping: 0.5,
            tol: 1e-6,
            max_iter: 200,
            apriori: None,
            warm_start: None,
            initial_anchor: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid("damping must lie in (0, 1]"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        Ok(())
    }
}

/// `|v|^{p-2} v` with the Euclidean norm, extended by 0 at the origin.
pub(crate) fn p_power(v: &[f64], p: f64) -> Vec<f64> {
    let s = euclid(v);
    if s == 0.0 {
        return vec![0.0; v.len()];
    }
    let factor = s.powf(p - 2.0);
    v.iter().map(|c| factor * c).collect()
}

/// Trapezoid of `a^{-1}(c + H(t))` over the grid; also returns the nodewise
/// inverse when a buffer is supplied.
fn phi_map(
    op: &Operator,
    hcum: &DiscreteFunction,
    c: &[f64],
    mut store: Option<&mut DiscreteFunction>,
) -> Result<Vec<f64>> {
    let grid = hcum.grid();
    let dim = hcum.dim();
    let h = grid.h();
    let mut acc = vec![0.0; dim];
    let mut prev = vec![0.0; dim];
    let mut cur = vec![0.0; dim];
    let mut z = vec![0.0; dim];
    let mut hint = 1.0;
    for i in 0..grid.num_nodes() {
        let hv = hcum.value(i);
        for k in 0..dim {
            z[k] = c[k] + hv[k];
        }
        let r = euclid(&z);
        if r == 0.0 {
            cur.iter_mut().for_each(|v| *v = 0.0);
        } else {
            let s = op.invert_radial(r, hint)?;
            hint = s.max(1e-9);
            let scale = s / r;
            for k in 0..dim {
                cur[k] = scale * z[k];
            }
        }
        if let Some(store) = store.as_deref_mut() {
            store.value_mut(i).copy_from_slice(&cur);
        }
        if i > 0 {
            for k in 0..dim {
                acc[k] += 0.5 * h * (prev[k] + cur[k]);
            }
        }
        prev.copy_from_slice(&cur);
    }
    Ok(acc)
}

/// The constant `c = a(u'(0))` making the auxiliary solution satisfy the far
/// boundary condition: the unique root of
/// `Phi(c) = integral_0^b a^{-1}(c + H(t)) dt` with `H` the running integral
/// of `-h`. Componentwise residual target 1e-10.
pub fn shooting_constant(op: &Operator, h: &DiscreteFunction) -> Result<Vec<f64>> {
    if h.dim() != op.dim() {
        return Err(Error::DimensionMismatch);
    }
    let hcum = h.scaled(-1.0).cumulative_integral()?;
    shoot_on_cumulative(op, &hcum)
}

fn shoot_on_cumulative(op: &Operator, hcum: &DiscreteFunction) -> Result<Vec<f64>> {
    let dim = hcum.dim();
    let b = hcum.grid().b();
    let mean: Vec<f64> = hcum
        .integrate_components()?
        .into_iter()
        .map(|v| v / b)
        .collect();
    let start: Vec<f64> = mean.iter().map(|v| -v).collect();
    if dim == 1 {
        shoot_scalar(op, hcum, start[0]).map(|c| vec![c])
    } else {
        shoot_vector(op, hcum, start)
    }
}

fn shoot_scalar(op: &Operator, hcum: &DiscreteFunction, start: f64) -> Result<f64> {
    let phi = |c: f64| -> Result<f64> { Ok(phi_map(op, hcum, &[c], None)?[0]) };
    let spread = (0..hcum.grid().num_nodes())
        .map(|i| hcum.scalar(i).abs())
        .fold(0.0, f64::max);
    let mut width = 1.0 + spread;
    let mut lo = start - width;
    let mut hi = start + width;
    let mut guard = 0;
    // Phi is strictly increasing, so expand until the signs straddle zero.
    while phi(lo)? > 0.0 {
        width *= 2.0;
        lo = start - width;
        guard += 1;
        if guard > 80 {
            return Err(Error::ShootingDiverged);
        }
    }
    guard = 0;
    while phi(hi)? < 0.0 {
        width *= 2.0;
        hi = start + width;
        guard += 1;
        if guard > 80 {
            return Err(Error::ShootingDiverged);
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..300 {
        mid = 0.5 * (lo + hi);
        let val = phi(mid)?;
        if val.abs() <= 1e-10 {
            return Ok(mid);
        }
        if val < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * (1.0 + mid.abs()) {
            break;
        }
    }
    let val = phi(mid)?;
    if val.abs() <= 1e-8 {
        Ok(mid)
    } else {
        Err(Error::ShootingDiverged)
    }
}

/// Damped gradient-type iteration with Barzilai-Borwein steps; `Phi` is the
/// gradient of a smooth convex potential, so descent with step halving on
/// the residual is globally safe.
fn shoot_vector(op: &Operator, hcum: &DiscreteFunction, start: Vec<f64>) -> Result<Vec<f64>> {
    let phi = |c: &[f64]| -> Result<Vec<f64>> { phi_map(op, hcum, c, None) };
    let inf_norm = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut c = start;
    let mut resid = phi(&c)?;
    let mut alpha = {
        // Directional secant along the residual for the initial step size.
        let rn = euclid(&resid);
        if rn == 0.0 {
            return Ok(c);
        }
        let tau = 1e-4 * (1.0 + euclid(&c)) / rn;
        let probe: Vec<f64> = c.iter().zip(&resid).map(|(ci, ri)| ci - tau * ri).collect();
        let pr = phi(&probe)?;
        let slope: f64 = resid
            .iter()
            .zip(&pr)
            .zip(&resid)
            .map(|((r, pr), dir)| (r - pr) * dir)
            .sum::<f64>()
            / (tau * rn * rn);
        if slope > 1e-12 {
            (1.0 / slope).clamp(1e-12, 1e12)
        } else {
            1.0
        }
    };
    for _ in 0..500 {
        if inf_norm(&resid) <= 1e-10 {
            return Ok(c);
        }
        let mut trial_alpha = alpha;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = c
                .iter()
                .zip(&resid)
                .map(|(ci, ri)| ci - trial_alpha * ri)
                .collect();
            let cand_resid = phi(&cand)?;
            if inf_norm(&cand_resid) < inf_norm(&resid) {
                accepted = Some((cand, cand_resid, trial_alpha));
                break;
            }
            trial_alpha *= 0.5;
        }
        let Some((cand, cand_resid, used_alpha)) = accepted else {
            return Err(Error::ShootingDiverged);
        };
        let s: Vec<f64> = cand.iter().zip(&c).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = cand_resid.iter().zip(&resid).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let yy: f64 = y.iter().zip(&y).map(|(a, b)| a * b).sum();
        alpha = if sy > 0.0 && yy > 0.0 {
            (sy / yy).clamp(1e-12, 1e12)
        } else {
            used_alpha
        };
        c = cand;
        resid = cand_resid;
    }
    if inf_norm(&resid) <= 1e-8 {
        Ok(c)
    } else {
        Err(Error::ShootingDiverged)
    }
}

/// Solve the auxiliary Dirichlet problem `-a(u')' = h, u(0) = u(b) = 0`.
///
/// `u'(t_i) = a^{-1}(c + H(t_i))` with `H` the running integral of `-h`, and
/// `u` is the running integral of `u'`; `u(b)` vanishes to the shooting
/// tolerance because it is the same trapezoid sum the root solve drove to
/// zero.
pub fn solve_auxiliary(op: &Operator, h: &DiscreteFunction) -> Result<AuxiliarySolution> {
    if h.dim() != op.dim() {
        return Err(Error::DimensionMismatch);
    }
    h.check_finite()?;
    let hcum = h.scaled(-1.0).cumulative_integral()?;
    let c = shoot_on_cumulative(op, &hcum)?;
    let mut du = DiscreteFunction::zeros(h.grid(), h.dim());
    phi_map(op, &hcum, &c, Some(&mut du))?;
    let u = du.cumulative_integral()?;
    Ok(AuxiliarySolution {
        u,
        du,
        shooting_constant: c,
    })
}

fn selection_for(
    prob: &Problem,
    u: &DiscreteFunction,
    anchor: &DiscreteFunction,
    strategy: &SolveStrategy,
) -> Result<DiscreteFunction> {
    let s = match strategy {
        SolveStrategy::Projection => SelectionStrategy::Projection {
            anchor: anchor.clone(),
        },
        SolveStrategy::Centroid => SelectionStrategy::Centroid,
        SolveStrategy::Extreme { direction } => SelectionStrategy::Extreme {
            direction: direction.clone(),
        },
        SolveStrategy::Oscillating { level, direction } => SelectionStrategy::Oscillating {
            level: *level,
            direction: direction.clone(),
        },
    };
    prob.multimap.select(u, &s)
}

/// Data handed to the auxiliary solve: `h = f - r |u'|^{p-2} u'`.
fn assemble_data(
    prob: &Problem,
    f: &DiscreteFunction,
    du: &DiscreteFunction,
) -> Result<DiscreteFunction> {
    let dim = prob.dim();
    let mut h = DiscreteFunction::zeros(prob.grid, dim);
    for i in 0..prob.grid.num_nodes() {
        let damping = p_power(du.value(i), prob.p);
        let r = prob.r.scalar(i);
        let fv = f.value(i);
        for k in 0..dim {
            h.value_mut(i)[k] = fv[k] - r * damping[k];
        }
    }
    Ok(h)
}

/// Picard iteration for `u = lambda K(f - r |u'|^{p-2} u')` with damping.
fn solve_scaled(prob: &Problem, lambda: f64, opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    let dim = prob.dim();
    let (mut u, mut du) = match &opts.warm_start {
        Some((u0, du0)) => {
            if u0.grid() != prob.grid || u0.dim() != dim || du0.grid() != prob.grid {
                return Err(Error::GridMismatch);
            }
            (u0.clone(), du0.clone())
        }
        None => (
            DiscreteFunction::zeros(prob.grid, dim),
            DiscreteFunction::zeros(prob.grid, dim),
        ),
    };
    let mut anchor = match &opts.initial_anchor {
        Some(a) => {
            if a.grid() != prob.grid || a.dim() != dim {
                return Err(Error::GridMismatch);
            }
            a.clone()
        }
        None => DiscreteFunction::zeros(prob.grid, dim),
    };
    let d = opts.damping;
    let mut last_step = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    for k in 0..opts.max_iter {
        let f = selection_for(prob, &u, &anchor, &opts.strategy)?;
        let data = assemble_data(prob, &f, &du)?;
        let aux = solve_auxiliary(&prob.op, &data)?;
        let next_u = u.lin_comb(1.0 - d, &aux.u, d * lambda)?;
        let next_du = du.lin_comb(1.0 - d, &aux.du, d * lambda)?;
        last_step = c1_distance(&next_u, &next_du, &u, &du)?;
        u = next_u;
        du = next_du;
        anchor = f;
        iterations = k + 1;
        if last_step < opts.tol {
            converged = true;
            break;
        }
    }
    let report = finalize_report(prob, lambda, &u, &du, &anchor, opts, iterations, converged, last_step)?;
    if converged {
        Ok(report)
    } else {
        Err(Error::FixedPointDidNotConverge {
            last: Box::new(report),
        })
    }
}

/// One clean auxiliary pass through the final selection, so the reported
/// trajectory is an exact image of the solution map and the recorded
/// selection is a member of the field along the reported trajectory.
#[allow(clippy::too_many_arguments)]
fn finalize_report(
    prob: &Problem,
    lambda: f64,
    u: &DiscreteFunction,
    du: &DiscreteFunction,
    anchor: &DiscreteFunction,
    opts: &SolverOptions,
    iterations: usize,
    converged: bool,
    last_step: f64,
) -> Result<SolveReport> {
    let f_last = selection_for(prob, u, anchor, &opts.strategy)?;
    let data = assemble_data(prob, &f_last, du)?;
    let aux = solve_auxiliary(&prob.op, &data)?;
    let u_out = aux.u.scaled(lambda);
    let du_out = aux.du.scaled(lambda);
    let f_out = selection_for(prob, &u_out, &f_last, &opts.strategy)?;

    // First-order residual: a(du_aux) should equal c - cumulative posting of
    // the trajectory's own data h* = f* - r |du*|^{p-2} du*.
    let data_out = assemble_data(prob, &f_out, &du_out)?;
    let cum = data_out.cumulative_integral()?;
    let mut residual: f64 = 0.0;
    for i in 0..prob.grid.num_nodes() {
        let a_val = prob.op.eval(aux.du.value(i));
        let cum_i = cum.value(i);
        let mut err2 = 0.0;
        for k in 0..prob.dim() {
            let e = a_val[k] - (aux.shooting_constant[k] - cum_i[k]);
            err2 += e * e;
        }
        residual = residual.max(err2.sqrt());
    }

    let w1p = du_out.lp_norm(prob.p)?;
    let within_bound = opts.apriori.map(|bound| w1p <= bound * 1.05);
    Ok(SolveReport {
        u: u_out,
        du: du_out,
        selection: f_out,
        residual_sup: residual,
        iterations,
        shooting_constant: aux.shooting_constant,
        apriori_bound: opts.apriori,
        within_bound,
        converged,
        last_step,
        lambda,
    })
}

/// Solve the inclusion at full strength (`lambda = 1`).
pub fn solve_duffing(prob: &Problem, opts: &SolverOptions) -> Result<SolveReport> {
    solve_scaled(prob, 1.0, opts)
}

/// One point of the homotopy branch.
#[derive(Clone, Debug)]
pub struct BranchPoint {
    pub lambda: f64,
    pub report: SolveReport,
}

/// Solve `u = lambda K(N(u))` along an increasing list of homotopy
/// parameters ending at 1, warm-starting each point from the previous one.
/// Non-convergence at a point is recorded (the branch continues from the
/// last iterate) rather than aborting the sweep.
pub fn solve_branch(
    prob: &Problem,
    lambdas: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<BranchPoint>> {
    if lambdas.is_empty() {
        return Err(Error::invalid("branch needs at least one parameter"));
    }
    if lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("branch parameters must be strictly increasing"));
    }
    if lambdas.iter().any(|l| !(*l > 0.0 && *l <= 1.0)) {
        return Err(Error::invalid("branch parameters must lie in (0, 1]"));
    }
    if (lambdas[lambdas.len() - 1] - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("branch must end at lambda = 1"));
    }
    let mut out = Vec::with_capacity(lambdas.len());
    let mut carried = opts.clone();
    for &lambda in lambdas {
        let report = match solve_scaled(prob, lambda, &carried) {
            Ok(rep) => rep,
            Err(Error::FixedPointDidNotConverge { last }) => *last,
            Err(e) => return Err(e),
        };
        carried.warm_start = Some((report.u.clone(), report.du.clone()));
        carried.initial_anchor = Some(report.selection.clone());
        out.push(BranchPoint { lambda, report });
    }
    Ok(out)
}

/// A-priori bound `(||a_eps||_1 / (c1 - eps/lambda1))^{1/p}` on `||u'||_p`
/// over the homotopy family, relative to the declared growth witness: the
/// integrable bound at the widest declared radius stands in for the
/// epsilon-split envelope.
pub fn apriori_bound(
    prob: &Problem,
    eps: f64,
    witness: &GrowthWitness,
    c1: f64,
) -> Result<f64> {
    if !(c1 > 0.0) {
        return Err(Error::invalid("positivity margin must be positive"));
    }
    let eigen = EigenParams::new(prob.p, prob.grid.b(), prob.dim())?;
    let lambda1 = lambda_n(&eigen, 1)?;
    if !(eps > 0.0 && eps < lambda1 * c1) {
        return Err(Error::EpsilonOutsideWindow);
    }
    let widest = witness
        .widest()
        .ok_or_else(|| Error::invalid("growth witness carries no boundedness profile"))?;
    let a_norm = widest.profile.integrate()?;
    Ok((a_norm / (c1 - eps / lambda1)).powf(1.0 / prob.p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multimap::{MultimapKind, ScalarField, VectorField};
    use crate::operators::OperatorKind;
    use std::f64::consts::PI;

    fn linear_op(dim: usize) -> Operator {
        Operator::new(OperatorKind::Linear { c: 1.0 }, dim).unwrap()
    }

    fn singleton_problem(
        grid: Grid,
        r: impl Fn(f64) -> f64 + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Problem {
        let field = Multimap::new(
            MultimapKind::Singleton(VectorField::new(vec![ScalarField::new(move |t, _| g(t))])),
            1,
        )
        .unwrap();
        Problem::new(
            linear_op(1),
            DiscreteFunction::from_scalar_fn(grid, r),
            field,
            2.0,
            grid,
        )
        .unwrap()
    }

    #[test]
    fn shooting_zero_data_gives_zero_constant() {
        let grid = Grid::new(1.0, 64).unwrap();
        let op = linear_op(1);
        let h = DiscreteFunction::zeros(grid, 1);
        let c = shooting_constant(&op, &h).unwrap();
        assert!(c[0].abs() < 1e-12);
    }

    #[test]
    fn shooting_linear_closed_form() {
        let grid = Grid::new(1.0, 256).unwrap();
        let op = linear_op(1);
        let h = DiscreteFunction::from_scalar_fn(grid, |_| 1.0);
        let c = shooting_constant(&op, &h).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-10, "c = {}", c[0]);
    }

    #[test]
    fn shooting_p_laplacian_symmetry() {
        let grid = Grid::new(1.0, 256).unwrap();
        let op = Operator::new(OperatorKind::PLaplacian { p: 3.0 }, 1).unwrap();
        let h = DiscreteFunction::from_scalar_fn(grid, |_| 1.0);
        let c = shooting_constant(&op, &h).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-9, "c = {}", c[0]);
    }

    #[test]
    fn shooting_is_monotone_in_c() {
        let grid = Grid::new(1.0, 128).unwrap();
        let op = Operator::new(OperatorKind::PLaplacian { p: 3.0 }, 1).unwrap();
        let h = DiscreteFunction::from_scalar_fn(grid, |t| (2.0 * t).sin());
        let hcum = h.scaled(-1.0).cumulative_integral().unwrap();
        let mut last = f64::NEG_INFINITY;
        for j in 0..20 {
            let c = -2.0 + 4.0 * j as f64 / 19.0;
            let v = phi_map(&op, &hcum, &[c], None).unwrap()[0];
            assert!(v > last, "Phi must increase");
            last = v;
        }
    }

    #[test]
    fn auxiliary_linear_parabola() {
        let grid = Grid::new(1.0, 1024).unwrap();
        let op = linear_op(1);
        let h = DiscreteFunction::from_scalar_fn(grid, |_| 1.0);
        let aux = solve_auxiliary(&op, &h).unwrap();
        let mut worst = 0.0f64;
        for (i, t) in grid.nodes().enumerate() {
            worst = worst.max((aux.u.scalar(i) - 0.5 * t * (1.0 - t)).abs());
        }
        assert!(worst < 1e-10, "sup error {worst}");
        assert!((aux.u.scalar(512) - 0.125).abs() < 1e-6);
    }

    #[test]
    fn auxiliary_p_laplacian_midpoint_value() {
        let grid = Grid::new(1.0, 1024).unwrap();
        let op = Operator::new(OperatorKind::PLaplacian { p: 3.0 }, 1).unwrap();
        let h = DiscreteFunction::from_scalar_fn(grid, |_| 1.0);
        let aux = solve_auxiliary(&op, &h).unwrap();
        let expected = 2.0f64.sqrt() / 6.0;
        assert!(
            (aux.u.scalar(512) - expected).abs() < 1e-4,
            "u(1/2) = {} vs {expected}",
            aux.u.scalar(512)
        );
    }

    #[test]
    fn auxiliary_zero_data_gives_zero_solution() {
        let grid = Grid::new(2.0, 64).unwrap();
        let op = Operator::new(OperatorKind::PqLaplacian { p: 3.0, q: 2.0 }, 2).unwrap();
        let h = DiscreteFunction::zeros(grid, 2);
        let aux = solve_auxiliary(&op, &h).unwrap();
        assert_eq!(aux.u.sup_norm(), 0.0);
    }

    #[test]
    fn auxiliary_boundary_values_vanish() {
        let grid = Grid::new(1.5, 512).unwrap();
        let op = Operator::new(OperatorKind::Curvature { p: 3.0 }, 2).unwrap();
        let h = DiscreteFunction::from_fn(grid, 2, |t| vec![(3.0 * t).sin(), t - 0.4]);
        let aux = solve_auxiliary(&op, &h).unwrap();
        assert!(euclid(aux.u.value(0)) < 1e-12);
        assert!(euclid(aux.u.value(512)) < 1e-8);
    }

    #[test]
    fn auxiliary_residual_is_second_order() {
        // Differentiating a(u') along the grid recovers -h at O(h^2) for
        // smooth data.
        let op = linear_op(1);
        let sup_residual = |m: usize| -> f64 {
            let grid = Grid::new(1.0, m).unwrap();
            let h = DiscreteFunction::from_scalar_fn(grid, |t| (2.0 * PI * t).sin());
            let aux = solve_auxiliary(&op, &h).unwrap();
            let a_of_du = DiscreteFunction::from_values(
                grid,
                1,
                (0..=m).map(|i| op.eval(aux.du.value(i))[0]).collect(),
            )
            .unwrap();
            let d = a_of_du.differentiate().unwrap();
            let mut worst = 0.0f64;
            for i in 0..=m {
                worst = worst.max((-d.scalar(i) - h.scalar(i)).abs());
            }
            worst
        };
        let coarse = sup_residual(256);
        let fine = sup_residual(512);
        assert!(coarse <= 10.0 / (256.0 * 256.0), "coarse residual {coarse}");
        assert!(coarse / fine >= 3.5, "ratio {}", coarse / fine);
    }

    #[test]
    fn complete_continuity_smoke_test() {
        // Fast oscillations added to the data perturb K(h) less and less.
        let grid = Grid::new(1.0, 1024).unwrap();
        for op in [linear_op(1), Operator::new(OperatorKind::PLaplacian { p: 3.0 }, 1).unwrap()] {
            let h = DiscreteFunction::from_scalar_fn(grid, |t| PI * PI * (PI * t).sin());
            let base = solve_auxiliary(&op, &h).unwrap();
            let mut last = f64::INFINITY;
            for n in [4.0, 16.0, 64.0] {
                let pert =
                    DiscreteFunction::from_scalar_fn(grid, |t| {
                        PI * PI * (PI * t).sin() + (2.0 * PI * n * t).sin()
                    });
                let sol = solve_auxiliary(&op, &pert).unwrap();
                let dist = c1_distance(&sol.u, &sol.du, &base.u, &base.du).unwrap();
                assert!(
                    dist <= last * 1.10,
                    "perturbation response must shrink: {dist} after {last}"
                );
                last = dist;
            }
        }
    }

    #[test]
    fn duffing_zero_field_converges_immediately() {
        let grid = Grid::new(1.0, 128).unwrap();
        let prob = singleton_problem(grid, |_| 0.0, |_| 0.0);
        let report = solve_duffing(&prob, &SolverOptions::new(SolveStrategy::Projection)).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        assert_eq!(report.u.sup_norm(), 0.0);
    }

    #[test]
    fn duffing_manufactured_without_damping_term() {
        let grid = Grid::new(1.0, 1024).unwrap();
        let prob = singleton_problem(grid, |_| 0.0, |t| PI * PI * (PI * t).sin());
        let mut opts = SolverOptions::new(SolveStrategy::Projection);
        opts.tol = 1e-9;
        let report = solve_duffing(&prob, &opts).unwrap();
        let mut worst = 0.0f64;
        for (i, t) in grid.nodes().enumerate() {
            worst = worst.max((report.u.scalar(i) - (PI * t).sin()).abs());
        }
        assert!(worst <= 1e-3, "sup error {worst}");
    }

    #[test]
    fn duffing_manufactured_with_damping_term() {
        // r = 0.3 moved into the data keeps u = sin(pi t) the solution.
        let grid = Grid::new(1.0, 1024).unwrap();
        let prob = singleton_problem(
            grid,
            |_| 0.3,
            |t| PI * PI * (PI * t).sin() + 0.3 * PI * (PI * t).cos(),
        );
        let mut opts = SolverOptions::new(SolveStrategy::Projection);
        opts.tol = 1e-8;
        let report = solve_duffing(&prob, &opts).unwrap();
        assert!(report.converged);
        let mut worst = 0.0f64;
        for (i, t) in grid.nodes().enumerate() {
            worst = worst.max((report.u.scalar(i) - (PI * t).sin()).abs());
        }
        assert!(worst <= 1e-3, "sup error {worst}");
        assert!(report.residual_sup <= 50.0 * opts.tol, "residual {}", report.residual_sup);
    }

    #[test]
    fn report_boundary_and_membership_invariants() {
        let grid = Grid::new(1.0, 512).unwrap();
        let field = Multimap::new(
            MultimapKind::Interval {
                lo: ScalarField::new(|t, x| (x[0] + t).sin() - 1.0),
                hi: ScalarField::new(|t, x| (x[0] + t).sin() + 1.0),
            },
            1,
        )
        .unwrap();
        let prob = Problem::new(
            linear_op(1),
            DiscreteFunction::from_scalar_fn(grid, |_| 0.2),
            field,
            2.0,
            grid,
        )
        .unwrap();
        let report = solve_duffing(&prob, &SolverOptions::new(SolveStrategy::Projection)).unwrap();
        assert!(euclid(report.u.value(0)) <= 1e-8);
        assert!(euclid(report.u.value(512)) <= 1e-8);
        for (i, t) in grid.nodes().enumerate() {
            let d = prob
                .multimap
                .distance(t, report.u.value(i), report.selection.value(i))
                .unwrap();
            assert!(d <= 1e-8, "membership at node {i}: {d}");
        }
    }

    #[test]
    fn duffing_with_state_dependent_two_point_field() {
        // Nonconvex field whose two points move with the state; projection
        // keeps the iteration single-valued and lands on a member selection.
        let grid = Grid::new(1.0, 512).unwrap();
        let interval = Multimap::new(
            MultimapKind::Interval {
                lo: ScalarField::new(|_, x: &[f64]| (x[0]).sin() - 2.0),
                hi: ScalarField::new(|_, x: &[f64]| (x[0]).sin() + 2.0),
            },
            1,
        )
        .unwrap();
        let field = Multimap::new(MultimapKind::ExtremeOf(Box::new(interval)), 1).unwrap();
        let prob = Problem::new(
            linear_op(1),
            DiscreteFunction::from_scalar_fn(grid, |_| 0.1),
            field,
            2.0,
            grid,
        )
        .unwrap();
        let report = solve_duffing(&prob, &SolverOptions::new(SolveStrategy::Projection)).unwrap();
        assert!(report.converged);
        for (i, t) in grid.nodes().enumerate() {
            let d = prob
                .multimap
                .distance(t, report.u.value(i), report.selection.value(i))
                .unwrap();
            assert!(d <= 1e-8, "membership at node {i}: {d}");
            // Selections sit on one of the two moving extreme points.
            let gap = (report.selection.scalar(i) - report.u.scalar(i).sin()).abs();
            assert!((gap - 2.0).abs() <= 1e-8, "node {i} gap {gap}");
        }
    }

    #[test]
    fn duffing_with_oscillating_strategy() {
        // The strategy reaches the solver level too; with a state-free
        // field the selection is the fixed square wave and the solve is the
        // auxiliary image of that wave.
        let grid = Grid::new(1.0, 512).unwrap();
        let field = Multimap::new(
            MultimapKind::Interval {
                lo: ScalarField::constant(-1.0),
                hi: ScalarField::constant(1.0),
            },
            1,
        )
        .unwrap();
        let prob = Problem::new(
            linear_op(1),
            DiscreteFunction::zeros(grid, 1),
            field,
            2.0,
            grid,
        )
        .unwrap();
        let mut opts = SolverOptions::new(SolveStrategy::Oscillating {
            level: 2,
            direction: vec![1.0],
        });
        opts.damping = 1.0;
        let report = solve_duffing(&prob, &opts).unwrap();
        assert!(report.converged);
        for i in 0..=512 {
            assert!((report.selection.scalar(i).abs() - 1.0).abs() < 1e-12);
        }
        let direct = solve_auxiliary(&prob.op, &report.selection).unwrap();
        let gap = c1_distance(&report.u, &report.du, &direct.u, &direct.du).unwrap();
        assert!(gap <= 1e-9, "gap {gap}");
    }

    #[test]
    fn vector_three_dimensional_solve() {
        let grid = Grid::new(1.0, 256).unwrap();
        let field = Multimap::new(
            MultimapKind::Ball {
                center: VectorField::new(vec![
                    ScalarField::new(|t: f64, _: &[f64]| (std::f64::consts::PI * t).sin()),
                    ScalarField::constant(0.3),
                    ScalarField::new(|t: f64, _: &[f64]| t - 0.5),
                ]),
                radius: ScalarField::constant(0.5),
            },
            3,
        )
        .unwrap();
        let prob = Problem::new(
            Operator::new(OperatorKind::PqLaplacian { p: 3.0, q: 2.0 }, 3).unwrap(),
            DiscreteFunction::from_scalar_fn(grid, |_| 0.1),
            field,
            3.0,
            grid,
        )
        .unwrap();
        let report = solve_duffing(&prob, &SolverOptions::new(SolveStrategy::Projection)).unwrap();
        assert!(report.converged);
        assert!(euclid(report.u.value(0)) <= 1e-8);
        assert!(euclid(report.u.value(256)) <= 1e-8);
        for (i, t) in grid.nodes().enumerate() {
            let d = prob
                .multimap
                .distance(t, report.u.value(i), report.selection.value(i))
                .unwrap();
            assert!(d <= 1e-8, "membership at node {i}: {d}");
        }
    }

    #[test]
    fn duffing_reports_nonconvergence_with_last_iterate() {
        let grid = Grid::new(1.0, 64).unwrap();
        let prob = singleton_problem(grid, |_| 0.0, |t| (PI * t).sin());
        let mut opts = SolverOptions::new(SolveStrategy::Projection);
        opts.max_iter = 1;
        opts.tol = 1e-14;
        match solve_duffing(&prob, &opts) {
            Err(Error::FixedPointDidNotConverge { last }) => {
                assert!(!last.converged);
                assert_eq!(last.iterations, 1);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn branch_of_zero_field_is_zero() {
        let grid = Grid::new(1.0, 64).unwrap();
        let prob = singleton_problem(grid, |_| 0.0, |_| 0.0);
        let pts = solve_branch(
            &prob,
            &[0.25, 0.5, 1.0],
            &SolverOptions::new(SolveStrategy::Projection),
        )
        .unwrap();
        for pt in pts {
            assert_eq!(pt.report.u.sup_norm(), 0.0);
        }
    }

    #[test]
    fn branch_scales_linearly_for_small_lambda() {
        let grid = Grid::new(PI, 512).unwrap();
        let field = Multimap::new(
            MultimapKind::Interval {
                lo: ScalarField::constant(-1.0),
                hi: ScalarField::constant(1.0),
            },
            1,
        )
        .unwrap();
        let prob = Problem::new(
            linear_op(1),
            DiscreteFunction::zeros(grid, 1),
            field,
            2.0,
            grid,
        )
        .unwrap();
        let opts = SolverOptions::new(SolveStrategy::Extreme { direction: vec![1.0] });
        let pts = solve_branch(&prob, &[0.01, 0.5, 1.0], &opts).unwrap();
        let small = &pts[0].report;
        let full = &pts[2].report;
        let c1_small = small.u.sup_norm() + small.du.sup_norm();
        let c1_full = full.u.sup_norm() + full.du.sup_norm();
        assert!(c1_small <= 0.05 * c1_full, "{c1_small} vs {c1_full}");
    }

    #[test]
    fn branch_validates_parameters() {
        let grid = Grid::new(1.0, 64).unwrap();
        let prob = singleton_problem(grid, |_| 0.0, |_| 0.0);
        let opts = SolverOptions::new(SolveStrategy::Projection);
        assert!(solve_branch(&prob, &[0.5, 0.25, 1.0], &opts).is_err());
        assert!(solve_branch(&prob, &[0.5, 0.9], &opts).is_err());
        assert!(solve_branch(&prob, &[], &opts).is_err());
    }

    #[test]
    fn apriori_bound_formula() {
        use crate::multimap::EtaBound;
        let grid = Grid::new(1.0, 64).unwrap();
        let prob = singleton_problem(grid, |_| 0.0, |_| 0.0);
        let lambda1 = PI * PI;
        let witness = GrowthWitness::new(
            DiscreteFunction::from_scalar_fn(grid, |_| 0.0),
            vec![EtaBound {
                eta: 1.0,
                profile: DiscreteFunction::from_scalar_fn(grid, |_| 1.0),
            }],
        )
        .unwrap();
        let bound = apriori_bound(&prob, 0.1 * lambda1, &witness, 0.5).unwrap();
        assert!((bound - 2.5f64.sqrt()).abs() < 1e-12, "bound {bound}");

        // Zero envelope forces the zero solution.
        let zero_witness = GrowthWitness::new(
            DiscreteFunction::from_scalar_fn(grid, |_| 0.0),
            vec![EtaBound {
                eta: 1.0,
                profile: DiscreteFunction::from_scalar_fn(grid, |_| 0.0),
            }],
        )
        .unwrap();
        assert_eq!(
            apriori_bound(&prob, 0.1 * lambda1, &zero_witness, 0.5).unwrap(),
            0.0
        );

        // Doubling the envelope scales the bound by 2^{1/p}.
        let double_witness = GrowthWitness::new(
            DiscreteFunction::from_scalar_fn(grid, |_| 0.0),
            vec![EtaBound {
                eta: 1.0,
                profile: DiscreteFunction::from_scalar_fn(grid, |_| 2.0),
            }],
        )
        .unwrap();
        let doubled = apriori_bound(&prob, 0.1 * lambda1, &double_witness, 0.5).unwrap();
        assert!(((doubled / bound) - 2.0f64.sqrt()).abs() < 1e-12);

        // Epsilon outside the admissible window is rejected.
        assert!(matches!(
            apriori_bound(&prob, lambda1, &witness, 0.5),
            Err(Error::EpsilonOutsideWindow)
        ));
    }
}
