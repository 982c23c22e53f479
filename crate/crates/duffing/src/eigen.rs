//! Dirichlet eigenvalues of the one-dimensional p-Laplacian, the associated
//! generalized sine, the Rayleigh quotient, and the positivity functional
//! used by the a-priori estimates.
//!
//! The first eigenvalue on (0, b) is
//! `lambda_1 = (1/b)^p (p-1) pi_p^p` with
//! `pi_p = 2 * integral_0^1 (1 - t^p)^{-1/p} dt`, and the n-th scales as
//! `n^p`. The generalized sine is obtained by integrating its defining
//! oscillator over a quarter period and unfolding by symmetry, so sampled
//! eigenfunctions vanish exactly at both endpoints.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{euclid, DiscreteFunction, Grid};

/// Parameters of the eigenvalue problem: exponent, interval length, dimension.
#[derive(Clone, Copy, Debug)]
pub struct EigenParams {
    pub p: f64,
    pub b: f64,
    pub dim: usize,
}

impl EigenParams {
    pub fn new(p: f64, b: f64, dim: usize) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::ExponentOutOfRange);
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::invalid("interval length must be positive"));
        }
        if dim == 0 {
            return Err(Error::DimensionMismatch);
        }
        Ok(EigenParams { p, b, dim })
    }
}

/// Adaptive Simpson quadrature with interval-halving error control.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // Endpoints travel as (abscissa, value) pairs.
    fn simpson(f: &impl Fn(f64) -> f64, left: (f64, f64), right: (f64, f64)) -> (f64, f64) {
        let m = 0.5 * (left.0 + right.0);
        let fm = f(m);
        ((right.0 - left.0) / 6.0 * (left.1 + 4.0 * fm + right.1), fm)
    }
    fn recurse(
        f: &impl Fn(f64) -> f64,
        left: (f64, f64),
        right: (f64, f64),
        whole: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let mid = (0.5 * (left.0 + right.0), fm);
        let (low, flm) = simpson(f, left, mid);
        let (high, frm) = simpson(f, mid, right);
        let delta = low + high - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return low + high + delta / 15.0;
        }
        recurse(f, left, mid, low, flm, 0.5 * tol, depth - 1)
            + recurse(f, mid, right, high, frm, 0.5 * tol, depth - 1)
    }
    let left = (a, f(a));
    let right = (b, f(b));
    let (whole, fm) = simpson(f, left, right);
    recurse(f, left, right, whole, fm, tol, 60)
}

/// `2 * integral_0^1 dt / (1 - t^p)^{1/p}`, the half-period constant of the
/// generalized sine.
///
/// The integrable endpoint singularity at `t = 1` is handled by splitting at
/// `1 - delta` and integrating the local two-term expansion of `1 - t^p`
/// analytically on the last slice; adaptive quadrature covers the rest.
pub fn pi_p(p: f64) -> Result<f64> {
    pi_p_with(p, 1e-4, 1e-11)
}

/// Same integral at a finer split and tighter quadrature budget; used by
/// self-consistency checks.
pub fn pi_p_refined(p: f64) -> Result<f64> {
    pi_p_with(p, 5e-5, 1e-12)
}

fn pi_p_with(p: f64, delta: f64, tol: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::ExponentOutOfRange);
    }
    let integrand = |t: f64| {
        // 1 - t^p via log1p/expm1 to avoid cancellation for t near 1.
        let one_minus = -f64::exp_m1(p * f64::ln_1p(-(1.0 - t)));
        one_minus.powf(-1.0 / p)
    };
    let body = adaptive_simpson(&integrand, 0.0, 1.0 - delta, tol);
    // integral_{1-delta}^{1} (1 - t^p)^{-1/p} dt with
    // 1 - t^p = p s (1 - (p-1) s / 2 + O(s^2)), s = 1 - t:
    // (1 - t^p)^{-1/p} = (p s)^{-1/p} (1 + (p-1) s / (2p) + O(s^2)).
    let inv_p = 1.0 / p;
    let tail = p.powf(-inv_p)
        * (delta.powf(1.0 - inv_p) / (1.0 - inv_p)
            + (p - 1.0) / (2.0 * p) * delta.powf(2.0 - inv_p) / (2.0 - inv_p));
    Ok(2.0 * (body + tail))
}

/// The n-th Dirichlet eigenvalue `(n/b)^p (p-1) pi_p^p`.
pub fn lambda_n(params: &EigenParams, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("eigenvalue index starts at 1"));
    }
    let pip = pi_p(params.p)?;
    Ok((n as f64 / params.b).powf(params.p) * (params.p - 1.0) * pip.powf(params.p))
}

/// Tabulated quarter arc of the generalized sine.
///
/// State `(w, v)` with `v = |w'|^{p-2} w'` integrated by RK4 from `(0, 1)`;
/// the invariant `|w|^p + |v|^{p'} = 1` puts the peak `w = 1` exactly at a
/// quarter period `pi_p / 2`.
struct SinP {
    half_pi: f64,
    step: f64,
    states: Vec<(f64, f64)>,
    peak: f64,
    p: f64,
}

fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

impl SinP {
    const TABLE_STEPS: usize = 8192;

    fn build(p: f64) -> Result<SinP> {
        let quarter = pi_p(p)? / 2.0;
        let n = Self::TABLE_STEPS;
        let step = quarter / n as f64;
        let mut states = Vec::with_capacity(n + 1);
        let mut state = (0.0f64, 1.0f64);
        states.push(state);
        for _ in 0..n {
            state = Self::rk4_step(p, state, step);
            if !(state.0.is_finite() && state.1.is_finite()) {
                return Err(Error::EigenfunctionIntegrationFailed);
            }
            states.push(state);
        }
        let peak = states[n].0;
        if (peak - 1.0).abs() > 1e-3 {
            return Err(Error::EigenfunctionIntegrationFailed);
        }
        Ok(SinP {
            half_pi: quarter,
            step,
            states,
            peak,
            p,
        })
    }

    fn rhs(p: f64, (w, v): (f64, f64)) -> (f64, f64) {
        (signed_pow(v, 1.0 / (p - 1.0)), -(p - 1.0) * signed_pow(w, p - 1.0))
    }

    fn rk4_step(p: f64, (w, v): (f64, f64), h: f64) -> (f64, f64) {
        let k1 = Self::rhs(p, (w, v));
        let k2 = Self::rhs(p, (w + 0.5 * h * k1.0, v + 0.5 * h * k1.1));
        let k3 = Self::rhs(p, (w + 0.5 * h * k2.0, v + 0.5 * h * k2.1));
        let k4 = Self::rhs(p, (w + h * k3.0, v + h * k3.1));
        (
            w + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            v + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        )
    }

    /// Quarter-arc value at `s` in `[0, half_pi]`: table node plus one short
    /// RK4 step for the remainder.
    fn quarter_value(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.half_pi);
        let idx = ((s / self.step) as usize).min(Self::TABLE_STEPS);
        let rem = s - idx as f64 * self.step;
        let state = self.states[idx];
        if rem <= 0.0 {
            state.0
        } else {
            Self::rk4_step(self.p, state, rem).0
        }
    }

    /// Full-line evaluation by folding into the first quarter period, with
    /// sup-norm normalized to exactly 1.
    fn eval(&self, s: f64) -> f64 {
        let period = 4.0 * self.half_pi;
        let mut x = s % period;
        if x < 0.0 {
            x += period;
        }
        let (arg, sign) = if x <= self.half_pi {
            (x, 1.0)
        } else if x <= 2.0 * self.half_pi {
            (2.0 * self.half_pi - x, 1.0)
        } else if x <= 3.0 * self.half_pi {
            (x - 2.0 * self.half_pi, -1.0)
        } else {
            (period - x, -1.0)
        };
        sign * self.quarter_value(arg) / self.peak
    }
}

/// Sample the n-th eigenfunction `direction * sin_p(n pi_p t / b)` on the
/// grid, normalized to sup-norm 1. The direction must be a unit vector and
/// the grid must span the same interval as `params`.
pub fn eigenfunction(
    params: &EigenParams,
    n: u32,
    direction: &[f64],
    grid: Grid,
) -> Result<DiscreteFunction> {
    if n == 0 {
        return Err(Error::invalid("eigenfunction index starts at 1"));
    }
    if direction.len() != params.dim {
        return Err(Error::DimensionMismatch);
    }
    if (euclid(direction) - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("direction must be a unit vector"));
    }
    if (grid.b() - params.b).abs() > 1e-12 * params.b.max(1.0) {
        return Err(Error::GridMismatch);
    }
    let table = SinP::build(params.p)?;
    let pip = 2.0 * table.half_pi;
    let m = grid.m() as f64;
    let mut out = DiscreteFunction::zeros(grid, params.dim);
    for i in 0..grid.num_nodes() {
        // Phase from the node index so both endpoints land exactly on zeros.
        let s = n as f64 * pip * (i as f64 / m);
        let w = table.eval(s);
        for (k, d) in direction.iter().enumerate() {
            out.value_mut(i)[k] = w * d;
        }
    }
    Ok(out)
}

/// Rayleigh quotient `||u'||_p^p / ||u||_p^p` on the grid.
pub fn rayleigh(u: &DiscreteFunction, p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::ExponentOutOfRange);
    }
    let den = u.lp_norm(p)?;
    if den == 0.0 {
        return Err(Error::ZeroTrialFunction);
    }
    let du = u.differentiate()?;
    let num = du.lp_norm(p)?;
    Ok(num.powf(p) / den.powf(p))
}

/// Weight data for the positivity functional: margin `xi`, a nonnegative
/// scalar weight bounded by `lambda_1 * xi` with strict inequality on at
/// least one full grid subinterval, and the exponent `p`.
#[derive(Clone, Debug)]
pub struct PsiParams {
    xi: f64,
    theta: DiscreteFunction,
    p: f64,
    lambda1: f64,
}

impl PsiParams {
    pub fn new(xi: f64, theta: DiscreteFunction, p: f64, lambda1: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::ExponentOutOfRange);
        }
        if theta.dim() != 1 {
            return Err(Error::DimensionMismatch);
        }
        theta.check_finite()?;
        let cap = lambda1 * xi;
        let m = theta.grid().m();
        for i in 0..=m {
            let v = theta.scalar(i);
            if v < 0.0 {
                return Err(Error::invalid("weight must be nonnegative"));
            }
            if v > cap + 1e-12 {
                return Err(Error::WeightExceedsBound);
            }
        }
        let strict = (0..m)
            .any(|i| theta.scalar(i) < cap - 1e-12 && theta.scalar(i + 1) < cap - 1e-12);
        if !strict {
            return Err(Error::StrictInequalitySetEmpty);
        }
        Ok(PsiParams { xi, theta, p, lambda1 })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn theta(&self) -> &DiscreteFunction {
        &self.theta
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
}

/// `xi ||u'||_p^p - integral theta |u|^p dt`. The trial is expected to
/// vanish at both endpoints.
pub fn psi(u: &DiscreteFunction, params: &PsiParams) -> Result<f64> {
    if u.grid() != params.theta.grid() {
        return Err(Error::GridMismatch);
    }
    let p = params.p;
    let du = u.differentiate()?;
    let grad = du.lp_norm(p)?.powf(p);
    let weighted = DiscreteFunction::from_fn(u.grid(), 1, {
        let mut i = 0;
        move |_t| {
            let v = params.theta.scalar(i) * euclid(u.value(i)).powf(p);
            i += 1;
            vec![v]
        }
    });
    Ok(params.xi * grad - weighted.integrate()?)
}

/// Deterministic trial battery: leading eigenfunctions, seeded smooth
/// combinations, and seeded piecewise-linear paths vanishing at the ends.
/// Trial `i` depends only on `(seed, i)` so the battery grows by prefix.
fn trial_function(
    i: usize,
    eigen: &EigenParams,
    grid: Grid,
    seed: u64,
) -> Result<DiscreteFunction> {
    let dim = eigen.dim;
    if i < 4 {
        let mut dir = vec![0.0; dim];
        dir[0] = 1.0;
        return eigenfunction(eigen, i as u32 + 1, &dir, grid);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let b = grid.b();
    if i.is_multiple_of(2) {
        // Smooth random combination of the first six sine modes.
        let mut coeffs = Vec::new();
        for _ in 0..6 {
            let amp: f64 = rng.gen_range(-1.0..1.0);
            let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            coeffs.push((amp, dir));
        }
        Ok(DiscreteFunction::from_fn(grid, dim, |t| {
            let mut v = vec![0.0; dim];
            for (j, (amp, dir)) in coeffs.iter().enumerate() {
                let w = amp * ((j as f64 + 1.0) * std::f64::consts::PI * t / b).sin();
                for (k, d) in dir.iter().enumerate() {
                    v[k] += w * d;
                }
            }
            v
        }))
    } else {
        // Piecewise-linear path with zero endpoints on 16 panels.
        let panels = 16usize;
        let mut ctrl = vec![vec![0.0; dim]; panels + 1];
        for node in ctrl.iter_mut().take(panels).skip(1) {
            for c in node.iter_mut() {
                *c = rng.gen_range(-1.0..1.0);
            }
        }
        Ok(DiscreteFunction::from_fn(grid, dim, |t| {
            let x = (t / b * panels as f64).min(panels as f64 - 1e-12);
            let j = x.floor() as usize;
            let frac = x - j as f64;
            (0..dim)
                .map(|k| ctrl[j][k] * (1.0 - frac) + ctrl[j + 1][k] * frac)
                .collect()
        }))
    }
}

/// Sampled estimate of the positivity-margin constant: the minimum of
/// `psi(u)` over a seeded battery of trials normalized to `||u'||_p = 1`.
///
/// The sampled minimum upper-bounds the true constant; it must come out
/// strictly positive whenever the weight invariants hold on a fine enough
/// grid.
pub fn estimate_c1(
    params: &PsiParams,
    eigen: &EigenParams,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let grid = params.theta.grid();
    let trials = trials.max(1);
    let mut best = f64::INFINITY;
    for i in 0..trials {
        let u = trial_function(i, eigen, grid, seed)?;
        let du = u.differentiate()?;
        let w = du.lp_norm(params.p)?;
        if w == 0.0 {
            continue;
        }
        let scaled = u.scaled(1.0 / w);
        let value = psi(&scaled, params)?;
        if value < best {
            best = value;
        }
    }
    if !(best > 0.0) {
        return Err(Error::MarginEstimateNonpositive);
    }
    Ok(best)
}
