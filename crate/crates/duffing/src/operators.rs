//! Monotone radial homeomorphisms `a: R^N -> R^N` driving the differential
//! operator.
//!
//! Every built-in family has the form `a(y) = g(|y|) y` for a strictly
//! increasing scalar profile `phi(s) = g(s) s`, which makes the inverse a
//! one-dimensional root solve regardless of `N`. Coercivity and strong
//! monotonicity are verified by deterministic seeded sampling; the checks are
//! sampled verdicts, not proofs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{dot, euclid};

/// Named scalar profiles for radial operators that do not fit the
/// parametric families below.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialProfile {
    /// `a(y) = |y|^{q-2} y` inside the unit ball, `a(y) = y` outside,
    /// with `1 < q < 2`; the branches agree at `|y| = 1`.
    Piecewise { q: f64 },
    /// `a(y) = 2 y e^{|y|^2} + y`.
    ExpPlus,
    /// `a(y) = |y|^{p-2} y + y`.
    PlapPlus { p: f64 },
}

/// Built-in operator families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorKind {
    /// `a(y) = |y|^{p-2} y`, the vector p-Laplacian profile.
    PLaplacian { p: f64 },
    /// `a(y) = |y|^{p-2} y + |y|^{q-2} y` with `1 < q < p`.
    PqLaplacian { p: f64, q: f64 },
    /// `a(y) = (1 + |y|^2)^{(p-2)/2} y`.
    Curvature { p: f64 },
    /// `a(y) = |y|^{p-2} y (c e^{|y|^p} - 1)` with `c > 1`.
    Exponential { p: f64, c: f64 },
    /// `a(y) = c y` with `c > 0`.
    Linear { c: f64 },
    /// A named custom radial profile.
    CustomRadial { profile: RadialProfile },
}

/// Outcome of the sampled coercivity check.
#[derive(Clone, Copy, Debug)]
pub struct CoercivityCheck {
    /// Minimum of `(a(y), y) / |y|^p` over the sample set.
    pub c0_estimate: f64,
    /// Whether the estimate clears the operator's claimed constant.
    pub pass: bool,
}

/// Outcome of the sampled strong-monotonicity check on a ball of radius eta.
#[derive(Clone, Copy, Debug)]
pub struct MonotonicityCheck {
    /// Minimum of `(a(y) - a(v), y - v) / |y - v|^2` over sampled pairs.
    pub c_hat_eta: f64,
}

/// A monotone radial homeomorphism with its claimed coercivity constant and
/// the growth exponent `p` it is paired with.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    kind: OperatorKind,
    dim: usize,
    p: f64,
    c0: f64,
}

fn require_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::ExponentOutOfRange)
    }
}

impl Operator {
    /// Build an operator with the family's analytic coercivity constant and
    /// default growth exponent.
    pub fn new(kind: OperatorKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch);
        }
        let (p, c0) = match kind {
            OperatorKind::PLaplacian { p } => {
                require_exponent(p)?;
                (p, 1.0)
            }
            OperatorKind::PqLaplacian { p, q } => {
                require_exponent(p)?;
                require_exponent(q)?;
                if q >= p {
                    return Err(Error::invalid("pq_laplacian needs q < p"));
                }
                (p, 1.0)
            }
            OperatorKind::Curvature { p } => {
                require_exponent(p)?;
                // The analytic constant 1 is only valid for p >= 2; for
                // smaller p a sampled check will honestly fail near zero.
                (p, 1.0)
            }
            OperatorKind::Exponential { p, c } => {
                require_exponent(p)?;
                if !(c > 1.0) {
                    return Err(Error::invalid("exponential family needs c > 1"));
                }
                (p, c - 1.0)
            }
            OperatorKind::Linear { c } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::invalid("linear family needs c > 0"));
                }
                (2.0, c)
            }
            OperatorKind::CustomRadial { profile } => match profile {
                RadialProfile::Piecewise { q } => {
                    if !(q > 1.0 && q < 2.0) {
                        return Err(Error::invalid("piecewise profile needs 1 < q < 2"));
                    }
                    (2.0, 1.0)
                }
                RadialProfile::ExpPlus => (2.0, 3.0),
                RadialProfile::PlapPlus { p } => {
                    require_exponent(p)?;
                    (p, 1.0)
                }
            },
        };
        Ok(Operator { kind, dim, p, c0 })
    }

    /// Override the claimed coercivity constant (custom profiles declare it).
    pub fn with_claimed_c0(mut self, c0: f64) -> Self {
        self.c0 = c0;
        self
    }

    /// Override the growth exponent paired with the operator.
    pub fn with_growth_exponent(mut self, p: f64) -> Result<Self> {
        require_exponent(p)?;
        self.p = p;
        Ok(self)
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Growth exponent used in the damping term and the norm estimates.
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Claimed coercivity constant.
    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// Scalar radial profile `phi(s) = |a(y)|` at `|y| = s`.
    pub fn phi(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        if s == 0.0 {
            return 0.0;
        }
        match self.kind {
            OperatorKind::PLaplacian { p } => s.powf(p - 1.0),
            OperatorKind::PqLaplacian { p, q } => s.powf(p - 1.0) + s.powf(q - 1.0),
            OperatorKind::Curvature { p } => (1.0 + s * s).powf((p - 2.0) / 2.0) * s,
            OperatorKind::Exponential { p, c } => s.powf(p - 1.0) * (c * s.powf(p).exp() - 1.0),
            OperatorKind::Linear { c } => c * s,
            OperatorKind::CustomRadial { profile } => match profile {
                RadialProfile::Piecewise { q } => {
                    if s <= 1.0 {
                        s.powf(q - 1.0)
                    } else {
                        s
                    }
                }
                RadialProfile::ExpPlus => (2.0 * (s * s).exp() + 1.0) * s,
                RadialProfile::PlapPlus { p } => s.powf(p - 1.0) + s,
            },
        }
    }

    /// Evaluate `a(y)`; `a(0) = 0` by continuous extension for every family.
    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.dim);
        let s = euclid(y);
        if s == 0.0 {
            return vec![0.0; self.dim];
        }
        let scale = self.phi(s) / s;
        y.iter().map(|c| scale * c).collect()
    }

    /// Solve `phi(s) = r` for `s >= 0`.
    ///
    /// Uses the closed form where the family admits one, otherwise scalar
    /// bisection with a doubling bracket started near `hint`.
    pub fn invert_radial(&self, r: f64, hint: f64) -> Result<f64> {
        debug_assert!(r >= 0.0);
        if r == 0.0 {
            return Ok(0.0);
        }
        match self.kind {
            OperatorKind::Linear { c } => return Ok(r / c),
            OperatorKind::PLaplacian { p } => return Ok(r.powf(1.0 / (p - 1.0))),
            OperatorKind::CustomRadial {
                profile: RadialProfile::Piecewise { q },
            } => {
                return Ok(if r <= 1.0 { r.powf(1.0 / (q - 1.0)) } else { r });
            }
            _ => {}
        }
        // Doubling bracket: grow hi until phi(hi) >= r.
        let mut hi = if hint.is_finite() && hint > 0.0 { hint } else { 1.0 };
        let mut guard = 0;
        while self.phi(hi) < r {
            hi *= 2.0;
            guard += 1;
            if hi > 1e12 || guard > 200 {
                return Err(Error::InverseOutOfBracket);
            }
        }
        let mut lo = if self.phi(hi * 0.5) <= r { hi * 0.5 } else { 0.0 };
        if self.phi(lo) > r {
            lo = 0.0;
        }
        // Absolute floor 1e-14 keeps the flat region near zero terminating
        // for p < 2 profiles.
        while hi - lo > 1e-14 + 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if self.phi(mid) < r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The unique `y` with `a(y) = z`.
    pub fn invert(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.invert_with_hint(z, 1.0)
    }

    /// Inverse with a warm-start radius for the internal bracket; useful when
    /// inverting along a path whose magnitude varies slowly.
    pub fn invert_with_hint(&self, z: &[f64], hint: f64) -> Result<Vec<f64>> {
        debug_assert_eq!(z.len(), self.dim);
        let r = euclid(z);
        if r == 0.0 {
            return Ok(vec![0.0; self.dim]);
        }
        let s = self.invert_radial(r, hint)?;
        let scale = s / r;
        Ok(z.iter().map(|c| scale * c).collect())
    }

    /// Sampled check of `c0 |y|^p <= (a(y), y)`.
    ///
    /// Samples the ball of the given radius deterministically (seeded), with
    /// an extra logarithmic sweep of magnitudes so small radii are covered.
    pub fn check_coercivity(&self, samples: usize, radius: f64, seed: u64) -> CoercivityCheck {
        let samples = samples.max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut estimate = f64::INFINITY;
        let mut consider = |y: &[f64]| {
            let s = euclid(y);
            if s == 0.0 {
                return;
            }
            let ratio = dot(&self.eval(y), y) / s.powf(self.p);
            if ratio < estimate {
                estimate = ratio;
            }
        };
        // Log sweep of magnitudes along a fixed direction; the profile is
        // radial so this probes the scale dependence directly.
        let sweeps = 64usize;
        for j in 0..sweeps {
            let s = radius * 10f64.powf(-6.0 * (j as f64) / (sweeps as f64 - 1.0));
            let mut y = vec![0.0; self.dim];
            y[0] = s;
            consider(&y);
        }
        for _ in 0..samples {
            let y = random_in_ball(&mut rng, self.dim, radius);
            consider(&y);
        }
        CoercivityCheck {
            c0_estimate: estimate,
            pass: estimate >= self.c0 - 1e-9,
        }
    }

    /// Sampled minimum of `(a(y) - a(v), y - v) / |y - v|^2` over pairs in
    /// the ball of radius `eta`.
    pub fn check_strong_monotonicity(&self, eta: f64, samples: usize, seed: u64) -> MonotonicityCheck {
        let samples = samples.max(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1_e995);
        let mut minimum = f64::INFINITY;
        let mut consider = |y: &[f64], v: &[f64]| {
            let diff: Vec<f64> = y.iter().zip(v).map(|(a, b)| a - b).collect();
            let d2 = dot(&diff, &diff);
            if d2 == 0.0 {
                return;
            }
            let ay = self.eval(y);
            let av = self.eval(v);
            let inc: Vec<f64> = ay.iter().zip(&av).map(|(a, b)| a - b).collect();
            let ratio = dot(&inc, &diff) / d2;
            if ratio < minimum {
                minimum = ratio;
            }
        };
        // Collinear close pairs across a magnitude sweep; for radial maps the
        // minimum is attained along rays.
        let sweeps = 48usize;
        for j in 0..=sweeps {
            let s = eta * (j as f64) / (sweeps as f64);
            let delta = (1e-6 * eta).max(1e-12);
            let mut y = vec![0.0; self.dim];
            let mut v = vec![0.0; self.dim];
            y[0] = (s + delta).min(eta);
            v[0] = (s - delta).max(-eta);
            consider(&y, &v);
        }
        for _ in 0..samples {
            let y = random_in_ball(&mut rng, self.dim, eta);
            let v = random_in_ball(&mut rng, self.dim, eta);
            consider(&y, &v);
        }
        MonotonicityCheck { c_hat_eta: minimum }
    }
}

/// Deterministic uniform sample from the ball of the given radius.
fn random_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    // Rejection-free: gaussian direction, radius by inverse transform.
    let dir: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = euclid(&dir);
    let r = radius * rng.gen_range(0.0f64..1.0).powf(1.0 / dim as f64);
    if norm == 0.0 {
        let mut v = vec![0.0; dim];
        v[0] = r;
        return v;
    }
    dir.into_iter().map(|c| r * c / norm).collect()
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; half of the pair is enough here.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_builtins() -> Vec<Operator> {
        vec![
            Operator::new(OperatorKind::PLaplacian { p: 3.0 }, 2).unwrap(),
            Operator::new(OperatorKind::PLaplacian { p: 1.5 }, 2).unwrap(),
            Operator::new(OperatorKind::PqLaplacian { p: 3.0, q: 2.0 }, 2).unwrap(),
            Operator::new(OperatorKind::Curvature { p: 4.0 }, 2).unwrap(),
            Operator::new(OperatorKind::Exponential { p: 2.0, c: 2.0 }, 2).unwrap(),
            Operator::new(OperatorKind::Linear { c: 2.0 }, 2).unwrap(),
            Operator::new(
                OperatorKind::CustomRadial {
                    profile: RadialProfile::Piecewise { q: 1.5 },
                },
                2,
            )
            .unwrap(),
            Operator::new(
                OperatorKind::CustomRadial {
                    profile: RadialProfile::ExpPlus,
                },
                2,
            )
            .unwrap(),
            Operator::new(
                OperatorKind::CustomRadial {
                    profile: RadialProfile::PlapPlus { p: 3.0 },
                },
                2,
            )
            .unwrap(),
        ]
    }

    #[test]
    fn p_two_laplacian_is_identity() {
        let op = Operator::new(OperatorKind::PLaplacian { p: 2.0 }, 2).unwrap();
        assert_eq!(op.eval(&[3.0, 4.0]), vec![3.0, 4.0]);
    }

    #[test]
    fn p_three_laplacian_values() {
        let op = Operator::new(OperatorKind::PLaplacian { p: 3.0 }, 2).unwrap();
        let a = op.eval(&[1.0, 0.0]);
        assert!((a[0] - 1.0).abs() < 1e-14 && a[1].abs() < 1e-14);
        let a = op.eval(&[2.0, 0.0]);
        assert!((a[0] - 4.0).abs() < 1e-12 && a[1].abs() < 1e-14);
    }

    #[test]
    fn linear_scales() {
        let op = Operator::new(OperatorKind::Linear { c: 2.0 }, 2).unwrap();
        assert_eq!(op.eval(&[1.0, -1.0]), vec![2.0, -2.0]);
    }

    #[test]
    fn eval_at_zero_is_zero_for_every_family() {
        for op in all_builtins() {
            assert_eq!(op.eval(&[0.0, 0.0]), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn invert_zero_is_zero() {
        for op in all_builtins() {
            assert_eq!(op.invert(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn invert_p_laplacian_by_forward_eval() {
        let op = Operator::new(OperatorKind::PLaplacian { p: 3.0 }, 2).unwrap();
        let y = op.invert(&[4.0, 0.0]).unwrap();
        assert!((y[0] - 2.0).abs() < 1e-9 && y[1].abs() < 1e-12);
    }

    #[test]
    fn invert_eval_roundtrip_all_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for op in all_builtins() {
            for _ in 0..1000 {
                let y = random_in_ball(&mut rng, op.dim(), 10.0);
                let z = op.eval(&y);
                let back = op.invert(&z).unwrap();
                let err = euclid(&y.iter().zip(&back).map(|(a, b)| a - b).collect::<Vec<_>>());
                assert!(err < 1e-9, "roundtrip error {err} for {:?}", op.kind());
            }
        }
    }

    #[test]
    fn eval_invert_roundtrip_all_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for op in all_builtins() {
            for _ in 0..200 {
                let z = random_in_ball(&mut rng, op.dim(), 5.0);
                let y = op.invert(&z).unwrap();
                let fwd = op.eval(&y);
                let err = euclid(&z.iter().zip(&fwd).map(|(a, b)| a - b).collect::<Vec<_>>());
                assert!(err < 1e-9, "forward roundtrip error {err} for {:?}", op.kind());
            }
        }
    }

    #[test]
    fn coercivity_of_identity_is_one() {
        let op = Operator::new(OperatorKind::PLaplacian { p: 2.0 }, 3).unwrap();
        let chk = op.check_coercivity(500, 10.0, 1);
        assert!((chk.c0_estimate - 1.0).abs() < 1e-12);
        assert!(chk.pass);
    }

    #[test]
    fn coercivity_of_pq_exceeds_one() {
        let op = Operator::new(OperatorKind::PqLaplacian { p: 3.0, q: 2.0 }, 2).unwrap();
        let chk = op.check_coercivity(500, 10.0, 1);
        assert!(chk.c0_estimate >= 1.0 - 1e-12);
        assert!(chk.pass);
    }

    #[test]
    fn overclaimed_constant_fails() {
        let op = Operator::new(OperatorKind::Linear { c: 2.0 }, 2)
            .unwrap()
            .with_claimed_c0(3.0);
        let chk = op.check_coercivity(200, 10.0, 1);
        assert!(!chk.pass);
        assert!((chk.c0_estimate - 2.0).abs() < 1e-12);
    }

    #[test]
    fn strong_monotonicity_of_linear_is_exact() {
        // Exact up to cancellation noise on the close sampled pairs.
        let op = Operator::new(OperatorKind::Linear { c: 2.5 }, 2).unwrap();
        let chk = op.check_strong_monotonicity(3.0, 500, 1);
        assert!((chk.c_hat_eta - 2.5).abs() < 1e-9, "got {}", chk.c_hat_eta);
    }

    #[test]
    fn strong_monotonicity_of_identity_is_one() {
        let op = Operator::new(OperatorKind::PLaplacian { p: 2.0 }, 2).unwrap();
        let chk = op.check_strong_monotonicity(1.0, 500, 1);
        assert!((chk.c_hat_eta - 1.0).abs() < 1e-9, "got {}", chk.c_hat_eta);
    }

    #[test]
    fn strong_monotonicity_of_exp_plus_reaches_three_at_origin() {
        let op = Operator::new(
            OperatorKind::CustomRadial {
                profile: RadialProfile::ExpPlus,
            },
            2,
        )
        .unwrap();
        let chk = op.check_strong_monotonicity(1.0, 2000, 1);
        assert!(chk.c_hat_eta >= 3.0 - 1e-9, "got {}", chk.c_hat_eta);
        assert!(chk.c_hat_eta <= 3.2, "sweep should come close to the infimum");
    }

    #[test]
    fn curvature_below_two_fails_its_claimed_constant_near_zero() {
        // (1 + s^2)^{(p-2)/2} s^2 falls below s^p as s -> 0 when p < 2, so
        // the default claimed constant cannot survive a sampled check.
        let op = Operator::new(OperatorKind::Curvature { p: 1.5 }, 2).unwrap();
        let chk = op.check_coercivity(500, 10.0, 1);
        assert!(!chk.pass, "estimate {}", chk.c0_estimate);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Operator::new(OperatorKind::PLaplacian { p: 1.0 }, 2).is_err());
        assert!(Operator::new(OperatorKind::PqLaplacian { p: 2.0, q: 2.0 }, 2).is_err());
        assert!(Operator::new(OperatorKind::Exponential { p: 2.0, c: 1.0 }, 2).is_err());
        assert!(Operator::new(OperatorKind::Linear { c: 0.0 }, 2).is_err());
        assert!(Operator::new(
            OperatorKind::CustomRadial {
                profile: RadialProfile::Piecewise { q: 2.0 }
            },
            2
        )
        .is_err());
    }

    #[test]
    fn radial_equivariance_under_rotation() {
        let angle = 0.7431f64;
        let (c, s) = (angle.cos(), angle.sin());
        let rotate = |v: &[f64]| vec![c * v[0] - s * v[1], s * v[0] + c * v[1]];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for op in all_builtins() {
            for _ in 0..50 {
                let y = random_in_ball(&mut rng, 2, 5.0);
                let lhs = op.eval(&rotate(&y));
                let rhs = rotate(&op.eval(&y));
                let err = euclid(&lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<_>>());
                assert!(err <= 1e-12 * (1.0 + euclid(&lhs)), "rotation equivariance");
            }
        }
    }

    proptest! {
        #[test]
        fn monotone_on_sampled_pairs(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for op in all_builtins() {
                let y = random_in_ball(&mut rng, 2, 8.0);
                let v = random_in_ball(&mut rng, 2, 8.0);
                let ay = op.eval(&y);
                let av = op.eval(&v);
                let inc: Vec<f64> = ay.iter().zip(&av).map(|(a, b)| a - b).collect();
                let diff: Vec<f64> = y.iter().zip(&v).map(|(a, b)| a - b).collect();
                let prod = dot(&inc, &diff);
                prop_assert!(prod >= -1e-12);
                if euclid(&diff) > 1e-3 {
                    prop_assert!(prod > 1e-14, "strictness failed for {:?}", op.kind());
                }
            }
        }
    }
}
