//! Parametric set-valued fields `F(t, x)` in R^N with the set queries the
//! solver needs: membership distance, metric projection, support points,
//! extreme points, Hausdorff distance, nodewise selections, and the sampled
//! growth / Lipschitz checks.
//!
//! Fields are closed-form parametric families rather than arbitrary
//! measurable multifunctions: an executable artifact needs constructive
//! membership and projection queries, and every example in scope fits one of
//! the built-in kinds.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{dot, euclid, DiscreteFunction};
use crate::hypothesis::CheckEntry;

/// Shared evaluable coefficient `(t, x) -> R`.
type FieldFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// A scalar coefficient map `(t, x) -> R`.
#[derive(Clone)]
pub struct ScalarField(FieldFn);

impl ScalarField {
    pub fn new(f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField(Arc::new(f))
    }

    pub fn constant(c: f64) -> Self {
        ScalarField::new(move |_, _| c)
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        (self.0)(t, x)
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField(..)")
    }
}

/// A vector coefficient map `(t, x) -> R^N`, one scalar field per component.
#[derive(Clone, Debug)]
pub struct VectorField {
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(comps: Vec<ScalarField>) -> Self {
        VectorField { comps }
    }

    pub fn constant(v: &[f64]) -> Self {
        VectorField {
            comps: v.iter().map(|&c| ScalarField::constant(c)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval(t, x)).collect()
    }
}

/// The parametric kinds of set values.
#[derive(Clone, Debug)]
pub enum MultimapKind {
    /// Single-valued field `{ f(t, x) }`.
    Singleton(VectorField),
    /// `[lo(t,x), hi(t,x)]`, one-dimensional only.
    Interval { lo: ScalarField, hi: ScalarField },
    /// Closed Euclidean ball.
    Ball { center: VectorField, radius: ScalarField },
    /// Axis-aligned closed box given by center and half-widths.
    Box { center: VectorField, halfwidths: VectorField },
    /// Finite point set (first-index tie-breaks keep queries deterministic).
    Finite(Vec<VectorField>),
    /// Extreme points of the inner field's values.
    ExtremeOf(Box<Multimap>),
}

/// A concrete set value `F(t, x)` in R^N.
#[derive(Clone, Debug, PartialEq)]
pub enum SetValue {
    Point(Vec<f64>),
    Interval { lo: f64, hi: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    Box { center: Vec<f64>, halfwidths: Vec<f64> },
    Finite(Vec<Vec<f64>>),
    Sphere { center: Vec<f64>, radius: f64 },
}

impl SetValue {
    /// Distance from `z` to the set; zero iff `z` is a member.
    pub fn distance(&self, z: &[f64]) -> f64 {
        match self {
            SetValue::Point(p) => dist(z, p),
            SetValue::Interval { lo, hi } => (lo - z[0]).max(z[0] - hi).max(0.0),
            SetValue::Ball { center, radius } => (dist(z, center) - radius).max(0.0),
            SetValue::Box { center, halfwidths } => {
                let mut acc = 0.0;
                for k in 0..center.len() {
                    let excess = ((z[k] - center[k]).abs() - halfwidths[k]).max(0.0);
                    acc += excess * excess;
                }
                acc.sqrt()
            }
            SetValue::Finite(points) => points
                .iter()
                .map(|p| dist(z, p))
                .fold(f64::INFINITY, f64::min),
            SetValue::Sphere { center, radius } => (dist(z, center) - radius).abs(),
        }
    }

    /// Nearest point of the set to `z` (first-index tie-break for finite
    /// sets, first coordinate axis for a sphere seen from its center).
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(match self {
            SetValue::Point(p) => p.clone(),
            SetValue::Interval { lo, hi } => vec![z[0].clamp(*lo, *hi)],
            SetValue::Ball { center, radius } => {
                let d = dist(z, center);
                if d <= *radius {
                    z.to_vec()
                } else {
                    let scale = radius / d;
                    center
                        .iter()
                        .zip(z)
                        .map(|(c, zi)| c + scale * (zi - c))
                        .collect()
                }
            }
            SetValue::Box { center, halfwidths } => center
                .iter()
                .zip(halfwidths)
                .zip(z)
                .map(|((c, w), zi)| zi.clamp(c - w, c + w))
                .collect(),
            SetValue::Finite(points) => {
                if points.is_empty() {
                    return Err(Error::ProjectionUnsupported);
                }
                let mut best = 0usize;
                let mut best_d = dist(z, &points[0]);
                for (i, p) in points.iter().enumerate().skip(1) {
                    let d = dist(z, p);
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                points[best].clone()
            }
            SetValue::Sphere { center, radius } => {
                let d = dist(z, center);
                if d == 0.0 {
                    let mut out = center.clone();
                    out[0] += radius;
                    out
                } else {
                    let scale = radius / d;
                    center
                        .iter()
                        .zip(z)
                        .map(|(c, zi)| c + scale * (zi - c))
                        .collect()
                }
            }
        })
    }

    /// Support point: a member maximizing `(y, dir)`.
    pub fn support_point(&self, dir: &[f64]) -> Result<Vec<f64>> {
        Ok(match self {
            SetValue::Point(p) => p.clone(),
            SetValue::Interval { lo, hi } => {
                if dir[0] >= 0.0 {
                    vec![*hi]
                } else {
                    vec![*lo]
                }
            }
            SetValue::Ball { center, radius } | SetValue::Sphere { center, radius } => {
                let n = euclid(dir);
                if n == 0.0 {
                    let mut out = center.clone();
                    out[0] += radius;
                    out
                } else {
                    center
                        .iter()
                        .zip(dir)
                        .map(|(c, d)| c + radius * d / n)
                        .collect()
                }
            }
            SetValue::Box { center, halfwidths } => center
                .iter()
                .zip(halfwidths)
                .zip(dir)
                .map(|((c, w), d)| if *d >= 0.0 { c + w } else { c - w })
                .collect(),
            SetValue::Finite(points) => {
                if points.is_empty() {
                    return Err(Error::SelectionUnsupported);
                }
                let mut best = 0usize;
                let mut best_v = dot(&points[0], dir);
                for (i, p) in points.iter().enumerate().skip(1) {
                    let v = dot(p, dir);
                    if v > best_v {
                        best_v = v;
                        best = i;
                    }
                }
                points[best].clone()
            }
        })
    }

    /// Support function `sup { (y, dir) : y in set }`, exact per kind.
    pub fn support_value(&self, dir: &[f64]) -> Result<f64> {
        Ok(dot(&self.support_point(dir)?, dir))
    }

    /// `sup { |y| : y in set }`, the radius of the smallest origin-centered
    /// ball containing the set.
    pub fn sup_norm(&self) -> f64 {
        match self {
            SetValue::Point(p) => euclid(p),
            SetValue::Interval { lo, hi } => lo.abs().max(hi.abs()),
            SetValue::Ball { center, radius } | SetValue::Sphere { center, radius } => {
                euclid(center) + radius
            }
            SetValue::Box { center, halfwidths } => {
                let mut acc = 0.0;
                for k in 0..center.len() {
                    let worst = center[k].abs() + halfwidths[k];
                    acc += worst * worst;
                }
                acc.sqrt()
            }
            SetValue::Finite(points) => points.iter().map(|p| euclid(p)).fold(0.0, f64::max),
        }
    }

    /// Chebyshev-center selection for kinds where a canonical member exists.
    fn centroid_member(&self) -> Result<Vec<f64>> {
        Ok(match self {
            SetValue::Point(p) => p.clone(),
            SetValue::Interval { lo, hi } => vec![0.5 * (lo + hi)],
            SetValue::Ball { center, .. } | SetValue::Box { center, .. } => center.clone(),
            SetValue::Finite(points) => {
                if points.is_empty() {
                    return Err(Error::SelectionUnsupported);
                }
                let dim = points[0].len();
                let mut mean = vec![0.0; dim];
                for p in points {
                    for (m, c) in mean.iter_mut().zip(p) {
                        *m += c / points.len() as f64;
                    }
                }
                // Nearest member so the selection stays inside the set.
                return SetValue::Finite(points.clone()).project(&mean);
            }
            SetValue::Sphere { .. } => return Err(Error::SelectionUnsupported),
        })
    }

    /// Extreme points of the set value.
    fn extreme(&self) -> Result<SetValue> {
        Ok(match self {
            SetValue::Point(p) => SetValue::Point(p.clone()),
            SetValue::Interval { lo, hi } => SetValue::Finite(vec![vec![*lo], vec![*hi]]),
            SetValue::Ball { center, radius } => SetValue::Sphere {
                center: center.clone(),
                radius: *radius,
            },
            SetValue::Box { center, halfwidths } => {
                let dim = center.len();
                if dim > 16 {
                    return Err(Error::invalid("box corner enumeration limited to N <= 16"));
                }
                SetValue::Finite(box_corners(center, halfwidths))
            }
            SetValue::Finite(points) => SetValue::Finite(points.clone()),
            SetValue::Sphere { center, radius } => SetValue::Sphere {
                center: center.clone(),
                radius: *radius,
            },
        })
    }

    /// Deterministic `k`-point sample; includes every extreme point for
    /// interval and finite kinds.
    pub fn sample(&self, k: usize) -> Vec<Vec<f64>> {
        let k = k.max(1);
        match self {
            SetValue::Point(p) => vec![p.clone()],
            SetValue::Interval { lo, hi } => {
                let mut out = vec![vec![*lo], vec![*hi]];
                for j in 0..k.saturating_sub(2) {
                    let frac = (j as f64 + 1.0) / (k as f64 - 1.0);
                    out.push(vec![lo + frac * (hi - lo)]);
                }
                out.truncate(k.max(2));
                out
            }
            SetValue::Ball { center, radius } => {
                let mut out = vec![center.clone()];
                out.extend(sphere_points(center, *radius, k.saturating_sub(1)));
                out
            }
            SetValue::Sphere { center, radius } => sphere_points(center, *radius, k),
            SetValue::Box { center, halfwidths } => {
                let mut out = vec![center.clone()];
                if center.len() <= 16 {
                    out.extend(box_corners(center, halfwidths));
                }
                if out.len() > k {
                    out.truncate(k);
                }
                out
            }
            SetValue::Finite(points) => {
                if k >= points.len() {
                    points.clone()
                } else {
                    points[..k].to_vec()
                }
            }
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn box_corners(center: &[f64], halfwidths: &[f64]) -> Vec<Vec<f64>> {
    let dim = center.len();
    let mut out = Vec::with_capacity(1 << dim);
    for mask in 0..(1usize << dim) {
        let corner: Vec<f64> = (0..dim)
            .map(|k| {
                if mask & (1 << k) != 0 {
                    center[k] + halfwidths[k]
                } else {
                    center[k] - halfwidths[k]
                }
            })
            .collect();
        out.push(corner);
    }
    out
}

/// Deterministic points on a sphere: axis extremes first, then a seeded fill.
fn sphere_points(center: &[f64], radius: f64, k: usize) -> Vec<Vec<f64>> {
    let dim = center.len();
    let mut out = Vec::new();
    for axis in 0..dim {
        for sign in [1.0, -1.0] {
            if out.len() >= k {
                return out;
            }
            let mut p = center.to_vec();
            p[axis] += sign * radius;
            out.push(p);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e75_a11e);
    while out.len() < k {
        let dir: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0f64..1.0)).collect();
        let n = euclid(&dir);
        if n < 1e-9 {
            continue;
        }
        out.push(
            center
                .iter()
                .zip(&dir)
                .map(|(c, d)| c + radius * d / n)
                .collect(),
        );
    }
    out
}

/// Farthest distance from point `p` to the set: `sup { |y - p| : y in set }`.
fn farthest_distance(set: &SetValue, p: &[f64]) -> Result<f64> {
    Ok(match set {
        SetValue::Point(q) => dist(p, q),
        SetValue::Interval { lo, hi } => (p[0] - lo).abs().max((p[0] - hi).abs()),
        SetValue::Ball { center, radius } | SetValue::Sphere { center, radius } => {
            dist(p, center) + radius
        }
        SetValue::Box { center, halfwidths } => {
            let mut acc = 0.0;
            for k in 0..center.len() {
                let w = (p[k] - (center[k] - halfwidths[k]))
                    .abs()
                    .max((p[k] - (center[k] + halfwidths[k])).abs());
                acc += w * w;
            }
            acc.sqrt()
        }
        SetValue::Finite(points) => points.iter().map(|q| dist(p, q)).fold(0.0, f64::max),
    })
}

/// Hausdorff distance between two set values, exact via closed forms for the
/// supported kind pairs; symmetric by construction.
pub fn hausdorff(a: &SetValue, b: &SetValue) -> Result<f64> {
    use SetValue::*;
    // A point against anything reduces to the farthest distance.
    if let Point(p) = a {
        return farthest_distance(b, p);
    }
    if let Point(p) = b {
        return farthest_distance(a, p);
    }
    match (a, b) {
        (Interval { lo: a0, hi: a1 }, Interval { lo: b0, hi: b1 }) => {
            Ok((a0 - b0).abs().max((a1 - b1).abs()))
        }
        (Ball { center: c1, radius: r1 }, Ball { center: c2, radius: r2 }) => {
            Ok(dist(c1, c2) + (r1 - r2).abs())
        }
        (Sphere { center: c1, radius: r1 }, Sphere { center: c2, radius: r2 }) => {
            let d = dist(c1, c2);
            let one = excess_sphere(d, *r1, *r2);
            let two = excess_sphere(d, *r2, *r1);
            Ok(one.max(two))
        }
        (Box { center: c1, halfwidths: w1 }, Box { center: c2, halfwidths: w2 }) => {
            if c1.len() > 16 {
                return Err(Error::HausdorffUnsupported);
            }
            let bx = SetValue::Box {
                center: c2.clone(),
                halfwidths: w2.clone(),
            };
            let ax = SetValue::Box {
                center: c1.clone(),
                halfwidths: w1.clone(),
            };
            let mut worst = 0.0f64;
            for corner in box_corners(c1, w1) {
                worst = worst.max(bx.distance(&corner));
            }
            for corner in box_corners(c2, w2) {
                worst = worst.max(ax.distance(&corner));
            }
            Ok(worst)
        }
        (Finite(ps), Finite(qs)) => {
            let one = ps
                .iter()
                .map(|p| qs.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            let two = qs
                .iter()
                .map(|q| ps.iter().map(|p| dist(p, q)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max);
            Ok(one.max(two))
        }
        (Finite(ps), Interval { lo, hi }) | (Interval { lo, hi }, Finite(ps)) => {
            hausdorff_interval_finite(*lo, *hi, ps)
        }
        _ => Err(Error::HausdorffUnsupported),
    }
}

/// `sup_{x in S(c1,r1)} d(x, S(c2,r2))` for spheres at center distance `d`:
/// the distance function `| |x - c2| - r2 |` is extremal where `|x - c2|`
/// hits the ends of its range `[|d - r1|, d + r1]`.
fn excess_sphere(d: f64, r1: f64, r2: f64) -> f64 {
    ((d + r1 - r2).abs()).max(((d - r1).abs() - r2).abs())
}

/// Exact one-dimensional Hausdorff distance between `[lo, hi]` and a finite
/// set: candidate maximizers of the interval-side excess are the interval
/// endpoints and midpoints between consecutive sorted points.
fn hausdorff_interval_finite(lo: f64, hi: f64, points: &[Vec<f64>]) -> Result<f64> {
    if points.is_empty() || points[0].len() != 1 {
        return Err(Error::HausdorffUnsupported);
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
    xs.sort_by(f64::total_cmp);
    let nearest = |z: f64| xs.iter().map(|x| (z - x).abs()).fold(f64::INFINITY, f64::min);
    let mut excess_interval = nearest(lo).max(nearest(hi));
    for w in xs.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if mid >= lo && mid <= hi {
            excess_interval = excess_interval.max(nearest(mid));
        }
    }
    let excess_points = xs
        .iter()
        .map(|&x| (lo - x).max(x - hi).max(0.0))
        .fold(0.0, f64::max);
    Ok(excess_interval.max(excess_points))
}

/// Nodewise selection strategies.
#[derive(Clone, Debug)]
pub enum SelectionStrategy {
    /// Nearest point of `F(t_i, u(t_i))` to the anchor path.
    Projection { anchor: DiscreteFunction },
    /// Chebyshev/center point.
    Centroid,
    /// Support point in a fixed direction.
    Extreme { direction: Vec<f64> },
    /// Alternating support points in `+-direction` over `2^level` equal
    /// time blocks.
    Oscillating { level: u32, direction: Vec<f64> },
}

/// A parametric set-valued field together with its ambient dimension.
#[derive(Clone, Debug)]
pub struct Multimap {
    kind: MultimapKind,
    dim: usize,
}

impl Multimap {
    pub fn new(kind: MultimapKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch);
        }
        match &kind {
            MultimapKind::Singleton(f) => {
                if f.dim() != dim {
                    return Err(Error::DimensionMismatch);
                }
            }
            MultimapKind::Interval { .. } => {
                if dim != 1 {
                    return Err(Error::invalid("interval values are one-dimensional"));
                }
            }
            MultimapKind::Ball { center, .. } => {
                if center.dim() != dim {
                    return Err(Error::DimensionMismatch);
                }
            }
            MultimapKind::Box { center, halfwidths } => {
                if center.dim() != dim || halfwidths.dim() != dim {
                    return Err(Error::DimensionMismatch);
                }
            }
            MultimapKind::Finite(points) => {
                if points.is_empty() {
                    return Err(Error::invalid("finite kind needs at least one point map"));
                }
                if points.iter().any(|p| p.dim() != dim) {
                    return Err(Error::DimensionMismatch);
                }
            }
            MultimapKind::ExtremeOf(inner) => {
                if inner.dim != dim {
                    return Err(Error::DimensionMismatch);
                }
            }
        }
        Ok(Multimap { kind, dim })
    }

    pub fn kind(&self) -> &MultimapKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether values are convex, derived from the kind.
    pub fn is_convex(&self) -> bool {
        match &self.kind {
            MultimapKind::Singleton(_)
            | MultimapKind::Interval { .. }
            | MultimapKind::Ball { .. }
            | MultimapKind::Box { .. } => true,
            MultimapKind::Finite(points) => points.len() == 1,
            MultimapKind::ExtremeOf(_) => false,
        }
    }

    /// The concrete set value at `(t, x)`.
    pub fn value(&self, t: f64, x: &[f64]) -> Result<SetValue> {
        Ok(match &self.kind {
            MultimapKind::Singleton(f) => SetValue::Point(f.eval(t, x)),
            MultimapKind::Interval { lo, hi } => {
                let l = lo.eval(t, x);
                let h = hi.eval(t, x);
                if !(l.is_finite() && h.is_finite()) {
                    return Err(Error::NonFiniteSample);
                }
                if l > h {
                    return Err(Error::invalid("interval bounds crossed"));
                }
                SetValue::Interval { lo: l, hi: h }
            }
            MultimapKind::Ball { center, radius } => {
                let r = radius.eval(t, x);
                if !(r >= 0.0) {
                    return Err(Error::invalid("negative radius"));
                }
                SetValue::Ball {
                    center: center.eval(t, x),
                    radius: r,
                }
            }
            MultimapKind::Box { center, halfwidths } => {
                let w = halfwidths.eval(t, x);
                if w.iter().any(|wi| !(*wi >= 0.0)) {
                    return Err(Error::invalid("negative halfwidth"));
                }
                SetValue::Box {
                    center: center.eval(t, x),
                    halfwidths: w,
                }
            }
            MultimapKind::Finite(points) => {
                SetValue::Finite(points.iter().map(|p| p.eval(t, x)).collect())
            }
            MultimapKind::ExtremeOf(inner) => inner.value(t, x)?.extreme()?,
        })
    }

    /// Deterministic `k`-point sample of `F(t, x)`.
    pub fn value_sample(&self, t: f64, x: &[f64], k: usize) -> Result<Vec<Vec<f64>>> {
        Ok(self.value(t, x)?.sample(k))
    }

    /// Nearest point of `F(t, x)` to `z`.
    pub fn project(&self, t: f64, x: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        self.value(t, x)?.project(z)
    }

    /// Distance from `z` to `F(t, x)`.
    pub fn distance(&self, t: f64, x: &[f64], z: &[f64]) -> Result<f64> {
        Ok(self.value(t, x)?.distance(z))
    }

    /// Replace values by their closed convex hulls.
    pub fn convexify(&self) -> Result<Multimap> {
        match &self.kind {
            MultimapKind::Singleton(_)
            | MultimapKind::Interval { .. }
            | MultimapKind::Ball { .. }
            | MultimapKind::Box { .. } => Ok(self.clone()),
            MultimapKind::Finite(points) => {
                if self.dim != 1 {
                    return Err(Error::invalid(
                        "convex hull of a finite kind is only closed-form in dimension 1",
                    ));
                }
                let ps = points.clone();
                let lo = {
                    let ps = ps.clone();
                    ScalarField::new(move |t, x| {
                        ps.iter()
                            .map(|p| p.eval(t, x)[0])
                            .fold(f64::INFINITY, f64::min)
                    })
                };
                let hi = ScalarField::new(move |t, x| {
                    ps.iter()
                        .map(|p| p.eval(t, x)[0])
                        .fold(f64::NEG_INFINITY, f64::max)
                });
                Multimap::new(MultimapKind::Interval { lo, hi }, 1)
            }
            // The closed convex hull of the extreme points of a closed
            // convex body is the body itself.
            MultimapKind::ExtremeOf(inner) => inner.convexify(),
        }
    }

    /// Nodewise selection `f(t_i) in F(t_i, u(t_i))` under the strategy.
    pub fn select(&self, u: &DiscreteFunction, strategy: &SelectionStrategy) -> Result<DiscreteFunction> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch);
        }
        let grid = u.grid();
        let m = grid.m();
        let mut out = DiscreteFunction::zeros(grid, self.dim);
        for i in 0..=m {
            let t = grid.node(i);
            let x = u.value(i);
            let value = self.value(t, x)?;
            let picked = match strategy {
                SelectionStrategy::Projection { anchor } => {
                    if anchor.grid() != grid || anchor.dim() != self.dim {
                        return Err(Error::GridMismatch);
                    }
                    value.project(anchor.value(i))?
                }
                SelectionStrategy::Centroid => value.centroid_member()?,
                SelectionStrategy::Extreme { direction } => {
                    if direction.len() != self.dim {
                        return Err(Error::DimensionMismatch);
                    }
                    value.support_point(direction)?
                }
                SelectionStrategy::Oscillating { level, direction } => {
                    if direction.len() != self.dim {
                        return Err(Error::DimensionMismatch);
                    }
                    let blocks = 1usize << level;
                    let block = ((i * blocks) / m).min(blocks - 1);
                    if block.is_multiple_of(2) {
                        value.support_point(direction)?
                    } else {
                        let neg: Vec<f64> = direction.iter().map(|d| -d).collect();
                        value.support_point(&neg)?
                    }
                }
            };
            out.value_mut(i).copy_from_slice(&picked);
        }
        Ok(out)
    }

    /// Sampled Lipschitz estimate in the Hausdorff metric over the ball of
    /// radius `eta`: max of `h(F(t,x), F(t,v)) / |x - v|`.
    pub fn check_lipschitz(&self, b: f64, eta: f64, samples: usize, seed: u64) -> Result<f64> {
        let samples = samples.max(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x12e1_5c0d);
        let t_probes = 17usize;
        let mut worst = 0.0f64;
        let mut consider = |t: f64, x: &[f64], v: &[f64]| -> Result<()> {
            let d = dist(x, v);
            if d < 1e-12 {
                return Ok(());
            }
            let h = hausdorff(&self.value(t, x)?, &self.value(t, v)?)?;
            if h / d > worst {
                worst = h / d;
            }
            Ok(())
        };
        for j in 0..t_probes {
            let t = b * j as f64 / (t_probes as f64 - 1.0);
            // Close pairs along each axis around a magnitude sweep through 0.
            for axis in 0..self.dim {
                for s in [-0.9, -0.5, -0.1, 0.0, 0.1, 0.5, 0.9] {
                    let mut x = vec![0.0; self.dim];
                    let mut v = vec![0.0; self.dim];
                    x[axis] = s * eta + 1e-3 * eta;
                    v[axis] = s * eta - 1e-3 * eta;
                    consider(t, &x, &v)?;
                }
            }
            for _ in 0..samples / t_probes + 1 {
                let x = ball_sample(&mut rng, self.dim, eta);
                let v = ball_sample(&mut rng, self.dim, eta);
                consider(t, &x, &v)?;
            }
        }
        Ok(worst)
    }

    /// Sampled growth verdict: checks the weight cap and its strictness,
    /// extrapolates the directional growth quotient over the largest two
    /// radii against the weight, and verifies the per-radius boundedness
    /// profiles. A sampled verdict, not a proof.
    pub fn check_growth(
        &self,
        witness: &GrowthWitness,
        xi: f64,
        lambda1: f64,
        sample_radii: &[f64],
        p: f64,
        seed: u64,
    ) -> Result<Vec<CheckEntry>> {
        if sample_radii.len() < 2 || sample_radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("sample radii must be increasing with at least two entries"));
        }
        if *sample_radii.last().unwrap() < 100.0 {
            return Err(Error::invalid("largest sample radius must be at least 100"));
        }
        let theta = &witness.theta;
        let grid = theta.grid();
        let cap = lambda1 * xi;
        let mut entries = Vec::new();

        // Weight cap nodewise.
        let mut max_excess = f64::NEG_INFINITY;
        for i in 0..grid.num_nodes() {
            max_excess = max_excess.max(theta.scalar(i) - cap);
        }
        entries.push(CheckEntry {
            name: "growth weight cap".into(),
            pass: max_excess <= 1e-12,
            detail: format!(
                "max theta - lambda1*xi = {max_excess:.3e} (cap {cap:.6e}); sampled verdict"
            ),
        });

        // Strict inequality on at least one full subinterval.
        let strict = (0..grid.m())
            .any(|i| theta.scalar(i) < cap - 1e-12 && theta.scalar(i + 1) < cap - 1e-12);
        entries.push(CheckEntry {
            name: "growth weight strictness".into(),
            pass: strict,
            detail: if strict {
                "strict on at least one full grid subinterval".into()
            } else {
                "strict inequality set empty".into()
            },
        });

        // Directional growth quotient, extrapolated in R^{1-p} over the two
        // largest radii.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6006_0061);
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for axis in 0..self.dim {
            for sign in [1.0, -1.0] {
                let mut d = vec![0.0; self.dim];
                d[axis] = sign;
                dirs.push(d);
            }
        }
        for _ in 0..8 {
            let d = ball_sample(&mut rng, self.dim, 1.0);
            let n = euclid(&d);
            if n > 1e-6 {
                dirs.push(d.iter().map(|c| c / n).collect());
            }
        }
        let r_hi = sample_radii[sample_radii.len() - 1];
        let r_lo = sample_radii[sample_radii.len() - 2];
        let node_stride = (grid.m() / 64).max(1);
        let mut worst_violation = f64::NEG_INFINITY;
        let est = |t: f64, radius: f64| -> Result<f64> {
            let mut sup = f64::NEG_INFINITY;
            for d in &dirs {
                let x: Vec<f64> = d.iter().map(|c| c * radius).collect();
                let value = self.value(t, &x)?;
                let s = value.support_value(&x)? / radius.powf(p);
                sup = sup.max(s);
            }
            Ok(sup)
        };
        for i in (0..grid.num_nodes()).step_by(node_stride) {
            let t = grid.node(i);
            let e_hi = est(t, r_hi)?;
            let e_lo = est(t, r_lo)?;
            // Model e(R) = alpha + beta R^{1-p}; alpha is the limsup estimate.
            let a = r_lo.powf(1.0 - p);
            let b = r_hi.powf(1.0 - p);
            let alpha = if (a - b).abs() > 1e-300 {
                (e_lo * b - e_hi * a) / (b - a)
            } else {
                e_hi
            };
            worst_violation = worst_violation.max(alpha - theta.scalar(i));
        }
        let tol = 1e-6 * (1.0 + cap.abs());
        entries.push(CheckEntry {
            name: "growth limsup quotient".into(),
            pass: worst_violation <= tol,
            detail: format!(
                "max extrapolated quotient excess over theta = {worst_violation:.3e} (tol {tol:.1e}); consistent up to radius {r_hi}; sampled verdict"
            ),
        });

        // Per-radius boundedness profiles.
        for bound in &witness.a_eta {
            let mut worst = f64::NEG_INFINITY;
            for i in (0..grid.num_nodes()).step_by(node_stride) {
                let t = grid.node(i);
                let cap_here = bound.profile.scalar(i);
                for _ in 0..8 {
                    let x = ball_sample(&mut rng, self.dim, bound.eta);
                    let sup = self.value(t, &x)?.sup_norm();
                    worst = worst.max(sup - cap_here);
                }
                // Boundary of the ball along the axes.
                for axis in 0..self.dim {
                    for sign in [1.0, -1.0] {
                        let mut x = vec![0.0; self.dim];
                        x[axis] = sign * bound.eta;
                        let sup = self.value(t, &x)?.sup_norm();
                        worst = worst.max(sup - cap_here);
                    }
                }
            }
            entries.push(CheckEntry {
                name: format!("local boundedness at eta={}", bound.eta),
                pass: worst <= 1e-9,
                detail: format!("max |F(t,x)| excess over profile = {worst:.3e}; sampled verdict"),
            });
        }
        Ok(entries)
    }
}

fn ball_sample(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0f64..1.0)).collect();
        if dot(&v, &v) <= 1.0 {
            return v.into_iter().map(|c| c * radius).collect();
        }
    }
}

/// Declared growth data: the weight profile and per-radius integrable bounds.
#[derive(Clone, Debug)]
pub struct GrowthWitness {
    /// Nonnegative scalar weight sampled on the working grid.
    pub theta: DiscreteFunction,
    /// Bounds `|F(t, x)| <= profile(t)` valid for `|x| <= eta`.
    pub a_eta: Vec<EtaBound>,
}

#[derive(Clone, Debug)]
pub struct EtaBound {
    pub eta: f64,
    pub profile: DiscreteFunction,
}

impl GrowthWitness {
    pub fn new(theta: DiscreteFunction, a_eta: Vec<EtaBound>) -> Result<Self> {
        theta.check_finite()?;
        if theta.dim() != 1 {
            return Err(Error::DimensionMismatch);
        }
        if (0..theta.grid().num_nodes()).any(|i| theta.scalar(i) < 0.0) {
            return Err(Error::invalid("growth weight must be nonnegative"));
        }
        for bound in &a_eta {
            bound.profile.check_finite()?;
            if bound.profile.dim() != 1 || bound.profile.grid() != theta.grid() {
                return Err(Error::GridMismatch);
            }
            if !(bound.eta > 0.0) {
                return Err(Error::invalid("eta must be positive"));
            }
            if (0..bound.profile.grid().num_nodes()).any(|i| bound.profile.scalar(i) < 0.0) {
                return Err(Error::invalid("boundedness profile must be nonnegative"));
            }
        }
        Ok(GrowthWitness { theta, a_eta })
    }

    /// The bound profile at the largest declared radius.
    pub fn widest(&self) -> Option<&EtaBound> {
        self.a_eta
            .iter()
            .max_by(|a, b| a.eta.total_cmp(&b.eta))
    }
}
