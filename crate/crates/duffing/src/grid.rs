//! Uniform time grids on [0, b] and vector-valued sampled paths.
//!
//! A [`DiscreteFunction`] stores one vector of dimension `N` per node and is
//! the discrete stand-in for the continuous path spaces the solver works in.
//! Quadrature is composite trapezoid throughout, which is exact for
//! piecewise-linear integrands and keeps cumulative integrals consistent with
//! endpoint integrals by construction.

use crate::error::{Error, Result};

/// Default number of subintervals when a configuration does not override it.
pub const DEFAULT_M: usize = 1024;

/// Uniform partition of [0, b] into `m` subintervals (`m + 1` nodes).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    b: f64,
    m: usize,
}

impl Grid {
    pub fn new(b: f64, m: usize) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::invalid("interval length b must be positive and finite"));
        }
        if m < 2 {
            return Err(Error::invalid("grid needs at least 2 subintervals"));
        }
        Ok(Grid { b, m })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of subintervals.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of nodes, `m + 1`.
    pub fn num_nodes(&self) -> usize {
        self.m + 1
    }

    /// Uniform spacing `b / m`.
    pub fn h(&self) -> f64 {
        self.b / self.m as f64
    }

    /// Node `t_i = (i / m) * b`; exact at both endpoints.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.m);
        (i as f64 / self.m as f64) * self.b
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.m).map(move |i| self.node(i))
    }
}

/// Euclidean norm of a vector sample.
pub(crate) fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A sampled path `t_i -> R^N` on a [`Grid`].
///
/// Values are stored node-major: node `i` occupies `values[i*dim .. (i+1)*dim]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteFunction {
    grid: Grid,
    dim: usize,
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn zeros(grid: Grid, dim: usize) -> Self {
        DiscreteFunction {
            grid,
            dim,
            values: vec![0.0; grid.num_nodes() * dim],
        }
    }

    /// Sample a vector-valued map at every node.
    pub fn from_fn(grid: Grid, dim: usize, mut f: impl FnMut(f64) -> Vec<f64>) -> Self {
        let mut values = Vec::with_capacity(grid.num_nodes() * dim);
        for t in grid.nodes() {
            let v = f(t);
            assert_eq!(v.len(), dim, "sampling closure returned wrong dimension");
            values.extend_from_slice(&v);
        }
        DiscreteFunction { grid, dim, values }
    }

    pub fn from_scalar_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        DiscreteFunction::from_fn(grid, 1, |t| vec![f(t)])
    }

    pub fn from_values(grid: Grid, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch);
        }
        if values.len() != grid.num_nodes() * dim {
            return Err(Error::DimensionMismatch);
        }
        Ok(DiscreteFunction { grid, dim, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Vector value at node `i`.
    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn value_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Scalar value at node `i`; the function must have `dim == 1`.
    pub fn scalar(&self, i: usize) -> f64 {
        debug_assert_eq!(self.dim, 1);
        self.values[i * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.values.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteSample)
        }
    }

    fn check_same_grid(&self, other: &DiscreteFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch);
        }
        Ok(())
    }

    /// Composite-trapezoid integral of a scalar function.
    ///
    /// Exact for piecewise-linear integrands on the grid.
    pub fn integrate(&self) -> Result<f64> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch);
        }
        Ok(self.integrate_components()?[0])
    }

    /// Componentwise trapezoid integral.
    ///
    /// Accumulates cell by cell in node order so that the result agrees
    /// bit-for-bit with the final node of [`Self::cumulative_integral`].
    pub fn integrate_components(&self) -> Result<Vec<f64>> {
        self.check_finite()?;
        let h = self.grid.h();
        let mut acc = vec![0.0; self.dim];
        for i in 0..self.grid.m() {
            let a = self.value(i);
            let b = self.value(i + 1);
            for (k, slot) in acc.iter_mut().enumerate() {
                *slot += 0.5 * h * (a[k] + b[k]);
            }
        }
        Ok(acc)
    }

    /// Running trapezoid integral `H(t_i) = integral of f over [0, t_i]`,
    /// componentwise, with `H(0) = 0`.
    pub fn cumulative_integral(&self) -> Result<DiscreteFunction> {
        self.check_finite()?;
        let h = self.grid.h();
        let mut out = DiscreteFunction::zeros(self.grid, self.dim);
        let mut acc = vec![0.0; self.dim];
        for i in 0..self.grid.m() {
            let a = self.value(i);
            let b = self.value(i + 1);
            for (k, slot) in acc.iter_mut().enumerate() {
                *slot += 0.5 * h * (a[k] + b[k]);
            }
            out.value_mut(i + 1).copy_from_slice(&acc);
        }
        Ok(out)
    }

    /// Second-order derivative samples: central differences in the interior,
    /// one-sided three-point stencils at both endpoints.
    pub fn differentiate(&self) -> Result<DiscreteFunction> {
        self.check_finite()?;
        let m = self.grid.m();
        let h = self.grid.h();
        let mut out = DiscreteFunction::zeros(self.grid, self.dim);
        for k in 0..self.dim {
            let at = |i: usize| self.values[i * self.dim + k];
            out.value_mut(0)[k] = (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
            for i in 1..m {
                out.value_mut(i)[k] = (at(i + 1) - at(i - 1)) / (2.0 * h);
            }
            out.value_mut(m)[k] = (3.0 * at(m) - 4.0 * at(m - 1) + at(m - 2)) / (2.0 * h);
        }
        Ok(out)
    }

    /// `( integral |u(t)|^p dt )^{1/p}` with the Euclidean norm on R^N.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::ExponentOutOfRange);
        }
        self.check_finite()?;
        let pow = DiscreteFunction::from_fn(self.grid, 1, {
            let mut i = 0;
            move |_t| {
                let v = euclid(self.value(i)).powf(p);
                i += 1;
                vec![v]
            }
        });
        Ok(pow.integrate()?.powf(1.0 / p))
    }

    /// Max over nodes of the Euclidean norm.
    pub fn sup_norm(&self) -> f64 {
        (0..self.grid.num_nodes())
            .map(|i| euclid(self.value(i)))
            .fold(0.0, f64::max)
    }

    /// `alpha * self + beta * other`, on a common grid.
    pub fn lin_comb(&self, alpha: f64, other: &DiscreteFunction, beta: f64) -> Result<DiscreteFunction> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
        Ok(DiscreteFunction {
            grid: self.grid,
            dim: self.dim,
            values,
        })
    }

    pub fn scaled(&self, alpha: f64) -> DiscreteFunction {
        DiscreteFunction {
            grid: self.grid,
            dim: self.dim,
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }
}

/// The norm bundle used by the solver estimates.
#[derive(Clone, Copy, Debug)]
pub struct Norms {
    /// `L^p` norm of `u`.
    pub lp: f64,
    /// Sup over nodes of `|u(t_i)|`.
    pub sup: f64,
    /// `sup |u| + sup |u'|`.
    pub c1: f64,
    /// `L^p` norm of the derivative (the Sobolev-norm convention here).
    pub w1p: f64,
}

/// Compute all norms of `u` given its derivative samples `du`.
pub fn norms(u: &DiscreteFunction, du: &DiscreteFunction, p: f64) -> Result<Norms> {
    u.check_same_grid(du)?;
    let lp = u.lp_norm(p)?;
    let sup = u.sup_norm();
    let dsup = du.sup_norm();
    let w1p = du.lp_norm(p)?;
    Ok(Norms {
        lp,
        sup,
        c1: sup + dsup,
        w1p,
    })
}

/// Discrete C^1 distance: `sup |u - v| + sup |u' - v'|`.
pub fn c1_distance(
    u: &DiscreteFunction,
    du: &DiscreteFunction,
    v: &DiscreteFunction,
    dv: &DiscreteFunction,
) -> Result<f64> {
    let diff = u.lin_comb(1.0, v, -1.0)?;
    let ddiff = du.lin_comb(1.0, dv, -1.0)?;
    Ok(diff.sup_norm() + ddiff.sup_norm())
}
