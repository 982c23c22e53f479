//! JSON configuration schema (version 1) and builders turning a parsed
//! configuration into solver inputs. Unknown keys are rejected everywhere.

use serde::Deserialize;

use crate::bvp::{Problem, SolveStrategy, SolverOptions};
use crate::error::{Error, Result};
use crate::expr;
use crate::grid::{DiscreteFunction, Grid, DEFAULT_M};
use crate::multimap::{
    EtaBound, GrowthWitness, Multimap, MultimapKind, ScalarField, VectorField,
};
use crate::operators::{Operator, OperatorKind, RadialProfile};
use crate::relaxation::RelaxConfig;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    pub problem: ProblemConfig,
    pub solver: SolverConfig,
    #[serde(default)]
    pub branch: Option<BranchConfig>,
    #[serde(default)]
    pub relax: Option<RelaxSection>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub operator: OperatorConfig,
    pub p: f64,
    pub b: f64,
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(default)]
    pub grid_m: Option<usize>,
    /// Expression over `t` for the damping coefficient.
    pub r: String,
    pub multimap: MultimapConfig,
    pub growth_witness: WitnessConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum OperatorConfig {
    #[serde(rename = "p_laplacian")]
    PLaplacian { params: PParams, #[serde(default)] c0: Option<f64> },
    #[serde(rename = "pq_laplacian")]
    PqLaplacian { params: PqParams, #[serde(default)] c0: Option<f64> },
    #[serde(rename = "curvature")]
    Curvature { params: PParams, #[serde(default)] c0: Option<f64> },
    #[serde(rename = "exponential")]
    Exponential { params: PcParams, #[serde(default)] c0: Option<f64> },
    #[serde(rename = "linear")]
    Linear { params: CParams, #[serde(default)] c0: Option<f64> },
    #[serde(rename = "custom_radial")]
    CustomRadial { params: ProfileParams, #[serde(default)] c0: Option<f64> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PParams {
    pub p: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PqParams {
    pub p: f64,
    pub q: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcParams {
    pub p: f64,
    pub c: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CParams {
    pub c: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileParams {
    /// One of `piecewise`, `exp_plus`, `plap_plus`.
    pub profile: String,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum MultimapConfig {
    #[serde(rename = "singleton")]
    Singleton { f: Vec<String> },
    #[serde(rename = "interval")]
    Interval { lo: String, hi: String },
    #[serde(rename = "ball")]
    Ball { center: Vec<String>, radius: String },
    #[serde(rename = "box")]
    Box { center: Vec<String>, halfwidths: Vec<String> },
    #[serde(rename = "finite")]
    Finite { points: Vec<Vec<String>> },
    #[serde(rename = "extreme_of")]
    ExtremeOf { inner: Box<MultimapConfig> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    /// Expression over `t`.
    pub theta: String,
    pub a_eta: Vec<EtaProfileConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaProfileConfig {
    pub eta: f64,
    /// Expression over `t`.
    pub profile: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub strategy: StrategyConfig,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum StrategyConfig {
    #[serde(rename = "projection")]
    Projection,
    #[serde(rename = "centroid")]
    Centroid,
    #[serde(rename = "extreme")]
    Extreme {
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
    #[serde(rename = "oscillating")]
    Oscillating {
        level: u32,
        #[serde(default)]
        direction: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    pub lambdas: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaxSection {
    pub levels: Vec<u32>,
    pub eps0: f64,
    pub eta: f64,
    pub target: f64,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config> {
        let cfg: Config =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.version != 1 {
            return Err(Error::Config(format!(
                "unsupported config version {}",
                cfg.version
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        let p = &self.problem;
        if !(p.p > 1.0 && p.p.is_finite()) {
            return Err(Error::ExponentOutOfRange);
        }
        if !(p.b > 0.0 && p.b.is_finite()) {
            return Err(Error::Config("b must be positive".into()));
        }
        if p.dim == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if let Some(m) = p.grid_m {
            if m < 2 {
                return Err(Error::Config("grid_m must be at least 2".into()));
            }
        }
        if !(self.solver.damping > 0.0 && self.solver.damping <= 1.0) {
            return Err(Error::Config("damping must lie in (0, 1]".into()));
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        if self.solver.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if let Some(branch) = &self.branch {
            if branch.lambdas.is_empty() {
                return Err(Error::Config("branch.lambdas must be nonempty".into()));
            }
        }
        if let Some(relax) = &self.relax {
            if relax.levels.is_empty() {
                return Err(Error::Config("relax.levels must be nonempty".into()));
            }
            if !(relax.eta > 0.0) {
                return Err(Error::Config("relax.eta must be positive".into()));
            }
            if !(relax.eps0 > 0.0) {
                return Err(Error::Config("relax.eps0 must be positive".into()));
            }
            if !(relax.target > 0.0) {
                return Err(Error::Config("relax.target must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.problem.b, self.problem.grid_m.unwrap_or(DEFAULT_M))
    }

    pub fn build_operator(&self) -> Result<Operator> {
        let (kind, c0) = match &self.problem.operator {
            OperatorConfig::PLaplacian { params, c0 } => {
                (OperatorKind::PLaplacian { p: params.p }, *c0)
            }
            OperatorConfig::PqLaplacian { params, c0 } => (
                OperatorKind::PqLaplacian {
                    p: params.p,
                    q: params.q,
                },
                *c0,
            ),
            OperatorConfig::Curvature { params, c0 } => {
                (OperatorKind::Curvature { p: params.p }, *c0)
            }
            OperatorConfig::Exponential { params, c0 } => (
                OperatorKind::Exponential {
                    p: params.p,
                    c: params.c,
                },
                *c0,
            ),
            OperatorConfig::Linear { params, c0 } => (OperatorKind::Linear { c: params.c }, *c0),
            OperatorConfig::CustomRadial { params, c0 } => {
                let profile = match params.profile.as_str() {
                    "piecewise" => RadialProfile::Piecewise {
                        q: params.q.ok_or_else(|| {
                            Error::Config("piecewise profile needs q".into())
                        })?,
                    },
                    "exp_plus" => RadialProfile::ExpPlus,
                    "plap_plus" => RadialProfile::PlapPlus {
                        p: params.p.ok_or_else(|| {
                            Error::Config("plap_plus profile needs p".into())
                        })?,
                    },
                    other => {
                        return Err(Error::Config(format!("unknown radial profile `{other}`")))
                    }
                };
                (OperatorKind::CustomRadial { profile }, *c0)
            }
        };
        let mut op = Operator::new(kind, self.problem.dim)?;
        if (op.p() - self.problem.p).abs() > 1e-12 {
            op = op.with_growth_exponent(self.problem.p)?;
        }
        if let Some(c0) = c0 {
            op = op.with_claimed_c0(c0);
        }
        Ok(op)
    }

    fn scalar_field(&self, src: &str) -> Result<ScalarField> {
        Ok(expr::parse(src, self.problem.dim)?.into_field())
    }

    fn vector_field(&self, comps: &[String]) -> Result<VectorField> {
        if comps.len() != self.problem.dim {
            return Err(Error::Config(format!(
                "expected {} components, found {}",
                self.problem.dim,
                comps.len()
            )));
        }
        let fields = comps
            .iter()
            .map(|c| self.scalar_field(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField::new(fields))
    }

    fn build_multimap_kind(&self, cfg: &MultimapConfig) -> Result<MultimapKind> {
        Ok(match cfg {
            MultimapConfig::Singleton { f } => MultimapKind::Singleton(self.vector_field(f)?),
            MultimapConfig::Interval { lo, hi } => MultimapKind::Interval {
                lo: self.scalar_field(lo)?,
                hi: self.scalar_field(hi)?,
            },
            MultimapConfig::Ball { center, radius } => MultimapKind::Ball {
                center: self.vector_field(center)?,
                radius: self.scalar_field(radius)?,
            },
            MultimapConfig::Box { center, halfwidths } => MultimapKind::Box {
                center: self.vector_field(center)?,
                halfwidths: self.vector_field(halfwidths)?,
            },
            MultimapConfig::Finite { points } => {
                let maps = points
                    .iter()
                    .map(|p| self.vector_field(p))
                    .collect::<Result<Vec<_>>>()?;
                MultimapKind::Finite(maps)
            }
            MultimapConfig::ExtremeOf { inner } => {
                let inner_kind = self.build_multimap_kind(inner)?;
                MultimapKind::ExtremeOf(Box::new(Multimap::new(inner_kind, self.problem.dim)?))
            }
        })
    }

    pub fn build_multimap(&self) -> Result<Multimap> {
        Multimap::new(
            self.build_multimap_kind(&self.problem.multimap)?,
            self.problem.dim,
        )
    }

    pub fn build_problem(&self) -> Result<Problem> {
        let grid = self.grid()?;
        let op = self.build_operator()?;
        // Time-only coefficient: parsing with dimension 0 rejects any
        // reference to the state coordinates.
        let r_expr = expr::parse(&self.problem.r, 0)?;
        let r = DiscreteFunction::from_scalar_fn(grid, |t| r_expr.eval(t, &[]));
        Problem::new(op, r, self.build_multimap()?, self.problem.p, grid)
    }

    pub fn build_witness(&self) -> Result<GrowthWitness> {
        let grid = self.grid()?;
        let theta_expr = expr::parse(&self.problem.growth_witness.theta, 0)?;
        let theta = DiscreteFunction::from_scalar_fn(grid, |t| theta_expr.eval(t, &[]));
        let mut bounds = Vec::new();
        for entry in &self.problem.growth_witness.a_eta {
            let profile_expr = expr::parse(&entry.profile, 0)?;
            bounds.push(EtaBound {
                eta: entry.eta,
                profile: DiscreteFunction::from_scalar_fn(grid, |t| profile_expr.eval(t, &[])),
            });
        }
        GrowthWitness::new(theta, bounds)
    }

    fn default_direction(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.problem.dim];
        d[0] = 1.0;
        d
    }

    pub fn solve_strategy(&self) -> Result<SolveStrategy> {
        Ok(match &self.solver.strategy {
            StrategyConfig::Projection => SolveStrategy::Projection,
            StrategyConfig::Centroid => SolveStrategy::Centroid,
            StrategyConfig::Extreme { direction } => SolveStrategy::Extreme {
                direction: self.unit_direction(direction.clone())?,
            },
            StrategyConfig::Oscillating { level, direction } => SolveStrategy::Oscillating {
                level: *level,
                direction: self.unit_direction(direction.clone())?,
            },
        })
    }

    fn unit_direction(&self, direction: Option<Vec<f64>>) -> Result<Vec<f64>> {
        let d = direction.unwrap_or_else(|| self.default_direction());
        if d.len() != self.problem.dim {
            return Err(Error::Config("direction dimension mismatch".into()));
        }
        let norm = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Config("direction must be nonzero".into()));
        }
        Ok(d.into_iter().map(|c| c / norm).collect())
    }

    pub fn solver_options(&self) -> Result<SolverOptions> {
        let mut opts = SolverOptions::new(self.solve_strategy()?);
        opts.damping = self.solver.damping;
        opts.tol = self.solver.tol;
        opts.max_iter = self.solver.max_iter;
        Ok(opts)
    }

    /// Hypothesis-check radius: the relax section's eta when present.
    pub fn check_eta(&self) -> f64 {
        self.relax.as_ref().map(|r| r.eta).unwrap_or(1.0)
    }

    pub fn relax_config(&self) -> Result<Option<RelaxConfig>> {
        let Some(section) = &self.relax else {
            return Ok(None);
        };
        Ok(Some(RelaxConfig {
            prob: self.build_problem()?,
            levels: section.levels.clone(),
            eps0: section.eps0,
            eta: section.eta,
            direction: self.default_direction(),
            solver: self.solver_options()?,
            samples: 500,
            seed: self.solver.seed,
        }))
    }
}
