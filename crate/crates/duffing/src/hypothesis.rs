//! Aggregated admissibility report: every structural check the solvers rely
//! on, with the derived constants, collected into one machine-readable
//! verdict. Every check is a sampled verdict and says so in its detail
//! string; the report never claims a proof.

use serde::Serialize;

use crate::bvp::{apriori_bound, Problem};
use crate::eigen::{estimate_c1, lambda_n, EigenParams, PsiParams};
use crate::error::Result;
use crate::multimap::GrowthWitness;

/// One named check with its verdict and a human-readable detail line.
#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Derived constants. Optional entries stay `null` in the JSON document when
/// the configuration does not determine them.
#[derive(Clone, Debug, Serialize)]
pub struct Constants {
    pub lambda1: f64,
    pub xi: f64,
    pub c1_estimate: Option<f64>,
    pub xi_hat_eta: Option<f64>,
    pub apriori: Option<f64>,
    pub norm_r_inf: f64,
    pub c0_estimate: f64,
    pub c_hat_eta: f64,
    pub k_eta_estimate: f64,
    pub eps: Option<f64>,
    pub eta: f64,
}

/// Applicability flags for the three solvability regimes: existence for
/// convex-valued fields, existence for closed-valued fields, and C^1 density
/// of nonconvex trajectories in the convexified solution set.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TheoremFlags {
    #[serde(rename = "thm6")]
    pub convex_existence: bool,
    #[serde(rename = "thm7")]
    pub nonconvex_existence: bool,
    #[serde(rename = "thm8")]
    pub relaxation_density: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub constants: Constants,
    pub checks: Vec<CheckEntry>,
    pub theorems: TheoremFlags,
}

impl HypothesisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// Default radii for the growth quotient sampling.
pub const GROWTH_RADII: [f64; 3] = [10.0, 100.0, 1000.0];

/// Number of trials in the positivity-margin battery.
pub const C1_TRIALS: usize = 256;

/// Run every check against the problem and its declared growth witness.
///
/// Failures never abort the compilation; they become failing entries and
/// clear the affected applicability flags. Identical inputs and seed produce
/// a bit-identical report.
pub fn compile_report(
    prob: &Problem,
    witness: &GrowthWitness,
    eta: f64,
    seed: u64,
) -> Result<HypothesisReport> {
    let b = prob.grid.b();
    let p = prob.p;
    let eigen = EigenParams::new(p, b, prob.dim())?;
    let lambda1 = lambda_n(&eigen, 1)?;
    let norm_r = prob.r_sup();
    let xi = prob.op.c0() - norm_r / lambda1.powf(1.0 / p);

    let mut checks = Vec::new();

    let coercivity = prob.op.check_coercivity(2000, 10.0, seed);
    checks.push(CheckEntry {
        name: "operator coercivity".into(),
        pass: coercivity.pass,
        detail: format!(
            "sampled min (a(y),y)/|y|^p = {:.6e}, claimed c0 = {:.6e}; sampled verdict",
            coercivity.c0_estimate,
            prob.op.c0()
        ),
    });

    let monotonicity = prob.op.check_strong_monotonicity(eta, 2000, seed);
    checks.push(CheckEntry {
        name: "operator strict monotonicity".into(),
        pass: monotonicity.c_hat_eta > 0.0,
        detail: format!(
            "sampled min increment quotient on |y| <= {eta}: {:.6e}; sampled verdict",
            monotonicity.c_hat_eta
        ),
    });

    checks.push(CheckEntry {
        name: "damping coefficient bounded".into(),
        pass: norm_r.is_finite(),
        detail: format!("||r||_inf = {norm_r:.6e} over grid nodes"),
    });

    checks.push(CheckEntry {
        name: "margin xi positive".into(),
        pass: xi > 0.0,
        detail: if xi > 0.0 {
            format!("xi = c0 - ||r||_inf / lambda1^(1/p) = {xi:.6e}")
        } else {
            format!("xi nonpositive ({xi:.6e})")
        },
    });

    let growth_entries = match prob
        .multimap
        .check_growth(witness, xi, lambda1, &GROWTH_RADII, p, seed)
    {
        Ok(entries) => entries,
        Err(e) => vec![CheckEntry {
            name: "growth envelope".into(),
            pass: false,
            detail: format!("check unavailable: {e}"),
        }],
    };
    let growth_pass = growth_entries.iter().all(|e| e.pass);
    checks.extend(growth_entries);

    let mut c1_estimate = None;
    if xi > 0.0 {
        match PsiParams::new(xi, witness.theta.clone(), p, lambda1)
            .and_then(|params| estimate_c1(&params, &eigen, C1_TRIALS, seed))
        {
            Ok(value) => {
                c1_estimate = Some(value);
                checks.push(CheckEntry {
                    name: "positivity margin".into(),
                    pass: value > 0.0,
                    detail: format!(
                        "sampled min of the margin functional over {C1_TRIALS} trials: {value:.6e}; upper estimate of the true constant"
                    ),
                });
            }
            Err(e) => checks.push(CheckEntry {
                name: "positivity margin".into(),
                pass: false,
                detail: format!("estimate unavailable: {e}"),
            }),
        }
    } else {
        checks.push(CheckEntry {
            name: "positivity margin".into(),
            pass: false,
            detail: "xi nonpositive".into(),
        });
    }

    let (k_eta, k_eta_detail) = match prob.multimap.check_lipschitz(b, eta, 1000, seed) {
        Ok(k) => (k, None),
        Err(e) => (f64::INFINITY, Some(format!("estimate unavailable: {e}"))),
    };
    let is_p_two = (p - 2.0).abs() <= 1e-12;
    let xi_hat_eta = if is_p_two && k_eta.is_finite() {
        Some(monotonicity.c_hat_eta - norm_r / lambda1.sqrt() - k_eta * b * b)
    } else {
        None
    };
    checks.push(CheckEntry {
        name: "local set lipschitz margin".into(),
        pass: xi_hat_eta.map(|v| v > 0.0).unwrap_or(false),
        detail: match (&k_eta_detail, xi_hat_eta) {
            (Some(msg), _) => msg.clone(),
            (None, Some(v)) => format!(
                "k_eta estimate = {k_eta:.6e}, xi_hat = {v:.6e}; sampled verdict"
            ),
            (None, None) => format!("k_eta estimate = {k_eta:.6e}; margin defined only at p = 2"),
        },
    });

    let mut eps = None;
    let mut apriori = None;
    if let Some(c1) = c1_estimate {
        if c1 > 0.0 {
            let eps_value = 0.5 * lambda1 * c1;
            match apriori_bound(prob, eps_value, witness, c1) {
                Ok(bound) => {
                    eps = Some(eps_value);
                    apriori = Some(bound);
                    checks.push(CheckEntry {
                        name: "apriori bound".into(),
                        pass: bound.is_finite(),
                        detail: format!(
                            "||u'||_p <= {bound:.6e} at eps = {eps_value:.6e}; valid relative to the declared witness"
                        ),
                    });
                }
                Err(e) => checks.push(CheckEntry {
                    name: "apriori bound".into(),
                    pass: false,
                    detail: format!("unavailable: {e}"),
                }),
            }
        }
    }

    let base = xi > 0.0 && growth_pass && coercivity.pass;
    let theorems = TheoremFlags {
        convex_existence: base && prob.multimap.is_convex(),
        nonconvex_existence: base,
        relaxation_density: base
            && is_p_two
            && monotonicity.c_hat_eta > 0.0
            && xi_hat_eta.map(|v| v > 0.0).unwrap_or(false),
    };

    Ok(HypothesisReport {
        constants: Constants {
            lambda1,
            xi,
            c1_estimate,
            xi_hat_eta,
            apriori,
            norm_r_inf: norm_r,
            c0_estimate: coercivity.c0_estimate,
            c_hat_eta: monotonicity.c_hat_eta,
            k_eta_estimate: k_eta,
            eps,
            eta,
        },
        checks,
        theorems,
    })
}
