//! Deterministic result emission: CSV tables, JSON sidecars, an optional SVG
//! line plot, and atomic file writes (write to a temp name, then rename).

use std::path::Path;

use serde::Serialize;

use crate::bvp::{BranchPoint, SolveReport};
use crate::error::Result;
use crate::grid::norms;
use crate::hypothesis::HypothesisReport;
use crate::relaxation::RelaxOutcome;

/// Fixed float formatting: 17 significant digits, enough to round-trip f64.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write bytes to `path` atomically via a sibling temp file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let tmp = match dir {
        Some(d) => d.join(format!(".{file_name}.tmp")),
        None => std::path::PathBuf::from(format!(".{file_name}.tmp")),
    };
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Trajectory table: `t, u_1..u_N, du_1..du_N, f_1..f_N`.
pub fn solution_csv(report: &SolveReport) -> String {
    let dim = report.u.dim();
    let grid = report.u.grid();
    let mut out = String::from("t");
    for k in 1..=dim {
        out.push_str(&format!(",u_{k}"));
    }
    for k in 1..=dim {
        out.push_str(&format!(",du_{k}"));
    }
    for k in 1..=dim {
        out.push_str(&format!(",f_{k}"));
    }
    out.push('\n');
    for (i, t) in grid.nodes().enumerate() {
        out.push_str(&format_float(t));
        for v in report.u.value(i) {
            out.push(',');
            out.push_str(&format_float(*v));
        }
        for v in report.du.value(i) {
            out.push(',');
            out.push_str(&format_float(*v));
        }
        for v in report.selection.value(i) {
            out.push(',');
            out.push_str(&format_float(*v));
        }
        out.push('\n');
    }
    out
}

/// Metadata sidecar of a solve, including the hypothesis verdicts when the
/// caller compiled them.
#[derive(Serialize)]
pub struct SolveSidecar<'a> {
    pub converged: bool,
    pub iterations: usize,
    pub residual_sup: f64,
    pub last_step: f64,
    pub lambda: f64,
    pub shooting_constant: &'a [f64],
    pub apriori_bound: Option<f64>,
    pub within_bound: Option<bool>,
    pub c1_norm: f64,
    pub w1p_norm: f64,
    pub hypotheses: Option<&'a HypothesisReport>,
}

pub fn solve_sidecar_json(
    report: &SolveReport,
    p: f64,
    hypotheses: Option<&HypothesisReport>,
) -> Result<String> {
    let n = norms(&report.u, &report.du, p)?;
    let sidecar = SolveSidecar {
        converged: report.converged,
        iterations: report.iterations,
        residual_sup: report.residual_sup,
        last_step: report.last_step,
        lambda: report.lambda,
        shooting_constant: &report.shooting_constant,
        apriori_bound: report.apriori_bound,
        within_bound: report.within_bound,
        c1_norm: n.c1,
        w1p_norm: n.w1p,
        hypotheses,
    };
    Ok(serde_json::to_string_pretty(&sidecar).expect("sidecar serialization is infallible"))
}

/// Branch table: one row per homotopy parameter.
pub fn branch_csv(points: &[BranchPoint], p: f64) -> Result<String> {
    let mut out = String::from("lambda,c1_norm,w1p_norm,residual_sup,iterations,converged\n");
    for pt in points {
        let n = norms(&pt.report.u, &pt.report.du, p)?;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_float(pt.lambda),
            format_float(n.c1),
            format_float(n.w1p),
            format_float(pt.report.residual_sup),
            pt.report.iterations,
            pt.report.converged
        ));
    }
    Ok(out)
}

/// Relaxation table: one row per oscillation level.
pub fn relax_csv(outcome: &RelaxOutcome) -> String {
    let mut out = String::from("level,c1_distance,residual_sup,weak_diag,eps_n,converged\n");
    for level in &outcome.levels {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            level.level,
            format_float(level.c1_distance),
            format_float(level.residual_sup),
            format_float(level.weak_diag),
            format_float(level.eps_n),
            level.converged
        ));
    }
    out
}

/// Eigenvalue table rows `(n, lambda_n, pi_p)`.
pub fn eigen_csv(rows: &[(u32, f64, f64)]) -> String {
    let mut out = String::from("n,lambda_n,pi_p\n");
    for (n, lambda, pip) in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            n,
            format_float(*lambda),
            format_float(*pip)
        ));
    }
    out
}

/// Minimal line plot of distance against oscillation level on a log10 scale.
pub fn relax_svg(outcome: &RelaxOutcome) -> String {
    let width = 640.0;
    let height = 400.0;
    let margin = 50.0;
    let pts: Vec<(f64, f64)> = outcome
        .levels
        .iter()
        .filter(|l| l.c1_distance > 0.0)
        .map(|l| (l.level as f64, l.c1_distance.log10()))
        .collect();
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<line x1=\"{margin}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        height - margin,
        width - margin,
        height - margin
    ));
    svg.push_str(&format!(
        "<line x1=\"{margin}\" y1=\"{margin}\" x2=\"{margin}\" y2=\"{}\" stroke=\"black\"/>\n",
        height - margin
    ));
    if pts.len() >= 2 {
        let (x0, x1) = (pts[0].0, pts[pts.len() - 1].0);
        let ymin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let ymax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        let yspan = (ymax - ymin).max(1e-9);
        let xspan = (x1 - x0).max(1e-9);
        let map = |p: &(f64, f64)| {
            let x = margin + (p.0 - x0) / xspan * (width - 2.0 * margin);
            let y = height - margin - (p.1 - ymin) / yspan * (height - 2.0 * margin);
            (x, y)
        };
        let path: Vec<String> = pts
            .iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        for p in &pts {
            let (x, y) = map(p);
            svg.push_str(&format!(
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"steelblue\"/>\n"
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">level</text>\n",
            width / 2.0 - 15.0,
            height - margin / 3.0
        ));
        svg.push_str(&format!(
            "<text x=\"10\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 14,{})\">log10 C1 distance</text>\n",
            height / 2.0,
            height / 2.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_seventeen_digits() {
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        assert_eq!(format_float(1.0 / 3.0), "3.3333333333333331e-1");
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "a,b\n1,2\n").unwrap();
        write_atomic(&path, "a,b\n3,4\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n3,4\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn eigen_csv_shape() {
        let text = eigen_csv(&[(1, 1.0, 2.5)]);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "n,lambda_n,pi_p");
        let row = lines.next().unwrap();
        assert!(row.starts_with("1,1.0000000000000000e0,"));
    }
}
