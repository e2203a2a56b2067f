//! Trajectory CSV, plot data and report types.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::CurvatureReport;
use crate::error::Result;
use crate::solver::{EquilibriumReport, Trajectory};

use super::format::fmt_f64;

/// `t,p_1,...,p_N,mean_fitness,energy,sum_drift`.
pub fn trajectory_header(n: usize) -> String {
    let mut h = String::from("t");
    for i in 1..=n {
        write!(h, ",p_{i}").expect("writing to a String");
    }
    h.push_str(",mean_fitness,energy,sum_drift");
    h
}

/// One row per recorded sample; an undefined energy prints as `NaN`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.final_state.len();
    let mut out = trajectory_header(n);
    out.push('\n');
    for s in &traj.samples {
        out.push_str(&fmt_f64(s.t));
        for x in &s.state {
            out.push(',');
            out.push_str(&fmt_f64(*x));
        }
        for v in [s.mean_fitness, s.energy.unwrap_or(f64::NAN), s.sum_drift] {
            out.push(',');
            out.push_str(&fmt_f64(v));
        }
        out.push('\n');
    }
    out
}

/// Planar coordinates of a simplex point: vertex `k` of a regular polygon
/// sits at angle `pi/2 + 2 pi k / n`, so three strategies give the usual
/// ternary triangle with strategy 1 on top.
pub fn planar(p: &[f64]) -> (f64, f64) {
    let n = p.len() as f64;
    p.iter().enumerate().fold((0.0, 0.0), |(x, y), (k, &w)| {
        let a = std::f64::consts::FRAC_PI_2 + std::f64::consts::TAU * k as f64 / n;
        (x + w * a.cos(), y + w * a.sin())
    })
}

/// `t,x,y` rows for plotting the orbit in the plane.
pub fn plot_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x,y\n");
    for s in &traj.samples {
        let (x, y) = planar(&s.state);
        writeln!(out, "{},{},{}", fmt_f64(s.t), fmt_f64(x), fmt_f64(y)).expect("writing to a String");
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub family: String,
    pub converged: bool,
    pub final_state: Vec<f64>,
    pub final_time: f64,
    pub residual: f64,
    pub steps: usize,
    pub samples: usize,
    pub final_mean_fitness: f64,
    pub final_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparePoint {
    pub point: Vec<f64>,
    /// `||engine - named||_inf`.
    pub max_abs_diff: f64,
    /// `||engine - c named||_inf / (1 + ||engine||_inf)`, with `c = 1` except
    /// for logit, where `c` is the fitted scale.
    pub rel_diff: f64,
    /// Least-squares factor `c` with `engine = c named` (logit only).
    pub scale: Option<f64>,
    /// `sum_i exp(f_i / eta)`, the predicted factor (logit only).
    pub expected_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub family: String,
    pub tolerance: f64,
    pub max_rel_diff: f64,
    /// Largest `|scale / expected_scale - 1|` (logit only).
    pub max_scale_error: Option<f64>,
    pub within_tolerance: bool,
    pub points: Vec<ComparePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckPoint {
    pub point: Vec<f64>,
    pub max_residual: f64,
    /// Largest predicted log-weighted term (mutation families only).
    pub max_predicted: Option<f64>,
    /// `max_i |residual_i - predicted_i|`, or the residual without a prediction.
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub family: String,
    pub bound: f64,
    pub max_residual: f64,
    pub max_discrepancy: f64,
    pub within_tolerance: bool,
    pub points: Vec<GradcheckPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumOutput {
    pub family: String,
    pub equilibrium: EquilibriumReport,
    /// Curvature of `-p^T A p` on the tangent space (linear games only).
    pub curvature: Option<CurvatureReport>,
    /// Classification of the interior rest point when the run did not settle.
    pub interior_probe: Option<EquilibriumReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliqueOutput {
    pub omega: usize,
    pub value: f64,
    pub clique: Vec<usize>,
}
