//! The CLI subcommands as library functions.
//!
//! Each command writes its files under the run's output directory, prints
//! its report JSON to stdout and returns an [`ExitStatus`]. Errors are
//! returned to the caller, which maps them to exit code 1.

use std::path::{Path, PathBuf};

use crate::dynamics::{instantiate_engine, DynamicsSpec, VectorField};
use crate::energy::{curvature_class, gradient_residual_report};
use crate::error::{Error, Result};
use crate::game::dot;
use crate::par::{map_range, Execution};
use crate::simplex::{derive_seed, sample_interior};
use crate::solver::{
    classify_point, discrete_iterate, find_equilibrium, integrate, interior_rest_point,
    motzkin_straus_clique, parse_edge_list, Trajectory,
};

use super::config::{parse_config, Experiment, Model};
use super::format::to_json;
use super::output::{
    plot_csv, trajectory_csv, write_file, CliqueOutput, ComparePoint, CompareReport, EquilibriumOutput,
    GradcheckPoint, GradcheckReport, SimulationReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Error = 1,
    NotConverged = 2,
    ToleranceFailure = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Tolerance of `compare` unless the config overrides it.
pub const COMPARE_TOL: f64 = 1e-10;
/// Interior points keep at least this share of the centroid, which bounds
/// every coordinate away from zero for the `1/p_i` terms.
const INTERIOR_WEIGHT: f64 = 0.2;

/// Global CLI options.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub exec: Execution,
    /// Print reports to stdout.
    pub echo: bool,
}

impl Default for RunContext {
    fn default() -> Self {
        RunContext { out_dir: PathBuf::from("."), seed: None, exec: Execution::default(), echo: true }
    }
}

impl RunContext {
    fn resolve(&self, configured: Option<&Path>, default: &str) -> PathBuf {
        match configured {
            Some(p) if p.is_absolute() => p.to_path_buf(),
            Some(p) => self.out_dir.join(p),
            None => self.out_dir.join(default),
        }
    }

    fn emit(&self, json: &str, configured: Option<&Path>, default: &str) -> Result<()> {
        write_file(&self.resolve(configured, default), json)?;
        if self.echo {
            print!("{json}");
        }
        Ok(())
    }
}

pub fn load_experiment(path: &Path, seed: Option<u64>) -> Result<Experiment> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)?.build(seed)
}

fn analysis_points(exp: &Experiment) -> Result<Vec<Vec<f64>>> {
    let n = exp.p0.dim();
    (0..exp.analysis.points)
        .map(|k| {
            sample_interior(n, derive_seed(exp.analysis.seed, k as u64), INTERIOR_WEIGHT)
                .map(|p| p.into_vec())
        })
        .collect()
}

fn run_model(exp: &Experiment) -> Result<Trajectory> {
    match &exp.model {
        Model::Continuous(spec) => integrate(spec, &exp.p0, &exp.integrator),
        Model::Discrete { model, lambda, max_iters, conv_tol } => {
            discrete_iterate(model, *lambda, &exp.p0, *max_iters, *conv_tol)
        }
    }
}

/// Integrates (or iterates) the configured dynamics and writes the
/// trajectory CSV, optional plot CSV and a report.
pub fn cmd_simulate(config: &Path, ctx: &RunContext) -> Result<ExitStatus> {
    let exp = load_experiment(config, ctx.seed)?;
    let traj = run_model(&exp)?;
    let outputs = &exp.outputs;
    write_file(&ctx.resolve(outputs.trajectory_csv.as_deref(), "trajectory.csv"), &trajectory_csv(&traj))?;
    if let Some(plot) = outputs.plot_csv.as_deref() {
        write_file(&ctx.resolve(Some(plot), "plot.csv"), &plot_csv(&traj))?;
    }
    let last = traj.samples.last().expect("a trajectory holds its initial sample");
    let report = SimulationReport {
        family: exp.model.family_name().to_string(),
        converged: traj.converged,
        final_state: traj.final_state.clone(),
        final_time: traj.final_time,
        residual: traj.final_residual,
        steps: traj.steps,
        samples: traj.samples.len(),
        final_mean_fitness: last.mean_fitness,
        final_energy: last.energy,
    };
    ctx.emit(&to_json(&report), outputs.report_json.as_deref(), "report.json")?;
    Ok(if traj.converged { ExitStatus::Ok } else { ExitStatus::NotConverged })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Compares the engine field against the named field at one point.
pub fn compare_at(spec: &DynamicsSpec, engine: &dyn VectorField, p: &[f64]) -> Result<ComparePoint> {
    let named = spec.velocity(p)?;
    let e = engine.velocity(p)?;
    let max_abs_diff = inf_norm(&named.iter().zip(&e).map(|(a, b)| a - b).collect::<Vec<_>>());
    let (c, expected) = match spec {
        DynamicsSpec::Logit { model, eta } => {
            let nn = dot(&named, &named);
            let c = if nn > 0.0 { dot(&e, &named) / nn } else { f64::NAN };
            let expected: f64 = model.eval(p).iter().map(|f| (f / eta).exp()).sum();
            (Some(c), Some(expected))
        }
        _ => (None, None),
    };
    let k = c.filter(|c| c.is_finite()).unwrap_or(1.0);
    let resid: Vec<f64> = e.iter().zip(&named).map(|(a, b)| a - k * b).collect();
    Ok(ComparePoint {
        point: p.to_vec(),
        max_abs_diff,
        rel_diff: inf_norm(&resid) / (1.0 + inf_norm(&e)),
        scale: c,
        expected_scale: expected,
    })
}

/// Evaluates named and engine fields at random interior points.
pub fn cmd_compare(config: &Path, ctx: &RunContext) -> Result<ExitStatus> {
    let exp = load_experiment(config, ctx.seed)?;
    let spec = exp.model.continuous()?;
    let engine = instantiate_engine(&spec)?;
    let points = analysis_points(&exp)?;
    let results: Vec<ComparePoint> =
        map_range(ctx.exec, points.len(), |k| compare_at(&spec, &engine, &points[k]))
            .into_iter()
            .collect::<Result<_>>()?;
    let tolerance = exp.analysis.tolerance.unwrap_or(COMPARE_TOL);
    let max_rel_diff = results.iter().fold(0.0_f64, |m, r| m.max(r.rel_diff));
    let max_scale_error = matches!(spec, DynamicsSpec::Logit { .. }).then(|| {
        results.iter().fold(0.0, |m: f64, r| match (r.scale, r.expected_scale) {
            (Some(c), Some(g)) => m.max((c / g - 1.0).abs()),
            _ => m,
        })
    });
    let within_tolerance = max_rel_diff <= tolerance && max_scale_error.is_none_or(|s| s <= tolerance);
    let report = CompareReport {
        family: exp.model.family_name().to_string(),
        tolerance,
        max_rel_diff,
        max_scale_error,
        within_tolerance,
        points: results,
    };
    ctx.emit(&to_json(&report), exp.outputs.report_json.as_deref(), "compare.json")?;
    Ok(if within_tolerance { ExitStatus::Ok } else { ExitStatus::ToleranceFailure })
}

/// Bound on the gradient check for each family. Quadrature-based cost
/// functions get a looser bound than closed forms.
pub fn gradcheck_bound(spec: &DynamicsSpec) -> f64 {
    match spec {
        DynamicsSpec::Logit { .. } | DynamicsSpec::Bnn { .. } => 1e-4,
        _ => 1e-5,
    }
}

/// Finite-difference gradient of each family's cost function against the
/// engine fitness. Mutation families are checked against the predicted
/// log-weighted term instead of zero.
pub fn cmd_gradcheck(config: &Path, ctx: &RunContext) -> Result<ExitStatus> {
    let exp = load_experiment(config, ctx.seed)?;
    let spec = exp.model.continuous()?;
    let points = analysis_points(&exp)?;
    let results: Vec<GradcheckPoint> = map_range(ctx.exec, points.len(), |k| {
        let r = gradient_residual_report(&spec, &points[k])?;
        Ok(GradcheckPoint {
            point: points[k].clone(),
            max_residual: r.max_residual,
            max_predicted: r.predicted.as_ref().map(|v| v.iter().cloned().fold(0.0, f64::max)),
            discrepancy: r.discrepancy(),
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let bound = exp.analysis.tolerance.unwrap_or_else(|| gradcheck_bound(&spec));
    let max_residual = results.iter().fold(0.0_f64, |m, r| m.max(r.max_residual));
    let max_discrepancy = results.iter().fold(0.0_f64, |m, r| m.max(r.discrepancy));
    let within_tolerance = max_discrepancy <= bound;
    let report = GradcheckReport {
        family: exp.model.family_name().to_string(),
        bound,
        max_residual,
        max_discrepancy,
        within_tolerance,
        points: results,
    };
    ctx.emit(&to_json(&report), exp.outputs.report_json.as_deref(), "gradcheck.json")?;
    Ok(if within_tolerance { ExitStatus::Ok } else { ExitStatus::ToleranceFailure })
}

/// Integrates to a rest point and classifies it, with the curvature of the
/// quadratic cost for linear games.
pub fn cmd_equilibrium(config: &Path, ctx: &RunContext) -> Result<ExitStatus> {
    let exp = load_experiment(config, ctx.seed)?;
    let spec = exp.model.continuous()?;
    let analysis = exp.analysis.equilibrium;
    let report = find_equilibrium(&spec, &exp.p0, &exp.integrator, &analysis)?;
    let linear = spec.linear_payoff();
    let curvature = linear.as_ref().map(|a| curvature_class(a, spec.lambda())).transpose()?;
    let interior_probe = match (&linear, report.converged) {
        (Some(a), false) => {
            interior_rest_point(a).map(|p| classify_point(&spec, &p, &analysis)).transpose()?
        }
        _ => None,
    };
    let converged = report.converged;
    let out = EquilibriumOutput {
        family: exp.model.family_name().to_string(),
        equilibrium: report,
        curvature,
        interior_probe,
    };
    ctx.emit(&to_json(&out), exp.outputs.report_json.as_deref(), "equilibrium.json")?;
    Ok(if converged { ExitStatus::Ok } else { ExitStatus::NotConverged })
}

/// Motzkin-Straus clique search on an edge-list file.
pub fn cmd_clique(graph: &Path, restarts: usize, lambda: f64, ctx: &RunContext) -> Result<ExitStatus> {
    let text = std::fs::read_to_string(graph)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", graph.display())))?;
    let g = parse_edge_list(&text)?;
    let r = motzkin_straus_clique(&g, restarts, lambda, ctx.seed.unwrap_or(0), ctx.exec)?;
    let out = CliqueOutput { omega: r.omega_estimate, value: r.best_value, clique: r.clique };
    let json = to_json(&out);
    if ctx.echo {
        print!("{json}");
    }
    Ok(ExitStatus::Ok)
}
