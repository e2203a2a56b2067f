//! End-to-end runs of the `evodyn` binary.

use std::path::Path;
use std::process::{Command, Output};

use evodyn::io::output::{CliqueOutput, CompareReport, EquilibriumOutput, GradcheckReport, SimulationReport};
use serde::de::DeserializeOwned;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evodyn"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn read<T: DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const PD: &str = r#"{
    "game": {"type": "standard", "name": "prisoners_dilemma"},
    "dynamics": {"family": "replicator", "lambda": 6},
    "initial": [0.5, 0.5],
    "integrator": {"dt": 0.01, "t_max": 200}
}"#;

const RPS_OFF_CENTER: &str = r#"{
    "game": {"type": "standard", "name": "rps"},
    "dynamics": {"family": "replicator"},
    "initial": [0.5, 0.3, 0.2],
    "integrator": {"dt": 0.01, "t_max": 10, "record_every": 10}
}"#;

#[test]
fn simulate_prisoners_dilemma_reaches_defection() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "pd.json", PD);
    let out = run(dir.path(), &["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: SimulationReport = read(&dir.path().join("report.json"));
    assert!(report.converged);
    assert!(report.final_state[0] < 1e-6 && (report.final_state[1] - 1.0).abs() < 1e-6);
    assert!(report.residual < 1e-8);
    // stdout carries the same report
    let echoed: SimulationReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(echoed, report);
}

#[test]
fn simulate_rps_cycles_and_keeps_trajectory() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "rps.json", RPS_OFF_CENTER);
    let out = run(dir.path(), &["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,p_1,p_2,p_3,mean_fitness,energy,sum_drift"));
    // floor(t_max / (dt * record_every)) + 1 rows
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 101);
    for row in &rows {
        assert_eq!(row.split(',').count(), 7);
    }
    let report: SimulationReport = read(&dir.path().join("report.json"));
    assert!(!report.converged);
    assert_eq!(report.samples, 101);
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "rps.json", RPS_OFF_CENTER);
    run(dir.path(), &["simulate", &cfg]);
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let row = csv.lines().nth(5).unwrap();
    for field in row.split(',') {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "field {field}");
        let x: f64 = field.parse().unwrap();
        assert_eq!(format!("{x:.16e}"), field);
    }
}

#[test]
fn dimension_mismatch_names_both_fields() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"game": {"type": "linear", "matrix": [[0,1,2],[2,0,1],[1,2,0]]},
            "dynamics": {"family": "replicator"}, "initial": [0.5, 0.5]}"#,
    );
    let out = run(dir.path(), &["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("/initial") && msg.contains("/game/matrix"), "{msg}");
    assert!(!dir.path().join("trajectory.csv").exists());
}

#[test]
fn missing_config_and_bad_usage_exit_one() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["simulate", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_discrete_family() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "discrete.json",
        r#"{"game": {"type": "standard", "name": "coordination"},
            "dynamics": {"family": "discrete", "lambda": 1, "max_iters": 2000, "conv_tol": 1e-12},
            "initial": [0.8, 0.2]}"#,
    );
    let out = run(dir.path(), &["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: SimulationReport = read(&dir.path().join("report.json"));
    assert_eq!(report.family, "discrete");
    assert!((report.final_state[0] - 1.0).abs() < 1e-9);
}

fn compare_config(dynamics: &str) -> String {
    format!(
        r#"{{"game": {{"type": "standard", "name": "rps"}}, "dynamics": {dynamics},
            "analysis": {{"points": 25, "seed": 3}}}}"#
    )
}

#[test]
fn compare_replicator_matches_engine() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", &compare_config(r#"{"family": "replicator", "lambda": 2}"#));
    let out = run(dir.path(), &["compare", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: CompareReport = read(&dir.path().join("compare.json"));
    assert_eq!(report.points.len(), 25);
    assert!(report.points.iter().all(|p| p.max_abs_diff <= 1e-10));
}

#[test]
fn compare_logit_reports_partition_scale() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", &compare_config(r#"{"family": "logit", "eta": 0.5}"#));
    let out = run(dir.path(), &["compare", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: CompareReport = read(&dir.path().join("compare.json"));
    let rps = [[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]];
    for point in &report.points {
        // independent partition function
        let z: f64 =
            (0..3).map(|i| ((0..3).map(|j| rps[i][j] * point.point[j]).sum::<f64>() / 0.5).exp()).sum();
        let c = point.scale.unwrap();
        assert!((c / z - 1.0).abs() < 1e-10, "scale {c} vs {z}");
    }
}

#[test]
fn compare_best_response_is_unsupported() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", &compare_config(r#"{"family": "best_response"}"#));
    let out = run(dir.path(), &["compare", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).to_lowercase().contains("unsupported"), "{}", stderr(&out));
}

#[test]
fn compare_tolerance_failure_exits_three() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"game": {"type": "standard", "name": "rps"}, "dynamics": {"family": "logit", "eta": 0.5},
            "analysis": {"points": 5, "tolerance": 0.0}}"#,
    );
    let out = run(dir.path(), &["compare", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    // the report is still written
    let report: CompareReport = read(&dir.path().join("compare.json"));
    assert!(!report.within_tolerance);
    assert!(report.max_rel_diff > 0.0 || report.max_scale_error.unwrap() > 0.0);
}

fn gradcheck(game: &str, dynamics: &str) -> (Option<i32>, GradcheckReport) {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "g.json",
        &format!(r#"{{"game": {game}, "dynamics": {dynamics}, "analysis": {{"points": 20, "seed": 11}}}}"#),
    );
    let out = run(dir.path(), &["gradcheck", &cfg]);
    (out.status.code(), read(&dir.path().join("gradcheck.json")))
}

#[test]
fn gradcheck_replicator() {
    let (code, report) =
        gradcheck(r#"{"type": "linear", "matrix": [[1, 3], [2, 0.5]]}"#, r#"{"family": "replicator"}"#);
    assert_eq!(code, Some(0));
    assert!(report.max_residual <= 1e-5);
}

#[test]
fn gradcheck_quasispecies_matches_log_term() {
    let (code, report) = gradcheck(
        r#"{"type": "constant", "values": [1, 2, 3]}"#,
        r#"{"family": "quasispecies", "mutation": {"kind": "uniform_noise", "mu": 0.05}}"#,
    );
    assert_eq!(code, Some(0));
    assert!(report.max_discrepancy <= 1e-5);
    // the residual itself is not small: it is the predicted extra term
    assert!(report.max_residual > 1e-3);
    assert!(report.points.iter().all(|p| p.max_predicted.is_some()));
}

#[test]
fn gradcheck_logit_quadrature() {
    let (code, report) =
        gradcheck(r#"{"type": "standard", "name": "rps"}"#, r#"{"family": "logit", "eta": 0.3}"#);
    assert_eq!(code, Some(0));
    assert!(report.max_residual <= 1e-4);
}

fn equilibrium(name: &str, extra: &str) -> (Option<i32>, EquilibriumOutput) {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "e.json",
        &format!(
            r#"{{"game": {{"type": "standard", "name": "{name}"}}, "dynamics": {{"family": "replicator"}}{extra}}}"#
        ),
    );
    let out = run(dir.path(), &["equilibrium", &cfg]);
    (out.status.code(), read(&dir.path().join("equilibrium.json")))
}

#[test]
fn equilibrium_hawk_dove_is_convex_ess() {
    let (code, out) = equilibrium("hawk_dove", r#", "initial": [0.3, 0.7]"#);
    assert_eq!(code, Some(0));
    let eq = &out.equilibrium;
    assert!((eq.point[0] - 0.5).abs() < 1e-6);
    assert!(eq.nash.as_ref().unwrap().is_nash);
    assert!(eq.ess.as_ref().unwrap().is_ess);
    assert_eq!(serde_json::to_value(out.curvature.unwrap().class).unwrap(), "strictly_convex");
    assert_eq!(serde_json::to_value(eq.stability).unwrap(), "asymptotically_stable");
}

#[test]
fn equilibrium_rps_is_flat_and_neutral() {
    let (code, out) = equilibrium("rps", r#", "initial": [0.5, 0.3, 0.2], "integrator": {"t_max": 20}"#);
    assert_eq!(code, Some(2));
    assert_eq!(serde_json::to_value(out.curvature.unwrap().class).unwrap(), "flat");
    let probe = out.interior_probe.expect("interior probe for a cycling run");
    assert_eq!(serde_json::to_value(probe.stability).unwrap(), "neutrally_stable");
    assert!(probe.point.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12));
}

#[test]
fn equilibrium_coordination_from_upper_basin() {
    let (code, out) = equilibrium("coordination", r#", "initial": [0.8, 0.2]"#);
    assert_eq!(code, Some(0));
    let eq = &out.equilibrium;
    assert!((eq.point[0] - 1.0).abs() < 1e-6);
    assert!(eq.nash.as_ref().unwrap().is_nash);
    assert_eq!(serde_json::to_value(eq.stability).unwrap(), "asymptotically_stable");
}

fn clique(dir: &Path, text: &str, extra: &[&str]) -> Output {
    let graph = write(dir, "g.txt", text);
    let mut args = vec!["clique", graph.as_str(), "--restarts", "20", "--seed", "7"];
    args.extend_from_slice(extra);
    run(dir, &args)
}

#[test]
fn clique_triangle() {
    let dir = TempDir::new().unwrap();
    let out = clique(dir.path(), "p edge 3 3\ne 1 2\ne 2 3\ne 1 3\n", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: CliqueOutput = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.omega, 3);
    assert!((r.value - 2.0 / 3.0).abs() < 1e-9);
    assert_eq!(r.clique, vec![0, 1, 2]);
}

#[test]
fn clique_empty_graph() {
    let dir = TempDir::new().unwrap();
    let out = clique(dir.path(), "p edge 4 0\n", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r: CliqueOutput = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.omega, 1);
    assert_eq!(r.value, 0.0);
    assert_eq!(r.clique.len(), 1);
}

#[test]
fn clique_malformed_line_reports_line_number() {
    let dir = TempDir::new().unwrap();
    let out = clique(dir.path(), "p edge 3 1\ne 1 2\na b c\n", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains('3'), "{}", stderr(&out));
}

#[test]
fn clique_sequential_matches_parallel() {
    let dir = TempDir::new().unwrap();
    // a 5-cycle plus a chord-free triangle on nodes 5..8
    let text = "p edge 8 8\ne 1 2\ne 2 3\ne 3 4\ne 4 5\ne 5 1\ne 6 7\ne 7 8\ne 6 8\n";
    let a = clique(dir.path(), text, &[]);
    let b = clique(dir.path(), text, &["--sequential"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r: CliqueOutput = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r.omega, 3);
    assert_eq!(r.clique, vec![5, 6, 7]);
}

#[test]
fn reruns_are_byte_identical() {
    let cfg_text = r#"{"game": {"type": "standard", "name": "rps"},
        "dynamics": {"family": "replicator_mutator", "mutation": {"kind": "uniform_noise", "mu": 0.01}},
        "initial": {"random": {}}, "integrator": {"t_max": 5}}"#;
    let outputs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
        .map(|_| {
            let dir = TempDir::new().unwrap();
            let cfg = write(dir.path(), "c.json", cfg_text);
            run(dir.path(), &["--seed", "42", "simulate", &cfg]);
            (
                std::fs::read(dir.path().join("trajectory.csv")).unwrap(),
                std::fs::read(dir.path().join("report.json")).unwrap(),
            )
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn seed_changes_random_start() {
    let cfg_text = r#"{"game": {"type": "standard", "name": "rps"}, "dynamics": {"family": "replicator"},
        "initial": {"random": {}}, "integrator": {"t_max": 0.1}}"#;
    let first_rows: Vec<String> = ["1", "2"]
        .iter()
        .map(|seed| {
            let dir = TempDir::new().unwrap();
            let cfg = write(dir.path(), "c.json", cfg_text);
            run(dir.path(), &["--seed", seed, "simulate", &cfg]);
            let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
            csv.lines().nth(1).unwrap().to_string()
        })
        .collect();
    assert_ne!(first_rows[0], first_rows[1]);
}

#[test]
fn configured_output_paths_and_plot() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"game": {"type": "standard", "name": "rps"}, "dynamics": {"family": "replicator"},
            "initial": [0.4, 0.35, 0.25], "integrator": {"t_max": 1},
            "outputs": {"trajectory_csv": "runs/orbit.csv", "report_json": "runs/summary.json", "plot_csv": "runs/plot.csv"}}"#,
    );
    let out = run(dir.path(), &["simulate", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let runs = dir.path().join("runs");
    let plot = std::fs::read_to_string(runs.join("plot.csv")).unwrap();
    assert!(plot.starts_with("t,x,y\n"));
    let orbit = std::fs::read_to_string(runs.join("orbit.csv")).unwrap();
    assert_eq!(plot.lines().count(), orbit.lines().count());
    let _: SimulationReport = read(&runs.join("summary.json"));
}
