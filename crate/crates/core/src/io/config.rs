//! Experiment configuration files.
//!
//! ```json
//! {
//!   "game": {"type": "linear", "matrix": [[3, 0], [5, 1]]},
//!   "dynamics": {"family": "replicator", "lambda": 6},
//!   "initial": [0.5, 0.5],
//!   "integrator": {"dt": 0.01, "t_max": 200},
//!   "outputs": {"trajectory_csv": "pd.csv", "report_json": "pd.json"}
//! }
//! ```
//!
//! Errors carry a JSON pointer to the offending field.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::{DynamicsSpec, GbarSpec};
use crate::error::{Error, Result};
use crate::game::{
    make_mutation_matrix, standard_game, FitnessModel, MutationMatrix, MutationSpec, PayoffMatrix, Selector,
};
use crate::simplex::{sample_uniform, SimplexPoint, Tolerance};
use crate::solver::{AnalysisConfig, IntegratorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameType {
    Linear,
    Constant,
    Quadratic,
    Saturating,
    /// One of `rps`, `prisoners_dilemma`, `hawk_dove`, `coordination`.
    Standard,
}

/// `{"type": "linear", "matrix": [[..]]}`, `{"type": "constant", "values": [..]}`,
/// `{"type": "quadratic", "matrix": .., "q": [..]}`,
/// `{"type": "saturating", "matrix": .., "c": x}` or
/// `{"type": "standard", "name": "rps"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    #[serde(rename = "type")]
    pub kind: GameType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    Identity,
    UniformNoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationConfig {
    pub kind: MutationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    SechSquared,
    LogisticDerivative,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorConfig {
    pub kind: SelectorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GbarKind {
    MeanShiftedFitness,
    SumExp,
    SumExcess,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbarConfig {
    pub kind: GbarKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Replicator,
    Quasispecies,
    ReplicatorMutator,
    Logit,
    BestResponse,
    Bnn,
    Selector,
    /// The discrete growth map, iterated instead of integrated.
    Discrete,
}

/// `{"family": ..., <parameters>}`. Parameters that the family does not use
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation: Option<MutationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selector: Option<SelectorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gbar: Option<GbarConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conv_tol: Option<f64>,
}

/// `[p_1, ..., p_N]`, `{"uniform": true}` or `{"random": {"seed": s}}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum InitialConfig {
    Explicit(Vec<f64>),
    #[default]
    Uniform,
    Random {
        seed: Option<u64>,
    },
}

impl Serialize for InitialConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            InitialConfig::Explicit(v) => v.serialize(s),
            InitialConfig::Uniform => serde_json::json!({"uniform": true}).serialize(s),
            InitialConfig::Random { seed } => serde_json::json!({"random": {"seed": seed}}).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for InitialConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = Value::deserialize(d)?;
        let fail = |m: &str| D::Error::custom(m);
        match v {
            Value::Array(items) => items
                .iter()
                .map(|x| x.as_f64().ok_or_else(|| fail("initial vector entries must be numbers")))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(InitialConfig::Explicit),
            Value::Object(map) => {
                if map.len() != 1 {
                    return Err(fail("initial must have exactly one of `uniform` or `random`"));
                }
                let (key, val) = map.into_iter().next().expect("one entry");
                match key.as_str() {
                    "uniform" => match val {
                        Value::Bool(true) => Ok(InitialConfig::Uniform),
                        _ => Err(fail("`uniform` must be true")),
                    },
                    "random" => {
                        #[derive(Deserialize)]
                        #[serde(deny_unknown_fields)]
                        struct R {
                            seed: Option<u64>,
                        }
                        let r: R = serde_json::from_value(val).map_err(|e| fail(&format!("random: {e}")))?;
                        Ok(InitialConfig::Random { seed: r.seed })
                    }
                    other => {
                        Err(fail(&format!("unknown initial mode `{other}`, expected `uniform` or `random`")))
                    }
                }
            }
            _ => Err(fail("initial must be a vector, {\"uniform\": true} or {\"random\": {\"seed\": s}}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    pub trajectory_csv: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
    pub plot_csv: Option<PathBuf>,
}

/// Settings for `compare`, `gradcheck` and `equilibrium`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    /// Random interior points used by `compare` and `gradcheck`.
    pub points: usize,
    pub seed: u64,
    /// Overrides the family's default tolerance.
    pub tolerance: Option<f64>,
    pub equilibrium: AnalysisConfig,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection { points: 100, seed: 0, tolerance: None, equilibrium: AnalysisConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameConfig,
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

/// What a config runs: a continuous field or the discrete map.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Continuous(DynamicsSpec),
    Discrete { model: FitnessModel, lambda: f64, max_iters: usize, conv_tol: f64 },
}

impl Model {
    /// The continuous field; the discrete map shares its rest points with
    /// replicator dynamics at the same `lambda`.
    pub fn continuous(&self) -> Result<DynamicsSpec> {
        match self {
            Model::Continuous(spec) => Ok(spec.clone()),
            Model::Discrete { model, lambda, .. } => DynamicsSpec::replicator(model.clone(), *lambda),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Model::Continuous(spec) => spec.family_name(),
            Model::Discrete { .. } => "discrete",
        }
    }
}

/// A validated, ready-to-run experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub model: Model,
    pub p0: SimplexPoint,
    pub integrator: IntegratorConfig,
    pub outputs: OutputsConfig,
    pub analysis: AnalysisSection,
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    if out.is_empty() {
        "/".to_string()
    } else {
        out
    }
}

fn config_err(pointer: &str, e: impl std::fmt::Display) -> Error {
    Error::Config { pointer: pointer.to_string(), message: e.to_string() }
}

/// Parses config text, reporting the JSON pointer of the first bad field.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = json_pointer(e.path());
        config_err(&pointer, e.into_inner())
    })
}

fn required<T: Clone>(v: &Option<T>, pointer: &str, context: &str) -> Result<T> {
    v.clone().ok_or_else(|| config_err(pointer, format!("missing field, required by {context}")))
}

fn matrix_of(rows: &Option<Vec<Vec<f64>>>, context: &str) -> Result<PayoffMatrix> {
    let rows = required(rows, "/game/matrix", context)?;
    PayoffMatrix::from_rows(&rows).map_err(|e| config_err("/game/matrix", e))
}

impl GameConfig {
    /// The fitness model, plus the pointer that fixes its dimension.
    pub fn build(&self) -> Result<(FitnessModel, &'static str)> {
        let unused = |field: &str, present: bool| -> Result<()> {
            if present {
                Err(config_err(
                    &format!("/game/{field}"),
                    format!("not a parameter of game type {:?}", self.kind),
                ))
            } else {
                Ok(())
            }
        };
        let ctx = "this game type";
        Ok(match self.kind {
            GameType::Linear => {
                unused("values", self.values.is_some())?;
                unused("q", self.q.is_some())?;
                unused("c", self.c.is_some())?;
                unused("name", self.name.is_some())?;
                let a = matrix_of(&self.matrix, ctx)?;
                (FitnessModel::linear(a).map_err(|e| config_err("/game/matrix", e))?, "/game/matrix")
            }
            GameType::Constant => {
                unused("matrix", self.matrix.is_some())?;
                unused("q", self.q.is_some())?;
                unused("c", self.c.is_some())?;
                unused("name", self.name.is_some())?;
                let values = required(&self.values, "/game/values", ctx)?;
                (FitnessModel::constant(values).map_err(|e| config_err("/game/values", e))?, "/game/values")
            }
            GameType::Quadratic => {
                unused("values", self.values.is_some())?;
                unused("c", self.c.is_some())?;
                unused("name", self.name.is_some())?;
                let a = matrix_of(&self.matrix, ctx)?;
                let q = required(&self.q, "/game/q", ctx)?;
                (FitnessModel::quadratic(a, q).map_err(|e| config_err("/game/q", e))?, "/game/matrix")
            }
            GameType::Saturating => {
                unused("values", self.values.is_some())?;
                unused("q", self.q.is_some())?;
                unused("name", self.name.is_some())?;
                let a = matrix_of(&self.matrix, ctx)?;
                let c = required(&self.c, "/game/c", ctx)?;
                (FitnessModel::saturating(a, c).map_err(|e| config_err("/game/c", e))?, "/game/matrix")
            }
            GameType::Standard => {
                unused("matrix", self.matrix.is_some())?;
                unused("values", self.values.is_some())?;
                unused("q", self.q.is_some())?;
                unused("c", self.c.is_some())?;
                let name = required(&self.name, "/game/name", ctx)?;
                (standard_game(&name).map_err(|e| config_err("/game/name", e))?, "/game/name")
            }
        })
    }
}

fn mutation_of(cfg: &Option<MutationConfig>, n: usize) -> Result<MutationMatrix> {
    let cfg = required(cfg, "/dynamics/mutation", "mutation families")?;
    let spec = match cfg.kind {
        MutationKind::Identity => {
            if cfg.mu.is_some() {
                return Err(config_err("/dynamics/mutation/mu", "identity mutation takes no rate"));
            }
            MutationSpec::Identity(n)
        }
        MutationKind::UniformNoise => {
            MutationSpec::UniformNoise(n, required(&cfg.mu, "/dynamics/mutation/mu", "uniform_noise")?)
        }
    };
    make_mutation_matrix(spec).map_err(|e| config_err("/dynamics/mutation", e))
}

fn dim_desc(model: &FitnessModel, ptr: &str) -> String {
    let n = model.dim();
    if ptr.ends_with("matrix") {
        format!("{ptr} is {n}x{n}")
    } else {
        format!("{ptr} has {n} strategies")
    }
}

impl DynamicsConfig {
    fn present(&self) -> [(&'static str, bool); 8] {
        [
            ("lambda", self.lambda.is_some()),
            ("eta", self.eta.is_some()),
            ("epsilon", self.epsilon.is_some()),
            ("mutation", self.mutation.is_some()),
            ("selector", self.selector.is_some()),
            ("gbar", self.gbar.is_some()),
            ("max_iters", self.max_iters.is_some()),
            ("conv_tol", self.conv_tol.is_some()),
        ]
    }

    fn allow_only(&self, allowed: &[&str]) -> Result<()> {
        for (field, present) in self.present() {
            if present && !allowed.contains(&field) {
                return Err(config_err(
                    &format!("/dynamics/{field}"),
                    format!("not a parameter of family {:?}", self.family),
                ));
            }
        }
        Ok(())
    }

    /// Builds the dynamics on top of `model`.
    pub fn build(&self, model: &FitnessModel) -> Result<Model> {
        let n = model.dim();
        let wrap = |e: Error| config_err("/dynamics", e);
        let lambda = self.lambda.unwrap_or(0.0);
        Ok(match self.family {
            Family::Replicator => {
                self.allow_only(&["lambda"])?;
                Model::Continuous(DynamicsSpec::replicator(model.clone(), lambda).map_err(wrap)?)
            }
            Family::Quasispecies => {
                self.allow_only(&["lambda", "mutation"])?;
                let FitnessModel::Constant(f) = model else {
                    return Err(config_err(
                        "/game/type",
                        "quasispecies dynamics (/dynamics/family) needs a constant fitness game",
                    ));
                };
                let m = mutation_of(&self.mutation, n)?;
                Model::Continuous(DynamicsSpec::quasispecies(f.clone(), m, lambda).map_err(wrap)?)
            }
            Family::ReplicatorMutator => {
                self.allow_only(&["lambda", "mutation"])?;
                let m = mutation_of(&self.mutation, n)?;
                Model::Continuous(DynamicsSpec::replicator_mutator(model.clone(), m, lambda).map_err(wrap)?)
            }
            Family::Logit => {
                self.allow_only(&["eta"])?;
                let eta = required(&self.eta, "/dynamics/eta", "logit")?;
                Model::Continuous(
                    DynamicsSpec::logit(model.clone(), eta).map_err(|e| config_err("/dynamics/eta", e))?,
                )
            }
            Family::BestResponse => {
                self.allow_only(&[])?;
                Model::Continuous(DynamicsSpec::best_response(model.clone()))
            }
            Family::Bnn => {
                self.allow_only(&["epsilon"])?;
                let FitnessModel::Linear(a) = model else {
                    return Err(config_err(
                        "/game/type",
                        "bnn dynamics (/dynamics/family) needs a linear game",
                    ));
                };
                let eps = self.epsilon.unwrap_or(0.0);
                Model::Continuous(
                    DynamicsSpec::bnn(a.clone(), eps).map_err(|e| config_err("/dynamics/epsilon", e))?,
                )
            }
            Family::Selector => {
                self.allow_only(&["lambda", "selector", "gbar"])?;
                let sel = required(&self.selector, "/dynamics/selector", "selector")?;
                let h = match sel.kind {
                    SelectorKind::LogisticDerivative => {
                        let k = required(&sel.k, "/dynamics/selector/k", "logistic_derivative")?;
                        Selector::logistic_derivative(k).map_err(|e| config_err("/dynamics/selector/k", e))?
                    }
                    _ if sel.k.is_some() => {
                        return Err(config_err("/dynamics/selector/k", "only logistic_derivative takes k"));
                    }
                    SelectorKind::SechSquared => Selector::SechSquared,
                    SelectorKind::Identity => Selector::Identity,
                };
                let gbar = self.gbar.unwrap_or(GbarConfig {
                    kind: GbarKind::MeanShiftedFitness,
                    eta: None,
                    value: None,
                });
                let check = |field: &str, present: bool, wanted: bool| -> Result<()> {
                    match (present, wanted) {
                        (true, false) => {
                            Err(config_err(&format!("/dynamics/gbar/{field}"), "not used by this time scale"))
                        }
                        (false, true) => Err(config_err(
                            &format!("/dynamics/gbar/{field}"),
                            "missing field, required by this time scale",
                        )),
                        _ => Ok(()),
                    }
                };
                check("eta", gbar.eta.is_some(), gbar.kind == GbarKind::SumExp)?;
                check("value", gbar.value.is_some(), gbar.kind == GbarKind::Constant)?;
                let g = match gbar.kind {
                    GbarKind::MeanShiftedFitness => GbarSpec::MeanShiftedFitness,
                    GbarKind::SumExp => GbarSpec::SumExp { eta: gbar.eta.unwrap_or_default() },
                    GbarKind::SumExcess => GbarSpec::SumExcess,
                    GbarKind::Constant => GbarSpec::Constant(gbar.value.unwrap_or_default()),
                };
                Model::Continuous(DynamicsSpec::selector_weighted(model.clone(), h, lambda, g).map_err(wrap)?)
            }
            Family::Discrete => {
                self.allow_only(&["lambda", "max_iters", "conv_tol"])?;
                let max_iters = self.max_iters.unwrap_or(10_000);
                let conv_tol = self.conv_tol.unwrap_or(1e-12);
                if !(lambda >= 0.0 && lambda.is_finite()) {
                    return Err(config_err("/dynamics/lambda", format!("lambda must be >= 0, got {lambda}")));
                }
                if !(conv_tol > 0.0) {
                    return Err(config_err(
                        "/dynamics/conv_tol",
                        format!("conv_tol must be > 0, got {conv_tol}"),
                    ));
                }
                if max_iters == 0 {
                    return Err(config_err("/dynamics/max_iters", "max_iters must be >= 1"));
                }
                Model::Discrete { model: model.clone(), lambda, max_iters, conv_tol }
            }
        })
    }
}

impl ExperimentConfig {
    /// Validates cross-field constraints and builds the experiment.
    /// `seed_override` replaces the seeds of random initial states and of the
    /// analysis section.
    pub fn build(&self, seed_override: Option<u64>) -> Result<Experiment> {
        let (model, game_ptr) = self.game.build()?;
        let n = model.dim();
        let built = self.dynamics.build(&model)?;

        let p0 = match &self.initial {
            InitialConfig::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::Config {
                        pointer: "/initial".into(),
                        message: format!(
                            "dimension mismatch: /initial has {} entries but {}",
                            v.len(),
                            dim_desc(&model, game_ptr)
                        ),
                    });
                }
                SimplexPoint::new(v, &Tolerance::default()).map_err(|e| config_err("/initial", e))?
            }
            InitialConfig::Uniform => SimplexPoint::centroid(n).map_err(|e| config_err("/initial", e))?,
            InitialConfig::Random { seed } => {
                let s = seed_override.or(*seed).unwrap_or(0);
                sample_uniform(n, s).map_err(|e| config_err("/initial/random", e))?
            }
        };

        self.integrator.validate().map_err(|e| config_err("/integrator", e))?;
        let mut analysis = self.analysis.clone();
        if analysis.points == 0 {
            return Err(config_err("/analysis/points", "points must be >= 1"));
        }
        if let Some(s) = seed_override {
            analysis.seed = s;
            analysis.equilibrium.seed = s;
        }
        Ok(Experiment {
            model: built,
            p0,
            integrator: self.integrator,
            outputs: self.outputs.clone(),
            analysis,
        })
    }
}
