//! Velocity fields on the simplex.
//!
//! Two routes exist for every continuous family. The *named* fields
//! ([`replicator_velocity`], [`quasispecies_velocity`], ...) implement each
//! textbook equation directly. The *engine* route ([`GrowthTransformField`])
//! evaluates the single growth-transform form
//!
//! ```text
//! dp_i/dt = p_i [ (f_i / fbar) g(p) - g(p) ],   fbar = sum_j p_j f_j
//! ```
//!
//! with a family-specific engine fitness `f_i` and time-scale `g(p)`.
//! [`instantiate_engine`] picks those so the two routes agree.

use crate::error::{check_dim, Error, Result};
use crate::game::{dot, FitnessModel, MutationMatrix, PayoffMatrix, Selector};

/// Smallest noise level accepted by logit dynamics; use best response below it.
pub const MIN_ETA: f64 = 1e-12;

/// Payoff tolerance for ties in the best-response argmax.
pub const TIE_TOL: f64 = 1e-9;

/// Something that produces a velocity at raw simplex coordinates.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;
    fn velocity(&self, p: &[f64]) -> Result<Vec<f64>>;
}

/// Reciprocal time constant `g(p) > 0` of the growth-transform engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GbarSpec {
    /// `sum_i p_i (f_i(p) + lambda)` using the base payoff model.
    MeanShiftedFitness,
    /// `sum_i exp(f_i(p) / eta)`.
    SumExp {
        eta: f64,
    },
    /// `sum_i k_i(p)`, the total positive payoff excess.
    SumExcess,
    Constant(f64),
}

/// A dynamics family with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsSpec {
    Replicator { model: FitnessModel, lambda: f64 },
    Quasispecies { fitness: Vec<f64>, mutation: MutationMatrix, lambda: f64 },
    ReplicatorMutator { model: FitnessModel, mutation: MutationMatrix, lambda: f64 },
    Logit { model: FitnessModel, eta: f64 },
    BestResponse { model: FitnessModel },
    Bnn { a: PayoffMatrix, epsilon: f64 },
    SelectorWeighted { model: FitnessModel, selector: Selector, lambda: f64, gbar: GbarSpec },
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("lambda must be >= 0, got {lambda}")));
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Parameter(format!("eta must be > 0, got {eta}")));
    }
    if eta < MIN_ETA {
        return Err(Error::Parameter(format!(
            "eta = {eta} is below {MIN_ETA}; use best-response dynamics instead"
        )));
    }
    Ok(())
}

fn check_gbar(gbar: &GbarSpec) -> Result<()> {
    match *gbar {
        GbarSpec::SumExp { eta } => check_eta(eta),
        GbarSpec::Constant(v) if !(v > 0.0 && v.is_finite()) => {
            Err(Error::Parameter(format!("constant time scale must be > 0, got {v}")))
        }
        _ => Ok(()),
    }
}

impl DynamicsSpec {
    pub fn replicator(model: FitnessModel, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(DynamicsSpec::Replicator { model, lambda })
    }

    pub fn quasispecies(fitness: Vec<f64>, mutation: MutationMatrix, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_dim("mutation matrix", mutation.dim(), fitness.len())?;
        // validates finiteness and sign
        FitnessModel::constant(fitness.clone())?;
        Ok(DynamicsSpec::Quasispecies { fitness, mutation, lambda })
    }

    pub fn replicator_mutator(model: FitnessModel, mutation: MutationMatrix, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_dim("mutation matrix", mutation.dim(), model.dim())?;
        Ok(DynamicsSpec::ReplicatorMutator { model, mutation, lambda })
    }

    pub fn logit(model: FitnessModel, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(DynamicsSpec::Logit { model, eta })
    }

    pub fn best_response(model: FitnessModel) -> Self {
        DynamicsSpec::BestResponse { model }
    }

    pub fn bnn(a: PayoffMatrix, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::Parameter(format!("epsilon must be >= 0, got {epsilon}")));
        }
        if a.dim() < 2 {
            return Err(Error::Dimension("a game needs at least 2 strategies".into()));
        }
        Ok(DynamicsSpec::Bnn { a, epsilon })
    }

    pub fn selector_weighted(
        model: FitnessModel,
        selector: Selector,
        lambda: f64,
        gbar: GbarSpec,
    ) -> Result<Self> {
        check_lambda(lambda)?;
        check_gbar(&gbar)?;
        if let Selector::LogisticDerivative { k } = selector {
            Selector::logistic_derivative(k)?;
        }
        Ok(DynamicsSpec::SelectorWeighted { model, selector, lambda, gbar })
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            DynamicsSpec::Replicator { .. } => "replicator",
            DynamicsSpec::Quasispecies { .. } => "quasispecies",
            DynamicsSpec::ReplicatorMutator { .. } => "replicator_mutator",
            DynamicsSpec::Logit { .. } => "logit",
            DynamicsSpec::BestResponse { .. } => "best_response",
            DynamicsSpec::Bnn { .. } => "bnn",
            DynamicsSpec::SelectorWeighted { .. } => "selector",
        }
    }

    /// The payoff model the family is built on.
    pub fn model(&self) -> FitnessModel {
        match self {
            DynamicsSpec::Replicator { model, .. }
            | DynamicsSpec::ReplicatorMutator { model, .. }
            | DynamicsSpec::Logit { model, .. }
            | DynamicsSpec::BestResponse { model }
            | DynamicsSpec::SelectorWeighted { model, .. } => model.clone(),
            DynamicsSpec::Quasispecies { fitness, .. } => FitnessModel::Constant(fitness.clone()),
            DynamicsSpec::Bnn { a, .. } => FitnessModel::Linear(a.clone()),
        }
    }

    /// Payoff matrix for linear-payoff families (used by Nash/ESS checks).
    pub fn linear_payoff(&self) -> Option<PayoffMatrix> {
        match self.model() {
            FitnessModel::Linear(a) => Some(a),
            _ => None,
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            DynamicsSpec::Replicator { lambda, .. }
            | DynamicsSpec::Quasispecies { lambda, .. }
            | DynamicsSpec::ReplicatorMutator { lambda, .. }
            | DynamicsSpec::SelectorWeighted { lambda, .. } => *lambda,
            _ => 0.0,
        }
    }
}

impl VectorField for DynamicsSpec {
    fn dim(&self) -> usize {
        match self {
            DynamicsSpec::Quasispecies { fitness, .. } => fitness.len(),
            DynamicsSpec::Bnn { a, .. } => a.dim(),
            other => other.model().dim(),
        }
    }

    fn velocity(&self, p: &[f64]) -> Result<Vec<f64>> {
        match self {
            DynamicsSpec::Replicator { model, .. } => replicator_velocity(model, p),
            DynamicsSpec::Quasispecies { fitness, mutation, .. } => {
                quasispecies_velocity(fitness, mutation, p)
            }
            DynamicsSpec::ReplicatorMutator { model, mutation, .. } => {
                replicator_mutator_velocity(model, mutation, p)
            }
            DynamicsSpec::Logit { model, eta } => logit_velocity(model, *eta, p),
            DynamicsSpec::BestResponse { model } => best_response_velocity(model, p),
            DynamicsSpec::Bnn { a, epsilon } => bnn_velocity(a, *epsilon, p),
            DynamicsSpec::SelectorWeighted { model, selector, lambda, gbar } => {
                selector_weighted_velocity(model, *selector, *lambda, *gbar, p)
            }
        }
    }
}

/// `dp_i/dt = p_i (f_i(p) - fbar)`.
pub fn replicator_velocity(model: &FitnessModel, p: &[f64]) -> Result<Vec<f64>> {
    model.check(p)?;
    let f = model.eval(p);
    let fbar = dot(p, &f);
    // expanded like the mutation inflow so an identity mutation matrix
    // reproduces this field bit for bit
    Ok(p.iter().zip(&f).map(|(pi, fi)| pi * fi - pi * fbar).collect())
}

fn mutation_inflow(f: &[f64], m: &MutationMatrix, p: &[f64]) -> Vec<f64> {
    let n = p.len();
    (0..n).map(|i| (0..n).map(|j| p[j] * f[j] * m.get(j, i)).sum()).collect()
}

/// `dp_i/dt = sum_j p_j f_j m_ji - p_i fbar` with constant fitness `f`.
pub fn quasispecies_velocity(f: &[f64], m: &MutationMatrix, p: &[f64]) -> Result<Vec<f64>> {
    check_dim("state", p.len(), f.len())?;
    check_dim("mutation matrix", m.dim(), f.len())?;
    let inflow = mutation_inflow(f, m, p);
    let fbar = dot(p, f);
    Ok(inflow.iter().zip(p).map(|(q, pi)| q - pi * fbar).collect())
}

/// Quasispecies with frequency-dependent fitness `f(p)`.
pub fn replicator_mutator_velocity(model: &FitnessModel, m: &MutationMatrix, p: &[f64]) -> Result<Vec<f64>> {
    model.check(p)?;
    check_dim("mutation matrix", m.dim(), model.dim())?;
    let f = model.eval(p);
    let inflow = mutation_inflow(&f, m, p);
    let fbar = dot(p, &f);
    Ok(inflow.iter().zip(p).map(|(q, pi)| q - pi * fbar).collect())
}

/// Numerically stable `softmax(f / eta)`.
pub fn softmax(f: &[f64], eta: f64) -> Vec<f64> {
    let max = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = f.iter().map(|fi| ((fi - max) / eta).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|wi| wi / z).collect()
}

/// `dp_i/dt = softmax_i(f(p) / eta) - p_i`.
pub fn logit_velocity(model: &FitnessModel, eta: f64, p: &[f64]) -> Result<Vec<f64>> {
    check_eta(eta)?;
    model.check(p)?;
    let target = softmax(&model.eval(p), eta);
    Ok(target.iter().zip(p).map(|(t, pi)| t - pi).collect())
}

/// Uniform distribution over the strategies whose payoff is within
/// [`TIE_TOL`] of the best.
pub fn best_response(f: &[f64]) -> Vec<f64> {
    let max = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let best: Vec<bool> = f.iter().map(|&fi| fi >= max - TIE_TOL).collect();
    let count = best.iter().filter(|&&b| b).count() as f64;
    best.into_iter().map(|b| if b { 1.0 / count } else { 0.0 }).collect()
}

/// `dp/dt = b(p) - p` with `b` the tie-split best response.
pub fn best_response_velocity(model: &FitnessModel, p: &[f64]) -> Result<Vec<f64>> {
    model.check(p)?;
    let b = best_response(&model.eval(p));
    Ok(b.iter().zip(p).map(|(bi, pi)| bi - pi).collect())
}

/// `dp_i/dt = k_i - p_i sum_j k_j`, `k_i = max(0, (Ap)_i - p^T A p + epsilon)`.
pub fn bnn_velocity(a: &PayoffMatrix, epsilon: f64, p: &[f64]) -> Result<Vec<f64>> {
    check_dim("state", p.len(), a.dim())?;
    if !(epsilon >= 0.0) {
        return Err(Error::Parameter(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let ap = a.apply(p);
    let avg = a.bilinear(p, p);
    let k: Vec<f64> = ap.iter().map(|x| (x - avg + epsilon).max(0.0)).collect();
    let total: f64 = k.iter().sum();
    Ok(k.iter().zip(p).map(|(ki, pi)| ki - pi * total).collect())
}

/// Positive payoff excess `max(0, f_i - fbar + epsilon)` for any model.
pub(crate) fn excess(f: &[f64], p: &[f64], epsilon: f64) -> Vec<f64> {
    let fbar = dot(p, f);
    f.iter().map(|fi| (fi - fbar + epsilon).max(0.0)).collect()
}

fn check_shifted_positive(f: &[f64], lambda: f64) -> Result<()> {
    if let Some((i, fi)) = f.iter().enumerate().find(|(_, &fi)| !(fi + lambda > 0.0)) {
        return Err(Error::Positivity(format!(
            "f_{i} + lambda = {} is not positive; increase lambda",
            fi + lambda
        )));
    }
    Ok(())
}

fn eval_gbar(gbar: GbarSpec, f: &[f64], p: &[f64], lambda: f64, epsilon: f64) -> f64 {
    match gbar {
        GbarSpec::MeanShiftedFitness => p.iter().zip(f).map(|(pi, fi)| pi * (fi + lambda)).sum(),
        GbarSpec::SumExp { eta } => f.iter().map(|fi| (fi / eta).exp()).sum(),
        GbarSpec::SumExcess => excess(f, p, epsilon).iter().sum(),
        GbarSpec::Constant(v) => v,
    }
}

/// Selector-weighted growth transform:
/// `dp_i/dt = p_i [ (f'_i / f'bar) g - g ]`, `f'_i = h(p_i)(f_i + lambda)`.
pub fn selector_weighted_velocity(
    model: &FitnessModel,
    h: Selector,
    lambda: f64,
    gbar: GbarSpec,
    p: &[f64],
) -> Result<Vec<f64>> {
    model.check(p)?;
    let f = model.eval(p);
    check_shifted_positive(&f, lambda)?;
    // p_i f'_i, so the arithmetic matches the engine term for term
    let w: Vec<f64> = p.iter().zip(&f).map(|(&pi, fi)| pi * h.eval(pi) * (fi + lambda)).collect();
    let fbar: f64 = w.iter().sum();
    let g = eval_gbar(gbar, &f, p, lambda, 0.0);
    if !(fbar > 0.0) || !(g > 0.0) {
        return Err(Error::Degenerate(format!(
            "selector-weighted mean {fbar} or time scale {g} is not positive"
        )));
    }
    let ratio = g / fbar;
    Ok(w.iter().zip(p).map(|(wi, pi)| wi * ratio - pi * g).collect())
}

/// How the engine fitness `f_i` of the growth transform is built from the
/// base payoff model.
#[derive(Debug, Clone, PartialEq)]
pub enum EngineFitness {
    /// `f_i + lambda`.
    Shifted,
    /// `(1/p_i) sum_j p_j f_j m_ji + lambda`.
    MutationInflow(MutationMatrix),
    /// `(1/p_i) exp(f_i / eta)`.
    ExpOverShare { eta: f64 },
    /// `(1/p_i) k_i(p)`; zero components are allowed.
    ExcessOverShare,
    /// `h(p_i)(f_i + lambda)`.
    Selected(Selector),
}

/// The unified growth-transform velocity field.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthTransformField {
    pub model: FitnessModel,
    pub fitness: EngineFitness,
    pub gbar: GbarSpec,
    pub lambda: f64,
    /// Margin used by [`EngineFitness::ExcessOverShare`] and [`GbarSpec::SumExcess`].
    pub epsilon: f64,
}

impl GrowthTransformField {
    pub fn new(model: FitnessModel, fitness: EngineFitness, gbar: GbarSpec, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        check_gbar(&gbar)?;
        if let EngineFitness::MutationInflow(m) = &fitness {
            check_dim("mutation matrix", m.dim(), model.dim())?;
        }
        if let EngineFitness::ExpOverShare { eta } = fitness {
            check_eta(eta)?;
        }
        Ok(GrowthTransformField { model, fitness, gbar, lambda, epsilon: 0.0 })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::Parameter(format!("epsilon must be >= 0, got {epsilon}")));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    /// `p_i f_i(p)` in cancelled form, finite on the boundary.
    pub fn weighted_fitness(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.model.check(p)?;
        let f = self.model.eval(p);
        self.weighted_from(&f, p)
    }

    fn weighted_from(&self, f: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        let lambda = self.lambda;
        let w: Vec<f64> = match &self.fitness {
            EngineFitness::Shifted => {
                check_shifted_positive(f, lambda)?;
                p.iter().zip(f).map(|(pi, fi)| pi * (fi + lambda)).collect()
            }
            EngineFitness::MutationInflow(m) => {
                let inflow = mutation_inflow(f, m, p);
                inflow.iter().zip(p).map(|(q, pi)| q + lambda * pi).collect()
            }
            EngineFitness::ExpOverShare { eta } => f.iter().map(|fi| (fi / eta).exp()).collect(),
            EngineFitness::ExcessOverShare => excess(f, p, self.epsilon),
            EngineFitness::Selected(h) => {
                check_shifted_positive(f, lambda)?;
                p.iter().zip(f).map(|(&pi, fi)| pi * h.eval(pi) * (fi + lambda)).collect()
            }
        };
        let zero_ok = matches!(self.fitness, EngineFitness::ExcessOverShare);
        for (i, (&wi, &pi)) in w.iter().zip(p).enumerate() {
            let bad = if pi > 0.0 && !zero_ok { !(wi > 0.0) } else { !(wi >= 0.0) };
            if bad {
                return Err(Error::Positivity(format!(
                    "engine fitness component {i} is not positive (p_i f_i = {wi})"
                )));
            }
        }
        Ok(w)
    }

    /// The engine fitness `f_i(p)` itself; infinite where a `1/p_i` factor
    /// meets `p_i = 0`.
    pub fn gt_fitness(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.model.check(p)?;
        let f = self.model.eval(p);
        let w = self.weighted_from(&f, p)?;
        Ok(match &self.fitness {
            EngineFitness::Shifted => f.iter().map(|fi| fi + self.lambda).collect(),
            EngineFitness::Selected(h) => {
                f.iter().zip(p).map(|(fi, &pi)| h.eval(pi) * (fi + self.lambda)).collect()
            }
            _ => w.iter().zip(p).map(|(wi, pi)| wi / pi).collect(),
        })
    }

    pub fn gbar_value(&self, p: &[f64]) -> Result<f64> {
        self.model.check(p)?;
        let f = self.model.eval(p);
        Ok(eval_gbar(self.gbar, &f, p, self.lambda, self.epsilon))
    }
}

/// Evaluates the growth-transform field at `p`.
pub fn growth_transform_velocity(field: &GrowthTransformField, p: &[f64]) -> Result<Vec<f64>> {
    field.model.check(p)?;
    let f = field.model.eval(p);
    let w = field.weighted_from(&f, p)?;
    let fbar: f64 = w.iter().sum();
    let g = eval_gbar(field.gbar, &f, p, field.lambda, field.epsilon);
    if fbar == 0.0 && matches!(field.fitness, EngineFitness::ExcessOverShare) {
        // every excess is zero, so every term of the field is zero
        return Ok(vec![0.0; p.len()]);
    }
    if !(fbar > 0.0) {
        return Err(Error::Degenerate(format!("engine mean fitness {fbar} is not positive")));
    }
    if !(g > 0.0) {
        return Err(Error::Degenerate(format!("time scale g(p) = {g} is not positive")));
    }
    let ratio = g / fbar;
    Ok(w.iter().zip(p).map(|(wi, pi)| wi * ratio - pi * g).collect())
}

impl VectorField for GrowthTransformField {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn velocity(&self, p: &[f64]) -> Result<Vec<f64>> {
        growth_transform_velocity(self, p)
    }
}

/// Engine parameters that reproduce a named family.
///
/// Replicator, quasispecies, replicator-mutator and BNN are reproduced
/// exactly. Logit is reproduced up to the positive factor `g(p) =
/// sum_i exp(f_i/eta)`, i.e. the same orbits on a rescaled clock. Best
/// response has a discontinuous target and is rejected.
pub fn instantiate_engine(spec: &DynamicsSpec) -> Result<GrowthTransformField> {
    let field = match spec {
        DynamicsSpec::Replicator { model, lambda } => GrowthTransformField::new(
            model.clone(),
            EngineFitness::Shifted,
            GbarSpec::MeanShiftedFitness,
            *lambda,
        )?,
        DynamicsSpec::Quasispecies { fitness, mutation, lambda } => GrowthTransformField::new(
            FitnessModel::Constant(fitness.clone()),
            EngineFitness::MutationInflow(mutation.clone()),
            GbarSpec::MeanShiftedFitness,
            *lambda,
        )?,
        DynamicsSpec::ReplicatorMutator { model, mutation, lambda } => GrowthTransformField::new(
            model.clone(),
            EngineFitness::MutationInflow(mutation.clone()),
            GbarSpec::MeanShiftedFitness,
            *lambda,
        )?,
        DynamicsSpec::Logit { model, eta } => GrowthTransformField::new(
            model.clone(),
            EngineFitness::ExpOverShare { eta: *eta },
            GbarSpec::SumExp { eta: *eta },
            0.0,
        )?,
        DynamicsSpec::Bnn { a, epsilon } => GrowthTransformField::new(
            FitnessModel::Linear(a.clone()),
            EngineFitness::ExcessOverShare,
            GbarSpec::SumExcess,
            0.0,
        )?
        .with_epsilon(*epsilon)?,
        DynamicsSpec::SelectorWeighted { model, selector, lambda, gbar } => {
            GrowthTransformField::new(model.clone(), EngineFitness::Selected(*selector), *gbar, *lambda)?
        }
        DynamicsSpec::BestResponse { .. } => {
            return Err(Error::UnsupportedFamily(
                "best response has a discontinuous target and no growth-transform form".into(),
            ))
        }
    };
    Ok(field)
}
