//! Cost functions `H(p)` whose growth transform yields each dynamics family,
//! finite-difference gradients, and tangent-space curvature.
//!
//! Integral cost functions follow the dummy-variable convention: the `i`-th
//! term integrates `f_i` with coordinate `i` replaced by `z` and every other
//! coordinate held at the *anchor* state. `evaluate_h` anchors at the
//! evaluation point; [`numerical_gradient`] keeps the anchor fixed while the
//! upper limits move, so `-dH/dp_i` recovers the integrand at `p`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dynamics::{instantiate_engine, DynamicsSpec};
use crate::error::{check_dim, Error, Result};
use crate::game::{FitnessModel, MutationMatrix, PayoffMatrix, Selector};
use crate::linalg::project_to_tangent;
use crate::quadrature::{integrate, integrate_piecewise, sign_changes};

/// Lower integration limit used unless the caller picks another.
pub const DEFAULT_C: f64 = 0.5;
/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-6;
/// Absolute tolerance of each quadrature call.
pub const QUAD_TOL: f64 = 1e-12;
/// Eigenvalue threshold of [`curvature_class`].
pub const CURVATURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum CostFunction {
    /// `-p^T A p - lambda sum p_i`.
    QuadraticPayoff { a: PayoffMatrix, lambda: f64 },
    /// `-sum_i int_c^{p_i} f_i(z) dz_i - lambda sum p_i`.
    ReplicatorIntegral { model: FitnessModel, lambda: f64, c: f64 },
    /// `-sum_i log(p_i) sum_j p_j f_j m_ji - lambda sum p_i`, with `f` taken at
    /// the anchor (constant fitness for the quasispecies case).
    QuasispeciesLog { model: FitnessModel, mutation: MutationMatrix, lambda: f64 },
    /// `-sum_i int_c^{p_i} (1/z_i) exp(f_i(z)/eta) dz_i`.
    LogitIntegral { model: FitnessModel, eta: f64, c: f64 },
    /// `-sum_i int_c^{p_i} (1/z_i) k_i(z) dz_i`.
    BnnIntegral { a: PayoffMatrix, epsilon: f64, c: f64 },
    /// `-sum_i int_c^{p_i} h(z_i) (f_i(z) + lambda) dz_i`.
    SelectorIntegral { model: FitnessModel, selector: Selector, lambda: f64, c: f64 },
}

impl CostFunction {
    pub fn quasispecies_log(f: Vec<f64>, mutation: MutationMatrix, lambda: f64) -> Result<Self> {
        let model = FitnessModel::constant(f)?;
        check_dim("mutation matrix", mutation.dim(), model.dim())?;
        Ok(CostFunction::QuasispeciesLog { model, mutation, lambda })
    }

    pub fn dim(&self) -> usize {
        match self {
            CostFunction::QuadraticPayoff { a, .. } | CostFunction::BnnIntegral { a, .. } => a.dim(),
            CostFunction::ReplicatorIntegral { model, .. }
            | CostFunction::QuasispeciesLog { model, .. }
            | CostFunction::LogitIntegral { model, .. }
            | CostFunction::SelectorIntegral { model, .. } => model.dim(),
        }
    }

    fn lower_limit(&self) -> Option<f64> {
        match self {
            CostFunction::ReplicatorIntegral { c, .. }
            | CostFunction::LogitIntegral { c, .. }
            | CostFunction::BnnIntegral { c, .. }
            | CostFunction::SelectorIntegral { c, .. } => Some(*c),
            _ => None,
        }
    }

    fn needs_interior(&self) -> bool {
        !matches!(self, CostFunction::QuadraticPayoff { .. })
    }

    fn validate(&self) -> Result<()> {
        if let Some(c) = self.lower_limit() {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::Parameter(format!("integration constant c = {c} outside (0, 1)")));
            }
        }
        match self {
            CostFunction::QuadraticPayoff { lambda, .. }
            | CostFunction::ReplicatorIntegral { lambda, .. }
            | CostFunction::QuasispeciesLog { lambda, .. }
            | CostFunction::SelectorIntegral { lambda, .. }
                if !(*lambda >= 0.0) =>
            {
                Err(Error::Parameter(format!("lambda must be >= 0, got {lambda}")))
            }
            CostFunction::LogitIntegral { eta, .. } if !(*eta > 0.0) => {
                Err(Error::Parameter(format!("eta must be > 0, got {eta}")))
            }
            _ => Ok(()),
        }
    }

    fn check_domain(&self, q: &[f64]) -> Result<()> {
        check_dim("state", q.len(), self.dim())?;
        if self.needs_interior() {
            if let Some((i, v)) = q.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
                return Err(Error::Domain(format!("cost function needs p_i > 0 for all i, but p_{i} = {v}")));
            }
        }
        Ok(())
    }

    /// `H` at upper limits `q` with integrands anchored at `anchor`.
    /// `closed_form` selects closed forms where they exist.
    fn evaluate_anchored(&self, q: &[f64], anchor: &[f64], closed_form: bool) -> Result<f64> {
        self.validate()?;
        self.check_domain(q)?;
        self.check_domain(anchor)?;
        let n = q.len();
        let mass: f64 = q.iter().sum();
        match self {
            CostFunction::QuadraticPayoff { a, lambda } => Ok(-a.bilinear(q, q) - lambda * mass),
            CostFunction::ReplicatorIntegral { model, lambda, c } => {
                let mut total = 0.0;
                for i in 0..n {
                    total += match (closed_form, model) {
                        (true, FitnessModel::Constant(f)) => f[i] * (q[i] - c),
                        (true, FitnessModel::Linear(a)) => linear_term(a, i, anchor, q[i], *c),
                        (true, FitnessModel::Quadratic { a, q: quad }) => {
                            linear_term(a, i, anchor, q[i], *c) + quad[i] * (q[i].powi(3) - c.powi(3)) / 3.0
                        }
                        _ => integrate(|z| model.eval_component_at(i, anchor, z), *c, q[i], QUAD_TOL)?,
                    };
                }
                Ok(-total - lambda * mass)
            }
            CostFunction::QuasispeciesLog { model, mutation, lambda } => {
                let f = model.eval(anchor);
                let mut total = 0.0;
                for k in 0..n {
                    let inflow: f64 = (0..n).map(|j| q[j] * f[j] * mutation.get(j, k)).sum();
                    total += q[k].ln() * inflow;
                }
                Ok(-total - lambda * mass)
            }
            CostFunction::LogitIntegral { model, eta, c } => {
                let mut total = 0.0;
                for i in 0..n {
                    total += integrate(
                        |z| (model.eval_component_at(i, anchor, z) / eta).exp() / z,
                        *c,
                        q[i],
                        QUAD_TOL,
                    )?;
                }
                Ok(-total)
            }
            CostFunction::BnnIntegral { a, epsilon, c } => {
                let mut total = 0.0;
                for i in 0..n {
                    let raw_excess = |z: f64| {
                        let mut s = anchor.to_vec();
                        s[i] = z;
                        a.apply(&s)[i] - a.bilinear(&s, &s) + epsilon
                    };
                    let kinks = sign_changes(raw_excess, *c, q[i], 64);
                    total += integrate_piecewise(|z| raw_excess(z).max(0.0) / z, *c, q[i], &kinks, QUAD_TOL)?;
                }
                Ok(-total)
            }
            CostFunction::SelectorIntegral { model, selector, lambda, c } => {
                let mut total = 0.0;
                for i in 0..n {
                    total += integrate(
                        |z| selector.eval(z) * (model.eval_component_at(i, anchor, z) + lambda),
                        *c,
                        q[i],
                        QUAD_TOL,
                    )?;
                }
                Ok(-total)
            }
        }
    }
}

// int_c^{x} [ sum_{j != i} a_ij p_j + a_ii z ] dz
fn linear_term(a: &PayoffMatrix, i: usize, anchor: &[f64], x: f64, c: f64) -> f64 {
    let rest: f64 = (0..a.dim()).filter(|&j| j != i).map(|j| a.get(i, j) * anchor[j]).sum();
    rest * (x - c) + a.get(i, i) * (x * x - c * c) / 2.0
}

/// `H(p)`, using closed forms where available and adaptive quadrature
/// otherwise.
pub fn evaluate_h(h: &CostFunction, p: &[f64]) -> Result<f64> {
    h.evaluate_anchored(p, p, true)
}

/// `H(p)` with every integral evaluated by quadrature.
pub fn evaluate_h_quadrature(h: &CostFunction, p: &[f64]) -> Result<f64> {
    h.evaluate_anchored(p, p, false)
}

/// Central-difference gradient on raw coordinates (no simplex projection).
pub fn numerical_gradient(h: &CostFunction, p: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(1e-8..=1e-4).contains(&step) {
        return Err(Error::Parameter(format!("step {step} outside [1e-8, 1e-4]")));
    }
    h.check_domain(p)?;
    if h.needs_interior() {
        if let Some((i, v)) = p.iter().enumerate().find(|(_, &v)| v <= step) {
            return Err(Error::Domain(format!("p_{i} = {v} is too close to the boundary for step {step}")));
        }
    }
    let mut grad = Vec::with_capacity(p.len());
    let mut q = p.to_vec();
    for i in 0..p.len() {
        q[i] = p[i] + step;
        let up = h.evaluate_anchored(&q, p, true)?;
        q[i] = p[i] - step;
        let down = h.evaluate_anchored(&q, p, true)?;
        q[i] = p[i];
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// Cost function whose growth transform gives `spec`, with `c = 0.5`.
pub fn cost_function_for(spec: &DynamicsSpec) -> Result<CostFunction> {
    Ok(match spec {
        DynamicsSpec::Replicator { model, lambda } => {
            CostFunction::ReplicatorIntegral { model: model.clone(), lambda: *lambda, c: DEFAULT_C }
        }
        DynamicsSpec::Quasispecies { fitness, mutation, lambda } => {
            CostFunction::quasispecies_log(fitness.clone(), mutation.clone(), *lambda)?
        }
        DynamicsSpec::ReplicatorMutator { model, mutation, lambda } => CostFunction::QuasispeciesLog {
            model: model.clone(),
            mutation: mutation.clone(),
            lambda: *lambda,
        },
        DynamicsSpec::Logit { model, eta } => {
            CostFunction::LogitIntegral { model: model.clone(), eta: *eta, c: DEFAULT_C }
        }
        DynamicsSpec::Bnn { a, epsilon } => {
            CostFunction::BnnIntegral { a: a.clone(), epsilon: *epsilon, c: DEFAULT_C }
        }
        DynamicsSpec::SelectorWeighted { model, selector, lambda, .. } => CostFunction::SelectorIntegral {
            model: model.clone(),
            selector: *selector,
            lambda: *lambda,
            c: DEFAULT_C,
        },
        DynamicsSpec::BestResponse { .. } => {
            return Err(Error::UnsupportedFamily("best response has no cost function".into()))
        }
    })
}

/// Agreement between `-grad H` and the engine fitness at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub family: String,
    /// `|(-grad H)_i - f_i|` per component.
    pub residual: Vec<f64>,
    pub max_residual: f64,
    /// Analytic log-weighted term `|sum_k log(p_k) f_i m_ik|` for the
    /// mutation families, which the log cost function does not cancel.
    pub predicted: Option<Vec<f64>>,
}

impl GradientReport {
    /// Worst disagreement: against zero, or against the predicted term.
    pub fn discrepancy(&self) -> f64 {
        match &self.predicted {
            None => self.max_residual,
            Some(pred) => self.residual.iter().zip(pred).map(|(r, p)| (r - p).abs()).fold(0.0, f64::max),
        }
    }
}

/// Compares the finite-difference gradient of the family's cost function
/// with the engine fitness that [`instantiate_engine`] uses.
pub fn gradient_residual_report(spec: &DynamicsSpec, p: &[f64]) -> Result<GradientReport> {
    gradient_residual_report_with_step(spec, p, DEFAULT_STEP)
}

pub fn gradient_residual_report_with_step(
    spec: &DynamicsSpec,
    p: &[f64],
    step: f64,
) -> Result<GradientReport> {
    let cost = cost_function_for(spec)?;
    let engine = instantiate_engine(spec)?;
    let grad = numerical_gradient(&cost, p, step)?;
    let gt = engine.gt_fitness(p)?;
    let residual: Vec<f64> = grad.iter().zip(&gt).map(|(g, f)| (-g - f).abs()).collect();
    let max_residual = residual.iter().cloned().fold(0.0, f64::max);
    let predicted = match spec {
        DynamicsSpec::Quasispecies { mutation, .. } | DynamicsSpec::ReplicatorMutator { mutation, .. } => {
            let f = spec.model().eval(p);
            let n = p.len();
            Some(
                (0..n)
                    .map(|i| (0..n).map(|k| p[k].ln() * f[i] * mutation.get(i, k)).sum::<f64>().abs())
                    .collect(),
            )
        }
        _ => None,
    };
    Ok(GradientReport { family: spec.family_name().to_string(), residual, max_residual, predicted })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curvature {
    /// All tangent eigenvalues vanish.
    Flat,
    StrictlyConvex,
    Convex,
    StrictlyConcave,
    Concave,
    Indefinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub class: Curvature,
    /// Eigenvalues of `-(A + A^T)` on the simplex tangent space, ascending.
    pub tangent_eigenvalues: Vec<f64>,
}

/// Classifies `H(p) = -p^T A p - lambda sum p_i` on the simplex tangent
/// space. `lambda` only adds a term that is linear in `p`, so it never
/// changes the class.
pub fn curvature_class(a: &PayoffMatrix, _lambda: f64) -> Result<CurvatureReport> {
    if a.dim() < 2 {
        return Err(Error::Dimension("curvature needs at least 2 strategies".into()));
    }
    let m = a.matrix();
    let hessian: DMatrix<f64> = -(m + m.transpose());
    let t = project_to_tangent(&hessian);
    let t = (&t + t.transpose()) * 0.5;
    let mut eig: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().cloned().collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    let tol = CURVATURE_TOL;
    let class = if eig.iter().all(|v| v.abs() <= tol) {
        Curvature::Flat
    } else if eig.iter().all(|&v| v > tol) {
        Curvature::StrictlyConvex
    } else if eig.iter().all(|&v| v < -tol) {
        Curvature::StrictlyConcave
    } else if eig.iter().all(|&v| v >= -tol) {
        Curvature::Convex
    } else if eig.iter().all(|&v| v <= tol) {
        Curvature::Concave
    } else {
        Curvature::Indefinite
    };
    Ok(CurvatureReport { class, tangent_eigenvalues: eig })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{make_mutation_matrix, standard_game, MutationSpec};
    use crate::simplex::sample_interior;

    fn matrix(rows: &[Vec<f64>]) -> PayoffMatrix {
        PayoffMatrix::from_rows(rows).unwrap()
    }

    fn rps_a() -> PayoffMatrix {
        standard_game("rps").unwrap().payoff_matrix().unwrap().clone()
    }

    #[test]
    fn quadratic_payoff_values() {
        let h = CostFunction::QuadraticPayoff { a: rps_a(), lambda: 0.0 };
        for seed in 0..50 {
            let p = sample_interior(3, seed, 0.0).unwrap();
            assert!(evaluate_h(&h, &p).unwrap().abs() < 1e-15);
        }
        let h = CostFunction::QuadraticPayoff { a: matrix(&[vec![3.0, 0.0], vec![5.0, 1.0]]), lambda: 1.0 };
        assert_eq!(evaluate_h(&h, &[1.0, 0.0]).unwrap(), -4.0);
    }

    #[test]
    fn replicator_closed_form_matches_quadrature() {
        let a = matrix(&[vec![0.4, -1.1, 2.0], vec![1.3, 0.2, -0.6], vec![-0.9, 0.5, 0.7]]);
        let models = [
            FitnessModel::linear(a.clone()).unwrap(),
            FitnessModel::quadratic(a.clone(), vec![0.3, -0.8, 1.2]).unwrap(),
            FitnessModel::constant(vec![1.0, 0.5, 2.5]).unwrap(),
        ];
        for model in models {
            let h = CostFunction::ReplicatorIntegral { model, lambda: 1.5, c: 0.5 };
            for seed in 0..50 {
                let p = sample_interior(3, seed, 0.05).unwrap();
                let closed = evaluate_h(&h, &p).unwrap();
                let quad = evaluate_h_quadrature(&h, &p).unwrap();
                assert!((closed - quad).abs() < 1e-8, "{closed} vs {quad}");
            }
        }
        let two = CostFunction::ReplicatorIntegral {
            model: FitnessModel::linear(matrix(&[vec![2.0, 1.0], vec![0.5, 3.0]])).unwrap(),
            lambda: 1.0,
            c: 0.5,
        };
        let p = [0.3, 0.7];
        assert!((evaluate_h(&two, &p).unwrap() - evaluate_h_quadrature(&two, &p).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn integral_variants_reject_boundary() {
        let h =
            CostFunction::ReplicatorIntegral { model: standard_game("rps").unwrap(), lambda: 2.0, c: 0.5 };
        assert!(matches!(evaluate_h(&h, &[0.0, 0.5, 0.5]), Err(Error::Domain(_))));
        let q = CostFunction::QuadraticPayoff { a: rps_a(), lambda: 0.0 };
        assert!(evaluate_h(&q, &[0.0, 0.5, 0.5]).is_ok());
    }

    #[test]
    fn quadratic_gradient_matches_analytic() {
        let a = matrix(&[vec![1.0, 0.3, -0.2], vec![0.3, 2.0, 0.8], vec![-0.2, 0.8, -1.0]]);
        let lambda = 0.7;
        let h = CostFunction::QuadraticPayoff { a: a.clone(), lambda };
        for seed in 0..20 {
            let p = sample_interior(3, seed, 0.1).unwrap();
            let g = numerical_gradient(&h, &p, DEFAULT_STEP).unwrap();
            let m = a.matrix();
            let sym = m + m.transpose();
            for i in 0..3 {
                let analytic: f64 = -(0..3).map(|j| sym[(i, j)] * p[j]).sum::<f64>() - lambda;
                assert!((g[i] - analytic).abs() < 1e-6);
            }
        }
        let rps = CostFunction::QuadraticPayoff { a: rps_a(), lambda: 0.0 };
        let g = numerical_gradient(&rps, &[0.2, 0.3, 0.5], DEFAULT_STEP).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-8));
    }

    #[test]
    fn replicator_gradient_recovers_fitness() {
        let a = matrix(&[vec![0.0, -1.0, 1.0], vec![1.0, 0.0, -1.0], vec![-1.0, 1.0, 0.0]]);
        let models = [
            FitnessModel::linear(a.clone()).unwrap(),
            FitnessModel::quadratic(a.clone(), vec![0.5, 1.0, -0.3]).unwrap(),
            FitnessModel::saturating(a, 1.0).unwrap(),
        ];
        for model in models {
            let lambda = 2.0;
            let h = CostFunction::ReplicatorIntegral { model: model.clone(), lambda, c: 0.5 };
            for seed in 0..100 {
                let p = sample_interior(3, seed, 0.1).unwrap();
                let g = numerical_gradient(&h, &p, DEFAULT_STEP).unwrap();
                let f = model.eval(&p);
                for i in 0..3 {
                    assert!((-g[i] - (f[i] + lambda)).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn step_and_domain_checks() {
        let h = CostFunction::QuadraticPayoff { a: rps_a(), lambda: 0.0 };
        assert!(matches!(numerical_gradient(&h, &[0.3, 0.3, 0.4], 1e-2), Err(Error::Parameter(_))));
        let l = CostFunction::LogitIntegral { model: standard_game("rps").unwrap(), eta: 1.0, c: 0.5 };
        assert!(matches!(numerical_gradient(&l, &[1e-7, 0.5, 0.5 - 1e-7], 1e-6), Err(Error::Domain(_))));
    }

    #[test]
    fn residual_report_examples() {
        let spec = DynamicsSpec::replicator(standard_game("rps").unwrap(), 2.0).unwrap();
        let r = gradient_residual_report(&spec, &[0.4, 0.3, 0.3]).unwrap();
        assert!(r.max_residual <= 1e-6, "{r:?}");
        assert!(r.predicted.is_none());

        let m = make_mutation_matrix(MutationSpec::UniformNoise(3, 0.3)).unwrap();
        let spec = DynamicsSpec::quasispecies(vec![1.0, 2.0, 3.0], m.clone(), 1.0).unwrap();
        let third = [1.0 / 3.0; 3];
        let r = gradient_residual_report(&spec, &third).unwrap();
        // analytic extra term: sum_k log(1/3) f_i m_ik = log(1/3) f_i (rows of M sum to 1)
        let ln3 = (1.0f64 / 3.0).ln();
        for (i, fi) in [1.0, 2.0, 3.0].iter().enumerate() {
            let oracle: f64 = (0..3).map(|k| ln3 * fi * m.get(i, k)).sum::<f64>().abs();
            assert!((r.residual[i] - oracle).abs() < 1e-6);
            assert!(r.residual[i] > 0.1);
        }
        assert!(r.discrepancy() < 1e-6);

        let id = make_mutation_matrix(MutationSpec::Identity(3)).unwrap();
        let spec = DynamicsSpec::quasispecies(vec![1.0, 2.0, 3.0], id, 1.0).unwrap();
        let r = gradient_residual_report(&spec, &third).unwrap();
        for (i, fi) in [1.0, 2.0, 3.0].iter().enumerate() {
            assert!((r.residual[i] - (ln3 * fi).abs()).abs() < 1e-6);
        }
    }

    #[test]
    fn logit_and_bnn_gradients() {
        let pd = standard_game("prisoners_dilemma").unwrap();
        let spec = DynamicsSpec::logit(pd.clone(), 1.0).unwrap();
        let r = gradient_residual_report(&spec, &[0.35, 0.65]).unwrap();
        assert!(r.max_residual < 1e-4, "{r:?}");

        let a = standard_game("hawk_dove").unwrap().payoff_matrix().unwrap().clone();
        let spec = DynamicsSpec::bnn(a, 0.1).unwrap();
        let r = gradient_residual_report(&spec, &[0.3, 0.7]).unwrap();
        assert!(r.max_residual < 1e-4, "{r:?}");

        assert!(matches!(
            gradient_residual_report(&DynamicsSpec::best_response(pd), &[0.5, 0.5]),
            Err(Error::UnsupportedFamily(_))
        ));
    }

    #[test]
    fn bnn_integral_crosses_kink() {
        // hawk-dove excess for strategy 0 changes sign between c and p_0
        let a = standard_game("hawk_dove").unwrap().payoff_matrix().unwrap().clone();
        let h = CostFunction::BnnIntegral { a, epsilon: 0.0, c: 0.5 };
        let v = evaluate_h(&h, &[0.2, 0.8]).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn curvature_examples() {
        let r = curvature_class(&rps_a(), 0.0).unwrap();
        assert_eq!(r.class, Curvature::Flat);
        assert!(r.tangent_eigenvalues.iter().all(|v| v.abs() < 1e-14));

        let neg_id = matrix(&[vec![-1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, -1.0]]);
        assert_eq!(curvature_class(&neg_id, 1.0).unwrap().class, Curvature::StrictlyConvex);

        // x = (1, -1)/sqrt(2): x^T [[2,-2],[-2,-2]] x = (2 + 2 + 2 - 2) / 2 = 2
        let hd = standard_game("hawk_dove").unwrap().payoff_matrix().unwrap().clone();
        let r = curvature_class(&hd, 0.0).unwrap();
        assert_eq!(r.class, Curvature::StrictlyConvex);
        assert_eq!(r.tangent_eigenvalues.len(), 1);
        assert!((r.tangent_eigenvalues[0] - 2.0).abs() < 1e-14);

        let coord = standard_game("coordination").unwrap().payoff_matrix().unwrap().clone();
        assert_eq!(curvature_class(&coord, 0.0).unwrap().class, Curvature::StrictlyConcave);

        let saddle = matrix(&[vec![1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, 0.0]]);
        assert_eq!(curvature_class(&saddle, 0.0).unwrap().class, Curvature::Indefinite);
    }

    #[test]
    fn curvature_ignores_constant_shifts() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.random_range(2..6);
            let rows: Vec<Vec<f64>> =
                (0..n).map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
            let shift = rng.random_range(-5.0..5.0);
            let shifted: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v + shift).collect()).collect();
            let a = curvature_class(&matrix(&rows), 0.0).unwrap();
            let b = curvature_class(&matrix(&shifted), 0.0).unwrap();
            assert_eq!(a.class, b.class);
            for (x, y) in a.tangent_eigenvalues.iter().zip(&b.tangent_eigenvalues) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
