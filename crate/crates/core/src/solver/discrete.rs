//! The discrete growth-transform (Baum-Eagon) map.

use crate::error::{Error, Result};
use crate::game::{dot, FitnessModel};
use crate::simplex::{renormalize, SimplexPoint};

use super::integrate::{inf_norm, Observables, Trajectory};
use crate::energy::CostFunction;

/// One application of `p_i <- p_i (f_i(p) + lambda) / sum_j p_j (f_j(p) + lambda)`.
pub fn discrete_growth_step(model: &FitnessModel, lambda: f64, p: &SimplexPoint) -> Result<SimplexPoint> {
    crate::error::check_dim("state", p.dim(), model.dim())?;
    renormalize(&raw_step(model, lambda, p)?)
}

pub(crate) fn raw_step(model: &FitnessModel, lambda: f64, p: &[f64]) -> Result<Vec<f64>> {
    let f = model.eval(p);
    if let Some((i, fi)) = f.iter().enumerate().find(|(_, &fi)| !(fi + lambda > 0.0)) {
        return Err(Error::Positivity(format!(
            "f_{i} + lambda = {} must be > 0 for the growth transform",
            fi + lambda
        )));
    }
    let w: Vec<f64> = p.iter().zip(&f).map(|(pi, fi)| pi * (fi + lambda)).collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Positivity(format!("normalizer {total} must be > 0")));
    }
    Ok(w.into_iter().map(|wi| wi / total).collect())
}

/// Iterates the growth map until `||p' - p||_inf < conv_tol` or `max_iters`.
///
/// Sample `k` of the returned trajectory is iterate `k` (with `t = k`). For
/// linear models its `energy` is `-(p^T A p + lambda)`, so the Baum-Eagon
/// objective `p^T A p + lambda` is `-energy` and `mean_fitness + lambda`.
pub fn discrete_iterate(
    model: &FitnessModel,
    lambda: f64,
    p0: &SimplexPoint,
    max_iters: usize,
    conv_tol: f64,
) -> Result<Trajectory> {
    crate::error::check_dim("state", p0.dim(), model.dim())?;
    if !(conv_tol > 0.0) {
        return Err(Error::Parameter(format!("conv_tol must be > 0, got {conv_tol}")));
    }
    let observables = Observables {
        model: Some(model.clone()),
        energy: model
            .payoff_matrix()
            .filter(|_| matches!(model, FitnessModel::Linear(_)))
            .map(|a| CostFunction::QuadraticPayoff { a: a.clone(), lambda }),
    };
    let mut p = p0.to_vec();
    let mut samples = vec![observables.sample(0.0, &p)];
    let mut change = f64::INFINITY;
    let mut steps = 0;
    while steps < max_iters {
        let next = renormalize(&raw_step(model, lambda, &p)?)?.into_vec();
        change = next.iter().zip(&p).fold(0.0, |m, (a, b)| m.max((a - b).abs()));
        p = next;
        steps += 1;
        samples.push(observables.sample(steps as f64, &p));
        if change < conv_tol {
            break;
        }
    }
    Ok(Trajectory {
        samples,
        converged: change < conv_tol,
        final_time: steps as f64,
        final_residual: change,
        final_state: p,
        steps,
    })
}

/// Runs the map without recording, returning `(state, value p^T f(p))`.
pub(crate) fn iterate_to_fixed_point(
    model: &FitnessModel,
    lambda: f64,
    mut p: Vec<f64>,
    max_iters: usize,
    conv_tol: f64,
) -> Result<(Vec<f64>, f64)> {
    for _ in 0..max_iters {
        let next = raw_step(model, lambda, &p)?;
        let change = inf_norm(&next.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>());
        p = next;
        if change < conv_tol {
            break;
        }
    }
    let value = dot(&p, &model.eval(&p));
    Ok((p, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PayoffMatrix;
    use crate::simplex::{sample_uniform, Tolerance};

    fn linear(rows: &[Vec<f64>]) -> FitnessModel {
        FitnessModel::linear(PayoffMatrix::from_rows(rows).unwrap()).unwrap()
    }

    fn pt(v: &[f64]) -> SimplexPoint {
        SimplexPoint::new(v, &Tolerance::default()).unwrap()
    }

    #[test]
    fn vertices_are_fixed() {
        let m = linear(&[vec![1.0, 2.0, 0.5], vec![0.3, 1.0, 2.0], vec![1.0, 1.0, 1.0]]);
        for i in 0..3 {
            let v = SimplexPoint::vertex(3, i).unwrap();
            assert_eq!(discrete_growth_step(&m, 0.0, &v).unwrap(), v);
        }
    }

    #[test]
    fn examples() {
        let m = linear(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(discrete_growth_step(&m, 0.0, &pt(&[0.5, 0.5])).unwrap().as_slice(), &[0.5, 0.5]);
        let m = linear(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
        let q = discrete_growth_step(&m, 0.0, &pt(&[0.5, 0.5])).unwrap();
        // p_1 (f_1) / fbar = 0.5 * 1 / 0.75
        assert!((q[0] - 0.5 / 0.75).abs() < 1e-15);
        assert!((q[1] - 0.25 / 0.75).abs() < 1e-15);
    }

    #[test]
    fn all_ones_is_fixed_immediately() {
        let m = linear(&[vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]]);
        let p0 = pt(&[0.2, 0.3, 0.5]);
        let tr = discrete_iterate(&m, 0.0, &p0, 100, 1e-12).unwrap();
        assert!(tr.converged);
        assert_eq!(tr.steps, 1);
        assert!(tr.samples.iter().all(|s| (s.mean_fitness - 1.0).abs() < 1e-15));
    }

    #[test]
    fn dominant_diagonal_goes_to_vertex() {
        let m = linear(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
        let tr = discrete_iterate(&m, 0.0, &pt(&[0.5, 0.5]), 10_000, 1e-14).unwrap();
        assert!(tr.converged);
        assert!((tr.final_state[0] - 1.0).abs() < 1e-12);
        assert!((tr.samples.last().unwrap().mean_fitness - 2.0).abs() < 1e-12);
        // p_1 strictly increases while inside (0.5, 1)
        for w in tr.samples.windows(2) {
            assert!(w[1].state[0] >= w[0].state[0]);
        }
    }

    #[test]
    fn objective_is_monotone() {
        let a = PayoffMatrix::from_rows(&[vec![0.2, 0.9, 0.4], vec![0.9, 0.1, 0.7], vec![0.4, 0.7, 0.0]])
            .unwrap();
        let m = FitnessModel::linear(a).unwrap();
        let tr = discrete_iterate(&m, 1.0, &sample_uniform(3, 5).unwrap(), 500, 1e-15).unwrap();
        for w in tr.samples.windows(2) {
            assert!(-w[1].energy.unwrap() >= -w[0].energy.unwrap() - 1e-12);
        }
    }

    #[test]
    fn nonpositive_shifted_fitness_is_rejected() {
        let m = linear(&[vec![-1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(discrete_growth_step(&m, 0.5, &pt(&[0.9, 0.1])), Err(Error::Positivity(_))));
    }
}
