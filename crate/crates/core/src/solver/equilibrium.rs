//! Rest-point detection and classification.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsSpec, VectorField};
use crate::error::Result;
use crate::game::{dot, PayoffMatrix};
use crate::linalg::project_to_tangent;
use crate::par::{map_slice, Execution};
use crate::simplex::{sample_uniform_with, SimplexPoint};

use super::integrate::{inf_norm, integrate, IntegratorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub nash_tol: f64,
    pub support_tol: f64,
    pub ess_samples: usize,
    pub ess_radius: f64,
    /// Required strict margin `p*^T A q - q^T A q` for neutral invaders.
    pub ess_tol: f64,
    pub jacobian_step: f64,
    pub stability_tol: f64,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            nash_tol: 1e-6,
            support_tol: 1e-6,
            ess_samples: 200,
            ess_radius: 0.01,
            ess_tol: 1e-12,
            jacobian_step: 1e-6,
            stability_tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashVerdict {
    pub is_nash: bool,
    /// `e_i = f_i(p*) - fbar`.
    pub excess: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssVerdict {
    pub is_ess: bool,
    pub samples: usize,
    pub radius: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityClass {
    AsymptoticallyStable,
    NeutrallyStable,
    Unstable,
    Saddle,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub point: Vec<f64>,
    pub residual: f64,
    pub support: Vec<usize>,
    pub converged: bool,
    pub nash: Option<NashVerdict>,
    pub ess: Option<EssVerdict>,
    pub spectrum: Vec<Eigenvalue>,
    pub stability: StabilityClass,
    pub flags: Vec<String>,
}

/// Central-difference Jacobian of `field` at `p` in the ambient coordinates.
pub fn jacobian<F: VectorField + ?Sized>(field: &F, p: &[f64], step: f64) -> Result<DMatrix<f64>> {
    let n = p.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut x = p.to_vec();
    for j in 0..n {
        x[j] = p[j] + step;
        let plus = field.velocity(&x)?;
        x[j] = p[j] - step;
        let minus = field.velocity(&x)?;
        x[j] = p[j];
        for i in 0..n {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// Eigenvalues of the Jacobian restricted to the tangent space, sorted by
/// real part then imaginary part.
pub fn tangent_spectrum<F: VectorField + ?Sized>(field: &F, p: &[f64], step: f64) -> Result<Vec<Eigenvalue>> {
    let projected = project_to_tangent(&jacobian(field, p, step)?);
    let mut eig: Vec<Eigenvalue> =
        projected.complex_eigenvalues().iter().map(|z| Eigenvalue { re: z.re, im: z.im }).collect();
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(eig)
}

pub fn stability_class(spectrum: &[Eigenvalue], tol: f64) -> StabilityClass {
    if spectrum.is_empty() {
        return StabilityClass::Inconclusive;
    }
    let max_re = spectrum.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re));
    let min_re = spectrum.iter().fold(f64::INFINITY, |m, z| m.min(z.re));
    if max_re < -tol {
        StabilityClass::AsymptoticallyStable
    } else if max_re > tol && min_re < -tol {
        StabilityClass::Saddle
    } else if max_re > tol {
        StabilityClass::Unstable
    } else if min_re >= -tol && spectrum.iter().any(|z| z.im.abs() > tol) {
        StabilityClass::NeutrallyStable
    } else {
        StabilityClass::Inconclusive
    }
}

/// Nash test from the payoff excesses at `p`.
pub fn nash_verdict(f: &[f64], p: &[f64], cfg: &AnalysisConfig) -> NashVerdict {
    let fbar = dot(p, f);
    let excess: Vec<f64> = f.iter().map(|fi| fi - fbar).collect();
    let is_nash = excess
        .iter()
        .zip(p)
        .all(|(&e, &pi)| e <= cfg.nash_tol && (pi <= cfg.support_tol || e.abs() <= cfg.nash_tol));
    NashVerdict { is_nash, excess }
}

/// Sampled local-invasion test for a linear game.
///
/// Mutant mixtures `q` are drawn at distance up to `ess_radius` from `p`.
/// `q` that do strictly worse against `p` cannot invade. Neutral ones must
/// lose the rematch: `p^T A q - q^T A q > ess_tol`. A non-Nash point is never
/// an ESS.
pub fn ess_verdict(a: &PayoffMatrix, p: &[f64], is_nash: bool, cfg: &AnalysisConfig) -> Result<EssVerdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pap = a.bilinear(p, p);
    let mut violations = 0;
    for _ in 0..cfg.ess_samples {
        let u = sample_uniform_with(p.len(), &mut rng)?;
        let dist = u.iter().zip(p).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        let r = cfg.ess_radius * rng.random_range(0.05..=1.0);
        let s = if dist > 0.0 { (r / dist).min(1.0) } else { 1.0 };
        let q: Vec<f64> = u.iter().zip(p).map(|(ui, pi)| (1.0 - s) * pi + s * ui).collect();
        let first = pap - a.bilinear(&q, p);
        let ok = if first > cfg.nash_tol {
            true
        } else if first >= -cfg.nash_tol {
            a.bilinear(p, &q) - a.bilinear(&q, &q) > cfg.ess_tol
        } else {
            false
        };
        if !ok {
            violations += 1;
        }
    }
    Ok(EssVerdict {
        is_ess: is_nash && violations == 0,
        samples: cfg.ess_samples,
        radius: cfg.ess_radius,
        violations,
    })
}

/// Classifies `p` as a candidate rest point of `spec` without integrating.
pub fn classify_point(spec: &DynamicsSpec, p: &[f64], cfg: &AnalysisConfig) -> Result<EquilibriumReport> {
    crate::error::check_dim("point", p.len(), spec.dim())?;
    let residual = inf_norm(&spec.velocity(p)?);
    let support = (0..p.len()).filter(|&i| p[i] > cfg.support_tol).collect();
    let mut flags = Vec::new();
    let nash = match spec {
        DynamicsSpec::Bnn { epsilon, .. } if *epsilon > 0.0 => {
            flags.push("margin-displaced".to_string());
            None
        }
        _ => Some(nash_verdict(&spec.model().eval(p), p, cfg)),
    };
    let ess = match (spec.linear_payoff(), &nash) {
        (Some(a), Some(v)) => Some(ess_verdict(&a, p, v.is_nash, cfg)?),
        _ => None,
    };
    let spectrum = tangent_spectrum(spec, p, cfg.jacobian_step)?;
    let stability = stability_class(&spectrum, cfg.stability_tol);
    Ok(EquilibriumReport {
        point: p.to_vec(),
        residual,
        support,
        converged: true,
        nash,
        ess,
        spectrum,
        stability,
        flags,
    })
}

/// Integrates from `p0` and classifies the end state.
///
/// A run that does not converge still yields a report, with `converged`
/// false and a `not-converged` flag.
pub fn find_equilibrium(
    spec: &DynamicsSpec,
    p0: &[f64],
    cfg: &IntegratorConfig,
    analysis: &AnalysisConfig,
) -> Result<EquilibriumReport> {
    let traj = integrate(spec, p0, cfg)?;
    let mut report = classify_point(spec, &traj.final_state, analysis)?;
    report.converged = traj.converged;
    if !traj.converged {
        report.flags.push("not-converged".to_string());
    }
    Ok(report)
}

/// [`find_equilibrium`] from many starts; reports come back in input order.
pub fn find_equilibria(
    spec: &DynamicsSpec,
    starts: &[SimplexPoint],
    cfg: &IntegratorConfig,
    analysis: &AnalysisConfig,
    exec: Execution,
) -> Vec<Result<EquilibriumReport>> {
    map_slice(exec, starts, |p| find_equilibrium(spec, p, cfg, analysis))
}

/// The interior rest point of a linear game, where all payoffs are equal:
/// solves `A p = v 1`, `sum p = 1`. `None` when singular or outside the
/// open simplex.
pub fn interior_rest_point(a: &PayoffMatrix) -> Option<Vec<f64>> {
    let n = a.dim();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = a.get(i, j);
        }
        m[(i, n)] = -1.0;
        m[(n, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;
    let sol = m.lu().solve(&rhs)?;
    let p: Vec<f64> = sol.iter().take(n).cloned().collect();
    if p.iter().all(|&x| x > 0.0 && x.is_finite()) {
        Some(p)
    } else {
        None
    }
}
