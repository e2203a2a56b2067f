//! Fixed-step RK4 integration on the simplex.

use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicsSpec, VectorField};
use crate::energy::{evaluate_h, CostFunction};
use crate::error::{Error, Result};
use crate::game::{dot, FitnessModel};
use crate::simplex::renormalize;

/// Coordinates below this after an RK4 step trigger the positivity guard.
pub const NEGATIVITY_SLACK: f64 = 1e-12;
/// Step halvings the guard attempts before giving up.
pub const MAX_HALVINGS: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_max: f64,
    pub record_every: usize,
    /// Infinity-norm of the velocity below which a step counts as converged.
    pub conv_tol: f64,
    /// Consecutive converged steps required to stop.
    pub conv_window: usize,
    /// Halve steps that leave the simplex, then clamp and renormalize.
    pub positivity_guard: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1e-3,
            t_max: 100.0,
            record_every: 10,
            conv_tol: 1e-8,
            conv_window: 10,
            positivity_guard: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Parameter(format!("t_max must be > 0, got {}", self.t_max)));
        }
        if self.dt > self.t_max {
            return Err(Error::Parameter(format!("dt = {} exceeds t_max = {}", self.dt, self.t_max)));
        }
        if self.record_every == 0 {
            return Err(Error::Parameter("record_every must be >= 1".into()));
        }
        if !(self.conv_tol > 0.0) {
            return Err(Error::Parameter(format!("conv_tol must be > 0, got {}", self.conv_tol)));
        }
        if self.conv_window == 0 {
            return Err(Error::Parameter("conv_window must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of fixed steps covering `[0, t_max]`.
    pub fn n_steps(&self) -> usize {
        ((self.t_max / self.dt).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: Vec<f64>,
    pub mean_fitness: f64,
    /// Cost function value where one is defined for the family.
    pub energy: Option<f64>,
    /// `|sum p - 1|`.
    pub sum_drift: f64,
    pub min_coordinate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub converged: bool,
    pub final_state: Vec<f64>,
    pub final_time: f64,
    /// `||dp/dt||_inf` at the final state.
    pub final_residual: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }
}

/// Quantities recorded alongside each state.
#[derive(Debug, Clone, Default)]
pub struct Observables {
    pub model: Option<FitnessModel>,
    pub energy: Option<CostFunction>,
}

impl Observables {
    /// Mean fitness of the family's payoff model, and `-p^T A p - lambda`
    /// as energy for linear replicator dynamics.
    pub fn for_spec(spec: &DynamicsSpec) -> Self {
        let model = spec.model();
        let energy = match (spec, &model) {
            (DynamicsSpec::Replicator { lambda, .. }, FitnessModel::Linear(a)) => {
                Some(CostFunction::QuadraticPayoff { a: a.clone(), lambda: *lambda })
            }
            _ => None,
        };
        Observables { model: Some(model), energy }
    }

    pub(crate) fn sample(&self, t: f64, p: &[f64]) -> Sample {
        let mean_fitness = self.model.as_ref().map(|m| dot(p, &m.eval(p))).unwrap_or(f64::NAN);
        let energy = self.energy.as_ref().and_then(|h| evaluate_h(h, p).ok());
        Sample {
            t,
            state: p.to_vec(),
            mean_fitness,
            energy,
            sum_drift: (p.iter().sum::<f64>() - 1.0).abs(),
            min_coordinate: p.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn axpy(p: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    p.iter().zip(k).map(|(pi, ki)| pi + h * ki).collect()
}

fn rk4_step<F: VectorField + ?Sized>(field: &F, p: &[f64], k1: &[f64], h: f64) -> Result<Vec<f64>> {
    let k2 = field.velocity(&axpy(p, 0.5 * h, k1))?;
    let k3 = field.velocity(&axpy(p, 0.5 * h, &k2))?;
    let k4 = field.velocity(&axpy(p, h, &k3))?;
    Ok((0..p.len()).map(|i| p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// Advances `p` by `dt`, halving sub-steps that would leave the simplex.
fn advance<F: VectorField + ?Sized>(
    field: &F,
    p: &[f64],
    k1: &[f64],
    dt: f64,
    guard: bool,
    t: f64,
) -> Result<Vec<f64>> {
    let candidate = rk4_step(field, p, k1, dt)?;
    if !guard {
        return Ok(candidate);
    }
    let ok = |q: &[f64]| q.iter().all(|&x| x >= -NEGATIVITY_SLACK);
    let mut next = if ok(&candidate) {
        candidate
    } else {
        let mut cur = p.to_vec();
        let mut k = k1.to_vec();
        let mut remaining = dt;
        while remaining > 0.0 {
            let mut h = remaining;
            let mut halvings = 0;
            let stepped = loop {
                let q = rk4_step(field, &cur, &k, h)?;
                if ok(&q) {
                    break q;
                }
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    return Err(Error::StepFailure { t, halvings: MAX_HALVINGS });
                }
                h *= 0.5;
            };
            cur = stepped;
            remaining -= h;
            if remaining <= dt * 1e-12 {
                break;
            }
            k = field.velocity(&cur)?;
        }
        cur
    };
    for x in next.iter_mut() {
        *x = x.max(0.0);
    }
    Ok(renormalize(&next)?.into_vec())
}

/// Integrates any field from `p0`; see [`integrate`].
pub fn integrate_field<F: VectorField + ?Sized>(
    field: &F,
    observables: &Observables,
    p0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if p0.len() != field.dim() {
        return Err(Error::Dimension(format!(
            "initial state has {} entries but the dynamics has {} strategies",
            p0.len(),
            field.dim()
        )));
    }
    let n_steps = cfg.n_steps();
    let mut p = p0.to_vec();
    let mut v = field.velocity(&p)?;
    let mut samples = vec![observables.sample(0.0, &p)];
    let mut streak = 0usize;
    let mut steps = 0usize;
    for k in 1..=n_steps {
        let t = k as f64 * cfg.dt;
        p = advance(field, &p, &v, cfg.dt, cfg.positivity_guard, t)?;
        v = field.velocity(&p)?;
        steps = k;
        if inf_norm(&v) < cfg.conv_tol {
            streak += 1;
        } else {
            streak = 0;
        }
        let on_record = k % cfg.record_every == 0;
        if on_record {
            samples.push(observables.sample(t, &p));
        }
        // stop only on a record boundary so the sample grid stays regular
        if on_record && streak >= cfg.conv_window {
            break;
        }
    }
    Ok(Trajectory {
        samples,
        converged: streak >= cfg.conv_window,
        final_time: steps as f64 * cfg.dt,
        final_residual: inf_norm(&v),
        final_state: p,
        steps,
    })
}

/// Integrates the named field of `spec` with classical RK4.
pub fn integrate(spec: &DynamicsSpec, p0: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_field(spec, &Observables::for_spec(spec), p0, cfg)
}
