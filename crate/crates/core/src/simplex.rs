//! Points on the probability simplex `{p : p_i >= 0, sum p_i = 1}`.
//!
//! A [`SimplexPoint`] is an immutable, validated vector of relative
//! abundances. Constructors absorb small integrator roundoff (tiny negative
//! entries, sums a hair away from one) by clamping and renormalizing, and
//! reject anything larger.

use std::ops::Deref;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when validating and when testing convergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Allowed `|sum(raw) - 1|` on construction.
    pub sum_tol: f64,
    /// Entries in `[-pos_tol, 0)` are clamped to zero, below that is an error.
    pub pos_tol: f64,
    /// Velocity-norm threshold used for convergence.
    pub conv_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { sum_tol: 1e-9, pos_tol: 1e-12, conv_tol: 1e-8 }
    }
}

impl Tolerance {
    pub fn new(sum_tol: f64, pos_tol: f64, conv_tol: f64) -> Result<Self> {
        for (name, v) in [("sum_tol", sum_tol), ("pos_tol", pos_tol), ("conv_tol", conv_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Tolerance { sum_tol, pos_tol, conv_tol })
    }
}

/// A population state on the probability simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    /// Validates `raw` against `tol`, clamps roundoff negatives and
    /// renormalizes to unit sum.
    pub fn new(raw: &[f64], tol: &Tolerance) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::Dimension(format!(
                "a simplex point needs at least 2 strategies, got {}",
                raw.len()
            )));
        }
        if let Some((i, v)) = raw.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Constraint(format!("entry {i} is not finite ({v})")));
        }
        if let Some((i, v)) = raw.iter().enumerate().find(|(_, &v)| v < -tol.pos_tol) {
            return Err(Error::Constraint(format!("entry {i} = {v} is below -{}", tol.pos_tol)));
        }
        let sum: f64 = raw.iter().sum();
        if (sum - 1.0).abs() > tol.sum_tol {
            return Err(Error::Constraint(format!(
                "entries sum to {sum}, expected 1 within {}",
                tol.sum_tol
            )));
        }
        let clamped: Vec<f64> = raw.iter().map(|&v| v.max(0.0)).collect();
        renormalize(&clamped)
    }

    /// The barycenter `(1/n, ..., 1/n)`.
    pub fn centroid(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(format!("n = {n} < 2")));
        }
        renormalize(&vec![1.0; n])
    }

    /// The pure state concentrated on strategy `i`.
    pub fn vertex(n: usize, i: usize) -> Result<Self> {
        if n < 2 || i >= n {
            return Err(Error::Dimension(format!("vertex {i} of a {n}-simplex")));
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Ok(SimplexPoint(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Indices with `p_i > threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &v)| v > threshold).map(|(i, _)| i).collect()
    }
}

impl Deref for SimplexPoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for SimplexPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl<'de> Deserialize<'de> for SimplexPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<f64>::deserialize(d)?;
        SimplexPoint::new(&raw, &Tolerance::default()).map_err(serde::de::Error::custom)
    }
}

/// Sums this close to one count as normalized. Dividing by the sum always
/// lands inside this band, which is what makes [`renormalize`] idempotent.
fn normalized_slack(n: usize) -> f64 {
    4.0 * n as f64 * f64::EPSILON
}

/// Convenience wrapper for [`SimplexPoint::new`].
pub fn make_simplex_point(raw: &[f64], tol: &Tolerance) -> Result<SimplexPoint> {
    SimplexPoint::new(raw, tol)
}

/// Divides by the sum so the result lies on the simplex.
///
/// Inputs whose sum underflows are rescaled by their largest entry first, so
/// `(1e-300, 1e-300)` maps to `(0.5, 0.5)`. Only an exactly zero sum is
/// rejected. Points already summing to one within a few ulps are returned
/// unchanged, which makes the operation idempotent.
pub fn renormalize(p: &[f64]) -> Result<SimplexPoint> {
    if p.len() < 2 {
        return Err(Error::Dimension(format!(
            "a simplex point needs at least 2 strategies, got {}",
            p.len()
        )));
    }
    if let Some((i, v)) = p.iter().enumerate().find(|(_, &v)| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::Constraint(format!("entry {i} = {v} must be finite and nonnegative")));
    }
    if (p.iter().sum::<f64>() - 1.0).abs() <= normalized_slack(p.len()) {
        return Ok(SimplexPoint(p.to_vec()));
    }
    let max = p.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return Err(Error::Degenerate("cannot renormalize a zero vector".into()));
    }
    let scaled: Vec<f64> = p.iter().map(|&v| v / max).collect();
    let sum: f64 = scaled.iter().sum();
    let mut out: Vec<f64> = scaled.iter().map(|&v| v / sum).collect();

    // Push the last-ulp residual into the largest entry until the sum is exact.
    let imax = out.iter().enumerate().fold(0, |best, (i, &v)| if v > out[best] { i } else { best });
    // Adding the residual can round back to the same float or overshoot, so
    // fall back to single-ulp nudges.
    for attempt in 0..64 {
        let s: f64 = out.iter().sum();
        if s == 1.0 {
            break;
        }
        let x = out[imax];
        let moved = x + (1.0 - s);
        out[imax] = if attempt < 2 && moved != x {
            moved
        } else if s < 1.0 {
            x.next_up()
        } else {
            x.next_down()
        };
    }
    Ok(SimplexPoint(out))
}

/// Uniform sample from the simplex via normalized exponential spacings.
pub fn sample_uniform(n: usize, seed: u64) -> Result<SimplexPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_uniform_with(n, &mut rng)
}

/// As [`sample_uniform`] but drawing from a caller-supplied generator.
pub fn sample_uniform_with<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SimplexPoint> {
    if n < 2 {
        return Err(Error::Dimension(format!("n = {n} < 2")));
    }
    loop {
        let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        if draws.iter().any(|&v| v > 0.0) {
            return renormalize(&draws);
        }
    }
}

/// A uniform sample pulled toward the centroid: `(1 - w) u + w c`.
///
/// Keeps every coordinate at least `w / n`, which finite-difference and
/// `1/p_i`-weighted evaluations need.
pub fn sample_interior(n: usize, seed: u64, centroid_weight: f64) -> Result<SimplexPoint> {
    let u = sample_uniform(n, seed)?;
    let w = centroid_weight.clamp(0.0, 1.0);
    let mixed: Vec<f64> = u.iter().map(|&v| (1.0 - w) * v + w / n as f64).collect();
    renormalize(&mixed)
}

/// Derives an independent stream seed for item `k` of a seeded batch.
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn exact_point_is_kept() {
        let p = SimplexPoint::new(&[0.5, 0.5], &tol()).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn roundoff_is_absorbed() {
        let p = SimplexPoint::new(&[0.2, 0.3, 0.5 + 1e-13], &tol()).unwrap();
        assert_eq!(p.iter().sum::<f64>(), 1.0);
        assert!((p[0] - 0.2).abs() < 1e-12);
        assert!((p[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bad_sum_is_rejected() {
        assert!(matches!(SimplexPoint::new(&[0.7, 0.7], &tol()), Err(Error::Constraint(_))));
    }

    #[test]
    fn too_short_is_dimension_error() {
        assert!(matches!(SimplexPoint::new(&[1.0], &tol()), Err(Error::Dimension(_))));
        assert!(matches!(sample_uniform(1, 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn small_negative_clamped_large_negative_rejected() {
        let p = SimplexPoint::new(&[-5e-13, 1.0 + 5e-13], &tol()).unwrap();
        assert_eq!(p[0], 0.0);
        assert_eq!(p[1], 1.0);
        assert!(matches!(SimplexPoint::new(&[-0.1, 1.1], &tol()), Err(Error::Constraint(_))));
    }

    #[test]
    fn renormalize_examples() {
        assert_eq!(renormalize(&[2.0, 2.0]).unwrap().as_slice(), &[0.5, 0.5]);
        assert_eq!(renormalize(&[0.0, 3.0]).unwrap().as_slice(), &[0.0, 1.0]);
        assert_eq!(renormalize(&[1e-300, 1e-300]).unwrap().as_slice(), &[0.5, 0.5]);
        assert_eq!(renormalize(&[5e-324, 5e-324]).unwrap().as_slice(), &[0.5, 0.5]);
        assert!(matches!(renormalize(&[0.0, 0.0]), Err(Error::Degenerate(_))));
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_uniform(5, 42).unwrap(), sample_uniform(5, 42).unwrap());
        assert_ne!(sample_uniform(5, 42).unwrap(), sample_uniform(5, 43).unwrap());
        let p = sample_uniform(2, 7).unwrap();
        assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!((p[0] + p[1] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn uniform_mean_matches_centroid() {
        // E[p_i] = 1/n for the uniform (flat Dirichlet) distribution.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let samples = 100_000;
        let mut acc = [0.0; 3];
        for _ in 0..samples {
            let p = sample_uniform_with(3, &mut rng).unwrap();
            for (a, v) in acc.iter_mut().zip(p.iter()) {
                *a += v;
            }
        }
        for a in acc {
            assert!((a / samples as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn samples_pass_validation() {
        for seed in 0..100_000u64 {
            let p = sample_uniform(4, seed).unwrap();
            SimplexPoint::new(&p, &tol()).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn interior_samples_keep_margin() {
        for seed in 0..1000 {
            let p = sample_interior(5, seed, 0.1).unwrap();
            assert!(p.iter().all(|&v| v >= 0.1 / 5.0 - 1e-15));
        }
    }

    proptest! {
        #[test]
        fn renormalize_is_idempotent(raw in prop::collection::vec(0.0f64..1e6, 2..12)) {
            prop_assume!(raw.iter().any(|&v| v > 0.0));
            let once = renormalize(&raw).unwrap();
            let twice = renormalize(&once).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert!((once.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(once.iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn constructed_points_satisfy_invariants(raw in prop::collection::vec(0.0f64..1.0, 2..10)) {
            let s: f64 = raw.iter().sum();
            prop_assume!(s > 0.0);
            let scaled: Vec<f64> = raw.iter().map(|v| v / s).collect();
            let p = SimplexPoint::new(&scaled, &tol()).unwrap();
            prop_assert!(p.iter().all(|&v| v >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}
