//! Tangent-space helpers for the simplex.

use nalgebra::DMatrix;

/// Orthonormal basis of `{x : sum x_i = 0}` as the columns of an
/// `n x (n-1)` matrix (Helmert contrasts).
pub fn tangent_basis(n: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(n, n.saturating_sub(1));
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            b[(i, k - 1)] = 1.0 / norm;
        }
        b[(k, k - 1)] = -(k as f64) / norm;
    }
    b
}

/// `B^T M B` for the tangent basis `B`.
pub fn project_to_tangent(m: &DMatrix<f64>) -> DMatrix<f64> {
    let b = tangent_basis(m.nrows());
    b.transpose() * m * b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal_and_tangent() {
        for n in 2..9 {
            let b = tangent_basis(n);
            let gram = b.transpose() * &b;
            assert!((gram - DMatrix::identity(n - 1, n - 1)).amax() < 1e-14);
            for col in b.column_iter() {
                assert!(col.sum().abs() < 1e-14);
            }
        }
    }
}
