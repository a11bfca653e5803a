//! Hermitian eigen-decomposition with a fixed convention: `h V = V diag(w)`
//! with eigenvectors as columns and eigenvalues ascending.
//!
//! The LAPACK binding hands back eigenvectors of the transposed (row-major)
//! array for complex input, so the columns come out conjugated; this wrapper
//! repairs that once and every caller relies on the repaired convention,
//! which the tests pin down by residual.

use ndarray::Array1;
use ndarray_linalg::{Eigh, UPLO};

use super::{dagger, C64, CMat};
use crate::error::Result;

/// Eigen-decomposition of a Hermitian matrix: `(w, v)` with `h v_k = w_k v_k`
/// for columns `v_k`, eigenvalues ascending.
pub fn eigh(h: &CMat) -> Result<(Array1<f64>, CMat)> {
    crate::blas::init();
    let (w, v) = h.eigh(UPLO::Lower)?;
    Ok((w, v.mapv(|z| z.conj())))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigval(h: &CMat) -> Result<f64> {
    crate::blas::init();
    let (w, _) = h.eigh(UPLO::Lower)?;
    Ok(w.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn eigvalsh(h: &CMat) -> Result<Array1<f64>> {
    crate::blas::init();
    let (w, _) = h.eigh(UPLO::Lower)?;
    Ok(w)
}

/// Apply a scalar function through the spectral decomposition:
/// `f(h) = V diag(f(w)) V^+`.
pub fn func_hermitian(h: &CMat, f: impl Fn(f64) -> C64) -> Result<CMat> {
    let (w, v) = eigh(h)?;
    let d = CMat::from_diag(&w.mapv(f));
    Ok(v.dot(&d).dot(&dagger(&v)))
}

/// Unitary `exp(i theta h)` for Hermitian `h`.
pub fn expm_i_hermitian(h: &CMat, theta: f64) -> Result<CMat> {
    func_hermitian(h, |x| C64::from_polar(1.0, theta * x))
}

/// Orthogonal projector onto the span of eigenvectors with the `k` lowest
/// eigenvalues.
pub fn low_eigenspace_projector(h: &CMat, k: usize) -> Result<CMat> {
    let (_, v) = eigh(h)?;
    let d = h.nrows();
    let mut p = CMat::zeros((d, d));
    for col in 0..k {
        let vk = v.column(col);
        for r in 0..d {
            for c in 0..d {
                p[(r, c)] += vk[r] * vk[c].conj();
            }
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::operator_norm;
    use crate::test_util::{random_hermitian, rng};

    #[test]
    fn eigh_reconstructs_and_diagonalizes() {
        let mut r = rng(61);
        for n in [2usize, 5, 9] {
            let h = random_hermitian(n, &mut r);
            let (w, v) = eigh(&h).unwrap();
            // Residual per eigenpair.
            for k in 0..n {
                let col = v.column(k).to_owned();
                let hv = h.dot(&col);
                let err: f64 = hv
                    .iter()
                    .zip(col.iter())
                    .map(|(a, b)| (a - b * C64::new(w[k], 0.0)).norm())
                    .sum();
                assert!(err < 1e-11, "eigenpair {k} residual {err}");
            }
            // Unitarity and reconstruction.
            let vhv = dagger(&v).dot(&v);
            assert!(operator_norm(&(vhv - crate::qstate::identity(n))) < 1e-11);
            let recon = v
                .dot(&CMat::from_diag(&w.mapv(|x| C64::new(x, 0.0))))
                .dot(&dagger(&v));
            assert!(operator_norm(&(recon - h)) < 1e-11);
            // Ascending order.
            for k in 1..n {
                assert!(w[k] >= w[k - 1]);
            }
        }
    }

    #[test]
    fn unitary_exponential_is_unitary() {
        let mut r = rng(62);
        let h = random_hermitian(6, &mut r);
        let u = expm_i_hermitian(&h, 0.37).unwrap();
        let udu = dagger(&u).dot(&u);
        assert!(operator_norm(&(udu - crate::qstate::identity(6))) < 1e-12);
    }

    #[test]
    fn projector_is_idempotent() {
        let mut r = rng(63);
        let h = random_hermitian(6, &mut r);
        let p = low_eigenspace_projector(&h, 2).unwrap();
        assert!(operator_norm(&(p.dot(&p) - &p)) < 1e-12);
        assert!((crate::qstate::trace(&p).re - 2.0).abs() < 1e-12);
    }
}
