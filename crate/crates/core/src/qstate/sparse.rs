//! Sparse representations for the regime above the dense guard: a general
//! CSR matrix and a monomial (generalized-permutation) form for products of
//! qudit Paulis, which is what stabilizer and logical-loop operators are.

use ndarray::Array2;

use super::{C64, CMat, CVec};
use crate::error::{Error, Result};

/// Compressed sparse row complex matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<C64>,
}

impl CsrMatrix {
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &mut Vec<(usize, usize, C64)>,
    ) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut rows = Vec::with_capacity(triplets.len());
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut i = 0;
        while i < triplets.len() {
            let (r, c, mut v) = triplets[i];
            let mut j = i + 1;
            while j < triplets.len() && triplets[j].0 == r && triplets[j].1 == c {
                v += triplets[j].2;
                j += 1;
            }
            rows.push(r);
            indices.push(c);
            data.push(v);
            i = j;
        }
        let mut indptr = vec![0usize; nrows + 1];
        for &r in &rows {
            indptr[r + 1] += 1;
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            data,
        }
    }

    pub fn from_dense(a: &CMat, drop_tol: f64) -> Self {
        let mut trips = vec![];
        for ((r, c), &v) in a.indexed_iter() {
            if v.norm() > drop_tol {
                trips.push((r, c, v));
            }
        }
        Self::from_triplets(a.nrows(), a.ncols(), &mut trips)
    }

    pub fn to_dense(&self) -> CMat {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                out[(r, self.indices[k])] += self.data[k];
            }
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn matvec(&self, x: &CVec) -> Result<CVec> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                got: x.len(),
            });
        }
        let mut out = ndarray::Array1::zeros(self.nrows);
        for r in 0..self.nrows {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            out[r] = acc;
        }
        Ok(out)
    }
}

/// A generalized permutation operator `|b> -> phase[b] |perm[b]>`.
/// Products of qudit clock/shift operators on any supports have this form,
/// so stabilizers and logical loops stay O(D) to apply at any size.
#[derive(Debug, Clone)]
pub struct MonomialOp {
    pub perm: Vec<usize>,
    pub phase: Vec<C64>,
}

impl MonomialOp {
    pub fn identity(dim: usize) -> Self {
        MonomialOp {
            perm: (0..dim).collect(),
            phase: vec![C64::new(1.0, 0.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// `self . other` (apply `other` first).
    pub fn compose(&self, other: &MonomialOp) -> MonomialOp {
        assert_eq!(self.dim(), other.dim());
        let mut perm = vec![0usize; self.dim()];
        let mut phase = vec![C64::new(0.0, 0.0); self.dim()];
        for b in 0..self.dim() {
            let mid = other.perm[b];
            perm[b] = self.perm[mid];
            phase[b] = other.phase[b] * self.phase[mid];
        }
        MonomialOp { perm, phase }
    }

    pub fn dagger(&self) -> MonomialOp {
        let mut perm = vec![0usize; self.dim()];
        let mut phase = vec![C64::new(0.0, 0.0); self.dim()];
        for b in 0..self.dim() {
            perm[self.perm[b]] = b;
            phase[self.perm[b]] = self.phase[b].conj();
        }
        MonomialOp { perm, phase }
    }

    pub fn pow(&self, k: usize) -> MonomialOp {
        let mut acc = MonomialOp::identity(self.dim());
        for _ in 0..k {
            acc = self.compose(&acc);
        }
        acc
    }

    pub fn apply_ket(&self, psi: &CVec) -> CVec {
        let mut out = ndarray::Array1::zeros(psi.len());
        for b in 0..self.dim() {
            out[self.perm[b]] += self.phase[b] * psi[b];
        }
        out
    }

    /// Expectation `<psi| M |psi>` without materializing `M |psi>`.
    pub fn expectation(&self, psi: &CVec) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for b in 0..self.dim() {
            acc += psi[self.perm[b]].conj() * self.phase[b] * psi[b];
        }
        acc
    }

    /// Single-site generalized Pauli `X^a Z^b` embedded on `site` of a
    /// uniform-dimension register layout (site 0 slowest).
    pub fn site_pauli(dims: &[usize], site: usize, xpow: usize, zpow: usize) -> Self {
        let total: usize = dims.iter().product();
        let stride: usize = dims[site + 1..].iter().product();
        let d = dims[site];
        let w = 2.0 * std::f64::consts::PI / d as f64;
        let mut perm = vec![0usize; total];
        let mut phase = vec![C64::new(1.0, 0.0); total];
        for b in 0..total {
            let digit = (b / stride) % d;
            // Z first, then X: X^a Z^b |j> = w^(b j) |j + a>.
            let newdigit = (digit + xpow) % d;
            perm[b] = b - digit * stride + newdigit * stride;
            phase[b] = C64::from_polar(1.0, w * (zpow * digit) as f64);
        }
        MonomialOp { perm, phase }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut trips: Vec<(usize, usize, C64)> = (0..self.dim())
            .map(|b| (self.perm[b], b, self.phase[b]))
            .collect();
        CsrMatrix::from_triplets(self.dim(), self.dim(), &mut trips)
    }

    pub fn to_dense(&self) -> CMat {
        self.to_csr().to_dense()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::dense::operator_norm;
    use crate::test_util::{pauli_x, pauli_z, random_matrix, rng};

    #[test]
    fn csr_dense_roundtrip() {
        let mut r = rng(17);
        let a = random_matrix(7, &mut r);
        let csr = CsrMatrix::from_dense(&a, 0.0);
        assert!(operator_norm(&(csr.to_dense() - &a)) < 1e-14);
        // Sparsified version of a nearly sparse matrix.
        let mut b = a.clone();
        b.mapv_inplace(|z| if z.norm() < 0.45 { C64::new(0.0, 0.0) } else { z });
        let csr_b = CsrMatrix::from_dense(&b, 0.0);
        assert!(csr_b.nnz() < 49);
        assert!(operator_norm(&(csr_b.to_dense() - &b)) < 1e-14);
    }

    #[test]
    fn csr_matvec_matches_dense() {
        let mut r = rng(18);
        let a = random_matrix(9, &mut r);
        let x = crate::test_util::random_ket(9, &mut r);
        let csr = CsrMatrix::from_dense(&a, 0.0);
        let got = csr.matvec(&x).unwrap();
        let want = a.dot(&x);
        let err: f64 = got.iter().zip(want.iter()).map(|(p, q)| (p - q).norm()).sum();
        assert!(err < 1e-12);
    }

    #[test]
    fn monomial_matches_dense_pauli_algebra() {
        let dims = vec![3, 3];
        let x1 = MonomialOp::site_pauli(&dims, 1, 1, 0);
        let z0 = MonomialOp::site_pauli(&dims, 0, 0, 1);
        let dense_x1 = ndarray::linalg::kron(&crate::qstate::identity(3), &pauli_x(3));
        let dense_z0 = ndarray::linalg::kron(&pauli_z(3), &crate::qstate::identity(3));
        assert!(operator_norm(&(x1.to_dense() - &dense_x1)) < 1e-13);
        assert!(operator_norm(&(z0.to_dense() - &dense_z0)) < 1e-13);
        let prod = x1.compose(&z0);
        assert!(operator_norm(&(prod.to_dense() - dense_x1.dot(&dense_z0))) < 1e-13);
        let dag = prod.dagger();
        let dd = crate::qstate::dagger(&prod.to_dense());
        assert!(operator_norm(&(dag.to_dense() - dd)) < 1e-13);
    }

    #[test]
    fn same_site_clock_shift_commutation() {
        // Z X = w X Z on one qudit.
        let dims = vec![4];
        let x = MonomialOp::site_pauli(&dims, 0, 1, 0);
        let z = MonomialOp::site_pauli(&dims, 0, 0, 1);
        let zx = z.compose(&x).to_dense();
        let xz = x.compose(&z).to_dense();
        let w = C64::from_polar(1.0, std::f64::consts::PI / 2.0);
        assert!(operator_norm(&(zx - xz.mapv(|v| w * v))) < 1e-13);
    }
}
