use ndarray::{Array1, Array2};

use super::dense::SupportMap;
use super::geometry::LatticeGeometry;
use super::{C64, CMat, CVec};

pub fn inner(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &CVec) -> f64 {
    inner(a, a).re.sqrt()
}

pub fn normalize(a: &CVec) -> CVec {
    let n = norm(a);
    a.mapv(|z| z / n)
}

pub fn outer(a: &CVec, b: &CVec) -> CMat {
    Array2::from_shape_fn((a.len(), b.len()), |(r, c)| a[r] * b[c].conj())
}

pub fn tensor_kets(factors: &[&CVec]) -> CVec {
    assert!(!factors.is_empty());
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        let mut next = Array1::zeros(acc.len() * f.len());
        for (i, &x) in acc.iter().enumerate() {
            for (j, &y) in f.iter().enumerate() {
                next[i * f.len() + j] = x * y;
            }
        }
        acc = next;
    }
    acc
}

pub fn basis_ket(dim: usize, index: usize) -> CVec {
    let mut v = Array1::zeros(dim);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Computational basis ket from per-site digits (site 0 slowest).
pub fn ket_from_digits(geom: &LatticeGeometry, digits: &[usize]) -> CVec {
    assert_eq!(digits.len(), geom.n_sites());
    let strides = geom.strides();
    let idx: usize = digits
        .iter()
        .zip(strides.iter())
        .map(|(&dg, &st)| dg * st)
        .sum();
    basis_ket(geom.total_dim(), idx)
}

/// `<psi| rho |psi>` for a normalized ket.
pub fn fidelity_pure(psi: &CVec, rho: &CMat) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for (r, x) in psi.iter().enumerate() {
        for (c, y) in psi.iter().enumerate() {
            acc += x.conj() * rho[(r, c)] * *y;
        }
    }
    acc.re
}

/// Apply a local operator to a ket without embedding.
pub fn apply_local_to_ket(a: &CMat, map: &SupportMap, psi: &CVec) -> CVec {
    let mut out = Array1::zeros(psi.len());
    for &k in &map.comp_offsets {
        for (s1, &o1) in map.sup_offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (s2, &o2) in map.sup_offsets.iter().enumerate() {
                acc += a[(s1, s2)] * psi[k + o2];
            }
            out[k + o1] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{random_ket, rng};
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalized_kets_have_unit_inner() {
        let mut r = rng(5);
        for _ in 0..10 {
            let k = random_ket(6, &mut r);
            assert_abs_diff_eq!(inner(&k, &k).re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(inner(&k, &k).im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn tensor_inner_is_product_of_inners() {
        let mut r = rng(6);
        let a1 = random_ket(2, &mut r);
        let a2 = random_ket(3, &mut r);
        let b1 = random_ket(2, &mut r);
        let b2 = random_ket(3, &mut r);
        let lhs = inner(&tensor_kets(&[&a1, &a2]), &tensor_kets(&[&b1, &b2]));
        let rhs = inner(&a1, &b1) * inner(&a2, &b2);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn local_apply_on_ket_matches_embedding() {
        let mut r = rng(8);
        let g = LatticeGeometry::sites(vec![2, 3]);
        let a = crate::test_util::random_matrix(3, &mut r);
        let psi = random_ket(6, &mut r);
        let map = SupportMap::new(&g, &[1]).unwrap();
        let out = apply_local_to_ket(&a, &map, &psi);
        let emb = super::super::dense::embed(&a, &[1], &g).unwrap();
        let want = emb.dot(&psi);
        let err: f64 = out.iter().zip(want.iter()).map(|(x, y)| (x - y).norm()).sum();
        assert!(err < 1e-12);
    }
}
