use ndarray::{Array1, Array2};
use ndarray_linalg::SVD;

use super::geometry::LatticeGeometry;
use super::{C64, CMat};
use crate::error::{Error, Result};

pub fn identity(dim: usize) -> CMat {
    Array2::eye(dim)
}

pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

pub fn trace(a: &CMat) -> C64 {
    a.diag().sum()
}

pub fn hermitize(a: &CMat) -> CMat {
    (a + &dagger(a)).mapv(|z| 0.5 * z)
}

pub fn is_hermitian(a: &CMat, tol: f64) -> bool {
    let d = a - &dagger(a);
    d.iter().all(|z| z.norm() <= tol)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) - b.dot(a)
}

/// Kronecker product of a list of factors, leftmost slowest.
pub fn kron_list(factors: &[&CMat]) -> CMat {
    assert!(!factors.is_empty());
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = ndarray::linalg::kron(&acc, f);
    }
    acc
}

/// Sum of singular values.
pub fn trace_norm(a: &CMat) -> f64 {
    crate::blas::init();
    let (_, s, _) = a.svd(false, false).expect("svd failed");
    s.sum()
}

/// Largest singular value.
pub fn operator_norm(a: &CMat) -> f64 {
    crate::blas::init();
    let (_, s, _) = a.svd(false, false).expect("svd failed");
    s.iter().cloned().fold(0.0, f64::max)
}

/// `|| a - b ||_1`. We keep the full (unhalved) trace norm everywhere, so the
/// distance between orthogonal pure states is 2.
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    trace_norm(&(a - b))
}

/// Maximum absolute column sum, used by the matrix exponential.
pub fn one_norm(a: &CMat) -> f64 {
    let mut best = 0.0f64;
    for c in a.columns() {
        best = best.max(c.iter().map(|z| z.norm()).sum());
    }
    best
}

/// Column-stacking vectorization: `v[c*D + r] = a[r, c]`.
pub fn vec_col(a: &CMat) -> Array1<C64> {
    let d = a.nrows();
    Array1::from_shape_fn(d * d, |k| a[(k % d, k / d)])
}

pub fn unvec_col(v: &Array1<C64>, d: usize) -> CMat {
    Array2::from_shape_fn((d, d), |(r, c)| v[c * d + r])
}

/// Index bookkeeping for a site subset: a full-space index splits as
/// `comp_offsets[k] + sup_offsets[s]` with `s` the mixed-radix digit index
/// over the (sorted) support and `k` enumerating complement configurations.
#[derive(Debug, Clone)]
pub struct SupportMap {
    pub support: Vec<usize>,
    pub sup_offsets: Vec<usize>,
    pub comp_offsets: Vec<usize>,
    pub sup_dim: usize,
}

impl SupportMap {
    pub fn new(geom: &LatticeGeometry, support: &[usize]) -> Result<Self> {
        if !geom.contains_sites(support) {
            return Err(Error::UnknownSites(support.to_vec()));
        }
        let mut sites = support.to_vec();
        sites.sort_unstable();
        sites.dedup();
        if sites.len() != support.len() {
            return Err(Error::Invalid(format!(
                "support {support:?} has repeated sites"
            )));
        }
        let strides = geom.strides();
        let enumerate = |subset: &[usize]| -> Vec<usize> {
            let mut offsets = vec![0usize];
            for &site in subset {
                let d = geom.local_dim(site);
                let stride = strides[site];
                let mut next = Vec::with_capacity(offsets.len() * d);
                for &o in &offsets {
                    for digit in 0..d {
                        next.push(o + digit * stride);
                    }
                }
                offsets = next;
            }
            offsets
        };
        let comp: Vec<usize> = (0..geom.n_sites())
            .filter(|s| !sites.contains(s))
            .collect();
        let sup_offsets = enumerate(&sites);
        let comp_offsets = enumerate(&comp);
        let sup_dim = sup_offsets.len();
        Ok(SupportMap {
            support: sites,
            sup_offsets,
            comp_offsets,
            sup_dim,
        })
    }
}

/// Embed a local operator into the full space: `op (x) identity` on the
/// complement, with site-order bookkeeping.
pub fn embed(op: &CMat, support: &[usize], geom: &LatticeGeometry) -> Result<CMat> {
    let map = SupportMap::new(geom, support)?;
    if op.nrows() != map.sup_dim || op.ncols() != map.sup_dim {
        return Err(Error::DimensionMismatch {
            expected: map.sup_dim,
            got: op.nrows(),
        });
    }
    let d = geom.total_dim();
    let mut out = Array2::zeros((d, d));
    for &k in &map.comp_offsets {
        for (s1, &o1) in map.sup_offsets.iter().enumerate() {
            for (s2, &o2) in map.sup_offsets.iter().enumerate() {
                let v = op[(s1, s2)];
                if v != C64::new(0.0, 0.0) {
                    out[(k + o1, k + o2)] = v;
                }
            }
        }
    }
    Ok(out)
}

/// `embed(a) . rho` without forming the embedding.
pub fn apply_local_left(a: &CMat, map: &SupportMap, rho: &CMat) -> CMat {
    let mut out = Array2::zeros(rho.raw_dim());
    for &k in &map.comp_offsets {
        for (s1, &o1) in map.sup_offsets.iter().enumerate() {
            let mut row_out = out.row_mut(k + o1);
            for (s2, &o2) in map.sup_offsets.iter().enumerate() {
                let v = a[(s1, s2)];
                if v != C64::new(0.0, 0.0) {
                    row_out.scaled_add(v, &rho.row(k + o2));
                }
            }
        }
    }
    out
}

/// `rho . embed(a)` without forming the embedding.
pub fn apply_local_right(rho: &CMat, a: &CMat, map: &SupportMap) -> CMat {
    let mut out = Array2::zeros(rho.raw_dim());
    for &k in &map.comp_offsets {
        for (s1, &o1) in map.sup_offsets.iter().enumerate() {
            for (s2, &o2) in map.sup_offsets.iter().enumerate() {
                // (rho A)[., k+o1] += rho[., k+o2] * A[s2, s1]
                let v = a[(s2, s1)];
                if v != C64::new(0.0, 0.0) {
                    let col_in = rho.column(k + o2);
                    let mut col_out = out.column_mut(k + o1);
                    col_out.scaled_add(v, &col_in);
                }
            }
        }
    }
    out
}

/// Partial trace onto `keep` (ascending site order in the result).
/// An empty `keep` returns the scalar trace as a 1x1 matrix.
pub fn partial_trace(rho: &CMat, keep: &[usize], geom: &LatticeGeometry) -> Result<CMat> {
    let d = geom.total_dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho.nrows(),
        });
    }
    let map = SupportMap::new(geom, keep)?;
    let dk = map.sup_dim;
    let mut out = Array2::zeros((dk, dk));
    for (i1, &o1) in map.sup_offsets.iter().enumerate() {
        for (i2, &o2) in map.sup_offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &k in &map.comp_offsets {
                acc += rho[(k + o1, k + o2)];
            }
            out[(i1, i2)] = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{pauli_x, random_matrix, random_density};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn embed_identity_is_identity() {
        let g = LatticeGeometry::chain(2, 2);
        let e = embed(&identity(2), &[0], &g).unwrap();
        assert_abs_diff_eq!(operator_norm(&(e - identity(4))), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn embed_site_order_convention() {
        // X on site 1 of a 2-qubit chain is I (x) X: site 0 is the slow digit.
        let g = LatticeGeometry::chain(2, 2);
        let e = embed(&pauli_x(2), &[1], &g).unwrap();
        let expect = ndarray::linalg::kron(&identity(2), &pauli_x(2));
        assert_abs_diff_eq!(operator_norm(&(e - expect)), 0.0, epsilon = 1e-14);
        let e0 = embed(&pauli_x(2), &[0], &g).unwrap();
        let expect0 = ndarray::linalg::kron(&pauli_x(2), &identity(2));
        assert_abs_diff_eq!(operator_norm(&(e0 - expect0)), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn embeds_on_disjoint_supports_commute() {
        let mut rng = crate::test_util::rng(7);
        let g = LatticeGeometry::chain(3, 2);
        for _ in 0..20 {
            let a = random_matrix(2, &mut rng);
            let b = random_matrix(2, &mut rng);
            let ea = embed(&a, &[0], &g).unwrap();
            let eb = embed(&b, &[1], &g).unwrap();
            let comm = commutator(&ea, &eb);
            assert!(operator_norm(&comm) < 1e-12);
        }
    }

    #[test]
    fn embed_is_multiplicative_on_same_support() {
        let mut rng = crate::test_util::rng(11);
        let g = LatticeGeometry::sites(vec![2, 3]);
        for _ in 0..10 {
            let a = random_matrix(3, &mut rng);
            let b = random_matrix(3, &mut rng);
            let lhs = embed(&a.dot(&b), &[1], &g).unwrap();
            let rhs = embed(&a, &[1], &g).unwrap().dot(&embed(&b, &[1], &g).unwrap());
            assert!(operator_norm(&(lhs - rhs)) < 1e-12);
        }
    }

    #[test]
    fn embed_rejects_unknown_sites() {
        let g = LatticeGeometry::chain(2, 2);
        assert!(matches!(
            embed(&pauli_x(2), &[5], &g),
            Err(Error::UnknownSites(_))
        ));
    }

    #[test]
    fn partial_trace_of_product_factorizes() {
        let mut rng = crate::test_util::rng(3);
        let g = LatticeGeometry::sites(vec![2, 3]);
        let rho = random_density(2, &mut rng);
        let sigma = random_density(3, &mut rng);
        let joint = ndarray::linalg::kron(&rho, &sigma);
        let back = partial_trace(&joint, &[0], &g).unwrap();
        assert!(operator_norm(&(back - &rho)) < 1e-12);
        let back1 = partial_trace(&joint, &[1], &g).unwrap();
        assert!(operator_norm(&(back1 - &sigma)) < 1e-12);
        // Trace is preserved.
        let full = partial_trace(&joint, &[0, 1], &g).unwrap();
        assert_abs_diff_eq!(trace(&full).re, 1.0, epsilon = 1e-12);
        let scalar = partial_trace(&joint, &[], &g).unwrap();
        assert_abs_diff_eq!(scalar[(0, 0)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn partial_trace_maximally_entangled_is_maximally_mixed() {
        let g = LatticeGeometry::chain(2, 2);
        let mut psi = Array1::zeros(4);
        psi[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[3] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = super::super::ket::outer(&psi, &psi);
        let red = partial_trace(&rho, &[0], &g).unwrap();
        let half = identity(2).mapv(|z| 0.5 * z);
        assert!(operator_norm(&(red - half)) < 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_loop_oracle() {
        // Direct double-loop contraction over site 2 of a random 3-qubit state.
        let mut rng = crate::test_util::rng(19);
        let g = LatticeGeometry::chain(3, 2);
        let rho = random_density(8, &mut rng);
        let got = partial_trace(&rho, &[0, 1], &g).unwrap();
        let mut want = Array2::zeros((4, 4));
        for r in 0..4 {
            for cidx in 0..4 {
                let mut acc = c(0.0, 0.0);
                for k in 0..2 {
                    acc += rho[(2 * r + k, 2 * cidx + k)];
                }
                want[(r, cidx)] = acc;
            }
        }
        assert!(operator_norm(&(got - want)) < 1e-13);
    }

    #[test]
    fn trace_norm_matches_spectral_cases() {
        let a = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]];
        assert_abs_diff_eq!(trace_norm(&a), 2.0, epsilon = 1e-12);
        // Orthogonal pure states are at trace distance 2.
        let p0 = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]];
        let p1 = array![[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        assert_abs_diff_eq!(trace_distance(&p0, &p1), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn operator_norm_of_unitary_is_one() {
        let h = array![
            [c(1.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(-1.0, 0.0)]
        ]
        .mapv(|z| z / 2.0f64.sqrt());
        assert_abs_diff_eq!(operator_norm(&h), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn operator_norm_squares_under_gram() {
        let mut rng = crate::test_util::rng(23);
        for _ in 0..10 {
            let a = random_matrix(6, &mut rng);
            let gram = dagger(&a).dot(&a);
            assert_abs_diff_eq!(
                operator_norm(&gram),
                operator_norm(&a).powi(2),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn local_apply_agrees_with_embedding() {
        let mut rng = crate::test_util::rng(31);
        let g = LatticeGeometry::sites(vec![2, 3, 2]);
        let d = g.total_dim();
        let a = random_matrix(4, &mut rng);
        let rho = random_matrix(d, &mut rng);
        let map = SupportMap::new(&g, &[0, 2]).unwrap();
        let emb = embed(&a, &[0, 2], &g).unwrap();
        let left = apply_local_left(&a, &map, &rho);
        assert!(operator_norm(&(left - emb.dot(&rho))) < 1e-11);
        let right = apply_local_right(&rho, &a, &map);
        assert!(operator_norm(&(right - rho.dot(&emb))) < 1e-11);
    }

    #[test]
    fn norm_duality_bound() {
        let mut rng = crate::test_util::rng(41);
        for _ in 0..20 {
            let theta = random_matrix(5, &mut rng);
            let x = random_matrix(5, &mut rng);
            let pairing = trace(&theta.dot(&x)).norm();
            assert!(pairing <= operator_norm(&theta) * trace_norm(&x) + 1e-9);
        }
    }

    #[test]
    fn partial_trace_embed_adjointness() {
        // Tr[embed(A) rho] = Tr[A partial_trace(rho, supp A)].
        let mut rng = crate::test_util::rng(47);
        let g = LatticeGeometry::sites(vec![2, 3, 2]);
        for support in [vec![0], vec![1], vec![0, 2], vec![1, 2]] {
            let da = g.dim_of(&support);
            let a = random_matrix(da, &mut rng);
            let rho = random_density(g.total_dim(), &mut rng);
            let lhs = trace(&embed(&a, &support, &g).unwrap().dot(&rho));
            let rhs = trace(&a.dot(&partial_trace(&rho, &support, &g).unwrap()));
            assert!((lhs - rhs).norm() < 1e-12, "support {support:?}");
        }
    }

    #[test]
    fn vec_unvec_roundtrip_and_convention() {
        let mut rng = crate::test_util::rng(43);
        let a = random_matrix(3, &mut rng);
        let rho = random_matrix(3, &mut rng);
        let b = random_matrix(3, &mut rng);
        // vec(A rho B) = (B^T (x) A) vec(rho)
        let lhs = vec_col(&a.dot(&rho).dot(&b));
        let sup = ndarray::linalg::kron(&b.t().to_owned(), &a);
        let rhs = sup.dot(&vec_col(&rho));
        let diff: f64 = lhs.iter().zip(rhs.iter()).map(|(x, y)| (x - y).norm()).sum();
        assert!(diff < 1e-11);
        assert!(operator_norm(&(unvec_col(&vec_col(&rho), 3) - rho)) < 1e-14);
    }
}
