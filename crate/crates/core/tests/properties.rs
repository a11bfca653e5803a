//! Property-based invariants over randomly generated inputs.

use fastdrive_core::qstate::{
    dagger, embed, operator_norm, partial_trace, trace, trace_norm, unvec_col, vec_col, C64,
    CMat, CsrMatrix, LatticeGeometry,
};
use ndarray::Array2;
use proptest::prelude::*;

fn complex_matrix(d: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d).prop_map(move |entries| {
        Array2::from_shape_fn((d, d), |(r, c)| {
            let (re, im) = entries[r * d + c];
            C64::new(re, im)
        })
    })
}

fn density(d: usize) -> impl Strategy<Value = CMat> {
    complex_matrix(d).prop_map(|a| {
        let p = a.dot(&dagger(&a)) + Array2::<C64>::eye(a.nrows()).mapv(|z| z * 1e-3);
        let tr = trace(&p);
        p.mapv(|z| z / tr)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn embedding_is_multiplicative(a in complex_matrix(3), b in complex_matrix(3)) {
        let g = LatticeGeometry::sites(vec![2, 3]);
        let lhs = embed(&a.dot(&b), &[1], &g).unwrap();
        let rhs = embed(&a, &[1], &g).unwrap().dot(&embed(&b, &[1], &g).unwrap());
        prop_assert!(operator_norm(&(lhs - rhs)) < 1e-11);
    }

    #[test]
    fn norm_duality(theta in complex_matrix(4), x in complex_matrix(4)) {
        let pairing = trace(&theta.dot(&x)).norm();
        prop_assert!(pairing <= operator_norm(&theta) * trace_norm(&x) + 1e-9);
    }

    #[test]
    fn partial_trace_is_trace_preserving_and_adjoint(
        rho in density(8),
        a in complex_matrix(2),
    ) {
        let g = LatticeGeometry::sites(vec![2, 2, 2]);
        for keep in [vec![0usize], vec![1], vec![2], vec![0, 2]] {
            let red = partial_trace(&rho, &keep, &g).unwrap();
            prop_assert!((trace(&red) - trace(&rho)).norm() < 1e-12);
            if keep.len() == 1 {
                let lhs = trace(&embed(&a, &keep, &g).unwrap().dot(&rho));
                let rhs = trace(&a.dot(&red));
                prop_assert!((lhs - rhs).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn vec_convention_holds(
        a in complex_matrix(3),
        rho in complex_matrix(3),
        b in complex_matrix(3),
    ) {
        let lhs = vec_col(&a.dot(&rho).dot(&b));
        let sup = ndarray::linalg::kron(&b.t().to_owned(), &a);
        let rhs = sup.dot(&vec_col(&rho));
        let err: f64 = lhs.iter().zip(rhs.iter()).map(|(x, y)| (x - y).norm()).sum();
        prop_assert!(err < 1e-11);
        prop_assert!(operator_norm(&(unvec_col(&vec_col(&rho), 3) - rho)) < 1e-13);
    }

    #[test]
    fn sparse_dense_roundtrip(a in complex_matrix(6), tol in 0.0f64..0.5) {
        let mut thinned = a.clone();
        thinned.mapv_inplace(|z| if z.norm() < tol { C64::new(0.0, 0.0) } else { z });
        let csr = CsrMatrix::from_dense(&thinned, 0.0);
        prop_assert!(operator_norm(&(csr.to_dense() - &thinned)) < 1e-13);
        // Matvec agrees with the dense product.
        let x = ndarray::Array1::from_shape_fn(6, |k| C64::new(k as f64 * 0.3 - 1.0, 0.1));
        let got = csr.matvec(&x).unwrap();
        let want = thinned.dot(&x);
        let err: f64 = got.iter().zip(want.iter()).map(|(p, q)| (p - q).norm()).sum();
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn timer_distribution_is_normalized(
        levels in 1usize..200,
        gamma in 0.1f64..64.0,
        t in 0.0f64..4.0,
    ) {
        let spec = fastdrive_core::timer::TimerSpec::new(levels, gamma);
        let d = fastdrive_core::timer::birth_chain_dist(&spec, t).unwrap();
        prop_assert!((d.total() - 1.0).abs() < 1e-9);
        prop_assert!(d.probs.iter().all(|&p| p >= 0.0));
    }
}
