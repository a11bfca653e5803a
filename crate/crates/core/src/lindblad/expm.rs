//! Dense matrix exponential by scaling-and-squaring with the order-13 Padé
//! approximant (Al-Mohy & Higham style, without the norm-estimation
//! refinements; fine at the dimensions the dense guard allows).

use ndarray_linalg::Inverse;

use crate::error::Result;
use crate::qstate::{identity, one_norm, C64, CMat};

const THETA_13: f64 = 5.371920351148152;

const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

pub fn expm(a: &CMat) -> Result<CMat> {
    crate::blas::init();
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let scale = C64::new(0.5f64.powi(s), 0.0);
    let a_s = a.mapv(|z| z * scale);

    let a2 = a_s.dot(&a_s);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let eye = identity(n);

    let b = |k: usize| C64::new(B13[k], 0.0);
    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let w1 = a6.mapv(|z| z * b(13)) + a4.mapv(|z| z * b(11)) + a2.mapv(|z| z * b(9));
    let w2 = a6.mapv(|z| z * b(7)) + a4.mapv(|z| z * b(5)) + a2.mapv(|z| z * b(3))
        + eye.mapv(|z| z * b(1));
    let u = a_s.dot(&(a6.dot(&w1) + w2));
    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let z1 = a6.mapv(|z| z * b(12)) + a4.mapv(|z| z * b(10)) + a2.mapv(|z| z * b(8));
    let v = a6.dot(&z1)
        + a6.mapv(|z| z * b(6))
        + a4.mapv(|z| z * b(4))
        + a2.mapv(|z| z * b(2))
        + eye.mapv(|z| z * b(0));

    // (V - U) F = (V + U)
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut f = lhs.inv()?.dot(&rhs);
    for _ in 0..s {
        f = f.dot(&f);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{operator_norm, trace_norm};
    use crate::test_util::{random_hermitian, random_matrix, rng};
    

    #[test]
    fn expm_zero_is_identity() {
        let z = CMat::zeros((4, 4));
        let e = expm(&z).unwrap();
        assert!(operator_norm(&(e - identity(4))) < 1e-14);
    }

    #[test]
    fn expm_matches_spectral_for_hermitian() {
        let mut r = rng(21);
        for scale in [0.1, 1.0, 20.0] {
            let h = random_hermitian(8, &mut r).mapv(|z| z * scale);
            let want = crate::qstate::func_hermitian(&h, |x| C64::new(x.exp(), 0.0)).unwrap();
            let got = expm(&h).unwrap();
            let rel = operator_norm(&(got - &want)) / operator_norm(&want);
            assert!(rel < 1e-12, "rel err {rel} at scale {scale}");
        }
    }

    #[test]
    fn expm_additivity_for_commuting() {
        let mut r = rng(22);
        let a = random_matrix(5, &mut r);
        let e1 = expm(&a).unwrap();
        let e2 = expm(&a.mapv(|z| z * C64::new(2.0, 0.0))).unwrap();
        assert!(trace_norm(&(e1.dot(&e1) - e2)) < 1e-10);
    }
}
