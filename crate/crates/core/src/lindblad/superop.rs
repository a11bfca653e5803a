//! Dense superoperator assembly in the column-stacking convention
//! `vec(A rho B) = (B^T (x) A) vec(rho)`, plus the Choi-matrix diagnostics.

use ndarray::linalg::kron;

use super::{expm::expm, Lindbladian};
use crate::error::{Error, Result};
use crate::policy::NumericPolicy;
use crate::qstate::{dagger, identity, C64, CMat};

/// Assemble the `D^2 x D^2` generator matrix. Guarded: above
/// `policy.superop_guard` this refuses and advises the integrator path.
pub fn assemble_superoperator(lb: &Lindbladian, policy: &NumericPolicy) -> Result<CMat> {
    let d = lb.dim();
    if d > policy.superop_guard {
        return Err(Error::DenseGuard {
            dim: d,
            guard: policy.superop_guard,
            advice: "use evolve_integrate (matrix-free) instead of the dense superoperator",
        });
    }
    let eye = identity(d);
    let mut s = CMat::zeros((d * d, d * d));
    let mi = C64::new(0.0, -1.0);
    for term in lb.terms() {
        if let Some(h) = &term.hamiltonian {
            let hf = crate::qstate::embed(h, &term.support, lb.geometry())?;
            // -i ( I (x) H  -  H^T (x) I )
            let left = kron(&eye, &hf);
            let right = kron(&hf.t().to_owned(), &eye);
            s = s + (left - right).mapv(|z| mi * z);
        }
        for j in &term.jumps {
            let jf = crate::qstate::embed(j, &term.support, lb.geometry())?;
            let jd = dagger(&jf);
            let k = jd.dot(&jf);
            // conj(J) (x) J  - 1/2 ( I (x) J+J  +  (J+J)^T (x) I )
            s = s + kron(&jf.mapv(|z| z.conj()), &jf);
            s = s - kron(&eye, &k).mapv(|z| 0.5 * z);
            s = s - kron(&k.t().to_owned(), &eye).mapv(|z| 0.5 * z);
        }
    }
    Ok(s)
}

/// Choi matrix of the channel `exp(t L)`: `C = sum_ij E_ij (x) Phi(E_ij)`.
pub fn choi_matrix(lb: &Lindbladian, t: f64, policy: &NumericPolicy) -> Result<CMat> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let d = lb.dim();
    let s = assemble_superoperator(lb, policy)?;
    let chan = expm(&s.mapv(|z| z * t))?;
    // Column (j*d + i) of `chan` is vec(Phi(E_ij)).
    let mut choi = CMat::zeros((d * d, d * d));
    for i in 0..d {
        for j in 0..d {
            let col = chan.column(j * d + i);
            // Phi(E_ij)[r, c] = col[c*d + r]; place at block (i, j).
            for r in 0..d {
                for c in 0..d {
                    choi[(i * d + r, j * d + c)] = col[c * d + r];
                }
            }
        }
    }
    Ok(choi)
}

#[derive(Debug, Clone, Copy)]
pub struct ChoiReport {
    pub min_eigenvalue: f64,
    pub trace_preservation_defect: f64,
}

/// Complete-positivity and trace-preservation check of `exp(t L)`.
pub fn choi_cp_check(lb: &Lindbladian, t: f64, policy: &NumericPolicy) -> Result<ChoiReport> {
    let d = lb.dim();
    let choi = choi_matrix(lb, t, policy)?;
    let min_eigenvalue = crate::qstate::min_eigval(&choi)?;
    // Partial trace over the output factor must be the identity.
    let mut tp = CMat::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..d {
                acc += choi[(i * d + r, j * d + r)];
            }
            tp[(i, j)] = acc;
        }
    }
    let defect = crate::qstate::operator_norm(&(tp - identity(d)));
    Ok(ChoiReport {
        min_eigenvalue,
        trace_preservation_defect: defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::LindbladTerm;
    use crate::qstate::{operator_norm, trace_norm, vec_col, LatticeGeometry};
    use crate::test_util::{random_density, random_lindbladian, rng};
    use ndarray::array;

    fn damping(gamma: f64) -> Lindbladian {
        let g = LatticeGeometry::sites(vec![2]);
        let sm = array![
            [C64::new(0.0, 0.0), C64::new(gamma.sqrt(), 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        Lindbladian::new(g, vec![LindbladTerm::new(vec![0], None, vec![sm])]).unwrap()
    }

    #[test]
    fn zero_lindbladian_assembles_to_zero() {
        let g = LatticeGeometry::sites(vec![2]);
        let lb = Lindbladian::zero(g);
        let s = assemble_superoperator(&lb, &NumericPolicy::default()).unwrap();
        assert!(operator_norm(&s) < 1e-15);
    }

    #[test]
    fn hamiltonian_only_superoperator_hand_expansion() {
        // dim 2, H = Z: S = -i (I (x) Z - Z^T (x) I), entrywise.
        let g = LatticeGeometry::sites(vec![2]);
        let z = crate::test_util::pauli_z(2);
        let lb =
            Lindbladian::new(g, vec![LindbladTerm::hamiltonian_only(vec![0], z.clone())]).unwrap();
        let s = assemble_superoperator(&lb, &NumericPolicy::default()).unwrap();
        let eye = identity(2);
        let want = (kron(&eye, &z) - kron(&z.t().to_owned(), &eye)).mapv(|v| C64::new(0.0, -1.0) * v);
        assert!(operator_norm(&(s - want)) < 1e-13);
    }

    #[test]
    fn superoperator_action_matches_apply() {
        let mut r = rng(33);
        let g = LatticeGeometry::chain(2, 2);
        let lb = random_lindbladian(&g, &mut r);
        let s = assemble_superoperator(&lb, &NumericPolicy::default()).unwrap();
        for _ in 0..5 {
            let rho = random_density(4, &mut r);
            let via_super = crate::qstate::unvec_col(&s.dot(&vec_col(&rho)), 4);
            let direct = lb.apply(&rho).unwrap();
            assert!(trace_norm(&(via_super - direct)) < 1e-12);
        }
    }

    #[test]
    fn damping_superoperator_spectrum() {
        // Amplitude damping at gamma = 1 diagonalizes by hand: on the basis
        // {E00, E10, E01, E11 - E00} the generator acts with eigenvalues
        // {0, -1/2, -1/2, -1}.
        let lb = damping(1.0);
        let s = assemble_superoperator(&lb, &NumericPolicy::default()).unwrap();
        let e = |r: usize, c: usize| {
            let mut m = CMat::zeros((2, 2));
            m[(r, c)] = C64::new(1.0, 0.0);
            vec_col(&m)
        };
        let pairs = [
            (e(0, 0), 0.0),
            (e(1, 0), -0.5),
            (e(0, 1), -0.5),
            (e(1, 1) - e(0, 0), -1.0),
        ];
        for (v, lam) in pairs {
            let got = s.dot(&v);
            let want = v.mapv(|z| z * C64::new(lam, 0.0));
            let err: f64 = got.iter().zip(want.iter()).map(|(a, b)| (a - b).norm()).sum();
            assert!(err < 1e-12, "eigenpair check failed for lambda {lam}");
        }
    }

    #[test]
    fn identity_channel_choi_is_projector() {
        let g = LatticeGeometry::sites(vec![2]);
        let lb = Lindbladian::zero(g);
        let choi = choi_matrix(&lb, 1.0, &NumericPolicy::default()).unwrap();
        let w = crate::qstate::eigvalsh(&choi).unwrap();
        let mut ws: Vec<f64> = w.to_vec();
        ws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(ws[0].abs() < 1e-10 && ws[1].abs() < 1e-10 && ws[2].abs() < 1e-10);
        assert!((ws[3] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn damping_choi_eigenvalues_at_half_decay() {
        // t = ln 2 gives p = 1/2 and Choi eigenvalues {3/2, 1/2, 0, 0}.
        let lb = damping(1.0);
        let choi = choi_matrix(&lb, (2.0f64).ln(), &NumericPolicy::default()).unwrap();
        let w = crate::qstate::eigvalsh(&choi).unwrap();
        let mut ws: Vec<f64> = w.to_vec();
        ws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = [0.0, 0.0, 0.5, 1.5];
        for (g, w) in ws.iter().zip(want.iter()) {
            assert!((g - w).abs() < 1e-10, "got {ws:?}");
        }
    }

    #[test]
    fn random_channel_is_cp_and_tp() {
        let mut r = rng(35);
        let g = LatticeGeometry::chain(2, 2);
        for _ in 0..5 {
            let lb = random_lindbladian(&g, &mut r);
            let rep = choi_cp_check(&lb, 5.0, &NumericPolicy::default()).unwrap();
            assert!(rep.min_eigenvalue > -1e-9, "min eig {}", rep.min_eigenvalue);
            assert!(rep.trace_preservation_defect < 1e-10);
        }
    }

    #[test]
    fn guard_refuses_large_dense_superoperator() {
        let g = LatticeGeometry::chain(8, 2);
        let lb = Lindbladian::zero(g);
        let policy = NumericPolicy::default();
        assert!(matches!(
            assemble_superoperator(&lb, &policy),
            Err(Error::DenseGuard { .. })
        ));
    }
}
