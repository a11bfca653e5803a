//! 1D SPT representatives: pair-chain isometric states, Z2 x Z2 symmetry
//! realizations `U_g = V_g (x) conj(V_g)` with projective or linear `V_g`,
//! covariance of drivers, and the bridge pair of states connected by a
//! covariant fast driver.

use std::sync::Arc;

use ndarray::Array1;

use super::product::{SiteChannelDriver};
use crate::error::{Error, Result};
use crate::lindblad::{assemble_superoperator, Lindbladian};
use crate::policy::NumericPolicy;
use crate::qstate::{C64, CMat, CVec, LatticeGeometry};

/// Which cohomology class a `V_g` realization represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CocycleClass {
    Trivial,
    Nontrivial,
}

/// A (projective) representation of Z2 x Z2 on the bond space, elements
/// ordered (0,0), (1,0), (0,1), (1,1).
#[derive(Debug, Clone)]
pub struct SymmetryRep {
    pub v: Vec<CMat>,
    pub class: CocycleClass,
}

fn pauli(axis: usize) -> CMat {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match axis {
        1 => ndarray::array![[z, o], [o, z]],
        2 => ndarray::array![[z, -i], [i, z]],
        3 => ndarray::array![[o, z], [z, -o]],
        _ => crate::qstate::identity(2),
    }
}

/// The Pauli projective representation: `V_(a,b) = X^a Z^b` with the
/// nontrivial cocycle of H^2(Z2 x Z2, U(1)).
pub fn pauli_projective_rep() -> SymmetryRep {
    let x = pauli(1);
    let z = pauli(3);
    SymmetryRep {
        v: vec![
            crate::qstate::identity(2),
            x.clone(),
            z.clone(),
            x.dot(&z),
        ],
        class: CocycleClass::Nontrivial,
    }
}

/// A linear (trivial-cocycle) representation by diagonal characters.
pub fn trivial_rep() -> SymmetryRep {
    let chi = |a: f64, b: f64| {
        let mut m = CMat::zeros((2, 2));
        m[(0, 0)] = C64::new(a, 0.0);
        m[(1, 1)] = C64::new(b, 0.0);
        m
    };
    SymmetryRep {
        v: vec![chi(1.0, 1.0), chi(1.0, -1.0), chi(-1.0, 1.0), chi(-1.0, -1.0)],
        class: CocycleClass::Trivial,
    }
}

/// Group law of Z2 x Z2 on element indices (bit pairs).
pub fn group_mul(g: usize, h: usize) -> usize {
    g ^ h
}

impl SymmetryRep {
    pub fn bond_dim(&self) -> usize {
        self.v[0].nrows()
    }

    /// On-site realization `U_g = V_g (x) conj(V_g)`; always a linear rep.
    pub fn onsite_u(&self, g: usize) -> CMat {
        ndarray::linalg::kron(&self.v[g], &self.v[g].mapv(|z| z.conj()))
    }

    /// `U_g^(x N)` on a chain of `n_sites` sites of dimension `D^2`.
    pub fn global_u(&self, n_sites: usize, g: usize) -> CMat {
        let u1 = self.onsite_u(g);
        let mut u = u1.clone();
        for _ in 1..n_sites {
            u = ndarray::linalg::kron(&u, &u1);
        }
        u
    }

    /// Largest deviation of `U_g U_h` from `U_(gh)`: zero when the phases of
    /// the projective `V` cancel between `V` and `conj(V)`.
    pub fn linearity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for g in 0..4 {
            for h in 0..4 {
                let prod = self.onsite_u(g).dot(&self.onsite_u(h));
                let want = self.onsite_u(group_mul(g, h));
                worst = worst.max(crate::qstate::operator_norm(&(prod - want)));
            }
        }
        worst
    }

    /// Whether the `V_g` themselves commute up to a sign of -1 somewhere,
    /// the witness of the nontrivial class for Z2 x Z2.
    pub fn has_nontrivial_commutator(&self) -> bool {
        for g in 0..4 {
            for h in 0..4 {
                let gh = self.v[g].dot(&self.v[h]);
                let hg = self.v[h].dot(&self.v[g]);
                if crate::qstate::operator_norm(&(&gh + &hg)) < 1e-9
                    && crate::qstate::operator_norm(&gh) > 0.5
                {
                    return true;
                }
            }
        }
        false
    }
}

/// The on-site maximally entangled state `|psi_+>` between the left and right
/// bond factors of one site (dimension `D^2`).
pub fn psi_plus_ket(d_bond: usize) -> CVec {
    let mut v = Array1::zeros(d_bond * d_bond);
    let a = 1.0 / (d_bond as f64).sqrt();
    for k in 0..d_bond {
        v[k * d_bond + k] = C64::new(a, 0.0);
    }
    v
}

/// The isometric pair-chain state on a ring of `n_sites` sites: maximally
/// entangled pairs across links, with site `i` carrying `(L_i, R_i)` and the
/// pair on link `i` joining `R_i` with `L_(i+1)`.
pub fn pair_chain_ket(n_sites: usize, d_bond: usize) -> CVec {
    let d_site = d_bond * d_bond;
    let dim = d_site.pow(n_sites as u32);
    let mut v = Array1::zeros(dim);
    let norm = (d_bond as f64).powi(-(n_sites as i32)).sqrt();
    for idx in 0..dim {
        // Decode per-site (l, r) digits, site 0 slowest.
        let mut rem = idx;
        let mut l = vec![0usize; n_sites];
        let mut r = vec![0usize; n_sites];
        for s in (0..n_sites).rev() {
            let digit = rem % d_site;
            rem /= d_site;
            l[s] = digit / d_bond;
            r[s] = digit % d_bond;
        }
        let linked = (0..n_sites).all(|i| r[i] == l[(i + 1) % n_sites]);
        if linked {
            v[idx] = C64::new(norm, 0.0);
        }
    }
    v
}

/// Covariance residual `max_g || U_g^+ L(U_g . U_g^+) U_g - L ||` as a
/// superoperator norm. Dense regime.
pub fn covariance_residual(
    lb: &Lindbladian,
    us: &[CMat],
    policy: &NumericPolicy,
) -> Result<f64> {
    let s = assemble_superoperator(lb, policy)?;
    let mut worst = 0.0f64;
    for u in us {
        if u.nrows() != lb.dim() {
            return Err(Error::DimensionMismatch {
                expected: lb.dim(),
                got: u.nrows(),
            });
        }
        // vec(U rho U+) = (conj U (x) U) vec(rho)
        let su = ndarray::linalg::kron(&u.mapv(|z| z.conj()), u);
        let sud = ndarray::linalg::kron(&u.t().to_owned(), &crate::qstate::dagger(u));
        let twisted = sud.dot(&s).dot(&su);
        worst = worst.max(crate::qstate::operator_norm(&(twisted - &s)));
    }
    Ok(worst)
}

/// The bridge construction: three pair-chain factors, a covariant driver on
/// the first two, and the target with those factors reset to on-site pairs.
/// Factor 1 carries `omega_0`, factor 2 `omega_1^(-1)`, factor 3 `omega_1`;
/// as vectors all factors are the same pair chain, the labels choose the
/// symmetry realization carried along.
#[derive(Debug, Clone)]
pub struct SptBridge {
    pub sites_per_factor: usize,
    pub d_bond: usize,
    pub rep0: SymmetryRep,
    pub rep1: SymmetryRep,
}

impl SptBridge {
    pub fn new(sites_per_factor: usize, rep0: SymmetryRep, rep1: SymmetryRep) -> Self {
        assert_eq!(rep0.bond_dim(), rep1.bond_dim());
        SptBridge {
            sites_per_factor,
            d_bond: rep0.bond_dim(),
            rep0,
            rep1,
        }
    }

    pub fn geometry(&self) -> Arc<LatticeGeometry> {
        let d_site = self.d_bond * self.d_bond;
        Arc::new(LatticeGeometry::ring(3 * self.sites_per_factor, d_site))
    }

    /// Initial state `|phi_0>`: pair chains on all three factors.
    pub fn phi0(&self) -> CVec {
        let chain = pair_chain_ket(self.sites_per_factor, self.d_bond);
        crate::qstate::tensor_kets(&[&chain, &chain, &chain])
    }

    /// Target `|phi_1>`: on-site pairs on factors 1-2, pair chain on factor 3.
    pub fn phi1(&self) -> CVec {
        let psi = psi_plus_ket(self.d_bond);
        let n = self.sites_per_factor;
        let mut kets: Vec<&CVec> = Vec::with_capacity(2 * n + 1);
        for _ in 0..2 * n {
            kets.push(&psi);
        }
        let chain = pair_chain_ket(n, self.d_bond);
        let mut factors = kets.clone();
        factors.push(&chain);
        crate::qstate::tensor_kets(&factors)
    }

    /// The covariant driver: reset toward `|psi_+>` on the sites of factors
    /// 1 and 2 only.
    pub fn driver(&self) -> Result<SiteChannelDriver> {
        let geom = self.geometry();
        let sites: Vec<usize> = (0..2 * self.sites_per_factor).collect();
        SiteChannelDriver::reset_on_sites(geom, &psi_plus_ket(self.d_bond), &sites)
    }

    /// Rigorous upper bound on `|| e^(tL)(phi_0) - phi_1 ||_1`:
    /// `2 (1 - (1 - e^-t)^m)` over the `m = 2 N` driven sites.
    pub fn distance_bound(&self, t: f64) -> f64 {
        let m = (2 * self.sites_per_factor) as i32;
        2.0 * (1.0 - (1.0 - (-t).exp()).powi(m))
    }

    /// The symmetry realization on the full three-factor chain.
    pub fn global_u(&self, g: usize) -> CMat {
        let n = self.sites_per_factor;
        let u0 = self.rep0.global_u(n, g);
        let rep1_inv = &self.rep1; // for Z2 x Z2 every element is its own inverse
        let u1i = rep1_inv.global_u(n, g);
        let u1 = self.rep1.global_u(n, g);
        ndarray::linalg::kron(&ndarray::linalg::kron(&u0, &u1i), &u1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{fidelity_pure, inner, outer, trace_distance};

    #[test]
    fn reps_are_linear_onsite_and_classified() {
        let p = pauli_projective_rep();
        let t = trivial_rep();
        assert!(p.linearity_defect() < 1e-12);
        assert!(t.linearity_defect() < 1e-12);
        assert!(p.has_nontrivial_commutator());
        assert!(!t.has_nontrivial_commutator());
    }

    #[test]
    fn psi_plus_invariant_under_any_u() {
        let psi = psi_plus_ket(2);
        for rep in [pauli_projective_rep(), trivial_rep()] {
            for g in 0..4 {
                let u = rep.onsite_u(g);
                let moved = u.dot(&psi);
                let err: f64 = moved
                    .iter()
                    .zip(psi.iter())
                    .map(|(a, b)| (a - b).norm())
                    .sum();
                assert!(err < 1e-12);
            }
        }
    }

    #[test]
    fn pair_chain_is_normalized_and_symmetric() {
        for n in [2usize, 3] {
            let chain = pair_chain_ket(n, 2);
            assert!((inner(&chain, &chain).re - 1.0).abs() < 1e-12);
            let rep = pauli_projective_rep();
            for g in 0..4 {
                let u = rep.global_u(n, g);
                let moved = u.dot(&chain);
                let overlap = inner(&chain, &moved);
                assert!(
                    (overlap - C64::new(1.0, 0.0)).norm() < 1e-10,
                    "pair chain must be invariant under U_g^(x N)"
                );
            }
        }
    }

    #[test]
    fn covariant_driver_has_zero_residual() {
        let geom = Arc::new(LatticeGeometry::ring(2, 4));
        let driver = SiteChannelDriver::uniform_reset(geom, &psi_plus_ket(2)).unwrap();
        let lb = driver.lindbladian().unwrap();
        let policy = NumericPolicy::default();
        for rep in [pauli_projective_rep(), trivial_rep()] {
            let us: Vec<CMat> = (0..4).map(|g| rep.global_u(2, g)).collect();
            let res = covariance_residual(&lb, &us, &policy).unwrap();
            assert!(res < 1e-10, "covariance residual {res}");
        }
    }

    #[test]
    fn broken_driver_fails_covariance() {
        // Reset toward |00> is not covariant under the Pauli realization.
        let geom = Arc::new(LatticeGeometry::ring(2, 4));
        let driver =
            SiteChannelDriver::uniform_reset(geom, &crate::qstate::basis_ket(4, 0)).unwrap();
        let lb = driver.lindbladian().unwrap();
        let rep = pauli_projective_rep();
        let us: Vec<CMat> = (0..4).map(|g| rep.global_u(2, g)).collect();
        let res = covariance_residual(&lb, &us, &NumericPolicy::default()).unwrap();
        assert!(res > 0.1, "negative control residual {res}");
    }

    #[test]
    fn zero_lindbladian_is_covariant() {
        let geom = Arc::new(LatticeGeometry::ring(1, 4));
        let lb = Lindbladian::zero(geom);
        let rep = pauli_projective_rep();
        let us: Vec<CMat> = (0..4).map(|g| rep.global_u(1, g)).collect();
        let res = covariance_residual(&lb, &us, &NumericPolicy::default()).unwrap();
        assert!(res < 1e-14);
    }

    #[test]
    fn bridge_small_instance_evolves_and_keeps_symmetry() {
        // N = 1 per factor: 3 sites of dimension 4, fully dense.
        let bridge = SptBridge::new(1, trivial_rep(), pauli_projective_rep());
        let phi0 = bridge.phi0();
        let phi1 = bridge.phi1();
        let drv = bridge.driver().unwrap();
        let rho0 = outer(&phi0, &phi0);
        let t = 30.0;
        let ev = drv.closed_form_evolve(&rho0, t).unwrap();
        let dist = trace_distance(&ev, &outer(&phi1, &phi1));
        assert!(dist < 1e-9, "bridge distance {dist}");
        assert!(dist <= bridge.distance_bound(t));
        // The symmetry is respected along the trajectory.
        for g in 0..4 {
            let u = bridge.global_u(g);
            let mid = drv.closed_form_evolve(&rho0, 1.0).unwrap();
            let moved = u.dot(&mid).dot(&crate::qstate::dagger(&u));
            assert!(trace_distance(&moved, &mid) < 1e-10);
        }
    }

    #[test]
    fn bridge_bound_dominates_exact_distance() {
        // The untouched third factor cancels from the trace distance, so the
        // bound can be checked exactly on the driven factors alone.
        let n = 2usize;
        let geom = Arc::new(LatticeGeometry::ring(2 * n, 4));
        let drv =
            SiteChannelDriver::uniform_reset(geom.clone(), &psi_plus_ket(2)).unwrap();
        let chain = pair_chain_ket(n, 2);
        let start = crate::qstate::tensor_kets(&[&chain, &chain]);
        let psi = psi_plus_ket(2);
        let target = crate::qstate::tensor_kets(&[&psi, &psi, &psi, &psi]);
        let rho0 = outer(&start, &start);
        let bridge = SptBridge::new(n, trivial_rep(), pauli_projective_rep());
        for t in [0.5, 1.5, 4.0] {
            let ev = drv.closed_form_evolve(&rho0, t).unwrap();
            let d = trace_distance(&ev, &outer(&target, &target));
            assert!(
                d <= bridge.distance_bound(t) + 1e-10,
                "t = {t}: exact {d} vs bound {}",
                bridge.distance_bound(t)
            );
        }
    }

    #[test]
    fn untouched_third_factor_is_exactly_preserved() {
        let bridge = SptBridge::new(1, trivial_rep(), pauli_projective_rep());
        let drv = bridge.driver().unwrap();
        let rho0 = outer(&bridge.phi0(), &bridge.phi0());
        let ev = drv.closed_form_evolve(&rho0, 2.0).unwrap();
        let geom = bridge.geometry();
        let third = crate::qstate::partial_trace(&ev, &[2], &geom).unwrap();
        let third0 = crate::qstate::partial_trace(&rho0, &[2], &geom).unwrap();
        assert!(trace_distance(&third, &third0) < 1e-12);
        let _ = fidelity_pure;
    }
}
