//! Drivers built from idempotent single-site channels `T_i`, with the exact
//! closed-form semigroup
//!
//! ```text
//!   e^(t sum_i (T_i - id)) = prod_i [ (1 - e^-t) T_i + e^-t id ]
//! ```
//!
//! which holds because the `T_i` are idempotent and commute across sites.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lindblad::{Lindbladian, LindbladTerm};
use crate::qstate::{
    apply_local_left, apply_local_right, dagger, outer, C64, CMat, CVec, LatticeGeometry,
    SupportMap,
};

/// An idempotent CPTP map on one site, in Kraus form.
#[derive(Debug, Clone)]
pub struct SiteChannel {
    pub kraus: Vec<CMat>,
}

impl SiteChannel {
    /// `T(rho) = Tr[rho] |psi><psi|`: Kraus operators `|psi><k|`.
    pub fn reset_to(psi: &CVec) -> Self {
        let d = psi.len();
        let kraus = (0..d)
            .map(|k| {
                let mut m = CMat::zeros((d, d));
                for r in 0..d {
                    m[(r, k)] = psi[r];
                }
                m
            })
            .collect();
        SiteChannel { kraus }
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let d = self.dim();
        let mut out = CMat::zeros((d, d));
        for k in &self.kraus {
            out = out + k.dot(rho).dot(&dagger(k));
        }
        out
    }

    pub fn apply_dual(&self, a: &CMat) -> CMat {
        let d = self.dim();
        let mut out = CMat::zeros((d, d));
        for k in &self.kraus {
            out = out + dagger(k).dot(a).dot(k);
        }
        out
    }

    /// `|| sum_k K_k^+ K_k - I ||`, zero for a trace-preserving channel.
    pub fn tp_defect(&self) -> f64 {
        let d = self.dim();
        let mut s = CMat::zeros((d, d));
        for k in &self.kraus {
            s = s + dagger(k).dot(k);
        }
        crate::qstate::operator_norm(&(s - crate::qstate::identity(d)))
    }

    /// Residual of `T o T = T` as a superoperator identity on the site.
    pub fn idempotence_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut e = CMat::zeros((d, d));
                e[(i, j)] = C64::new(1.0, 0.0);
                let once = self.apply(&e);
                let twice = self.apply(&once);
                worst = worst.max(crate::qstate::operator_norm(&(twice - once)));
            }
        }
        worst
    }
}

/// A sum of single-site driver terms `L = sum_i (T_i - id)` over chosen sites.
#[derive(Debug, Clone)]
pub struct SiteChannelDriver {
    pub geometry: Arc<LatticeGeometry>,
    pub channels: Vec<(usize, SiteChannel)>,
}

impl SiteChannelDriver {
    /// The same reset channel on every site of the geometry.
    pub fn uniform_reset(geometry: Arc<LatticeGeometry>, psi: &CVec) -> Result<Self> {
        let sites: Vec<usize> = (0..geometry.n_sites()).collect();
        Self::reset_on_sites(geometry, psi, &sites)
    }

    pub fn reset_on_sites(
        geometry: Arc<LatticeGeometry>,
        psi: &CVec,
        sites: &[usize],
    ) -> Result<Self> {
        for &s in sites {
            if geometry.local_dim(s) != psi.len() {
                return Err(Error::DimensionMismatch {
                    expected: geometry.local_dim(s),
                    got: psi.len(),
                });
            }
        }
        let channels = sites
            .iter()
            .map(|&s| (s, SiteChannel::reset_to(psi)))
            .collect();
        Ok(SiteChannelDriver { geometry, channels })
    }

    pub fn from_channels(
        geometry: Arc<LatticeGeometry>,
        channels: Vec<(usize, SiteChannel)>,
    ) -> Result<Self> {
        for (s, c) in &channels {
            if geometry.local_dim(*s) != c.dim() {
                return Err(Error::DimensionMismatch {
                    expected: geometry.local_dim(*s),
                    got: c.dim(),
                });
            }
        }
        Ok(SiteChannelDriver { geometry, channels })
    }

    /// The Lindbladian `sum_i (T_i - id)`: one term per site with the Kraus
    /// operators as jumps (so `sum_k K^+ K = I` turns the anticommutator part
    /// into `-id`).
    pub fn lindbladian(&self) -> Result<Lindbladian> {
        let terms = self
            .channels
            .iter()
            .map(|(s, c)| LindbladTerm::new(vec![*s], None, c.kraus.clone()))
            .collect();
        Lindbladian::new(self.geometry.clone(), terms)
    }

    fn site_map(&self, site: usize) -> Result<SupportMap> {
        SupportMap::new(&self.geometry, &[site])
    }

    fn apply_site_channel(&self, site: usize, c: &SiteChannel, rho: &CMat) -> Result<CMat> {
        let map = self.site_map(site)?;
        let d = rho.nrows();
        let mut out = CMat::zeros((d, d));
        for k in &c.kraus {
            let kr = apply_local_left(k, &map, rho);
            out = out + apply_local_right(&kr, &dagger(k), &map);
        }
        Ok(out)
    }

    fn apply_site_channel_dual(&self, site: usize, c: &SiteChannel, a: &CMat) -> Result<CMat> {
        let map = self.site_map(site)?;
        let d = a.nrows();
        let mut out = CMat::zeros((d, d));
        for k in &c.kraus {
            let ak = apply_local_right(a, k, &map);
            out = out + apply_local_left(&dagger(k), &map, &ak);
        }
        Ok(out)
    }

    /// Exact closed-form evolution: per site,
    /// `rho <- e^-t rho + (1 - e^-t) T_i(rho)`.
    pub fn closed_form_evolve(&self, rho: &CMat, t: f64) -> Result<CMat> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let q = C64::new((-t).exp(), 0.0);
        let p = C64::new(1.0, 0.0) - q;
        let mut out = rho.clone();
        for (site, c) in &self.channels {
            let tc = self.apply_site_channel(*site, c, &out)?;
            out = out.mapv(|z| q * z) + tc.mapv(|z| p * z);
        }
        Ok(out)
    }

    /// Closed-form Heisenberg evolution of an operator (dual channel).
    pub fn closed_form_heisenberg(&self, a: &CMat, t: f64) -> Result<CMat> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let q = C64::new((-t).exp(), 0.0);
        let p = C64::new(1.0, 0.0) - q;
        let mut out = a.clone();
        for (site, c) in &self.channels {
            let tc = self.apply_site_channel_dual(*site, c, &out)?;
            out = out.mapv(|z| q * z) + tc.mapv(|z| p * z);
        }
        Ok(out)
    }

    /// The `t -> infinity` limit `T_Lambda(rho)`: every channel applied once.
    pub fn fixed_point(&self, rho: &CMat) -> Result<CMat> {
        let mut out = rho.clone();
        for (site, c) in &self.channels {
            out = self.apply_site_channel(*site, c, &out)?;
        }
        Ok(out)
    }

    /// The fast-mixing distance bound `1 - (1 - e^-t)^m`, `m` = number of
    /// driven sites. Measured half trace distances sit at or below this.
    pub fn distance_bound(&self, t: f64) -> f64 {
        let m = self.channels.len() as i32;
        1.0 - (1.0 - (-t).exp()).powi(m)
    }
}

/// The product-state driver toward `|psi>` on every site.
pub fn product_driver(geometry: Arc<LatticeGeometry>, psi: &CVec) -> Result<Lindbladian> {
    SiteChannelDriver::uniform_reset(geometry, psi)?.lindbladian()
}

/// Convenience: the pure product target `(|psi><psi|)^(x N)`.
pub fn product_state(geometry: &LatticeGeometry, psi: &CVec) -> CMat {
    let kets: Vec<&CVec> = (0..geometry.n_sites()).map(|_| psi).collect();
    let full = crate::qstate::tensor_kets(&kets);
    outer(&full, &full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::NumericPolicy;
    use crate::qstate::{basis_ket, trace_distance, trace_norm};
    use crate::test_util::{random_density, random_ket, rng};

    #[test]
    fn reset_channel_is_idempotent_and_tp() {
        let mut r = rng(101);
        let psi = random_ket(3, &mut r);
        let c = SiteChannel::reset_to(&psi);
        assert!(c.tp_defect() < 1e-12);
        assert!(c.idempotence_defect() < 1e-12);
    }

    #[test]
    fn closed_form_at_zero_is_identity() {
        let mut r = rng(102);
        let g = Arc::new(LatticeGeometry::chain(3, 2));
        let drv = SiteChannelDriver::uniform_reset(g, &basis_ket(2, 0)).unwrap();
        let rho = random_density(8, &mut r);
        let out = drv.closed_form_evolve(&rho, 0.0).unwrap();
        assert!(trace_distance(&out, &rho) < 1e-13);
    }

    #[test]
    fn long_time_limit_is_product_target() {
        let mut r = rng(103);
        let g = Arc::new(LatticeGeometry::chain(3, 2));
        let psi = random_ket(2, &mut r);
        let drv = SiteChannelDriver::uniform_reset(g.clone(), &psi).unwrap();
        let rho = random_density(8, &mut r);
        let fp = drv.fixed_point(&rho).unwrap();
        let target = product_state(&g, &psi);
        assert!(trace_distance(&fp, &target) < 1e-11);
        let evolved = drv.closed_form_evolve(&rho, 60.0).unwrap();
        assert!(trace_distance(&evolved, &target) < 1e-11);
    }

    #[test]
    fn closed_form_matches_dense_expm() {
        let mut r = rng(104);
        let g = Arc::new(LatticeGeometry::chain(3, 2));
        let psi = random_ket(2, &mut r);
        let drv = SiteChannelDriver::uniform_reset(g, &psi).unwrap();
        let lb = drv.lindbladian().unwrap();
        let rho = random_density(8, &mut r);
        let t = 2.0;
        let closed = drv.closed_form_evolve(&rho, t).unwrap();
        let dense = crate::lindblad::evolve_expm(&lb, &rho, t, &NumericPolicy::default()).unwrap();
        assert!(
            trace_distance(&closed, &dense) < 1e-9,
            "closed form vs expm: {}",
            trace_distance(&closed, &dense)
        );
    }

    #[test]
    fn distance_bound_is_exact_for_orthogonal_product_start() {
        // Starting orthogonal to the target on every site, the half trace
        // distance to the fixed point equals 1 - (1 - e^-t)^N exactly.
        let g = Arc::new(LatticeGeometry::chain(4, 2));
        let drv = SiteChannelDriver::uniform_reset(g.clone(), &basis_ket(2, 0)).unwrap();
        let ones = crate::qstate::tensor_kets(&[&basis_ket(2, 1); 4]);
        let rho0 = outer(&ones, &ones);
        let target = product_state(&g, &basis_ket(2, 0));
        for t in [0.5, 1.0, 2.5] {
            let ev = drv.closed_form_evolve(&rho0, t).unwrap();
            let half_dist = 0.5 * trace_norm(&(ev - &target));
            assert!(
                (half_dist - drv.distance_bound(t)).abs() < 1e-9,
                "t = {t}: {half_dist} vs bound {}",
                drv.distance_bound(t)
            );
        }
    }

    #[test]
    fn dual_closed_form_satisfies_duality() {
        let mut r = rng(105);
        let g = Arc::new(LatticeGeometry::chain(2, 2));
        let psi = random_ket(2, &mut r);
        let drv = SiteChannelDriver::uniform_reset(g, &psi).unwrap();
        let rho = random_density(4, &mut r);
        let a = crate::test_util::random_matrix(4, &mut r);
        let t = 0.9;
        let lhs = crate::qstate::trace(&drv.closed_form_heisenberg(&a, t).unwrap().dot(&rho));
        let rhs = crate::qstate::trace(&a.dot(&drv.closed_form_evolve(&rho, t).unwrap()));
        assert!((lhs - rhs).norm() < 1e-10);
    }
}
