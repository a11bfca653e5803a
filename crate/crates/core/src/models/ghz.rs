//! GHZ families on rings of qudits and the level-condensation channel that
//! drives GHZ_4 to GHZ_2 fast.

use std::sync::Arc;

use ndarray::Array1;

use super::product::{SiteChannel, SiteChannelDriver};
use crate::error::Result;
use crate::qstate::{C64, CMat, CVec, LatticeGeometry};

/// The GHZ family on `n_sites` qudits of dimension `n_levels`, with basis
/// `|psi_beta> ~ sum_alpha w^(alpha beta) |alpha...alpha>`.
#[derive(Debug, Clone)]
pub struct GhzFamily {
    pub n_levels: usize,
    pub n_sites: usize,
}

impl GhzFamily {
    pub fn new(n_levels: usize, n_sites: usize) -> Self {
        assert!(n_levels >= 2 && n_sites >= 1);
        GhzFamily { n_levels, n_sites }
    }

    pub fn geometry(&self) -> Arc<LatticeGeometry> {
        Arc::new(LatticeGeometry::ring(self.n_sites, self.n_levels))
    }

    fn all_equal_index(&self, alpha: usize) -> usize {
        let mut idx = 0usize;
        for _ in 0..self.n_sites {
            idx = idx * self.n_levels + alpha;
        }
        idx
    }

    /// `|alpha...alpha>`.
    pub fn all_equal_ket(&self, alpha: usize) -> CVec {
        let dim = self.n_levels.pow(self.n_sites as u32);
        let mut v = Array1::zeros(dim);
        v[self.all_equal_index(alpha)] = C64::new(1.0, 0.0);
        v
    }

    /// `|psi_beta> = (1/sqrt n) sum_alpha w^(alpha beta) |alpha...alpha>`.
    pub fn basis_state(&self, beta: usize) -> CVec {
        let n = self.n_levels;
        let dim = n.pow(self.n_sites as u32);
        let mut v = Array1::zeros(dim);
        let norm = 1.0 / (n as f64).sqrt();
        for alpha in 0..n {
            let phase = 2.0 * std::f64::consts::PI * (alpha * beta) as f64 / n as f64;
            v[self.all_equal_index(alpha)] = C64::from_polar(norm, phase);
        }
        v
    }

    /// The standard GHZ state `|psi_0>`.
    pub fn ghz(&self) -> CVec {
        self.basis_state(0)
    }
}

/// A GHZ-type ket over arbitrary levels embedded in local dimension `d`:
/// `(1/sqrt m) sum_j |l_j ... l_j>`.
pub fn ghz_ket_levels(levels: &[usize], n_sites: usize, d: usize) -> CVec {
    let dim = d.pow(n_sites as u32);
    let mut v = Array1::zeros(dim);
    let norm = 1.0 / (levels.len() as f64).sqrt();
    for &l in levels {
        assert!(l < d);
        let mut idx = 0usize;
        for _ in 0..n_sites {
            idx = idx * d + l;
        }
        v[idx] = C64::new(norm, 0.0);
    }
    v
}

/// The single-site condensation channel on a 4-level site:
/// `T(rho) = P rho P + X^+ (1-P) rho (1-P) X` with `P = |0><0| + |2><2|` and
/// `X` the mod-4 ladder. Folds the odd levels onto the even ones.
pub fn condensation_channel() -> SiteChannel {
    let d = 4usize;
    let mut p = CMat::zeros((d, d));
    p[(0, 0)] = C64::new(1.0, 0.0);
    p[(2, 2)] = C64::new(1.0, 0.0);
    // X |j> = |j+1 mod 4>; the second Kraus operator is X^+ (1 - P).
    let mut x = CMat::zeros((d, d));
    for j in 0..d {
        x[((j + 1) % d, j)] = C64::new(1.0, 0.0);
    }
    let one_minus_p = crate::qstate::identity(d) - &p;
    let k2 = crate::qstate::dagger(&x).dot(&one_minus_p);
    SiteChannel {
        kraus: vec![p, k2],
    }
}

/// The condensation driver `L = sum_i (T_i - id)` on a ring of 4-level sites.
pub fn condensation_driver(n_sites: usize) -> Result<SiteChannelDriver> {
    let geom = Arc::new(LatticeGeometry::ring(n_sites, 4));
    let channels = (0..n_sites).map(|s| (s, condensation_channel())).collect();
    SiteChannelDriver::from_channels(geom, channels)
}
