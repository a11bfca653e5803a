use crate::error::Result;
use crate::lindblad::{heisenberg_evolve, Lindbladian};
use crate::models::SiteChannelDriver;
use crate::policy::NumericPolicy;
use crate::qstate::{CMat, LocalOperator};

/// Heisenberg evolution of an operator under the Lindbladian restricted to
/// the `ell`-neighborhood of its support.
#[derive(Debug, Clone)]
pub struct FattenedOperator {
    pub base_support: Vec<usize>,
    pub ell: usize,
    pub t: f64,
    /// `S_ell = { x : d(x, supp A) <= ell }`.
    pub region: Vec<usize>,
    /// Full-space matrix of the fattened operator.
    pub matrix: CMat,
}

/// `fat_ell(A) = e^(t L*_(S_ell))(A)`.
pub fn fatten(
    a: &LocalOperator,
    lb: &Lindbladian,
    t: f64,
    ell: usize,
    policy: &NumericPolicy,
) -> Result<FattenedOperator> {
    a.validate(lb.geometry())?;
    let region = lb.geometry().fattened(&a.support, ell);
    let restricted = lb.restricted_to(&region);
    let full = a.embed(lb.geometry())?;
    let matrix = heisenberg_evolve(&restricted, &full, t, policy)?;
    Ok(FattenedOperator {
        base_support: a.support.clone(),
        ell,
        t,
        region,
        matrix,
    })
}

/// Fast path for reset-channel drivers (depolarizing and friends): the dual
/// closed form over the channels inside the region, at rate `rate`.
pub fn fatten_with_driver(
    a: &LocalOperator,
    driver: &SiteChannelDriver,
    rate: f64,
    t: f64,
    ell: usize,
) -> Result<FattenedOperator> {
    let geom = &driver.geometry;
    a.validate(geom)?;
    let region = geom.fattened(&a.support, ell);
    let channels: Vec<_> = driver
        .channels
        .iter()
        .filter(|(s, _)| region.contains(s))
        .cloned()
        .collect();
    let restricted = SiteChannelDriver::from_channels(geom.clone(), channels)?;
    let full = a.embed(geom)?;
    let matrix = restricted.closed_form_heisenberg(&full, rate * t)?;
    Ok(FattenedOperator {
        base_support: a.support.clone(),
        ell,
        t,
        region,
        matrix,
    })
}

impl FattenedOperator {
    /// `|| fat - Pi_region(fat) ||`: how far the result sits from its
    /// declared support (zero up to roundoff by construction).
    pub fn offsupport_defect(
        &self,
        geom: &crate::qstate::LatticeGeometry,
    ) -> Result<f64> {
        let comp_dim: usize = (0..geom.n_sites())
            .filter(|s| !self.region.contains(s))
            .map(|s| geom.local_dim(s))
            .product();
        let red = crate::qstate::partial_trace(&self.matrix, &self.region, geom)?;
        let red = red.mapv(|z| z / crate::qstate::C64::new(comp_dim as f64, 0.0));
        let back = crate::qstate::embed(&red, &self.region, geom)?;
        Ok(crate::qstate::operator_norm(&(&self.matrix - &back)))
    }
}
