use std::sync::Arc;

use crate::error::{Error, Result};
use crate::qstate::{CMat, CVec, LatticeGeometry, LocalOperator};

type TermGen = dyn Fn(f64) -> Vec<LocalOperator> + Send + Sync;

/// A smooth family `H(s) = sum h_(j,alpha)(s)`, `s` in `[0, 1]`, assumed
/// uniformly gapped with a nondegenerate ground state on the shipped
/// examples.
#[derive(Clone)]
pub struct HamiltonianPath {
    pub name: String,
    geometry: Arc<LatticeGeometry>,
    gen: Arc<TermGen>,
    /// Tolerance below which the gap counts as collapsed.
    pub gap_tol: f64,
}

impl std::fmt::Debug for HamiltonianPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HamiltonianPath")
            .field("name", &self.name)
            .field("sites", &self.geometry.n_sites())
            .finish()
    }
}

impl HamiltonianPath {
    pub fn new(
        name: impl Into<String>,
        geometry: Arc<LatticeGeometry>,
        gen: impl Fn(f64) -> Vec<LocalOperator> + Send + Sync + 'static,
    ) -> Self {
        HamiltonianPath {
            name: name.into(),
            geometry,
            gen: Arc::new(gen),
            gap_tol: 1e-6,
        }
    }

    pub fn geometry(&self) -> &Arc<LatticeGeometry> {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        self.geometry.total_dim()
    }

    pub fn terms(&self, s: f64) -> Vec<LocalOperator> {
        (self.gen)(s)
    }

    /// Central-difference derivative terms `h'_(j,alpha)(s)`, assuming the
    /// term list keeps its supports along the path.
    pub fn derivative_terms(&self, s: f64, h_s: f64) -> Vec<LocalOperator> {
        let plus = self.terms(s + h_s);
        let minus = self.terms(s - h_s);
        assert_eq!(plus.len(), minus.len(), "term structure must be stable");
        plus.into_iter()
            .zip(minus)
            .map(|(p, m)| {
                assert_eq!(p.support, m.support);
                let scale = crate::qstate::C64::new(1.0 / (2.0 * h_s), 0.0);
                LocalOperator::new(p.support, (p.matrix - m.matrix).mapv(|z| z * scale))
            })
            .collect()
    }

    pub fn hamiltonian(&self, s: f64) -> Result<CMat> {
        let d = self.dim();
        let mut h = CMat::zeros((d, d));
        for t in self.terms(s) {
            t.validate(&self.geometry)?;
            h = h + t.embed(&self.geometry)?;
        }
        Ok(h)
    }

    pub fn hamiltonian_derivative(&self, s: f64, h_s: f64) -> Result<CMat> {
        let d = self.dim();
        let mut h = CMat::zeros((d, d));
        for t in self.derivative_terms(s, h_s) {
            h = h + t.embed(&self.geometry)?;
        }
        Ok(h)
    }

    /// Full-space Hamiltonian restricted to the terms fully supported in
    /// `region` (identity elsewhere).
    pub fn restricted_hamiltonian(&self, s: f64, region: &[usize]) -> Result<CMat> {
        let d = self.dim();
        let mut h = CMat::zeros((d, d));
        for t in self.terms(s) {
            if t.supported_in(region) {
                h = h + t.embed(&self.geometry)?;
            }
        }
        Ok(h)
    }

    /// The restricted path itself, re-indexed to the sub-geometry of `region`.
    pub fn restricted_path(&self, region: &[usize]) -> Result<HamiltonianPath> {
        let sub = Arc::new(self.geometry.sub_geometry(region)?);
        let gen = self.gen.clone();
        let region: Vec<usize> = {
            let mut r = region.to_vec();
            r.sort_unstable();
            r
        };
        let region2 = region.clone();
        Ok(HamiltonianPath {
            name: format!("{}|{:?}", self.name, region),
            geometry: sub,
            gen: Arc::new(move |s| {
                gen(s)
                    .into_iter()
                    .filter(|t| t.supported_in(&region2))
                    .map(|t| t.restrict_to(&region2).expect("support inside region"))
                    .collect()
            }),
            gap_tol: self.gap_tol,
        })
    }

    /// Spectral gap `E_1 - E_0` at `s`.
    pub fn gap(&self, s: f64) -> Result<f64> {
        let h = self.hamiltonian(s)?;
        let w = crate::qstate::eigvalsh(&h)?;
        let gap = w[1] - w[0];
        if gap < self.gap_tol {
            return Err(Error::GapCollapse {
                s,
                gap,
                tol: self.gap_tol,
            });
        }
        Ok(gap)
    }

    pub fn gap_profile(&self, grid: &[f64]) -> Result<Vec<f64>> {
        grid.iter().map(|&s| self.gap(s)).collect()
    }

    pub fn uniform_gap(&self, n_grid: usize) -> Result<f64> {
        let mut lambda = f64::INFINITY;
        for i in 0..=n_grid {
            let s = i as f64 / n_grid as f64;
            lambda = lambda.min(self.gap(s)?);
        }
        Ok(lambda)
    }

    pub fn ground_state(&self, s: f64) -> Result<CVec> {
        let h = self.hamiltonian(s)?;
        let (_, v) = crate::qstate::eigh(&h)?;
        Ok(v.column(0).to_owned())
    }

    pub fn ground_projector(&self, s: f64) -> Result<CMat> {
        let h = self.hamiltonian(s)?;
        crate::qstate::low_eigenspace_projector(&h, 1)
    }
}

/// The shipped example paths.
pub mod paths {
    use super::*;
    use crate::qstate::C64;
    use ndarray::array;

    fn zmat() -> CMat {
        array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]
        ]
    }

    fn xmat() -> CMat {
        array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        ]
    }

    /// `H(s) = -(1-s) Z - s X` on one qubit; gap `2 sqrt((1-s)^2 + s^2)`.
    pub fn single_qubit() -> HamiltonianPath {
        let geom = Arc::new(LatticeGeometry::sites(vec![2]));
        HamiltonianPath::new("single-qubit", geom, |s| {
            let m = zmat().mapv(|z| z * C64::new(-(1.0 - s), 0.0))
                + xmat().mapv(|z| z * C64::new(-s, 0.0));
            vec![LocalOperator::new(vec![0], m)]
        })
    }

    /// The single-qubit path copied onto `n` independent sites.
    pub fn uncoupled_chain(n: usize) -> HamiltonianPath {
        let geom = Arc::new(LatticeGeometry::chain(n, 2));
        HamiltonianPath::new(format!("uncoupled-{n}"), geom, move |s| {
            (0..n)
                .map(|i| {
                    let m = zmat().mapv(|z| z * C64::new(-(1.0 - s), 0.0))
                        + xmat().mapv(|z| z * C64::new(-s, 0.0));
                    LocalOperator::new(vec![i], m)
                })
                .collect()
        })
    }

    /// Transverse-field Ising chain deep in the paramagnetic regime, open
    /// boundary: `H(s) = -h(s) sum X_i - j sum Z_i Z_(i+1)` with
    /// `h(s) = h0 + (h1 - h0) s >> j`.
    pub fn paramagnetic_chain(n: usize, h0: f64, h1: f64, j: f64) -> HamiltonianPath {
        let geom = Arc::new(LatticeGeometry::chain(n, 2));
        HamiltonianPath::new(format!("paramagnetic-chain-{n}"), geom, move |s| {
            let h = h0 + (h1 - h0) * s;
            let mut terms = vec![];
            for i in 0..n {
                terms.push(LocalOperator::new(
                    vec![i],
                    xmat().mapv(|z| z * C64::new(-h, 0.0)),
                ));
            }
            let zz = ndarray::linalg::kron(&zmat(), &zmat());
            for i in 0..n - 1 {
                terms.push(LocalOperator::new(
                    vec![i, i + 1],
                    zz.mapv(|z| z * C64::new(-j, 0.0)),
                ));
            }
            terms
        })
    }

    /// The same model on a periodic ring.
    pub fn paramagnetic_ring(n: usize, h0: f64, h1: f64, j: f64) -> HamiltonianPath {
        let geom = Arc::new(LatticeGeometry::ring(n, 2));
        HamiltonianPath::new(format!("paramagnetic-ring-{n}"), geom, move |s| {
            let h = h0 + (h1 - h0) * s;
            let mut terms = vec![];
            for i in 0..n {
                terms.push(LocalOperator::new(
                    vec![i],
                    xmat().mapv(|z| z * C64::new(-h, 0.0)),
                ));
            }
            let zz = ndarray::linalg::kron(&zmat(), &zmat());
            for i in 0..n {
                terms.push(LocalOperator::new(
                    vec![i, (i + 1) % n],
                    zz.mapv(|z| z * C64::new(-j, 0.0)),
                ));
            }
            terms
        })
    }
}
