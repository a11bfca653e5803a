//! Lindbladian construction and time evolution.
//!
//! A Lindbladian is a sum of local terms, each contributing
//!
//! ```text
//!   L_X(rho) = -i [H_X, rho] + sum_j ( J_j rho J_j^+ - 1/2 {J_j^+ J_j, rho} )
//! ```
//!
//! with every operator supported on the term's site set. `apply` acts
//! matrix-free through the local-operator kernels, so it scales to the full
//! dense guard; the assembled `D^2 x D^2` superoperator is available below
//! [`NumericPolicy::superop_guard`] and is the oracle the matrix-free path is
//! tested against.

mod evolve;
mod expm;
pub mod ode;
mod superop;

pub use evolve::{
    evolve_expm, evolve_integrate, fit_convergence, fit_distances, heisenberg_evolve,
    ConvergenceReport, Trajectory,
};
pub use expm::expm;
pub use superop::{assemble_superoperator, choi_cp_check, choi_matrix, ChoiReport};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::qstate::{
    apply_local_left, apply_local_right, dagger, is_hermitian, operator_norm, C64, CMat,
    LatticeGeometry, SupportMap,
};

/// One local term: a Hermitian Hamiltonian part plus jump operators, all on
/// the same support.
#[derive(Debug, Clone)]
pub struct LindbladTerm {
    pub support: Vec<usize>,
    pub hamiltonian: Option<CMat>,
    pub jumps: Vec<CMat>,
}

impl LindbladTerm {
    pub fn new(support: Vec<usize>, hamiltonian: Option<CMat>, jumps: Vec<CMat>) -> Self {
        let mut s = support;
        s.sort_unstable();
        LindbladTerm {
            support: s,
            hamiltonian,
            jumps,
        }
    }

    pub fn hamiltonian_only(support: Vec<usize>, h: CMat) -> Self {
        Self::new(support, Some(h), vec![])
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledTerm {
    pub map: SupportMap,
    pub h: Option<CMat>,
    pub jumps: Vec<CMat>,
    pub jdags: Vec<CMat>,
    /// sum_j J_j^+ J_j
    pub ksum: CMat,
}

/// A sum of local terms on a lattice.
#[derive(Debug, Clone)]
pub struct Lindbladian {
    geometry: Arc<LatticeGeometry>,
    terms: Vec<LindbladTerm>,
    compiled: Vec<CompiledTerm>,
}

impl Lindbladian {
    pub fn new(geometry: impl Into<Arc<LatticeGeometry>>, terms: Vec<LindbladTerm>) -> Result<Self> {
        let geometry = geometry.into();
        let mut compiled = Vec::with_capacity(terms.len());
        for term in &terms {
            let map = SupportMap::new(&geometry, &term.support)?;
            let d = map.sup_dim;
            if let Some(h) = &term.hamiltonian {
                if h.nrows() != d || h.ncols() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: h.nrows(),
                    });
                }
                if !is_hermitian(h, 1e-12) {
                    return Err(Error::Invalid(format!(
                        "Hamiltonian part on {:?} is not Hermitian within 1e-12",
                        term.support
                    )));
                }
            }
            for j in &term.jumps {
                if j.nrows() != d || j.ncols() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: j.nrows(),
                    });
                }
            }
            let jdags: Vec<CMat> = term.jumps.iter().map(dagger).collect();
            let mut ksum = CMat::zeros((d, d));
            for (j, jd) in term.jumps.iter().zip(jdags.iter()) {
                ksum = ksum + jd.dot(j);
            }
            compiled.push(CompiledTerm {
                map,
                h: term.hamiltonian.clone(),
                jumps: term.jumps.clone(),
                jdags,
                ksum,
            });
        }
        Ok(Lindbladian {
            geometry,
            terms,
            compiled,
        })
    }

    pub fn zero(geometry: impl Into<Arc<LatticeGeometry>>) -> Self {
        Lindbladian {
            geometry: geometry.into(),
            terms: vec![],
            compiled: vec![],
        }
    }

    pub fn geometry(&self) -> &Arc<LatticeGeometry> {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        self.geometry.total_dim()
    }

    pub fn terms(&self) -> &[LindbladTerm] {
        &self.terms
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest support diameter over the terms.
    pub fn locality_radius(&self) -> usize {
        self.terms
            .iter()
            .map(|t| self.geometry.set_diameter(&t.support))
            .max()
            .unwrap_or(0)
    }

    /// Upper estimate of the 1->1 norm: `sum_X 2 (||H_X|| + sum_j ||J_j||^2)`.
    /// Used for error budgets only, never for correctness.
    pub fn one_norm_estimate(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let h = t.hamiltonian.as_ref().map(operator_norm).unwrap_or(0.0);
                let j: f64 = t.jumps.iter().map(|j| operator_norm(j).powi(2)).sum();
                2.0 * (h + j)
            })
            .sum()
    }

    /// Schroedinger-picture generator action: `d rho / dt`.
    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        let d = self.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: rho.nrows(),
            });
        }
        let mut out = CMat::zeros((d, d));
        let i = C64::new(0.0, 1.0);
        for term in &self.compiled {
            if let Some(h) = &term.h {
                let hr = apply_local_left(h, &term.map, rho);
                let rh = apply_local_right(rho, h, &term.map);
                out = out + (hr - rh).mapv(|z| -i * z);
            }
            for (j, jd) in term.jumps.iter().zip(term.jdags.iter()) {
                let jr = apply_local_left(j, &term.map, rho);
                out = out + apply_local_right(&jr, jd, &term.map);
            }
            if !term.jumps.is_empty() {
                let kr = apply_local_left(&term.ksum, &term.map, rho);
                let rk = apply_local_right(rho, &term.ksum, &term.map);
                out = out - (kr + rk).mapv(|z| 0.5 * z);
            }
        }
        Ok(out)
    }

    /// Heisenberg-picture generator action:
    /// `L*(A) = i [H, A] + sum_j ( J^+ A J - 1/2 {J^+ J, A} )`.
    pub fn apply_adjoint(&self, a: &CMat) -> Result<CMat> {
        let d = self.dim();
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a.nrows(),
            });
        }
        let mut out = CMat::zeros((d, d));
        let i = C64::new(0.0, 1.0);
        for term in &self.compiled {
            if let Some(h) = &term.h {
                let ha = apply_local_left(h, &term.map, a);
                let ah = apply_local_right(a, h, &term.map);
                out = out + (ha - ah).mapv(|z| i * z);
            }
            for (j, jd) in term.jumps.iter().zip(term.jdags.iter()) {
                let aj = apply_local_right(a, j, &term.map);
                out = out + apply_local_left(jd, &term.map, &aj);
            }
            if !term.jumps.is_empty() {
                let ka = apply_local_left(&term.ksum, &term.map, a);
                let ak = apply_local_right(a, &term.ksum, &term.map);
                out = out - (ka + ak).mapv(|z| 0.5 * z);
            }
        }
        Ok(out)
    }

    /// Keep only the terms fully supported in `region`.
    pub fn restricted_to(&self, region: &[usize]) -> Lindbladian {
        let terms: Vec<LindbladTerm> = self
            .terms
            .iter()
            .filter(|t| t.support.iter().all(|s| region.contains(s)))
            .cloned()
            .collect();
        Lindbladian::new(self.geometry.clone(), terms).expect("restriction preserves validity")
    }

    /// Sum of two Lindbladians on the same geometry.
    pub fn add(&self, other: &Lindbladian) -> Result<Lindbladian> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Lindbladian::new(self.geometry.clone(), terms)
    }

    /// Rate-scaled copy: `r * L` (Hamiltonian scaled by r, jumps by sqrt(r)).
    pub fn scaled(&self, r: f64) -> Lindbladian {
        let terms: Vec<LindbladTerm> = self
            .terms
            .iter()
            .map(|t| {
                LindbladTerm::new(
                    t.support.clone(),
                    t.hamiltonian.as_ref().map(|h| h.mapv(|z| z * r)),
                    t.jumps.iter().map(|j| j.mapv(|z| z * r.sqrt())).collect(),
                )
            })
            .collect();
        Lindbladian::new(self.geometry.clone(), terms).expect("scaling preserves validity")
    }
}
