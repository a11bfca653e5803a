//! Z_n quantum double (generalized toric code) on the edges of an Lx x Ly
//! torus: qudit clock/shift stabilizers, the n^2-dimensional ground space,
//! straight-line logical loop operators, and the combined ladder/diagonal
//! algebra on the ground-space coordinates.
//!
//! Conventions (documented once, used everywhere): horizontal edge `h(x, y)`
//! points in +x and has site index `2 (y Lx + x)`; vertical edge `v(x, y)`
//! points in +y and has index `2 (y Lx + x) + 1`. Stars multiply `X` on the
//! outgoing edges and `X^+` on the incoming ones; plaquettes multiply `Z` on
//! the edges traversed counterclockwise with positive orientation and `Z^+`
//! against it. Logical `Xbar` loops use `X^+` so that
//! `Xbar_x Zbar_y = w_n Zbar_y Xbar_x` holds as a matrix identity.

use std::sync::Arc;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::qstate::{inner, C64, CMat, CVec, LatticeGeometry, MonomialOp};

#[derive(Debug, Clone)]
pub struct QuantumDouble {
    pub n: usize,
    pub lx: usize,
    pub ly: usize,
    pub geometry: Arc<LatticeGeometry>,
    stars: Vec<MonomialOp>,
    plaquettes: Vec<MonomialOp>,
    /// Ground-space basis `|alpha, beta> = Xbar_x^alpha Xbar_y^beta |0,0>`,
    /// flat index `alpha + n * beta`.
    gs_basis: Vec<CVec>,
}

const KET_GUARD: usize = 400_000;

impl QuantumDouble {
    pub fn h_edge(&self, x: usize, y: usize) -> usize {
        2 * ((y % self.ly) * self.lx + (x % self.lx))
    }

    pub fn v_edge(&self, x: usize, y: usize) -> usize {
        2 * ((y % self.ly) * self.lx + (x % self.lx)) + 1
    }

    fn dims(&self) -> Vec<usize> {
        vec![self.n; 2 * self.lx * self.ly]
    }

    fn x_on(&self, edge: usize, pow: usize) -> MonomialOp {
        MonomialOp::site_pauli(&self.dims(), edge, pow % self.n, 0)
    }

    fn z_on(&self, edge: usize, pow: usize) -> MonomialOp {
        MonomialOp::site_pauli(&self.dims(), edge, 0, pow % self.n)
    }

    /// Star operator at vertex (x, y).
    pub fn star(&self, x: usize, y: usize) -> MonomialOp {
        let n = self.n;
        let a = self.x_on(self.h_edge(x, y), 1);
        let b = self.x_on(self.v_edge(x, y), 1);
        let c = self.x_on(self.h_edge((x + self.lx - 1) % self.lx, y), n - 1);
        let d = self.x_on(self.v_edge(x, (y + self.ly - 1) % self.ly), n - 1);
        a.compose(&b).compose(&c).compose(&d)
    }

    /// Plaquette operator with lower-left corner (x, y).
    pub fn plaquette(&self, x: usize, y: usize) -> MonomialOp {
        let n = self.n;
        let a = self.z_on(self.h_edge(x, y), 1);
        let b = self.z_on(self.v_edge((x + 1) % self.lx, y), 1);
        let c = self.z_on(self.h_edge(x, (y + 1) % self.ly), n - 1);
        let d = self.z_on(self.v_edge(x, y), n - 1);
        a.compose(&b).compose(&c).compose(&d)
    }

    /// Vertical dual loop at column `x`: `X^+` on all horizontal edges there.
    pub fn xbar_x(&self, x: usize) -> MonomialOp {
        let mut op = MonomialOp::identity(self.geometry.total_dim());
        for y in 0..self.ly {
            op = op.compose(&self.x_on(self.h_edge(x, y), self.n - 1));
        }
        op
    }

    /// Horizontal dual loop at row `y`: `X^+` on all vertical edges there.
    pub fn xbar_y(&self, y: usize) -> MonomialOp {
        let mut op = MonomialOp::identity(self.geometry.total_dim());
        for x in 0..self.lx {
            op = op.compose(&self.x_on(self.v_edge(x, y), self.n - 1));
        }
        op
    }

    /// Vertical direct loop at column `x`: `Z` on all vertical edges there.
    pub fn zbar_x(&self, x: usize) -> MonomialOp {
        let mut op = MonomialOp::identity(self.geometry.total_dim());
        for y in 0..self.ly {
            op = op.compose(&self.z_on(self.v_edge(x, y), 1));
        }
        op
    }

    /// Horizontal direct loop at row `y`: `Z` on all horizontal edges there.
    pub fn zbar_y(&self, y: usize) -> MonomialOp {
        let mut op = MonomialOp::identity(self.geometry.total_dim());
        for x in 0..self.lx {
            op = op.compose(&self.z_on(self.h_edge(x, y), 1));
        }
        op
    }

    /// Support (edge sites) of `xbar_x`.
    pub fn xbar_x_support(&self, x: usize) -> Vec<usize> {
        (0..self.ly).map(|y| self.h_edge(x, y)).collect()
    }

    pub fn xbar_y_support(&self, y: usize) -> Vec<usize> {
        (0..self.lx).map(|x| self.v_edge(x, y)).collect()
    }

    /// `Xbar_x^power` as a local operator on its straight-line support.
    pub fn xbar_x_local(&self, x: usize, power: usize) -> crate::qstate::LocalOperator {
        let shift = (self.n - power % self.n) % self.n;
        self.loop_local(self.xbar_x_support(x), shift)
    }

    /// `Xbar_y^power` as a local operator on its straight-line support.
    pub fn xbar_y_local(&self, y: usize, power: usize) -> crate::qstate::LocalOperator {
        let shift = (self.n - power % self.n) % self.n;
        self.loop_local(self.xbar_y_support(y), shift)
    }

    fn loop_local(&self, support: Vec<usize>, xpow: usize) -> crate::qstate::LocalOperator {
        // X^xpow on every support edge, tensored in ascending site order.
        let single = {
            let mut m = CMat::zeros((self.n, self.n));
            for j in 0..self.n {
                m[((j + xpow) % self.n, j)] = C64::new(1.0, 0.0);
            }
            m
        };
        let mut mat = crate::qstate::identity(1);
        let mut sorted = support.clone();
        sorted.sort_unstable();
        for _ in &sorted {
            mat = ndarray::linalg::kron(&mat, &single);
        }
        crate::qstate::LocalOperator::new(sorted, mat)
    }

    /// Project a ket onto the stabilizer ground space by applying every
    /// `(1/n) sum_k S^k` in turn.
    pub fn project_gs(&self, ket: &CVec) -> CVec {
        let mut out = ket.clone();
        let scale = C64::new(1.0 / self.n as f64, 0.0);
        for s in self.stars.iter().chain(self.plaquettes.iter()) {
            let mut acc = out.clone();
            let mut cur = out;
            for _ in 1..self.n {
                cur = s.apply_ket(&cur);
                acc = acc + &cur;
            }
            out = acc.mapv(|z| z * scale);
        }
        out
    }

    pub fn build(n: usize, lx: usize, ly: usize) -> Result<Self> {
        if n < 2 || lx < 2 || ly < 2 {
            return Err(Error::Invalid("need n >= 2 and a torus of at least 2 x 2".into()));
        }
        let total = n
            .checked_pow((2 * lx * ly) as u32)
            .ok_or_else(|| Error::Invalid("lattice too large".into()))?;
        if total > KET_GUARD {
            return Err(Error::DenseGuard {
                dim: total,
                guard: KET_GUARD,
                advice: "quantum double kets are held dense; shrink the torus",
            });
        }
        let geometry = Arc::new(LatticeGeometry::torus_edges(lx, ly, n));
        let mut qd = QuantumDouble {
            n,
            lx,
            ly,
            geometry,
            stars: vec![],
            plaquettes: vec![],
            gs_basis: vec![],
        };
        for y in 0..ly {
            for x in 0..lx {
                qd.stars.push(qd.star(x, y));
                qd.plaquettes.push(qd.plaquette(x, y));
            }
        }
        // |0,0>: the projected all-zero configuration, a +1 eigenvector of
        // both Zbar's.
        let zero = crate::qstate::basis_ket(total, 0);
        let mut v00 = qd.project_gs(&zero);
        let nrm = inner(&v00, &v00).re.sqrt();
        if nrm < 1e-12 {
            return Err(Error::Invalid("ground-space seed projected to zero".into()));
        }
        v00 = v00.mapv(|z| z / C64::new(nrm, 0.0));
        let xx = qd.xbar_x(0);
        let xy = qd.xbar_y(0);
        let mut basis = Vec::with_capacity(n * n);
        for beta in 0..n {
            let mut v_beta = v00.clone();
            for _ in 0..beta {
                v_beta = xy.apply_ket(&v_beta);
            }
            let mut v = v_beta;
            for alpha in 0..n {
                if alpha > 0 {
                    v = xx.apply_ket(&v);
                }
                basis.push(v.clone());
            }
        }
        // Reorder: we pushed (alpha fast, beta slow), matching alpha + n beta.
        qd.gs_basis = basis;
        Ok(qd)
    }

    pub fn gs_dim(&self) -> usize {
        self.n * self.n
    }

    pub fn gs_basis(&self) -> &[CVec] {
        &self.gs_basis
    }

    /// Coordinates of a ket in the ground-space basis.
    pub fn gs_coords(&self, ket: &CVec) -> CVec {
        Array1::from_iter(self.gs_basis.iter().map(|b| inner(b, ket)))
    }

    pub fn ket_from_coords(&self, coords: &CVec) -> CVec {
        let mut out = Array1::zeros(self.geometry.total_dim());
        for (c, b) in coords.iter().zip(self.gs_basis.iter()) {
            out = out + b.mapv(|z| *c * z);
        }
        out
    }

    /// Matrix elements of an operator on the ground-space basis.
    pub fn on_gs(&self, op: &MonomialOp) -> CMat {
        let d = self.gs_dim();
        let mut m = Array2::zeros((d, d));
        for (c, b) in self.gs_basis.iter().enumerate() {
            let moved = op.apply_ket(b);
            for (r, a) in self.gs_basis.iter().enumerate() {
                m[(r, c)] = inner(a, &moved);
            }
        }
        m
    }

    /// Rank of the span of projected seed kets; equals `n^2` when the seeds
    /// explore the full ground space.
    pub fn gs_rank_from_seeds(&self, seeds: &[CVec], tol: f64) -> Result<usize> {
        let projected: Vec<CVec> = seeds.iter().map(|s| self.project_gs(s)).collect();
        let m = projected.len();
        let mut gram = Array2::zeros((m, m));
        for i in 0..m {
            for j in 0..m {
                gram[(i, j)] = inner(&projected[i], &projected[j]);
            }
        }
        let w = crate::qstate::eigvalsh(&gram)?;
        Ok(w.iter().filter(|&&x| x > tol).count())
    }

    /// Energy of a ket in the frustration-free parent Hamiltonian
    /// `H = sum_s (1 - P_s)` over all stabilizer projectors.
    pub fn parent_energy(&self, ket: &CVec) -> f64 {
        let norm = inner(ket, ket).re;
        let mut e = 0.0;
        for s in self.stars.iter().chain(self.plaquettes.iter()) {
            // <P_s> = (1/n) sum_k <S^k>.
            let mut acc = C64::new(norm, 0.0);
            let mut cur = ket.clone();
            for _ in 1..self.n {
                cur = s.apply_ket(&cur);
                acc += inner(ket, &cur);
            }
            e += 1.0 - (acc.re / self.n as f64 / norm);
        }
        e
    }

    /// Dense parent Hamiltonian (projector form); n = 2 at 2 x 2 only.
    pub fn parent_hamiltonian_dense(&self) -> Result<CMat> {
        let d = self.geometry.total_dim();
        if d > 4096 {
            return Err(Error::DenseGuard {
                dim: d,
                guard: 4096,
                advice: "dense parent Hamiltonian is for the smallest torus",
            });
        }
        let eye = crate::qstate::identity(d);
        let mut h = CMat::zeros((d, d));
        let scale = C64::new(1.0 / self.n as f64, 0.0);
        for s in self.stars.iter().chain(self.plaquettes.iter()) {
            let mut proj = eye.clone();
            let mut cur = s.clone();
            for _ in 1..self.n {
                proj = proj + cur.to_dense();
                cur = s.compose(&cur);
            }
            h = h + (&eye - &proj.mapv(|z| z * scale));
        }
        Ok(h)
    }

    pub fn stars(&self) -> &[MonomialOp] {
        &self.stars
    }

    pub fn plaquettes(&self) -> &[MonomialOp] {
        &self.plaquettes
    }
}

/// The abstract ladder on ground-space coordinates: `Xt |j> = |j+1 mod n^2>`.
pub fn x_tilde(n: usize) -> CMat {
    let d = n * n;
    Array2::from_shape_fn((d, d), |(r, c)| {
        if r == (c + 1) % d {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// The abstract diagonal `Zt |j> = w_(n^2)^j |j>`.
pub fn z_tilde(n: usize) -> CMat {
    let d = n * n;
    let w = 2.0 * std::f64::consts::PI / d as f64;
    Array2::from_shape_fn((d, d), |(r, c)| {
        if r == c {
            C64::from_polar(1.0, w * r as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Ranks of the Gram matrices of the two probe families
/// `{Xt^i |psi>}` and `{Zt^j |psi>}` on the n^2-dimensional coordinates.
pub struct GenerationReport {
    pub rank_ladder: usize,
    pub rank_diagonal: usize,
}

pub fn basis_generation_check(coords: &CVec, n: usize, tol: f64) -> Result<GenerationReport> {
    let d = n * n;
    if coords.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: coords.len(),
        });
    }
    let rank_of = |vectors: &[CVec]| -> Result<usize> {
        let m = vectors.len();
        let mut gram = Array2::zeros((m, m));
        for i in 0..m {
            for j in 0..m {
                gram[(i, j)] = inner(&vectors[i], &vectors[j]);
            }
        }
        let w = crate::qstate::eigvalsh(&gram)?;
        Ok(w.iter().filter(|&&x| x > tol).count())
    };
    let xt = x_tilde(n);
    let zt = z_tilde(n);
    let mut ladder = vec![coords.clone()];
    let mut diagonal = vec![coords.clone()];
    for _ in 1..d {
        ladder.push(xt.dot(ladder.last().unwrap()));
        diagonal.push(zt.dot(diagonal.last().unwrap()));
    }
    Ok(GenerationReport {
        rank_ladder: rank_of(&ladder)?,
        rank_diagonal: rank_of(&diagonal)?,
    })
}
