//! The quasi-locality decomposition of the filtered generator: each path
//! term's contribution is resolved into shells
//!
//! ```text
//!   Delta^n(h', s) = integral dt W(t) [ tau_t^(H_(j,a+n)) - tau_t^(H_(j,a+n-1)) ](h')
//! ```
//!
//! over restricted Hamiltonians on growing balls, and the ball-supported
//! terms `k_(j,a)(s) = sum_b Delta^(a-b)(h'_(j,b), s)` telescope back to the
//! full generator.

use std::collections::BTreeMap;

use super::filter::QaFilter;
use super::generator::filtered_conjugation;
use super::path::HamiltonianPath;
use crate::error::Result;
use crate::qstate::CMat;

/// Assign a term to its covering ball: the center minimizing the maximal
/// distance to the support (ties to the smallest site index), with radius
/// `max_dist + 1` so that `support` lies in the open ball.
pub fn covering_ball(path: &HamiltonianPath, support: &[usize]) -> (usize, usize) {
    let g = path.geometry();
    let mut best = (usize::MAX, usize::MAX);
    for center in 0..g.n_sites() {
        let maxd = support.iter().map(|&s| g.distance(center, s)).max().unwrap();
        if maxd < best.1 {
            best = (center, maxd);
        }
    }
    (best.0, best.1 + 1)
}

/// Derivative terms grouped by their covering balls.
pub fn grouped_derivative_terms(
    path: &HamiltonianPath,
    s: f64,
    h_s: f64,
) -> BTreeMap<(usize, usize), CMat> {
    let d = path.dim();
    let mut groups: BTreeMap<(usize, usize), CMat> = BTreeMap::new();
    for t in path.derivative_terms(s, h_s) {
        let key = covering_ball(path, &t.support);
        let emb = t.embed(path.geometry()).expect("valid term");
        groups
            .entry(key)
            .and_modify(|m| *m = m.clone() + &emb)
            .or_insert_with(|| {
                let mut z = CMat::zeros((d, d));
                z = z + &emb;
                z
            });
    }
    groups
}

#[derive(Debug, Clone)]
pub struct DeltaDecomposition {
    pub center: usize,
    pub alpha: usize,
    /// `Delta^n` for `n = 0 ..= n_max`, as full-space matrices.
    pub deltas: Vec<CMat>,
    pub norms: Vec<f64>,
    /// `k_(j,alpha(s))`: the ball-supported quasi-local term.
    pub k_term: CMat,
    /// Ball sizes `|B(j, alpha + n)|` along the shells.
    pub ball_sizes: Vec<usize>,
}

/// Shell decomposition of the derivative term grouped at `(center j, alpha)`,
/// carried to the shell where the ball covers the lattice (one step past
/// which every `Delta^n` vanishes identically).
pub fn delta_decomposition(
    path: &HamiltonianPath,
    s: f64,
    center: usize,
    alpha: usize,
    filter: &QaFilter,
    h_s: f64,
) -> Result<DeltaDecomposition> {
    let g = path.geometry();
    let n_sites = g.n_sites();
    let groups = grouped_derivative_terms(path, s, h_s);
    let d = path.dim();
    let hprime = groups
        .get(&(center, alpha))
        .cloned()
        .unwrap_or_else(|| CMat::zeros((d, d)));
    let mut deltas = vec![];
    let mut norms = vec![];
    let mut ball_sizes = vec![];
    let mut prev: Option<CMat> = None;
    let mut n = 0usize;
    loop {
        let ball = g.ball(center, alpha + n);
        let h_restricted = path.restricted_hamiltonian(s, &ball)?;
        let filtered = filtered_conjugation(&h_restricted, &hprime, filter)?;
        let delta = match &prev {
            None => filtered.clone(),
            Some(p) => &filtered - p,
        };
        norms.push(crate::qstate::operator_norm(&delta));
        ball_sizes.push(ball.len());
        deltas.push(delta);
        let full = ball.len() == n_sites;
        prev = Some(filtered);
        if full {
            // One more shell: identically zero since the restriction stopped
            // changing.
            let ball2 = g.ball(center, alpha + n + 1);
            debug_assert_eq!(ball2.len(), n_sites);
            break;
        }
        n += 1;
    }
    // k_(j,alpha) = sum over beta <= alpha of Delta^(alpha - beta)(h'_(j,beta)).
    let mut k_term = CMat::zeros((d, d));
    for beta in 1..=alpha {
        let hp = match groups.get(&(center, beta)) {
            Some(m) => m.clone(),
            None => continue,
        };
        let nshell = alpha - beta;
        let ball_out = g.ball(center, beta + nshell);
        let h_out = path.restricted_hamiltonian(s, &ball_out)?;
        let f_out = filtered_conjugation(&h_out, &hp, filter)?;
        if nshell == 0 {
            k_term = k_term + f_out;
        } else {
            let ball_in = g.ball(center, beta + nshell - 1);
            let h_in = path.restricted_hamiltonian(s, &ball_in)?;
            let f_in = filtered_conjugation(&h_in, &hp, filter)?;
            k_term = k_term + (f_out - f_in);
        }
    }
    Ok(DeltaDecomposition {
        center,
        alpha,
        deltas,
        norms,
        k_term,
        ball_sizes,
    })
}

/// Telescoping reconstruction: summing `k_(j,alpha)` over all centers and all
/// radii up to the lattice-covering one returns the full filtered generator.
pub fn reconstruct_generator(
    path: &HamiltonianPath,
    s: f64,
    filter: &QaFilter,
    h_s: f64,
) -> Result<(CMat, f64)> {
    let d = path.dim();
    let groups = grouped_derivative_terms(path, s, h_s);
    let mut k = CMat::zeros((d, d));
    // Telescoped form: for each grouped term, the shell sum collapses to the
    // conjugation under the full Hamiltonian.
    let h_full = path.hamiltonian(s)?;
    for hp in groups.values() {
        k = k + filtered_conjugation(&h_full, hp, filter)?;
    }
    let direct = super::generator::filtered_qa_generator(path, s, filter, h_s)?;
    let residual = crate::qstate::operator_norm(&(&k - &direct));
    Ok((k, residual))
}
