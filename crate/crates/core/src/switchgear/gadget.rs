//! The literal qubit-timer gadget and the band-projector operator identities.
//!
//! Each register of a [`SwitchedLindbladian`] is expanded into `T+1` qubits
//! hopped through by `sqrt(gamma) |1><1|_j (x) |1><0|_{j+1}` jumps, and stage
//! controls become projectors on the switch qubits: the register sits at
//! level `>= th` exactly when qubit `th` is `|1>`. This form exists as a
//! small-`T` validation oracle for the compressed-register composite.

use ndarray::linalg::kron;

use super::composite::SwitchedLindbladian;
use crate::error::Result;
use crate::lindblad::{assemble_superoperator, Lindbladian, LindbladTerm};
use crate::policy::NumericPolicy;
use crate::qstate::{identity, operator_norm, C64, CMat};

/// Stage control projector on one timer's qubits, in the gadget picture:
/// `|1><1|` on the lower boundary qubit (when the stage has one) times
/// `|0><0|` on the upper boundary qubit (when the stage is bounded above).
fn stage_controls(thresholds: &[usize], stage: usize, levels: usize) -> Vec<(usize, bool)> {
    // (qubit level index within the timer, wants |1>)
    let mut c = vec![];
    if stage > 0 {
        c.push((thresholds[stage - 1], true));
    }
    if stage < thresholds.len() {
        let upper = thresholds[stage];
        if upper <= levels {
            c.push((upper, false));
        }
    }
    c
}

/// Build the full qubit-gadget composite Lindbladian: system sites first,
/// then `T+1` qubits per timer.
pub fn gadget_lindbladian(sw: &SwitchedLindbladian) -> Result<Lindbladian> {
    let levels = sw.spec().levels;
    let n_sys = sw.system().n_sites();
    let qubits_per = levels + 1;
    let n_anc = sw.n_timers() * qubits_per;
    let attach = vec![0usize; n_anc];
    let geom = sw.system().with_ancillas(&vec![2; n_anc], &attach)?;
    let timer_site = |r: usize, level: usize| n_sys + r * qubits_per + level;

    let mut terms: Vec<LindbladTerm> = vec![];
    // Timer chains.
    let sqg = sw.spec().gamma.sqrt();
    for r in 0..sw.n_timers() {
        for j in 0..levels {
            let mut jump = CMat::zeros((4, 4));
            jump[(3, 2)] = C64::new(sqg, 0.0);
            terms.push(LindbladTerm::new(
                vec![timer_site(r, j), timer_site(r, j + 1)],
                None,
                vec![jump],
            ));
        }
    }
    // Controlled system terms: coherent sums over stages.
    for term in sw.terms() {
        let union_support: Vec<usize> = {
            let mut s: Vec<usize> = term
                .stages
                .iter()
                .flatten()
                .flat_map(|t| t.support.iter().cloned())
                .collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        if union_support.is_empty() {
            continue;
        }
        // Control qubits used by any stage of this term, ascending.
        let mut control_levels: Vec<usize> = (0..term.stages.len())
            .flat_map(|a| {
                stage_controls(sw.thresholds(), a, levels)
                    .into_iter()
                    .map(|(lvl, _)| lvl)
            })
            .collect();
        control_levels.sort_unstable();
        control_levels.dedup();
        let ctrl_dim = 1usize << control_levels.len();
        let dsup = sw.system().dim_of(&union_support);
        let sub = sw.system().sub_geometry(&union_support)?;
        let lift = |t: &LindbladTerm, m: &CMat| -> Result<CMat> {
            let local = crate::qstate::LocalOperator::new(t.support.clone(), m.clone())
                .restrict_to(&union_support)?;
            crate::qstate::embed(&local.matrix, &local.support, &sub)
        };
        // Projector on the control-qubit factor for one stage.
        let ctrl_proj = |stage: usize| -> CMat {
            let mut p = identity(1);
            for &lvl in &control_levels {
                let wanted = stage_controls(sw.thresholds(), stage, levels)
                    .iter()
                    .find(|(l, _)| *l == lvl)
                    .map(|&(_, one)| one);
                let factor = match wanted {
                    Some(true) => {
                        let mut m = CMat::zeros((2, 2));
                        m[(1, 1)] = C64::new(1.0, 0.0);
                        m
                    }
                    Some(false) => {
                        let mut m = CMat::zeros((2, 2));
                        m[(0, 0)] = C64::new(1.0, 0.0);
                        m
                    }
                    None => identity(2),
                };
                p = kron(&p, &factor);
            }
            p
        };
        let dim = dsup * ctrl_dim;
        let mut hsum = CMat::zeros((dim, dim));
        let mut has_h = false;
        let max_jumps = term
            .stages
            .iter()
            .flatten()
            .map(|t| t.jumps.len())
            .max()
            .unwrap_or(0);
        let mut jump_ops: Vec<CMat> = vec![CMat::zeros((dim, dim)); max_jumps];
        for (stage, st) in term.stages.iter().enumerate() {
            if let Some(t) = st {
                let proj = ctrl_proj(stage);
                if let Some(h) = &t.hamiltonian {
                    hsum = hsum + kron(&lift(t, h)?, &proj);
                    has_h = true;
                }
                for (jidx, j) in t.jumps.iter().enumerate() {
                    jump_ops[jidx] = jump_ops[jidx].clone() + kron(&lift(t, j)?, &proj);
                }
            }
        }
        let mut support = union_support;
        support.extend(control_levels.iter().map(|&lvl| timer_site(term.timer, lvl)));
        terms.push(LindbladTerm::new(
            support,
            if has_h { Some(hsum) } else { None },
            jump_ops,
        ));
    }
    Lindbladian::new(geom, terms)
}

/// Projector onto `span{ |phi_k>, k in [lo, hi] }^(x n_timers) (x) H_sys` in
/// the gadget picture (system digits slowest).
pub fn gadget_band_projector(sw: &SwitchedLindbladian, lo: usize, hi: usize) -> CMat {
    let levels = sw.spec().levels;
    let qdim = 1usize << (levels + 1);
    let mut p1 = CMat::zeros((qdim, qdim));
    let spec = *sw.spec();
    for k in lo..=hi {
        let phi = crate::timer::phi_ket(&spec, k);
        for r in 0..qdim {
            for c in 0..qdim {
                p1[(r, c)] += phi[r] * phi[c].conj();
            }
        }
    }
    let mut p = identity(sw.system().total_dim());
    for _ in 0..sw.n_timers() {
        p = kron(&p, &p1);
    }
    p
}

/// Projector onto register levels in `[lo, hi]` per timer, compressed picture.
pub fn register_band_projector(sw: &SwitchedLindbladian, lo: usize, hi: usize) -> CMat {
    let reg_dim = sw.spec().levels + 1;
    let mut p1 = CMat::zeros((reg_dim, reg_dim));
    for k in lo..=hi {
        p1[(k, k)] = C64::new(1.0, 0.0);
    }
    let mut p = identity(sw.system().total_dim());
    for _ in 0..sw.n_timers() {
        p = kron(&p, &p1);
    }
    p
}

/// Superoperator of `rho -> P rho P` in the column-stacking convention.
fn sandwich_superop(p: &CMat) -> CMat {
    kron(&p.t().to_owned(), p)
}

/// Stage-1 system generator lifted to a composite geometry (acting trivially
/// on the ancillas).
fn stage_lindbladian_on(
    sw: &SwitchedLindbladian,
    stage: usize,
    geom: &std::sync::Arc<crate::qstate::LatticeGeometry>,
) -> Result<Lindbladian> {
    let mut terms = vec![];
    for term in sw.terms() {
        if let Some(Some(t)) = term.stages.get(stage).map(|s| s.as_ref()) {
            terms.push(t.clone());
        }
    }
    Lindbladian::new(geom.clone(), terms)
}

/// Timer-only generator on the same composite geometry.
fn timer_only_lindbladian(full: &Lindbladian, n_sys_sites: usize) -> Lindbladian {
    let terms: Vec<LindbladTerm> = full
        .terms()
        .iter()
        .filter(|t| t.support.iter().all(|&s| s >= n_sys_sites))
        .cloned()
        .collect();
    Lindbladian::new(full.geometry().clone(), terms).expect("subset of valid terms")
}

/// Residual of the band-factorization identity
/// `P o L o P = P o (L_T + L_1) o P` for the *qubit gadget* composite,
/// with `P` projecting every timer onto `span{phi_0..phi_(T-1)}`.
pub fn band_factorization_residual_gadget(
    sw: &SwitchedLindbladian,
    policy: &NumericPolicy,
) -> Result<f64> {
    let full = gadget_lindbladian(sw)?;
    let n_sys = sw.system().n_sites();
    let p = gadget_band_projector(sw, 0, sw.thresholds()[0] - 1);
    let sp = sandwich_superop(&p);
    let s_full = assemble_superoperator(&full, policy)?;
    let s_timer = assemble_superoperator(&timer_only_lindbladian(&full, n_sys), policy)?;
    let s_stage1 = assemble_superoperator(&stage_lindbladian_on(sw, 0, full.geometry())?, policy)?;
    let lhs = sp.dot(&s_full).dot(&sp);
    let rhs = sp.dot(&(s_timer + s_stage1)).dot(&sp);
    Ok(operator_norm(&(lhs - rhs)))
}

/// The same identity for the compressed-register composite.
pub fn band_factorization_residual_compressed(
    sw: &SwitchedLindbladian,
    policy: &NumericPolicy,
) -> Result<f64> {
    let full = sw.to_lindbladian()?;
    let n_sys = sw.system().n_sites();
    let p = register_band_projector(sw, 0, sw.thresholds()[0] - 1);
    let sp = sandwich_superop(&p);
    let s_full = assemble_superoperator(&full, policy)?;
    let s_timer = assemble_superoperator(&timer_only_lindbladian(&full, n_sys), policy)?;
    let s_stage1 = assemble_superoperator(&stage_lindbladian_on(sw, 0, full.geometry())?, policy)?;
    let lhs = sp.dot(&s_full).dot(&sp);
    let rhs = sp.dot(&(s_timer + s_stage1)).dot(&sp);
    Ok(operator_norm(&(lhs - rhs)))
}

/// Residual of `P o [L_T, L_S] o P = 0` on a middle band `[lo, hi]`
/// (compressed picture), the commutation identity behind the circuit
/// compilation's intermediate interval.
pub fn midband_commutation_residual(
    sw: &SwitchedLindbladian,
    lo: usize,
    hi: usize,
    policy: &NumericPolicy,
) -> Result<f64> {
    let full = sw.to_lindbladian()?;
    let n_sys = sw.system().n_sites();
    let s_timer = assemble_superoperator(&timer_only_lindbladian(&full, n_sys), policy)?;
    let s_full = assemble_superoperator(&full, policy)?;
    let s_sys = &s_full - &s_timer;
    let p = register_band_projector(sw, lo, hi);
    let sp = sandwich_superop(&p);
    let comm = s_timer.dot(&s_sys) - s_sys.dot(&s_timer);
    Ok(operator_norm(&sp.dot(&comm).dot(&sp)))
}
