use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::lindblad::ode::{integrate_times, OdeOpts};
use crate::lindblad::{Lindbladian, LindbladTerm};
use crate::qstate::{dagger, C64, CMat, LatticeGeometry, SupportMap};
use crate::timer::TimerSpec;

/// How system terms get their controlling timer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attachment {
    /// One timer per lattice site that hosts a term; each term is controlled
    /// by the timer at its first support site.
    PerFirstSite,
    /// A single timer controls every term.
    SharedSingle,
}

/// One switched term: per-stage generators (each a plain local term on the
/// system geometry, possibly with different supports) under one register.
#[derive(Debug, Clone)]
pub struct SwitchedTerm {
    pub timer: usize,
    pub stages: Vec<Option<LindbladTerm>>,
}

#[derive(Debug, Clone)]
struct CompiledPiece {
    map: SupportMap,
    h: Option<CMat>,
    jumps: Vec<CMat>,
    jdags: Vec<CMat>,
    ksum: CMat,
}

fn compile_piece(geom: &LatticeGeometry, term: &LindbladTerm) -> Result<CompiledPiece> {
    let map = SupportMap::new(geom, &term.support)?;
    let d = map.sup_dim;
    if let Some(h) = &term.hamiltonian {
        if h.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: h.nrows(),
            });
        }
    }
    let jdags: Vec<CMat> = term.jumps.iter().map(dagger).collect();
    let mut ksum = CMat::zeros((d, d));
    for (j, jd) in term.jumps.iter().zip(jdags.iter()) {
        ksum = ksum + jd.dot(j);
    }
    Ok(CompiledPiece {
        map,
        h: term.hamiltonian.clone(),
        jumps: term.jumps.clone(),
        jdags,
        ksum,
    })
}

/// A system Lindbladian whose terms are switched between stage generators by
/// classical timer registers, all with identical `TimerSpec`.
#[derive(Debug, Clone)]
pub struct SwitchedLindbladian {
    system: Arc<LatticeGeometry>,
    spec: TimerSpec,
    /// Ascending stage boundaries; stage of level `k` is the number of
    /// thresholds `<= k`. Levels past the last threshold run the last stage
    /// if one is provided, otherwise nothing.
    thresholds: Vec<usize>,
    terms: Vec<SwitchedTerm>,
    n_timers: usize,
    compiled: Vec<(usize, Vec<Option<CompiledPiece>>)>,
    stage_table: Vec<usize>,
}

/// Composite state: one unnormalized system block per register configuration.
/// Register 0 is the slowest digit of the block index.
#[derive(Debug, Clone)]
pub struct CompositeState {
    pub sys_dim: usize,
    pub n_regs: usize,
    pub levels: usize,
    pub blocks: Vec<C64>,
}

impl CompositeState {
    pub fn n_blocks(&self) -> usize {
        (self.levels + 1).pow(self.n_regs as u32)
    }

    pub fn block(&self, b: usize) -> CMat {
        let bs = self.sys_dim * self.sys_dim;
        Array2::from_shape_vec(
            (self.sys_dim, self.sys_dim),
            self.blocks[b * bs..(b + 1) * bs].to_vec(),
        )
        .expect("block shape")
    }

    /// System marginal: sum of all blocks.
    pub fn marginal(&self) -> CMat {
        let d = self.sys_dim;
        let bs = d * d;
        let mut out = CMat::zeros((d, d));
        for b in 0..self.n_blocks() {
            for (i, v) in self.blocks[b * bs..(b + 1) * bs].iter().enumerate() {
                out[(i / d, i % d)] += *v;
            }
        }
        out
    }

    /// Joint register distribution: trace of each block.
    pub fn register_distribution(&self) -> Vec<f64> {
        let d = self.sys_dim;
        let bs = d * d;
        (0..self.n_blocks())
            .map(|b| {
                (0..d)
                    .map(|i| self.blocks[b * bs + i * d + i].re)
                    .sum::<f64>()
            })
            .collect()
    }

    /// Full composite density matrix with system digits slowest, matching
    /// `SwitchedLindbladian::to_lindbladian`'s geometry. Small cases only.
    pub fn to_dense(&self) -> CMat {
        let b_tot = self.n_blocks();
        let d = self.sys_dim;
        let full = d * b_tot;
        let mut out = CMat::zeros((full, full));
        let bs = d * d;
        for b in 0..b_tot {
            for s1 in 0..d {
                for s2 in 0..d {
                    out[(s1 * b_tot + b, s2 * b_tot + b)] = self.blocks[b * bs + s1 * d + s2];
                }
            }
        }
        out
    }

    /// Mutual information I(system : registers) in nats. The composite is
    /// block-diagonal, so S(joint) = H(p) + sum_b p_b S(rho_b / p_b).
    pub fn mutual_information(&self) -> Result<f64> {
        let entropy = |probs: &[f64]| -> f64 {
            probs
                .iter()
                .filter(|&&p| p > 1e-15)
                .map(|&p| -p * p.ln())
                .sum()
        };
        let p = self.register_distribution();
        let h_reg = entropy(&p);
        let marg = self.marginal();
        let w = crate::qstate::eigvalsh(&marg)?;
        let h_sys = entropy(&w.to_vec());
        let mut h_joint = h_reg;
        for b in 0..self.n_blocks() {
            if p[b] > 1e-15 {
                let blk = self.block(b).mapv(|z| z / C64::new(p[b], 0.0));
                let w = crate::qstate::eigvalsh(&blk)?;
                h_joint += p[b] * entropy(&w.to_vec());
            }
        }
        Ok((h_sys + h_reg - h_joint).max(0.0))
    }
}

/// Diagnostics mirroring the construction's error bookkeeping: these are
/// reported, not asserted.
#[derive(Debug, Clone, Copy)]
pub struct ErrorBudget {
    /// Probability that some register sits outside the intended band.
    pub band_leak: f64,
    /// eps * ||L_S||_(1->1) estimate for the switching window.
    pub eps_window: f64,
    /// Truncation error of the run itself (integrator tolerance).
    pub truncation: f64,
}

/// A sampled composite run.
#[derive(Debug)]
pub struct SwitchedRun {
    pub times: Vec<f64>,
    pub marginals: Vec<CMat>,
    /// P[every register at the top level] at each sample time.
    pub top_mass: Vec<f64>,
    pub final_state: CompositeState,
    pub budget: ErrorBudget,
}

impl SwitchedLindbladian {
    pub fn from_parts(
        system: Arc<LatticeGeometry>,
        spec: TimerSpec,
        thresholds: Vec<usize>,
        terms: Vec<SwitchedTerm>,
    ) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::Invalid("need at least one threshold".into()));
        }
        for w in thresholds.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Invalid("thresholds must be ascending".into()));
            }
        }
        if *thresholds.last().unwrap() > spec.levels {
            return Err(Error::Invalid(format!(
                "threshold {} exceeds top level {}",
                thresholds.last().unwrap(),
                spec.levels
            )));
        }
        let n_timers = terms.iter().map(|t| t.timer + 1).max().unwrap_or(0);
        if n_timers == 0 {
            return Err(Error::Invalid("composite needs at least one term".into()));
        }
        let mut compiled = Vec::with_capacity(terms.len());
        for term in &terms {
            let mut pieces = Vec::with_capacity(term.stages.len());
            for stage in &term.stages {
                pieces.push(match stage {
                    Some(t) => Some(compile_piece(&system, t)?),
                    None => None,
                });
            }
            compiled.push((term.timer, pieces));
        }
        let stage_table = (0..=spec.levels)
            .map(|k| thresholds.iter().filter(|&&th| th <= k).count())
            .collect();
        Ok(SwitchedLindbladian {
            system,
            spec,
            thresholds,
            terms,
            n_timers,
            compiled,
            stage_table,
        })
    }

    pub fn system(&self) -> &Arc<LatticeGeometry> {
        &self.system
    }

    pub fn spec(&self) -> &TimerSpec {
        &self.spec
    }

    pub fn thresholds(&self) -> &[usize] {
        &self.thresholds
    }

    pub fn terms(&self) -> &[SwitchedTerm] {
        &self.terms
    }

    pub fn n_timers(&self) -> usize {
        self.n_timers
    }

    pub fn n_blocks(&self) -> usize {
        (self.spec.levels + 1).pow(self.n_timers as u32)
    }

    pub fn stage_of_level(&self, k: usize) -> usize {
        self.stage_table[k]
    }

    /// Composite initial state: all registers at level 0, system in `rho0`.
    pub fn initial_state(&self, rho0: &CMat) -> Result<CompositeState> {
        let d = self.system.total_dim();
        if rho0.nrows() != d || rho0.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: rho0.nrows(),
            });
        }
        let b_tot = self.n_blocks();
        let mut blocks = vec![C64::new(0.0, 0.0); b_tot * d * d];
        for (i, v) in rho0.iter().enumerate() {
            blocks[i] = *v;
        }
        Ok(CompositeState {
            sys_dim: d,
            n_regs: self.n_timers,
            levels: self.spec.levels,
            blocks,
        })
    }

    /// Time derivative of the flat block vector.
    // TODO: the explicit integrator's step size is capped by the register hop
    // rate (~ gamma * n_timers); the level graph is a DAG, so a block-by-block
    // pass with exact integrating factors for the diagonal outflow would
    // remove that cap for large T ladders.
    pub fn derivative(&self, state: &[C64], out: &mut [C64]) {
        let d = self.system.total_dim();
        let bs = d * d;
        let b_tot = self.n_blocks();
        let levels = self.spec.levels;
        let gamma = self.spec.gamma;
        debug_assert_eq!(state.len(), b_tot * bs);
        out.fill(C64::new(0.0, 0.0));
        // Register strides: register 0 slowest.
        let mut strides = vec![1usize; self.n_timers];
        for r in (0..self.n_timers.saturating_sub(1)).rev() {
            strides[r] = strides[r + 1] * (levels + 1);
        }
        let mut digits = vec![0usize; self.n_timers];
        let mut scratch = vec![C64::new(0.0, 0.0); bs];
        for b in 0..b_tot {
            // Decode digits.
            let mut rem = b;
            for r in 0..self.n_timers {
                digits[r] = rem / strides[r];
                rem %= strides[r];
            }
            let src = &state[b * bs..(b + 1) * bs];
            let dst_range = b * bs..(b + 1) * bs;
            // Register hops: outflow from this block, inflow from below.
            let hopping = digits.iter().filter(|&&k| k < levels).count();
            if hopping > 0 {
                let rate = C64::new(-gamma * hopping as f64, 0.0);
                for (o, s) in out[dst_range.clone()].iter_mut().zip(src.iter()) {
                    *o += rate * *s;
                }
            }
            for r in 0..self.n_timers {
                if digits[r] > 0 {
                    let frm = (b - strides[r]) * bs;
                    let g = C64::new(gamma, 0.0);
                    let inflow = &state[frm..frm + bs];
                    for (o, s) in out[dst_range.clone()].iter_mut().zip(inflow.iter()) {
                        *o += g * *s;
                    }
                }
            }
            // Stage-selected system action on this block.
            for (timer, pieces) in &self.compiled {
                let stage = self.stage_table[digits[*timer]];
                if let Some(Some(piece)) = pieces.get(stage) {
                    apply_piece(piece, src, d, &mut out[dst_range.clone()], &mut scratch);
                }
            }
        }
    }

    /// Run the composite, sampling the system marginal on a time grid.
    pub fn run(&self, rho0: &CMat, times: &[f64], tol: f64) -> Result<SwitchedRun> {
        let init = self.initial_state(rho0)?;
        let d = init.sys_dim;
        let mut marginals = Vec::with_capacity(times.len());
        let mut top_mass = Vec::with_capacity(times.len());
        let mut final_flat = init.blocks.clone();
        let opts = OdeOpts::with_tol(tol);
        integrate_times(
            |_t, y, dy| self.derivative(y, dy),
            times,
            &init.blocks,
            &opts,
            |i, y| {
                let st = CompositeState {
                    sys_dim: d,
                    n_regs: self.n_timers,
                    levels: self.spec.levels,
                    blocks: y.to_vec(),
                };
                marginals.push(st.marginal());
                let p = st.register_distribution();
                top_mass.push(*p.last().unwrap_or(&0.0));
                if i == times.len() - 1 {
                    final_flat = y.to_vec();
                }
            },
        )?;
        let final_state = CompositeState {
            sys_dim: d,
            n_regs: self.n_timers,
            levels: self.spec.levels,
            blocks: final_flat,
        };
        let t_end = *times.last().unwrap();
        let eps = self.spec.default_eps();
        let band_leak = 1.0
            - crate::timer::joint_band_prob(
                self.n_timers,
                &self.spec,
                t_end.min(self.spec.tau() - eps / 2.0).max(0.0),
                (0, self.thresholds[0].saturating_sub(1)),
            )?;
        let norm_est = self
            .compiled
            .iter()
            .flat_map(|(_, pieces)| pieces.iter().flatten())
            .map(|p| {
                let h = p.h.as_ref().map(crate::qstate::operator_norm).unwrap_or(0.0);
                let j: f64 = p.jumps.iter().map(|j| crate::qstate::operator_norm(j).powi(2)).sum();
                2.0 * (h + j)
            })
            .sum::<f64>();
        Ok(SwitchedRun {
            times: times.to_vec(),
            marginals,
            top_mass,
            final_state,
            budget: ErrorBudget {
                band_leak,
                eps_window: eps * norm_est,
                truncation: tol,
            },
        })
    }

    /// The same composite as a plain Lindbladian over system plus register
    /// qudit sites (dimension `levels+1` each). Dense-regime oracle path.
    pub fn to_lindbladian(&self) -> Result<Lindbladian> {
        let levels = self.spec.levels;
        let reg_dim = levels + 1;
        let n_sys = self.system.n_sites();
        let attach = vec![0usize; self.n_timers];
        let geom = self.system.with_ancillas(&vec![reg_dim; self.n_timers], &attach)?;
        let mut terms: Vec<LindbladTerm> = vec![];
        // Register hop jumps: sqrt(gamma) |k+1><k| per register.
        for r in 0..self.n_timers {
            let site = n_sys + r;
            let mut jumps = vec![];
            for k in 0..levels {
                let mut j = CMat::zeros((reg_dim, reg_dim));
                j[(k + 1, k)] = C64::new(self.spec.gamma.sqrt(), 0.0);
                jumps.push(j);
            }
            terms.push(LindbladTerm::new(vec![site], None, jumps));
        }
        // Controlled system terms: coherent sums over stage-band projectors.
        for term in &self.terms {
            let reg_site = n_sys + term.timer;
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
            let dsup = self.system.dim_of(&union_support);
            let band_proj = |stage: usize| -> CMat {
                let mut p = CMat::zeros((reg_dim, reg_dim));
                for k in 0..=levels {
                    if self.stage_table[k] == stage {
                        p[(k, k)] = C64::new(1.0, 0.0);
                    }
                }
                p
            };
            // Lift a stage term onto the union support.
            let lift = |t: &LindbladTerm, m: &CMat| -> Result<CMat> {
                let sub = self.system.sub_geometry(&union_support)?;
                let local = crate::qstate::LocalOperator::new(t.support.clone(), m.clone())
                    .restrict_to(&union_support)?;
                crate::qstate::embed(&local.matrix, &local.support, &sub)
            };
            let n_stages = term.stages.len();
            let mut hsum = CMat::zeros((dsup * reg_dim, dsup * reg_dim));
            let mut has_h = false;
            let max_jumps = term
                .stages
                .iter()
                .flatten()
                .map(|t| t.jumps.len())
                .max()
                .unwrap_or(0);
            let mut jump_ops: Vec<CMat> =
                vec![CMat::zeros((dsup * reg_dim, dsup * reg_dim)); max_jumps];
            for stage in 0..n_stages {
                if let Some(t) = &term.stages[stage] {
                    let proj = band_proj(stage);
                    if let Some(h) = &t.hamiltonian {
                        hsum = hsum + ndarray::linalg::kron(&lift(t, h)?, &proj);
                        has_h = true;
                    }
                    for (jidx, j) in t.jumps.iter().enumerate() {
                        jump_ops[jidx] =
                            jump_ops[jidx].clone() + ndarray::linalg::kron(&lift(t, j)?, &proj);
                    }
                }
            }
            let mut support = union_support;
            support.push(reg_site);
            terms.push(LindbladTerm::new(
                support,
                if has_h { Some(hsum) } else { None },
                jump_ops,
            ));
        }
        Lindbladian::new(geom, terms)
    }
}

/// Accumulate `L_piece(block)` into `out`, all as flat row-major `d x d`.
fn apply_piece(piece: &CompiledPiece, block: &[C64], d: usize, out: &mut [C64], scratch: &mut [C64]) {
    let map = &piece.map;
    let mi = C64::new(0.0, -1.0);
    if let Some(h) = &piece.h {
        // -i (H rho - rho H)
        left_into(h, map, block, d, out, mi);
        right_into(h, map, block, d, out, -mi);
    }
    for (j, jd) in piece.jumps.iter().zip(piece.jdags.iter()) {
        // J rho J+
        scratch.fill(C64::new(0.0, 0.0));
        left_into(j, map, block, d, scratch, C64::new(1.0, 0.0));
        right_into(jd, map, scratch, d, out, C64::new(1.0, 0.0));
    }
    if !piece.jumps.is_empty() {
        let half = C64::new(-0.5, 0.0);
        left_into(&piece.ksum, map, block, d, out, half);
        right_into(&piece.ksum, map, block, d, out, half);
    }
}

/// `out += w * embed(a) . rho` on flat buffers.
fn left_into(a: &CMat, map: &SupportMap, rho: &[C64], d: usize, out: &mut [C64], w: C64) {
    for &k in &map.comp_offsets {
        for (s1, &o1) in map.sup_offsets.iter().enumerate() {
            let r1 = (k + o1) * d;
            for (s2, &o2) in map.sup_offsets.iter().enumerate() {
                let v = a[(s1, s2)] * w;
                if v != C64::new(0.0, 0.0) {
                    let r2 = (k + o2) * d;
                    for c in 0..d {
                        out[r1 + c] += v * rho[r2 + c];
                    }
                }
            }
        }
    }
}

/// `out += w * rho . embed(a)` on flat buffers.
fn right_into(a: &CMat, map: &SupportMap, rho: &[C64], d: usize, out: &mut [C64], w: C64) {
    for &k in &map.comp_offsets {
        for (s1, &o1) in map.sup_offsets.iter().enumerate() {
            let c1 = k + o1;
            for (s2, &o2) in map.sup_offsets.iter().enumerate() {
                let v = a[(s2, s1)] * w;
                if v != C64::new(0.0, 0.0) {
                    let c2 = k + o2;
                    for r in 0..d {
                        out[r * d + c1] += v * rho[r * d + c2];
                    }
                }
            }
        }
    }
}

/// Couple stage Lindbladians to identical timers. Stage `a` acts while the
/// controlling register is in band `a`; for `n` stages the thresholds sit at
/// `a * levels / (n-1)`, so the last stage runs from the top level onward.
/// Terms are paired across stages by support; every term must land on a
/// timer under the chosen attachment.
pub fn build_switched(
    stages: &[Lindbladian],
    spec: TimerSpec,
    attachment: Attachment,
) -> Result<SwitchedLindbladian> {
    if stages.len() < 2 {
        return Err(Error::Invalid("need at least two stages to switch".into()));
    }
    let system = stages[0].geometry().clone();
    for s in stages {
        if s.dim() != system.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: system.total_dim(),
                got: s.dim(),
            });
        }
    }
    let n = stages.len();
    let thresholds: Vec<usize> = (1..n).map(|a| a * spec.levels / (n - 1)).collect();
    // Collect distinct supports across stages, in first-seen order.
    let mut supports: Vec<Vec<usize>> = vec![];
    for s in stages {
        for t in s.terms() {
            if !supports.contains(&t.support) {
                supports.push(t.support.clone());
            }
        }
    }
    // Timer ids per support: one fresh register per hosting site.
    let mut site_to_timer: Vec<Option<usize>> = vec![None; system.n_sites()];
    let mut next_timer = 0usize;
    let mut terms = vec![];
    for sup in &supports {
        let timer = match attachment {
            Attachment::SharedSingle => 0,
            Attachment::PerFirstSite => {
                let site = *sup.first().ok_or_else(|| Error::UnattachedTerm {
                    support: sup.clone(),
                })?;
                *site_to_timer[site].get_or_insert_with(|| {
                    let id = next_timer;
                    next_timer += 1;
                    id
                })
            }
        };
        let mut stage_terms: Vec<Option<LindbladTerm>> = vec![];
        for s in stages {
            // Merge all terms of this stage with this support.
            let matching: Vec<&LindbladTerm> =
                s.terms().iter().filter(|t| &t.support == sup).collect();
            if matching.is_empty() {
                stage_terms.push(None);
            } else {
                let d = system.dim_of(sup);
                let mut h = CMat::zeros((d, d));
                let mut has_h = false;
                let mut jumps = vec![];
                for t in matching {
                    if let Some(hh) = &t.hamiltonian {
                        h = h + hh;
                        has_h = true;
                    }
                    jumps.extend(t.jumps.iter().cloned());
                }
                stage_terms.push(Some(LindbladTerm::new(
                    sup.clone(),
                    if has_h { Some(h) } else { None },
                    jumps,
                )));
            }
        }
        terms.push(SwitchedTerm {
            timer,
            stages: stage_terms,
        });
    }
    SwitchedLindbladian::from_parts(system, spec, thresholds, terms)
}
