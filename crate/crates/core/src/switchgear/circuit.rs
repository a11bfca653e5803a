//! Finite-depth circuits and their compilation into switched composites.
//!
//! Each gate slot carries one multi-stage timer: the layer-`l` gate of the
//! slot is generated by its Hermitian logarithm while the slot's register
//! sits in the `l`-th level band, and nothing acts once the register has been
//! absorbed at the top. Gates of consecutive layers share a slot when their
//! supports intersect, which makes the hand-off between layers sequential on
//! a single register.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lindblad::LindbladTerm;
use crate::qstate::{dagger, eigh, identity, operator_norm, C64, CMat, LatticeGeometry};
use crate::timer::TimerSpec;

use super::composite::{SwitchedLindbladian, SwitchedTerm};

#[derive(Debug, Clone)]
pub struct Gate {
    pub support: Vec<usize>,
    pub unitary: CMat,
}

impl Gate {
    pub fn new(support: Vec<usize>, unitary: CMat) -> Self {
        Gate { support, unitary }
    }
}

#[derive(Debug, Clone, Default)]
pub struct GateLayer {
    pub gates: Vec<Gate>,
}

/// A layered unitary circuit on a lattice with per-layer dwell times.
#[derive(Debug, Clone)]
pub struct CircuitSchedule {
    pub geometry: Arc<LatticeGeometry>,
    pub layers: Vec<GateLayer>,
    pub dwell: f64,
}

impl CircuitSchedule {
    pub fn new(geometry: Arc<LatticeGeometry>, layers: Vec<GateLayer>) -> Result<Self> {
        let sched = CircuitSchedule {
            geometry,
            layers,
            dwell: 1.0,
        };
        sched.validate()?;
        Ok(sched)
    }

    pub fn validate(&self) -> Result<()> {
        for layer in &self.layers {
            for (i, g) in layer.gates.iter().enumerate() {
                let want = self.geometry.dim_of(&g.support);
                if g.unitary.nrows() != want || g.unitary.ncols() != want {
                    return Err(Error::DimensionMismatch {
                        expected: want,
                        got: g.unitary.nrows(),
                    });
                }
                let defect =
                    operator_norm(&(dagger(&g.unitary).dot(&g.unitary) - identity(want)));
                if defect > 1e-10 {
                    return Err(Error::Invalid(format!(
                        "gate {i} is not unitary (defect {defect:.2e})"
                    )));
                }
                for (j, other) in layer.gates.iter().enumerate().skip(i + 1) {
                    if g.support.iter().any(|s| other.support.contains(s)) {
                        return Err(Error::OverlappingGates(i, j));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Full circuit unitary `C = U^(L) ... U^(1)` (layer 1 applied first).
    pub fn unitary(&self) -> Result<CMat> {
        let d = self.geometry.total_dim();
        let mut c = identity(d);
        for layer in &self.layers {
            let mut ul = identity(d);
            for g in &layer.gates {
                ul = crate::qstate::embed(&g.unitary, &g.support, &self.geometry)?.dot(&ul);
            }
            c = ul.dot(&c);
        }
        Ok(c)
    }

    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        let c = self.unitary()?;
        Ok(c.dot(rho).dot(&dagger(&c)))
    }
}

/// Principal Hermitian logarithm of a unitary: `h` with `exp(i h) = u` and
/// `||h|| <= pi`. Computed by simultaneous diagonalization of the Hermitian
/// pair `(u + u^+)/2`, `(u - u^+)/(2i)`.
pub fn log_unitary(u: &CMat) -> Result<CMat> {
    let d = u.nrows();
    let defect = operator_norm(&(dagger(u).dot(u) - identity(d)));
    if defect > 1e-10 {
        return Err(Error::Invalid(format!(
            "matrix is not unitary (defect {defect:.2e})"
        )));
    }
    let cos_part = (u + &dagger(u)).mapv(|z| 0.5 * z);
    let sin_part = (u - &dagger(u)).mapv(|z| z * C64::new(0.0, -0.5));
    let (wc, vc) = eigh(&cos_part)?;
    // Group near-equal cosine eigenvalues, then split each group by the sine
    // part restricted to it.
    let mut h = CMat::zeros((d, d));
    let mut start = 0usize;
    while start < d {
        let mut end = start + 1;
        while end < d && (wc[end] - wc[start]).abs() < 1e-8 {
            end += 1;
        }
        let cols = end - start;
        let vg = vc.slice(ndarray::s![.., start..end]).to_owned();
        let sg = dagger(&vg).dot(&sin_part).dot(&vg);
        let (ws, vs) = eigh(&sg)?;
        let basis = vg.dot(&vs);
        for k in 0..cols {
            let cos_k = {
                let col = basis.column(k);
                let cc = cos_part.dot(&col.to_owned());
                col.iter()
                    .zip(cc.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum::<C64>()
                    .re
            };
            let theta = ws[k].atan2(cos_k);
            let col = basis.column(k);
            for r in 0..d {
                for c in 0..d {
                    h[(r, c)] += C64::new(theta, 0.0) * col[r] * col[c].conj();
                }
            }
        }
        start = end;
    }
    Ok(crate::qstate::hermitize(&h))
}

/// Compile a layered circuit into a switched composite: one timer per gate
/// slot, `levels_per_stage` register levels per layer, hop rate
/// `levels_per_stage / dwell`. The stage-`l` generator of a slot is `-h` for
/// its layer-`l` gate (realizing `d rho/dt = i [h, rho]`), and the stage past
/// the top level is empty.
pub fn compile_circuit(
    schedule: &CircuitSchedule,
    levels_per_stage: usize,
) -> Result<SwitchedLindbladian> {
    schedule.validate()?;
    let n_layers = schedule.layers.len();
    if n_layers == 0 {
        return Err(Error::Invalid("empty circuit".into()));
    }
    if levels_per_stage == 0 {
        return Err(Error::Invalid("need at least one level per stage".into()));
    }
    // Slot assignment: greedy pairing of gates in consecutive layers whose
    // supports intersect.
    struct Slot {
        stage_terms: Vec<Option<LindbladTerm>>,
        last_support: Vec<usize>,
        last_layer: usize,
    }
    let mut slots: Vec<Slot> = vec![];
    for (l, layer) in schedule.layers.iter().enumerate() {
        for gate in &layer.gates {
            let h = log_unitary(&gate.unitary)?;
            let term = LindbladTerm::hamiltonian_only(
                gate.support.clone(),
                h.mapv(|z| -z),
            );
            let slot = slots.iter_mut().find(|s| {
                s.last_layer < l && s.last_support.iter().any(|x| gate.support.contains(x))
            });
            match slot {
                Some(s) => {
                    while s.stage_terms.len() < l {
                        s.stage_terms.push(None);
                    }
                    s.stage_terms.push(Some(term));
                    s.last_support = gate.support.clone();
                    s.last_layer = l;
                }
                None => {
                    let mut stage_terms: Vec<Option<LindbladTerm>> = vec![None; l];
                    stage_terms.push(Some(term));
                    slots.push(Slot {
                        stage_terms,
                        last_support: gate.support.clone(),
                        last_layer: l,
                    });
                }
            }
        }
    }
    let levels = levels_per_stage * n_layers;
    let gamma = levels_per_stage as f64 / schedule.dwell;
    let mut spec = TimerSpec::new(levels, gamma);
    if n_layers >= 2 {
        spec = TimerSpec::two_stage(levels, gamma, levels_per_stage);
    }
    let thresholds: Vec<usize> = (1..=n_layers).map(|l| l * levels_per_stage).collect();
    let terms: Vec<SwitchedTerm> = slots
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut stages = s.stage_terms;
            while stages.len() < n_layers {
                stages.push(None);
            }
            SwitchedTerm {
                timer: i,
                stages,
            }
        })
        .collect();
    SwitchedLindbladian::from_parts(schedule.geometry.clone(), spec, thresholds, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{basis_ket, fidelity_pure, outer, trace_distance};
    use crate::test_util::rng;

    pub fn hadamard() -> CMat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ndarray::array![
            [C64::new(s, 0.0), C64::new(s, 0.0)],
            [C64::new(s, 0.0), C64::new(-s, 0.0)]
        ]
    }

    pub fn cnot() -> CMat {
        let mut m = CMat::zeros((4, 4));
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(1, 1)] = C64::new(1.0, 0.0);
        m[(2, 3)] = C64::new(1.0, 0.0);
        m[(3, 2)] = C64::new(1.0, 0.0);
        m
    }

    #[test]
    fn log_unitary_roundtrip_and_branch() {
        let mut r = rng(91);
        for u in [
            hadamard(),
            cnot(),
            crate::qstate::expm_i_hermitian(&crate::test_util::random_hermitian(4, &mut r), 1.0)
                .unwrap(),
        ] {
            let h = log_unitary(&u).unwrap();
            assert!(operator_norm(&h) <= std::f64::consts::PI + 1e-9);
            let back = crate::qstate::expm_i_hermitian(&h, 1.0).unwrap();
            assert!(
                operator_norm(&(back - &u)) < 1e-10,
                "exp(i log U) must reproduce U"
            );
        }
    }

    #[test]
    fn schedule_validation_rejects_overlap() {
        let geom = Arc::new(LatticeGeometry::chain(2, 2));
        let layer = GateLayer {
            gates: vec![
                Gate::new(vec![0], hadamard()),
                Gate::new(vec![0], hadamard()),
            ],
        };
        assert!(matches!(
            CircuitSchedule::new(geom, vec![layer]),
            Err(Error::OverlappingGates(0, 1))
        ));
    }

    #[test]
    fn bell_circuit_unitary() {
        let geom = Arc::new(LatticeGeometry::chain(2, 2));
        let sched = CircuitSchedule::new(
            geom,
            vec![
                GateLayer {
                    gates: vec![Gate::new(vec![0], hadamard())],
                },
                GateLayer {
                    gates: vec![Gate::new(vec![0, 1], cnot())],
                },
            ],
        )
        .unwrap();
        let psi0 = basis_ket(4, 0);
        let rho = sched.apply(&outer(&psi0, &psi0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = ndarray::array![
            C64::new(s, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(s, 0.0)
        ];
        assert!(fidelity_pure(&bell, &rho) > 1.0 - 1e-12);
    }

    #[test]
    fn identity_circuit_compiles_to_near_identity_channel() {
        let geom = Arc::new(LatticeGeometry::sites(vec![2]));
        let sched = CircuitSchedule::new(
            geom,
            vec![GateLayer {
                gates: vec![Gate::new(vec![0], identity(2))],
            }],
        )
        .unwrap();
        let sw = compile_circuit(&sched, 16).unwrap();
        let mut r = rng(92);
        let rho0 = crate::test_util::random_density(2, &mut r);
        let run = sw.run(&rho0, &[0.0, 2.0], 1e-10).unwrap();
        // log(I) = 0, so nothing ever acts on the system.
        assert!(trace_distance(&run.marginals[1], &rho0) < 1e-9);
    }

    #[test]
    fn single_hadamard_compilation_converges_in_levels() {
        let geom = Arc::new(LatticeGeometry::sites(vec![2]));
        let sched = CircuitSchedule::new(
            geom,
            vec![GateLayer {
                gates: vec![Gate::new(vec![0], hadamard())],
            }],
        )
        .unwrap();
        let rho0 = outer(&basis_ket(2, 0), &basis_ket(2, 0));
        let target = sched.apply(&rho0).unwrap();
        let mut prev = f64::INFINITY;
        for levels in [8usize, 16, 32] {
            let sw = compile_circuit(&sched, levels).unwrap();
            let run = sw.run(&rho0, &[0.0, 3.0], 1e-10).unwrap();
            let d = trace_distance(&run.marginals[1], &target);
            assert!(d < prev, "distance must shrink with levels: {d} vs {prev}");
            prev = d;
        }
        // At T = 32, within the dephasing-limited scale.
        assert!(prev < 0.11, "T = 32 distance {prev}");
    }

    #[test]
    fn hadamard_and_cnot_share_one_slot() {
        let geom = Arc::new(LatticeGeometry::chain(2, 2));
        let sched = CircuitSchedule::new(
            geom,
            vec![
                GateLayer {
                    gates: vec![Gate::new(vec![0], hadamard())],
                },
                GateLayer {
                    gates: vec![Gate::new(vec![0, 1], cnot())],
                },
            ],
        )
        .unwrap();
        let sw = compile_circuit(&sched, 8).unwrap();
        assert_eq!(sw.n_timers(), 1);
        assert_eq!(sw.thresholds(), &[8, 16]);
    }
}
