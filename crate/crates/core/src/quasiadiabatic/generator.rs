use super::filter::QaFilter;
use super::path::HamiltonianPath;
use crate::error::Result;
use crate::qstate::{commutator, dagger, hermitize, C64, CMat, CVec};

/// Which generator drives the transport.
#[derive(Debug, Clone, Copy)]
pub enum QaMode {
    /// Parallel-transport generator from the ground-space projector.
    ExactSpectral,
    /// Filtered generator with the gap re-read at every `s` (two-level
    /// transport becomes exact).
    FilteredLocalGap { q: f64, t_cut_over_gap: f64 },
    /// Filtered generator with one uniform-gap filter for the whole path,
    /// the form the quasi-locality machinery uses.
    FilteredUniform(QaFilter),
}

/// `K_ex(s) = i [P(s), dP/ds]` with the derivative by central differences.
pub fn exact_qa_generator(path: &HamiltonianPath, s: f64, h_s: f64) -> Result<CMat> {
    let p_plus = path.ground_projector(s + h_s)?;
    let p_minus = path.ground_projector(s - h_s)?;
    let p = path.ground_projector(s)?;
    let dp = (p_plus - p_minus).mapv(|z| z * C64::new(1.0 / (2.0 * h_s), 0.0));
    let k = commutator(&p, &dp).mapv(|z| C64::new(0.0, 1.0) * z);
    Ok(hermitize(&k))
}

/// Residual of the intertwining relation `dP/ds = i [K, P]`.
pub fn intertwining_residual(path: &HamiltonianPath, s: f64, h_s: f64, k: &CMat) -> Result<f64> {
    let p_plus = path.ground_projector(s + h_s)?;
    let p_minus = path.ground_projector(s - h_s)?;
    let p = path.ground_projector(s)?;
    let dp = (p_plus - p_minus).mapv(|z| z * C64::new(1.0 / (2.0 * h_s), 0.0));
    let ikp = commutator(k, &p).mapv(|z| C64::new(0.0, 1.0) * z);
    Ok(crate::qstate::operator_norm(&(dp - ikp)))
}

/// `integral dt W(t) e^(iHt) A e^(-iHt)`: the filtered conjugation, evaluated
/// in the eigenbasis of `h` where it multiplies matrix elements by
/// `i * weight(E_m - E_n)`.
pub fn filtered_conjugation(h: &CMat, a: &CMat, filter: &QaFilter) -> Result<CMat> {
    let (w, v) = crate::qstate::eigh(h)?;
    Ok(filtered_conjugation_eig(&w, &v, a, filter))
}

/// The same, given the eigendecomposition of `h`.
pub fn filtered_conjugation_eig(
    w: &ndarray::Array1<f64>,
    v: &CMat,
    a: &CMat,
    filter: &QaFilter,
) -> CMat {
    let a_eig = dagger(v).dot(a).dot(v);
    let d = a.nrows();
    let mut out = CMat::zeros((d, d));
    for m in 0..d {
        for n in 0..d {
            let s = filter.weight(w[m] - w[n]);
            out[(m, n)] = C64::new(0.0, s) * a_eig[(m, n)];
        }
    }
    v.dot(&out).dot(&dagger(v))
}

/// Filtered generator with the filter rebuilt from the local gap at `s`
/// (read off the same eigendecomposition).
pub fn filtered_qa_generator_local(
    path: &HamiltonianPath,
    s: f64,
    q: f64,
    t_cut_over_gap: f64,
    h_s: f64,
) -> Result<CMat> {
    let h = path.hamiltonian(s)?;
    let (w, v) = crate::qstate::eigh(&h)?;
    let gap = w[1] - w[0];
    if gap < path.gap_tol {
        return Err(crate::error::Error::GapCollapse {
            s,
            gap,
            tol: path.gap_tol,
        });
    }
    let filter = QaFilter::new(gap, q, t_cut_over_gap / gap);
    let dh = path.hamiltonian_derivative(s, h_s)?;
    Ok(hermitize(&filtered_conjugation_eig(&w, &v, &dh, &filter)))
}

/// The filtered quasi-adiabatic generator at `s`.
pub fn filtered_qa_generator(
    path: &HamiltonianPath,
    s: f64,
    filter: &QaFilter,
    h_s: f64,
) -> Result<CMat> {
    let h = path.hamiltonian(s)?;
    let dh = path.hamiltonian_derivative(s, h_s)?;
    let k = filtered_conjugation(&h, &dh, filter)?;
    Ok(hermitize(&k))
}

/// Result of transporting the `s = 0` ground state along the path.
#[derive(Debug, Clone)]
pub struct TransportReport {
    pub s_grid: Vec<f64>,
    /// `|<gs(s) | psi(s)>|^2` along the grid.
    pub fidelities: Vec<f64>,
    pub final_fidelity: f64,
    /// `|| U(s) P(0) U(s)^+ - P(s) ||` at the endpoint.
    pub projector_transport_residual: f64,
    pub final_state: CVec,
}

/// Transport the ground state with midpoint-exponential steps
/// `psi <- exp(i K(s_mid) ds) psi`.
pub fn transport(path: &HamiltonianPath, mode: &QaMode, n_steps: usize) -> Result<TransportReport> {
    let h_s = 1e-4;
    let ds = 1.0 / n_steps as f64;
    let mut psi = path.ground_state(0.0)?;
    let mut u = crate::qstate::identity(path.dim());
    let mut s_grid = vec![0.0];
    let mut fidelities = vec![1.0];
    for i in 0..n_steps {
        let s_mid = (i as f64 + 0.5) * ds;
        let k = generator_at(path, s_mid, mode, h_s)?;
        let step = crate::qstate::expm_i_hermitian(&k, ds)?;
        psi = step.dot(&psi);
        u = step.dot(&u);
        let s_end = (i + 1) as f64 * ds;
        let gs = path.ground_state(s_end)?;
        let ov = crate::qstate::inner(&gs, &psi);
        s_grid.push(s_end);
        fidelities.push(ov.norm_sqr());
    }
    let p0 = path.ground_projector(0.0)?;
    let p1 = path.ground_projector(1.0)?;
    let moved = u.dot(&p0).dot(&dagger(&u));
    let projector_transport_residual = crate::qstate::operator_norm(&(moved - p1));
    let final_fidelity = *fidelities.last().unwrap();
    Ok(TransportReport {
        s_grid,
        fidelities,
        final_fidelity,
        projector_transport_residual,
        final_state: psi,
    })
}

pub(crate) fn generator_at(
    path: &HamiltonianPath,
    s: f64,
    mode: &QaMode,
    h_s: f64,
) -> Result<CMat> {
    match mode {
        QaMode::ExactSpectral => exact_qa_generator(path, s, h_s),
        QaMode::FilteredLocalGap { q, t_cut_over_gap } => {
            filtered_qa_generator_local(path, s, *q, *t_cut_over_gap, h_s)
        }
        QaMode::FilteredUniform(filter) => filtered_qa_generator(path, s, filter, h_s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasiadiabatic::paths;

    #[test]
    fn constant_path_has_zero_generators() {
        let geom = std::sync::Arc::new(crate::qstate::LatticeGeometry::sites(vec![2]));
        let p = HamiltonianPath::new("constant", geom, |_s| {
            vec![crate::qstate::LocalOperator::new(
                vec![0],
                ndarray::array![
                    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                    [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]
                ],
            )]
        });
        let k_ex = exact_qa_generator(&p, 0.5, 1e-4).unwrap();
        assert!(crate::qstate::operator_norm(&k_ex) < 1e-7);
        let f = QaFilter::for_gap(2.0);
        let k_f = filtered_qa_generator(&p, 0.5, &f, 1e-4).unwrap();
        assert!(crate::qstate::operator_norm(&k_f) < 1e-10);
    }

    #[test]
    fn exact_generator_intertwines() {
        let p = paths::single_qubit();
        for s in [0.1, 0.5, 0.85] {
            let k = exact_qa_generator(&p, s, 1e-4).unwrap();
            let res = intertwining_residual(&p, s, 1e-4, &k).unwrap();
            assert!(res < 1e-6, "s = {s}: intertwining residual {res}");
        }
    }

    #[test]
    fn exact_transport_tracks_ground_state() {
        let p = paths::single_qubit();
        let rep = transport(&p, &QaMode::ExactSpectral, 400).unwrap();
        for (s, f) in rep.s_grid.iter().zip(rep.fidelities.iter()) {
            assert!(*f >= 1.0 - 1e-8, "s = {s}: fidelity {f}");
        }
        assert!(rep.projector_transport_residual < 1e-5);
    }

    #[test]
    fn uncoupled_generator_is_site_local() {
        // For independent sites the filtered generator is a sum of
        // single-site terms: its matrix elements between states differing on
        // two or more sites vanish. (The projector-commutator form carries
        // spectator ground-state projectors and is not site-local, which is
        // invisible to ground-space transport.)
        let p = paths::uncoupled_chain(4);
        let lambda = p.uniform_gap(16).unwrap();
        let k = filtered_qa_generator(&p, 0.4, &QaFilter::for_gap(lambda), 1e-4).unwrap();
        for r in 0..16usize {
            for c in 0..16usize {
                let differing = (0..4)
                    .filter(|&site| {
                        let bit = 3 - site;
                        (r >> bit) & 1 != (c >> bit) & 1
                    })
                    .count();
                if differing >= 2 {
                    assert!(
                        k[(r, c)].norm() < 1e-8,
                        "off-site block ({r},{c}) = {}",
                        k[(r, c)].norm()
                    );
                }
            }
        }
    }

    #[test]
    fn filtered_local_gap_transport_on_single_qubit() {
        // Per-s calibration makes two-level transport essentially exact.
        let p = paths::single_qubit();
        let mode = QaMode::FilteredLocalGap {
            q: 8.0,
            t_cut_over_gap: 40.0,
        };
        let rep = transport(&p, &mode, 400).unwrap();
        assert!(
            rep.final_fidelity > 1.0 - 1e-6,
            "fidelity {}",
            rep.final_fidelity
        );
    }

    #[test]
    fn filtered_uniform_transport_on_single_qubit() {
        let p = paths::single_qubit();
        let lambda = p.uniform_gap(64).unwrap();
        let mode = QaMode::FilteredUniform(QaFilter::for_gap(lambda));
        let rep = transport(&p, &mode, 300).unwrap();
        assert!(
            rep.final_fidelity > 0.999,
            "fidelity {}",
            rep.final_fidelity
        );
    }

    #[test]
    fn filtered_transport_on_paramagnetic_chain() {
        let p = paths::paramagnetic_chain(6, 2.0, 3.0, 0.5);
        let mode = QaMode::FilteredLocalGap {
            q: 8.0,
            t_cut_over_gap: 40.0,
        };
        let rep = transport(&p, &mode, 200).unwrap();
        assert!(
            rep.final_fidelity > 0.995,
            "fidelity {}",
            rep.final_fidelity
        );
        let rep_ex = transport(&p, &QaMode::ExactSpectral, 200).unwrap();
        assert!(rep_ex.final_fidelity > 0.999);
    }
}
