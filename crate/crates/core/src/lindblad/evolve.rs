//! Schroedinger- and Heisenberg-picture evolution and convergence fits.

use super::ode::{integrate_times, OdeOpts};
use super::{assemble_superoperator, expm, Lindbladian};
use crate::error::{Error, Result};
use crate::policy::NumericPolicy;
use crate::qstate::{dagger, trace_distance, unvec_col, vec_col, C64, CMat};

/// Evolve by exponentiating the dense superoperator. Dense regime only.
pub fn evolve_expm(lb: &Lindbladian, rho0: &CMat, t: f64, policy: &NumericPolicy) -> Result<CMat> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let d = lb.dim();
    if rho0.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho0.nrows(),
        });
    }
    let s = assemble_superoperator(lb, policy)?;
    let chan = expm(&s.mapv(|z| z * t))?;
    Ok(unvec_col(&chan.dot(&vec_col(rho0)), d))
}

/// A sampled trajectory of density matrices.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMat>,
}

impl Trajectory {
    pub fn final_state(&self) -> &CMat {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn traces(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| crate::qstate::trace(s).re)
            .collect()
    }

    pub fn min_eigenvalues(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| crate::qstate::min_eigval(s).expect("eigh"))
            .collect()
    }

    pub fn distances_to(&self, target: &CMat) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| trace_distance(s, target))
            .collect()
    }
}

/// Matrix-free adaptive integration of `d rho/dt = L(rho)` through a time grid.
pub fn evolve_integrate(
    lb: &Lindbladian,
    rho0: &CMat,
    times: &[f64],
    tol: f64,
) -> Result<Trajectory> {
    if times.iter().any(|&t| t < 0.0) {
        return Err(Error::NegativeTime(
            times.iter().cloned().fold(f64::INFINITY, f64::min),
        ));
    }
    let d = lb.dim();
    if rho0.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rho0.nrows(),
        });
    }
    let opts = OdeOpts::with_tol(tol);
    let y0: Vec<C64> = rho0.iter().cloned().collect();
    let mut states = Vec::with_capacity(times.len());
    let mut scratch = CMat::zeros((d, d));
    integrate_times(
        |_t, y, dy| {
            for (dst, src) in scratch.iter_mut().zip(y.iter()) {
                *dst = *src;
            }
            let out = lb.apply(&scratch).expect("dimensions checked above");
            for (dst, src) in dy.iter_mut().zip(out.iter()) {
                *dst = *src;
            }
        },
        times,
        &y0,
        &opts,
        |_, y| {
            states.push(CMat::from_shape_vec((d, d), y.to_vec()).expect("shape"));
        },
    )?;
    Ok(Trajectory {
        times: times.to_vec(),
        states,
    })
}

/// Heisenberg evolution `A(t) = exp(t L*)(A)`. Uses the dense superoperator
/// adjoint in the dense regime and the matrix-free integrator above it.
pub fn heisenberg_evolve(
    lb: &Lindbladian,
    a: &CMat,
    t: f64,
    policy: &NumericPolicy,
) -> Result<CMat> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let d = lb.dim();
    if a.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: a.nrows(),
        });
    }
    if d <= policy.superop_guard {
        let s = assemble_superoperator(lb, policy)?;
        // The Hilbert-Schmidt adjoint of exp(tS) is exp(t S^+).
        let chan_adj = expm(&dagger(&s).mapv(|z| z * t))?;
        Ok(unvec_col(&chan_adj.dot(&vec_col(a)), d))
    } else {
        let opts = OdeOpts::with_tol(policy.ode_tol);
        let y0: Vec<C64> = a.iter().cloned().collect();
        let mut out = None;
        let mut scratch = CMat::zeros((d, d));
        integrate_times(
            |_t, y, dy| {
                for (dst, src) in scratch.iter_mut().zip(y.iter()) {
                    *dst = *src;
                }
                let r = lb.apply_adjoint(&scratch).expect("dimensions checked");
                for (dst, src) in dy.iter_mut().zip(r.iter()) {
                    *dst = *src;
                }
            },
            &[0.0, t],
            &y0,
            &opts,
            |i, y| {
                if i == 1 {
                    out = Some(CMat::from_shape_vec((d, d), y.to_vec()).expect("shape"));
                }
            },
        )?;
        Ok(out.expect("final sample emitted"))
    }
}

/// Convergence diagnostics for a trajectory against a target state.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub times: Vec<f64>,
    pub trace_distances: Vec<f64>,
    /// Fitted decay rate of `distance ~ prefactor * exp(-mu t)`; `None` when
    /// the trajectory sits at the target from the start.
    pub mu: Option<f64>,
    pub prefactor: Option<f64>,
    /// Root-mean-square residual of the log-linear fit.
    pub fit_residual: Option<f64>,
    /// Index window `[lo, hi)` the fit was restricted to.
    pub window: Option<(usize, usize)>,
    /// Set when the tail was non-monotone (noise floor) and got cut.
    pub tail_flagged: bool,
}

/// Evolve `rho0` and fit `log ||rho(t) - rho1||_1` against `t` over the
/// exponential (monotone-decreasing) regime.
pub fn fit_convergence(
    lb: &Lindbladian,
    rho0: &CMat,
    rho1: &CMat,
    times: &[f64],
    policy: &NumericPolicy,
) -> Result<ConvergenceReport> {
    let traj = evolve_integrate(lb, rho0, times, policy.ode_tol)?;
    let distances = traj.distances_to(rho1);
    Ok(fit_distances(times, &distances))
}

/// The fitting core, exposed for trajectories produced elsewhere.
pub fn fit_distances(times: &[f64], distances: &[f64]) -> ConvergenceReport {
    let floor = 1e-12;
    let all_converged = distances.iter().all(|&d| d <= 1e-10);
    if all_converged || distances.len() < 3 {
        return ConvergenceReport {
            times: times.to_vec(),
            trace_distances: distances.to_vec(),
            mu: None,
            prefactor: None,
            fit_residual: None,
            window: None,
            tail_flagged: false,
        };
    }
    // Longest decreasing run above the floor, searched from the left.
    let mut best = (0usize, 1usize);
    let mut lo = 0usize;
    let mut tail_flagged = false;
    for i in 0..distances.len() {
        let keep = distances[i] > floor
            && (i == lo || distances[i] < distances[i - 1] * (1.0 + 1e-9));
        if keep {
            if i + 1 - lo > best.1 - best.0 {
                best = (lo, i + 1);
            }
        } else {
            tail_flagged = tail_flagged || i > 0;
            lo = i;
            if distances[i] > floor && i + 1 - lo > best.1 - best.0 {
                best = (lo, i + 1);
            }
        }
    }
    let (wlo, whi) = best;
    if whi - wlo < 3 {
        return ConvergenceReport {
            times: times.to_vec(),
            trace_distances: distances.to_vec(),
            mu: None,
            prefactor: None,
            fit_residual: None,
            window: Some((wlo, whi)),
            tail_flagged,
        };
    }
    // Least squares on log d = log c - mu t.
    let n = (whi - wlo) as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for i in wlo..whi {
        let t = times[i];
        let y = distances[i].ln();
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let denom = n * stt - st * st;
    let slope = (n * sty - st * sy) / denom;
    let intercept = (sy - slope * st) / n;
    let mut ss = 0.0;
    for i in wlo..whi {
        let pred = intercept + slope * times[i];
        ss += (distances[i].ln() - pred).powi(2);
    }
    ConvergenceReport {
        times: times.to_vec(),
        trace_distances: distances.to_vec(),
        mu: Some(-slope),
        prefactor: Some(intercept.exp()),
        fit_residual: Some((ss / n).sqrt()),
        window: Some((wlo, whi)),
        tail_flagged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::LindbladTerm;
    use crate::qstate::{identity, operator_norm, trace, trace_norm, LatticeGeometry};
    use crate::test_util::{random_density, random_hermitian, random_lindbladian, random_matrix, rng};
    use ndarray::array;

    fn policy() -> NumericPolicy {
        NumericPolicy::default()
    }

    fn damping_on_site() -> (LatticeGeometry, Lindbladian) {
        let g = LatticeGeometry::sites(vec![2]);
        let sm = array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let lb =
            Lindbladian::new(g.clone(), vec![LindbladTerm::new(vec![0], None, vec![sm])]).unwrap();
        (g, lb)
    }

    #[test]
    fn zero_time_is_identity() {
        let mut r = rng(51);
        let (_, lb) = damping_on_site();
        let rho = random_density(2, &mut r);
        let out = evolve_expm(&lb, &rho, 0.0, &policy()).unwrap();
        assert!(trace_norm(&(out - rho)) < 1e-13);
    }

    #[test]
    fn negative_time_rejected() {
        let (_, lb) = damping_on_site();
        let rho = identity(2).mapv(|z| 0.5 * z);
        assert!(matches!(
            evolve_expm(&lb, &rho, -0.1, &policy()),
            Err(Error::NegativeTime(_))
        ));
        assert!(matches!(
            evolve_integrate(&lb, &rho, &[0.0, -1.0], 1e-9),
            Err(Error::NegativeTime(_))
        ));
    }

    #[test]
    fn damping_population_decays_exponentially() {
        let (_, lb) = damping_on_site();
        let one = array![
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
        ];
        let out = evolve_expm(&lb, &one, 1.0, &policy()).unwrap();
        assert!((out[(1, 1)].re - (-1.0f64).exp()).abs() < 1e-12);
        assert!((trace(&out).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn semigroup_property() {
        let mut r = rng(52);
        let g = LatticeGeometry::chain(2, 2);
        let lb = random_lindbladian(&g, &mut r);
        let rho = random_density(4, &mut r);
        let a = evolve_expm(&lb, &rho, 0.9, &policy()).unwrap();
        let ab = evolve_expm(&lb, &a, 0.4, &policy()).unwrap();
        let direct = evolve_expm(&lb, &rho, 1.3, &policy()).unwrap();
        assert!(trace_norm(&(ab - direct)) < 1e-9);
    }

    #[test]
    fn integrator_matches_expm() {
        let mut r = rng(53);
        let g = LatticeGeometry::chain(2, 2);
        let lb = random_lindbladian(&g, &mut r);
        let rho = random_density(4, &mut r);
        for t in [0.1, 1.0, 10.0] {
            let dense = evolve_expm(&lb, &rho, t, &policy()).unwrap();
            let traj = evolve_integrate(&lb, &rho, &[0.0, t], 1e-9).unwrap();
            assert!(
                trace_norm(&(traj.final_state() - &dense)) < 1e-7,
                "t = {t}"
            );
        }
    }

    #[test]
    fn integrator_exact_rotation_fidelity() {
        // Pure Hamiltonian evolution against the analytic rotation.
        let g = LatticeGeometry::sites(vec![2]);
        let h = crate::test_util::pauli_z(2).mapv(|z| z * 1.3);
        let hm = crate::qstate::hermitize(&h);
        let lb = Lindbladian::new(g, vec![LindbladTerm::hamiltonian_only(vec![0], hm.clone())])
            .unwrap();
        let psi0 = crate::qstate::normalize(&ndarray::array![
            C64::new(0.6, 0.0),
            C64::new(0.0, 0.8)
        ]);
        let rho0 = crate::qstate::outer(&psi0, &psi0);
        let t = 2.0;
        let traj = evolve_integrate(&lb, &rho0, &[0.0, t], 1e-11).unwrap();
        let u = expm(&hm.mapv(|z| C64::new(0.0, -t) * z)).unwrap();
        let want = u.dot(&rho0).dot(&dagger(&u));
        let fid = crate::qstate::trace(&traj.final_state().dot(&want)).re;
        assert!(fid > 1.0 - 1e-9, "fidelity {fid}");
    }

    #[test]
    fn zero_generator_constant_trajectory() {
        let g = LatticeGeometry::sites(vec![2]);
        let lb = Lindbladian::zero(g);
        let rho = identity(2).mapv(|z| 0.5 * z);
        let traj = evolve_integrate(&lb, &rho, &[0.0, 1.0, 2.0], 1e-10).unwrap();
        for s in &traj.states {
            assert!(trace_norm(&(s - &rho)) < 1e-13);
        }
    }

    #[test]
    fn heisenberg_unital_and_dual() {
        let mut r = rng(54);
        let g = LatticeGeometry::sites(vec![2, 2, 2]);
        let lb = random_lindbladian(&g, &mut r);
        let t = 0.7;
        let eye = identity(8);
        let he = heisenberg_evolve(&lb, &eye, t, &policy()).unwrap();
        assert!(operator_norm(&(he - identity(8))) < 1e-10);
        for _ in 0..3 {
            let a = random_matrix(8, &mut r);
            let rho = random_density(8, &mut r);
            let lhs = trace(&heisenberg_evolve(&lb, &a, t, &policy()).unwrap().dot(&rho)).re;
            let rhs = trace(&a.dot(&evolve_expm(&lb, &rho, t, &policy()).unwrap())).re;
            assert!((lhs - rhs).abs() < 1e-9, "duality defect {}", (lhs - rhs).abs());
        }
    }

    #[test]
    fn heisenberg_is_unitary_conjugation_for_hamiltonian_only() {
        let mut r = rng(55);
        let g = LatticeGeometry::sites(vec![2, 2]);
        let h = random_hermitian(4, &mut r);
        let lb = Lindbladian::new(
            g,
            vec![LindbladTerm::hamiltonian_only(vec![0, 1], h.clone())],
        )
        .unwrap();
        let a = random_matrix(4, &mut r);
        let t = 0.9;
        let got = heisenberg_evolve(&lb, &a, t, &policy()).unwrap();
        let u = expm(&h.mapv(|z| C64::new(0.0, t) * z)).unwrap();
        let want = u.dot(&a).dot(&dagger(&u));
        assert!(operator_norm(&(got - want)) < 1e-9);
    }

    #[test]
    fn heisenberg_matrix_free_path_agrees_with_dense() {
        let mut r = rng(56);
        let g = LatticeGeometry::sites(vec![2, 2]);
        let lb = random_lindbladian(&g, &mut r);
        let a = random_matrix(4, &mut r);
        let dense = heisenberg_evolve(&lb, &a, 0.8, &policy()).unwrap();
        let tight = NumericPolicy {
            superop_guard: 1,
            ..policy()
        };
        let mf = heisenberg_evolve(&lb, &a, 0.8, &tight).unwrap();
        assert!(operator_norm(&(dense - mf)) < 1e-7);
    }

    #[test]
    fn positivity_and_hermiticity_along_trajectory() {
        let mut r = rng(58);
        let g = LatticeGeometry::chain(2, 2);
        let lb = random_lindbladian(&g, &mut r);
        let rho0 = random_density(4, &mut r);
        let times: Vec<f64> = (0..=8).map(|k| 0.5 * k as f64).collect();
        let traj = evolve_integrate(&lb, &rho0, &times, 1e-10).unwrap();
        for (s, me) in traj.states.iter().zip(traj.min_eigenvalues()) {
            assert!(crate::qstate::is_hermitian(s, 1e-10));
            assert!(me >= -1e-9, "positivity violated: {me}");
        }
        for tr in traj.traces() {
            assert!((tr - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn trace_norm_contractivity_along_trajectory() {
        let mut r = rng(57);
        let g = LatticeGeometry::chain(2, 2);
        let lb = random_lindbladian(&g, &mut r);
        let a = random_density(4, &mut r);
        let b = random_density(4, &mut r);
        let d0 = trace_norm(&(&a - &b));
        let mut prev = d0;
        for &t in &[0.2, 0.5, 1.0, 2.0] {
            let ea = evolve_expm(&lb, &a, t, &policy()).unwrap();
            let eb = evolve_expm(&lb, &b, t, &policy()).unwrap();
            let d = trace_norm(&(ea - eb));
            assert!(d <= prev + 1e-10, "contractivity violated at t = {t}");
            prev = d;
        }
    }

    #[test]
    fn fit_recovers_single_site_rate() {
        // Product driver toward |0> on one qubit: distance decays like e^{-t}.
        let (g, lb) = damping_on_site();
        let _ = g;
        let rho0 = array![
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
        ];
        let rho1 = array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let times: Vec<f64> = (0..20).map(|i| 0.25 * i as f64).collect();
        let rep = fit_convergence(&lb, &rho0, &rho1, &times, &policy()).unwrap();
        let mu = rep.mu.expect("rate should be fitted");
        assert!((mu - 1.0).abs() < 0.05, "mu = {mu}");
    }

    #[test]
    fn fit_flags_fixed_point() {
        let (_, lb) = damping_on_site();
        let rho = array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let times = [0.0, 1.0, 2.0];
        let rep = fit_convergence(&lb, &rho, &rho, &times, &policy()).unwrap();
        assert!(rep.mu.is_none());
        assert!(rep.trace_distances.iter().all(|&d| d <= 1e-10));
    }
}
