//! The dissipative timer gadget: a chain of `T+1` levels hopped through at
//! rate `gamma` with an absorbing top level, so the top-level occupation
//! ("the switch") flips near `tau = T / gamma` within a window that narrows
//! as `T` grows.
//!
//! The production representation is the compressed classical register over
//! levels `0..=T`; the literal `T+1`-qubit Lindbladian gadget exists as a
//! validation oracle for small `T`.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::lindblad::ode::{integrate_times, OdeOpts};
use crate::lindblad::{Lindbladian, LindbladTerm};
use crate::qstate::{C64, CVec, LatticeGeometry};

/// Parameters of one timer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimerSpec {
    /// Number of decay steps; the register has levels `0..=T`.
    pub levels: usize,
    /// Hop rate.
    pub gamma: f64,
    /// Optional intermediate switch level for two-stage timers.
    pub t1: Option<usize>,
}

impl TimerSpec {
    pub fn new(levels: usize, gamma: f64) -> Self {
        assert!(levels >= 1 && gamma > 0.0);
        TimerSpec {
            levels,
            gamma,
            t1: None,
        }
    }

    pub fn two_stage(levels: usize, gamma: f64, t1: usize) -> Self {
        assert!(t1 < levels, "T1 must be below the top level");
        TimerSpec {
            levels,
            gamma,
            t1: Some(t1),
        }
    }

    /// Switching time `tau = T / gamma`.
    pub fn tau(&self) -> f64 {
        self.levels as f64 / self.gamma
    }

    /// First switching time `tau_1 = T_1 / gamma` for two-stage timers.
    pub fn tau1(&self) -> Option<f64> {
        self.t1.map(|t1| t1 as f64 / self.gamma)
    }

    /// Default window width `eps = tau * T^(-1/4)`.
    pub fn default_eps(&self) -> f64 {
        self.tau() * (self.levels as f64).powf(-0.25)
    }
}

/// Occupation probabilities over levels `0..=T`.
#[derive(Debug, Clone)]
pub struct TimerDistribution {
    pub probs: Vec<f64>,
}

impl TimerDistribution {
    pub fn top_mass(&self) -> f64 {
        *self.probs.last().unwrap()
    }

    /// Total mass over a level band `lo..=hi`.
    pub fn band_mass(&self, lo: usize, hi: usize) -> f64 {
        self.probs[lo..=hi].iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

fn ln_factorial(k: usize) -> f64 {
    statrs::function::gamma::ln_gamma(k as f64 + 1.0)
}

/// log of the Poisson pmf `e^-mu mu^k / k!`.
fn ln_poisson_pmf(k: usize, mu: f64) -> f64 {
    if mu == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mu + k as f64 * mu.ln() - ln_factorial(k)
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NEG_INFINITY;
    }
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln P[Poisson(mu) >= k]`, accurate for tiny tails.
pub fn ln_poisson_upper_tail(k: usize, mu: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if mu == 0.0 {
        return f64::NEG_INFINITY;
    }
    if (k as f64) <= mu {
        // Heavy tail: complement of the head, computed in linear space.
        let head: f64 = (0..k).map(|j| ln_poisson_pmf(j, mu).exp()).sum();
        return (1.0 - head).max(0.0).ln();
    }
    // Sum pmf upward from k until terms stop contributing.
    let mut terms = vec![ln_poisson_pmf(k, mu)];
    let mut j = k;
    loop {
        let next = terms.last().unwrap() + mu.ln() - ((j + 1) as f64).ln();
        if next < terms[0] - 40.0 || j > k + 10_000_000 {
            break;
        }
        terms.push(next);
        j += 1;
    }
    log_sum_exp(terms.into_iter())
}

/// `ln P[Poisson(mu) <= k]`, accurate for tiny tails.
pub fn ln_poisson_lower_tail(k: usize, mu: f64) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    if (k as f64) >= mu {
        let tail: f64 = ((k + 1)..(k + 1) + head_guard(mu, k))
            .map(|j| ln_poisson_pmf(j, mu).exp())
            .sum();
        return (1.0 - tail).max(0.0).ln();
    }
    log_sum_exp((0..=k).map(|j| ln_poisson_pmf(j, mu)))
}

fn head_guard(mu: f64, k: usize) -> usize {
    // Enough terms above k to exhaust the complement mass.
    ((mu - k as f64) + 20.0 * mu.sqrt() + 20.0) as usize
}

/// Exact occupation distribution of the classical birth chain at time `t`:
/// truncated Poisson with an absorbing top level.
pub fn birth_chain_dist(spec: &TimerSpec, t: f64) -> Result<TimerDistribution> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let tt = spec.levels;
    let mu = spec.gamma * t;
    let mut probs = Vec::with_capacity(tt + 1);
    for k in 0..tt {
        probs.push(ln_poisson_pmf(k, mu).exp());
    }
    probs.push(ln_poisson_upper_tail(tt, mu).exp());
    Ok(TimerDistribution { probs })
}

/// ODE oracle for the birth chain: integrate `dp_k/dt = gamma (p_{k-1} - p_k)`
/// (with the top level absorbing) and return the distribution at `t`.
pub fn birth_chain_ode(spec: &TimerSpec, t: f64, tol: f64) -> Result<TimerDistribution> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let tt = spec.levels;
    let g = spec.gamma;
    let mut y0 = vec![C64::new(0.0, 0.0); tt + 1];
    y0[0] = C64::new(1.0, 0.0);
    let mut out = vec![0.0; tt + 1];
    integrate_times(
        |_t, y, dy| {
            for k in 0..=tt {
                let inflow = if k > 0 { y[k - 1] } else { C64::new(0.0, 0.0) };
                let outflow = if k < tt { y[k] } else { C64::new(0.0, 0.0) };
                dy[k] = (inflow - outflow) * g;
            }
        },
        &[0.0, t],
        &y0,
        &OdeOpts::with_tol(tol),
        |i, y| {
            if i == 1 {
                for (dst, src) in out.iter_mut().zip(y.iter()) {
                    *dst = src.re;
                }
            }
        },
    )?;
    Ok(TimerDistribution { probs: out })
}

/// Build the literal `T+1`-qubit timer Lindbladian with jumps
/// `sqrt(gamma) |1><1|_j (x) |1><0|_{j+1}`.
pub fn quantum_timer_lindbladian(spec: &TimerSpec) -> Result<Lindbladian> {
    let tt = spec.levels;
    let geom = LatticeGeometry::chain(tt + 1, 2);
    let mut terms = vec![];
    let sqg = spec.gamma.sqrt();
    for j in 0..tt {
        // On the pair (j, j+1), both qubits with site j the slower digit:
        // |1><1| (x) |1><0| has the single entry |11><10|.
        let mut jump = Array2::zeros((4, 4));
        jump[(3, 2)] = C64::new(sqg, 0.0);
        terms.push(LindbladTerm::new(vec![j, j + 1], None, vec![jump]));
    }
    Lindbladian::new(geom, terms)
}

/// The accessible timer states `|phi_k> = |1...1 0...0>` with `k+1` ones.
pub fn phi_ket(spec: &TimerSpec, k: usize) -> CVec {
    let tt = spec.levels;
    let dim = 1usize << (tt + 1);
    // Site 0 is the slowest digit; |phi_k| has ones on sites 0..=k.
    let mut idx = 0usize;
    for site in 0..=k {
        idx |= 1 << (tt - site);
    }
    crate::qstate::basis_ket(dim, idx)
}

/// Occupation statistics of the full quantum gadget at time `t`, plus the
/// weight that leaked off the accessible subspace (which should be zero).
pub struct QuantumTimerReport {
    pub dist: TimerDistribution,
    pub leakage: f64,
}

pub fn quantum_timer_dist(spec: &TimerSpec, t: f64, tol: f64) -> Result<QuantumTimerReport> {
    if spec.levels > 6 {
        return Err(Error::DenseGuard {
            dim: 1 << (spec.levels + 1),
            guard: 1 << 7,
            advice: "the qubit gadget oracle is for T <= 6; use birth_chain_dist",
        });
    }
    let lb = quantum_timer_lindbladian(spec)?;
    let phi0 = phi_ket(spec, 0);
    let rho0 = crate::qstate::outer(&phi0, &phi0);
    let traj = crate::lindblad::evolve_integrate(&lb, &rho0, &[0.0, t], tol)?;
    let rho = traj.final_state();
    let mut probs = Vec::with_capacity(spec.levels + 1);
    for k in 0..=spec.levels {
        probs.push(crate::qstate::fidelity_pure(&phi_ket(spec, k), rho));
    }
    let dist = TimerDistribution { probs };
    let leakage = (crate::qstate::trace(rho).re - dist.total()).abs();
    Ok(QuantumTimerReport { dist, leakage })
}

/// Early/late switch probabilities at `tau -+ eps/2` together with the
/// theoretical exponent shape `T (x - log x - 1)` and Stirling prefactor.
#[derive(Debug, Clone, Copy)]
pub struct SwitchBounds {
    pub eps: f64,
    /// P[switch already flipped at tau - eps/2].
    pub p_early: f64,
    pub ln_p_early: f64,
    /// P[switch not yet flipped at tau + eps/2].
    pub p_late: f64,
    pub ln_p_late: f64,
    /// Exponent `T (x - log x - 1)` at the early edge, x = 1 - eps/(2 tau).
    pub exponent_early: f64,
    /// Exponent at the late edge, x = 1 + eps/(2 tau).
    pub exponent_late: f64,
    /// log of the Stirling bound prefactor at each edge.
    pub ln_prefactor_early: f64,
    pub ln_prefactor_late: f64,
}

pub fn switch_bounds(spec: &TimerSpec, eps: f64) -> Result<SwitchBounds> {
    let tau = spec.tau();
    if !(eps > 0.0 && eps < tau) {
        return Err(Error::Invalid(format!(
            "need 0 < eps < tau, got eps = {eps}, tau = {tau}"
        )));
    }
    let tt = spec.levels as f64;
    let t_early = tau - eps / 2.0;
    let t_late = tau + eps / 2.0;
    let ln_p_early = ln_poisson_upper_tail(spec.levels, spec.gamma * t_early);
    let ln_p_late = ln_poisson_lower_tail(spec.levels - 1, spec.gamma * t_late);
    let shape = |x: f64| tt * (x - x.ln() - 1.0);
    let x_early = t_early / tau;
    let x_late = t_late / tau;
    let pref = |x: f64| -(2.0 * std::f64::consts::PI * tt).sqrt().ln() - (1.0 - x).abs().ln();
    Ok(SwitchBounds {
        eps,
        p_early: ln_p_early.exp(),
        ln_p_early,
        p_late: ln_p_late.exp(),
        ln_p_late,
        exponent_early: shape(x_early),
        exponent_late: shape(x_late),
        ln_prefactor_early: pref(x_early),
        ln_prefactor_late: pref(x_late),
    })
}

/// `( sum_{k in band} p_k(t) )^N` for N independent identical timers,
/// computed in the log domain.
pub fn joint_band_prob(n_timers: usize, spec: &TimerSpec, t: f64, band: (usize, usize)) -> Result<f64> {
    Ok(ln_joint_band_prob(n_timers, spec, t, band)?.exp())
}

pub fn ln_joint_band_prob(
    n_timers: usize,
    spec: &TimerSpec,
    t: f64,
    band: (usize, usize),
) -> Result<f64> {
    let (lo, hi) = band;
    if hi > spec.levels || lo > hi {
        return Err(Error::Invalid(format!(
            "band {lo}..={hi} outside levels 0..={}",
            spec.levels
        )));
    }
    let mu = spec.gamma * t;
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    // ln(band mass), using complements where the complement is tiny.
    let ln_mass = if lo == 0 && hi == spec.levels {
        0.0
    } else if lo == 0 {
        // 1 - P[X >= hi+1]
        let lt = ln_poisson_upper_tail(hi + 1, mu);
        (-lt.exp()).ln_1p()
    } else if hi == spec.levels {
        // 1 - P[X <= lo-1]
        let lt = ln_poisson_lower_tail(lo - 1, mu);
        (-lt.exp()).ln_1p()
    } else {
        // 1 - P[X <= lo-1] - P[X >= hi+1]
        let a = ln_poisson_lower_tail(lo - 1, mu).exp();
        let b = ln_poisson_upper_tail(hi + 1, mu).exp();
        (1.0 - a - b).max(0.0).ln()
    };
    Ok(n_timers as f64 * ln_mass)
}
