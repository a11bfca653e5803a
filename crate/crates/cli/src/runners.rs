//! Experiment runners: pure computation into in-memory artifacts, written to
//! disk only after a run fully succeeds.

use std::sync::Arc;

use fastdrive_core::error::Error as CoreError;
use fastdrive_core::lindblad::{
    choi_cp_check, evolve_expm, evolve_integrate, fit_distances, heisenberg_evolve, Lindbladian,
    LindbladTerm,
};
use fastdrive_core::models::{
    basis_generation_check, condensation_driver, ghz_ket_levels, pair_chain_ket,
    pauli_projective_rep, product_driver, psi_plus_ket, trivial_rep, QuantumDouble, SiteChannel,
    SiteChannelDriver, SptBridge,
};
use fastdrive_core::nogo::{ghz_nogo_probe, overlap_probe};
use fastdrive_core::qstate::{
    basis_ket, dagger, fidelity_pure, hermitize, normalize, outer, tensor_kets, trace,
    trace_distance, trace_norm, C64, CMat, CVec, LatticeGeometry,
};
use fastdrive_core::quasiadiabatic::{
    circuit_from_path, delta_decomposition, patch_split, paths, transport, HamiltonianPath,
    QaFilter, QaMode,
};
use fastdrive_core::switchgear::{
    build_switched, compile_circuit, sequential_oracle, Attachment, CircuitSchedule, Gate,
    GateLayer,
};
use fastdrive_core::timer::{birth_chain_dist, switch_bounds, TimerSpec};
use fastdrive_core::NumericPolicy;
use ndarray::Array2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::*;

pub struct Artifacts {
    /// `(file name, contents)`, written under the output directory.
    pub csvs: Vec<(String, String)>,
    pub summary: Value,
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    NumericGuard(String),
    Other(String),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::DenseGuard { .. }
            | CoreError::GapCollapse { .. }
            | CoreError::StepSizeUnderflow { .. }
            | CoreError::FilterTail { .. } => RunError::NumericGuard(e.to_string()),
            CoreError::UnknownSites(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::Invalid(_)
            | CoreError::UnattachedTerm { .. }
            | CoreError::OverlappingGates(..)
            | CoreError::NegativeTime(_) => RunError::Config(e.to_string()),
            other => RunError::Other(other.to_string()),
        }
    }
}

type RunResult = Result<Artifacts, RunError>;

fn f(x: f64) -> String {
    format!("{x:.12e}")
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream))
}

pub fn run(cfg: &Config) -> RunResult {
    match &cfg.params {
        Params::Channels(p) => run_channels(cfg, p),
        Params::Timer(p) => run_timer(cfg, p),
        Params::Switch(p) => run_switch(cfg, p),
        Params::Compile(p) => run_compile(cfg, p),
        Params::Qa(p) => run_qa(cfg, p),
        Params::Condense(p) => run_condense(cfg, p),
        Params::Nogo(p) => run_nogo(cfg, p),
        Params::Spt(p) => run_spt(cfg, p),
        Params::Evolve(p) => run_evolve(cfg, p),
    }
}

fn random_matrix<R: Rng>(d: usize, r: &mut R) -> CMat {
    Array2::from_shape_fn((d, d), |_| {
        C64::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5)
    })
}

fn random_density<R: Rng>(d: usize, r: &mut R) -> CMat {
    let a = random_matrix(d, r);
    let p = a.dot(&dagger(&a));
    let tr = trace(&p);
    p.mapv(|z| z / tr)
}

fn random_ket<R: Rng>(d: usize, r: &mut R) -> CVec {
    normalize(&ndarray::Array1::from_shape_fn(d, |_| {
        C64::new(r.gen::<f64>() - 0.5, r.gen::<f64>() - 0.5)
    }))
}

// ---------------------------------------------------------------- channels

fn run_channels(cfg: &Config, p: &ChannelsParams) -> RunResult {
    let policy = NumericPolicy::default();
    let layouts: Vec<Vec<usize>> = vec![
        vec![2],
        vec![3],
        vec![4],
        vec![2, 2],
        vec![2, 3],
        vec![2, 2, 2],
        vec![2, 2, 2, 2],
    ];
    let rows: Vec<Result<String, RunError>> = (0..p.cases)
        .into_par_iter()
        .map(|case| {
            let mut r = rng_for(cfg.seed, case as u64);
            let dims = layouts[case % layouts.len()].clone();
            let geom = LatticeGeometry::sites(dims);
            let d = geom.total_dim();
            let mut terms = vec![];
            for site in 0..geom.n_sites() {
                let ld = geom.local_dim(site);
                let jumps = (0..1 + r.gen_range(0..2))
                    .map(|_| random_matrix(ld, &mut r))
                    .collect();
                terms.push(LindbladTerm::new(
                    vec![site],
                    Some(hermitize(&random_matrix(ld, &mut r))),
                    jumps,
                ));
            }
            let lb = Lindbladian::new(geom, terms).map_err(RunError::from)?;
            let t = p.t_min + (p.t_max - p.t_min) * r.gen::<f64>();
            let rho = random_density(d, &mut r);
            let sigma = random_density(d, &mut r);
            let a = random_matrix(d, &mut r);
            let ev_rho = evolve_expm(&lb, &rho, t, &policy)?;
            let ev_sigma = evolve_expm(&lb, &sigma, t, &policy)?;
            let tp = (trace(&ev_rho).re - 1.0).abs();
            let choi = choi_cp_check(&lb, t, &policy)?;
            let contraction =
                trace_norm(&(&rho - &sigma)) - trace_norm(&(&ev_rho - &ev_sigma));
            let dual = (trace(&a.dot(&ev_rho))
                - trace(&heisenberg_evolve(&lb, &a, t, &policy)?.dot(&rho)))
            .norm();
            let t1 = 0.4 * t;
            let semi = trace_norm(
                &(&evolve_expm(&lb, &evolve_expm(&lb, &rho, t1, &policy)?, t - t1, &policy)?
                    - &ev_rho),
            );
            Ok(format!(
                "{case},{d},{},{},{},{},{},{}",
                f(t),
                f(tp),
                f(choi.min_eigenvalue),
                f(contraction),
                f(dual),
                f(semi)
            ))
        })
        .collect();
    let mut csv = String::from("case,dim,t,tp_defect,choi_min_eig,contraction_margin,duality_defect,semigroup_defect\n");
    let mut worst_tp = 0.0f64;
    let mut worst_choi = 0.0f64;
    let mut worst_dual = 0.0f64;
    let mut worst_semi = 0.0f64;
    let mut min_contraction = f64::INFINITY;
    for row in rows {
        let row = row?;
        let cols: Vec<&str> = row.split(',').collect();
        worst_tp = worst_tp.max(cols[3].parse::<f64>().unwrap());
        worst_choi = worst_choi.min(cols[4].parse::<f64>().unwrap());
        min_contraction = min_contraction.min(cols[5].parse::<f64>().unwrap());
        worst_dual = worst_dual.max(cols[6].parse::<f64>().unwrap());
        worst_semi = worst_semi.max(cols[7].parse::<f64>().unwrap());
        csv.push_str(&row);
        csv.push('\n');
    }
    let pass = worst_tp <= 1e-10
        && worst_choi >= -1e-9
        && min_contraction >= -1e-10
        && worst_dual <= 1e-8
        && worst_semi <= 1e-9;
    Ok(Artifacts {
        csvs: vec![(format!("{}_panel.csv", cfg.prefix), csv)],
        summary: json!({
            "experiment": "channels",
            "cases": p.cases,
            "worst_tp_defect": worst_tp,
            "worst_choi_min_eig": worst_choi,
            "min_contraction_margin": min_contraction,
            "worst_duality_defect": worst_dual,
            "worst_semigroup_defect": worst_semi,
            "pass": pass,
        }),
    })
}

// ---------------------------------------------------------------- timer

fn run_timer(cfg: &Config, p: &TimerParams) -> RunResult {
    let spec = TimerSpec::new(p.levels, p.gamma);
    let mut dist_csv = String::from("t,k,p_k\n");
    for &t in &p.times {
        let d = birth_chain_dist(&spec, t)?;
        for (k, prob) in d.probs.iter().enumerate() {
            dist_csv.push_str(&format!("{},{k},{}\n", f(t), f(*prob)));
        }
    }
    let tau = spec.tau();
    let mut bounds_csv = String::from("T,eps,p_early,p_late,exponent\n");
    let mut earlies = vec![];
    for &levels in &p.ladder {
        let s = TimerSpec::new(levels, levels as f64 / tau);
        let eps = s.default_eps();
        let b = switch_bounds(&s, eps)?;
        bounds_csv.push_str(&format!(
            "{levels},{},{},{},{}\n",
            f(eps),
            f(b.p_early),
            f(b.p_late),
            f(b.exponent_early)
        ));
        earlies.push(b.p_early);
    }
    let monotone = earlies.windows(2).all(|w| w[1] < w[0]);
    Ok(Artifacts {
        csvs: vec![
            (format!("{}_dist.csv", cfg.prefix), dist_csv),
            (format!("{}_bounds.csv", cfg.prefix), bounds_csv),
        ],
        summary: json!({
            "experiment": "timer",
            "levels": p.levels,
            "gamma": p.gamma,
            "tau": tau,
            "ladder_monotone_early": monotone,
        }),
    })
}

// ---------------------------------------------------------------- switch

fn plus_ket() -> CVec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ndarray::array![C64::new(s, 0.0), C64::new(s, 0.0)]
}

fn run_switch(cfg: &Config, p: &SwitchParams) -> RunResult {
    let policy = NumericPolicy::default();
    let geom = Arc::new(LatticeGeometry::chain(2, 2));
    let l1 = product_driver(geom.clone(), &plus_ket())?;
    let l2 = product_driver(geom.clone(), &basis_ket(2, 0))?;
    let ones = tensor_kets(&[&basis_ket(2, 1), &basis_ket(2, 1)]);
    let rho0 = outer(&ones, &ones);
    let oracle = sequential_oracle(&[l1.clone(), l2.clone()], &[1.0], &rho0, p.t_end, &policy)?;
    let entries: Vec<Result<(usize, f64, f64), RunError>> = p
        .ladder
        .par_iter()
        .map(|&levels| {
            let spec = TimerSpec::new(levels, levels as f64);
            let sw = build_switched(&[l1.clone(), l2.clone()], spec, Attachment::PerFirstSite)?;
            let run = sw.run(&rho0, &[0.0, p.t_end], p.tol)?;
            let dist = trace_distance(&run.marginals[1], &oracle);
            Ok((levels, dist, run.budget.band_leak))
        })
        .collect();
    let mut csv = String::from("T,t,distance_to_oracle,band_leak\n");
    let mut dists = vec![];
    for e in entries {
        let (levels, dist, leak) = e?;
        csv.push_str(&format!("{levels},{},{},{}\n", f(p.t_end), f(dist), f(leak)));
        dists.push(dist);
    }
    let monotone = dists.windows(2).all(|w| w[1] < w[0]);
    Ok(Artifacts {
        csvs: vec![(format!("{}_ladder.csv", cfg.prefix), csv)],
        summary: json!({
            "experiment": "switch",
            "system": "two-qubit product stages |+>^2 then |00>",
            "t_end": p.t_end,
            "distances": dists,
            "monotone": monotone,
            "final_distance": dists.last(),
        }),
    })
}

// ---------------------------------------------------------------- compile

fn run_compile(cfg: &Config, p: &CompileParams) -> RunResult {
    let geom = Arc::new(LatticeGeometry::chain(
        p.circuit.dims.len(),
        *p.circuit
            .dims
            .first()
            .ok_or_else(|| RunError::Config("empty circuit dims".into()))?,
    ));
    if p.circuit.dims.iter().any(|&d| d != p.circuit.dims[0]) {
        return Err(RunError::Config(
            "circuit dims must be uniform for the chain geometry".into(),
        ));
    }
    let mut layers = vec![];
    for layer in &p.circuit.layers {
        let gates = layer
            .gates
            .iter()
            .map(|g| {
                Ok(Gate::new(
                    g.support.clone(),
                    g.unitary.to_matrix().map_err(RunError::Config)?,
                ))
            })
            .collect::<Result<Vec<_>, RunError>>()?;
        layers.push(GateLayer { gates });
    }
    let schedule = CircuitSchedule::new(geom.clone(), layers)?;
    let rho0 = outer(
        &basis_ket(geom.total_dim(), 0),
        &basis_ket(geom.total_dim(), 0),
    );
    let target_ket: CVec = match &p.target {
        Some(spec) => build_state(spec).map_err(RunError::Config)?,
        None => {
            let exact = schedule.apply(&rho0)?;
            // Exact output of a pure input through a unitary circuit.
            let c = schedule.unitary()?;
            let _ = exact;
            c.dot(&basis_ket(geom.total_dim(), 0))
        }
    };
    let entries: Vec<Result<(usize, f64, f64, f64), RunError>> = p
        .ladder
        .par_iter()
        .map(|&levels| {
            let sw = compile_circuit(&schedule, levels)?;
            let run = sw.run(&rho0, &[0.0, p.t_end], p.tol)?;
            let marg = &run.marginals[1];
            let infid = 1.0 - fidelity_pure(&target_ket, marg);
            let td = trace_distance(marg, &outer(&target_ket, &target_ket));
            Ok((levels, infid, td, run.budget.band_leak))
        })
        .collect();
    let mut csv = String::from("T,t,distance_to_oracle,band_leak\n");
    let mut infids = vec![];
    let mut tds = vec![];
    for e in entries {
        let (levels, infid, td, leak) = e?;
        csv.push_str(&format!("{levels},{},{},{}\n", f(p.t_end), f(infid), f(leak)));
        infids.push(infid);
        tds.push(td);
    }
    let monotone = infids.windows(2).all(|w| w[1] < w[0]);
    let circuit_unitary = crate::matrixjson::MatrixJson::from_matrix(&schedule.unitary()?);
    Ok(Artifacts {
        csvs: vec![(format!("{}_ladder.csv", cfg.prefix), csv)],
        summary: json!({
            "experiment": "compile",
            "distance_metric": "infidelity to the pure circuit output",
            "t_end": p.t_end,
            "infidelities": infids,
            "trace_distances": tds,
            "monotone": monotone,
            "final_infidelity": infids.last(),
            "circuit_unitary": circuit_unitary,
        }),
    })
}

// ---------------------------------------------------------------- qa

fn build_path(p: &PathSpec) -> HamiltonianPath {
    match p {
        PathSpec::SingleQubit => paths::single_qubit(),
        PathSpec::Uncoupled { n } => paths::uncoupled_chain(*n),
        PathSpec::ParamagneticChain { n, h0, h1, j } => {
            paths::paramagnetic_chain(*n, *h0, *h1, *j)
        }
        PathSpec::ParamagneticRing { n, h0, h1, j } => paths::paramagnetic_ring(*n, *h0, *h1, *j),
    }
}

fn run_qa(cfg: &Config, p: &QaParams) -> RunResult {
    let path = build_path(&p.path);
    let mode = match p.mode.as_str() {
        "exact" => QaMode::ExactSpectral,
        "filtered_local" => {
            let lambda = path.uniform_gap(32)?;
            QaFilter::new(lambda, 8.0, p.t_cut_over_gap / lambda).validate_tail(1e-9)?;
            QaMode::FilteredLocalGap {
                q: 8.0,
                t_cut_over_gap: p.t_cut_over_gap,
            }
        }
        "filtered_uniform" => {
            let lambda = path.uniform_gap(32)?;
            let filter = QaFilter::new(lambda, 8.0, p.t_cut_over_gap / lambda);
            filter.validate_tail(1e-9)?;
            QaMode::FilteredUniform(filter)
        }
        other => {
            return Err(RunError::Config(format!(
                "unknown qa mode `{other}` (exact | filtered_local | filtered_uniform)"
            )))
        }
    };
    let rep = transport(&path, &mode, p.n_steps)?;
    let mut transport_csv = String::from("s,gap,fidelity\n");
    for (s, fid) in rep.s_grid.iter().zip(rep.fidelities.iter()) {
        let gap = path.gap(*s)?;
        transport_csv.push_str(&format!("{},{},{}\n", f(*s), f(gap), f(*fid)));
    }
    let mut csvs = vec![(format!("{}_transport.csv", cfg.prefix), transport_csv)];
    let mut summary = json!({
        "experiment": "qa",
        "path": path.name,
        "mode": p.mode,
        "final_fidelity": rep.final_fidelity,
        "projector_transport_residual": rep.projector_transport_residual,
    });
    if let Some(d) = &p.delta {
        let lambda = path.uniform_gap(32)?;
        let dec = delta_decomposition(
            &path,
            0.5,
            d.center,
            d.alpha,
            &QaFilter::for_gap(lambda),
            1e-4,
        )?;
        let mut csv = String::from("n,delta_norm\n");
        for (n, norm) in dec.norms.iter().enumerate() {
            csv.push_str(&format!("{n},{}\n", f(*norm)));
        }
        csvs.push((format!("{}_delta.csv", cfg.prefix), csv));
        summary["delta_norms"] = json!(dec.norms);
    }
    if let Some(ps) = &p.patch {
        let reports = patch_split(&path, &ps.region, &ps.omegas, p.n_steps)?;
        let mut csv = String::from("omega,patch_residual\n");
        for r in &reports {
            csv.push_str(&format!("{},{}\n", r.omega, f(r.residual)));
        }
        csvs.push((format!("{}_patch.csv", cfg.prefix), csv));
        summary["patch_residuals"] =
            json!(reports.iter().map(|r| r.residual).collect::<Vec<_>>());
        // Close the loop: depth-2 circuit from the path, compiled onto timers.
        let omega = *ps.omegas.last().unwrap_or(&2);
        if omega < path.geometry().n_sites() {
            let (sched, crep) = circuit_from_path(&path, omega, p.n_steps)?;
            let compiled = compile_circuit(&sched, 8)?;
            summary["circuit_fidelity"] = json!(crep.fidelity);
            summary["circuit_trace_distance"] = json!(crep.trace_distance);
            summary["compiled_timers"] = json!(compiled.n_timers());
        }
    }
    Ok(Artifacts {
        csvs,
        summary,
    })
}

// ---------------------------------------------------------------- condense

fn run_condense(cfg: &Config, p: &CondenseParams) -> RunResult {
    let drv = condensation_driver(p.n_sites)?;
    let ghz4 = ghz_ket_levels(&[0, 1, 2, 3], p.n_sites, 4);
    let ghz2 = ghz_ket_levels(&[0, 2], p.n_sites, 4);
    let rho0 = outer(&ghz4, &ghz4);
    let target = outer(&ghz2, &ghz2);
    let mut csv = String::from("t,trace_distance,trace,min_eig\n");
    let mut final_distance = f64::NAN;
    let mut distances = vec![];
    for &t in &p.times {
        let ev = drv.closed_form_evolve(&rho0, t)?;
        let dist = trace_distance(&ev, &target);
        let tr = trace(&ev).re;
        let min_eig = fastdrive_core::qstate::min_eigval(&ev)?;
        csv.push_str(&format!("{},{},{},{}\n", f(t), f(dist), f(tr), f(min_eig)));
        final_distance = dist;
        distances.push(dist);
    }
    let fit = fit_distances(&p.times, &distances);
    Ok(Artifacts {
        csvs: vec![(format!("{}_trajectory.csv", cfg.prefix), csv)],
        summary: json!({
            "experiment": "condense",
            "n_sites": p.n_sites,
            "final_distance": final_distance,
            "fitted_rate": fit.mu,
            "fitted_prefactor": fit.prefactor,
            "idempotence_defect": fastdrive_core::models::condensation_channel().idempotence_defect(),
        }),
    })
}

// ---------------------------------------------------------------- nogo

fn depolarizing_driver(geom: Arc<LatticeGeometry>) -> SiteChannelDriver {
    let channels = (0..geom.n_sites())
        .map(|s| {
            let d = geom.local_dim(s);
            let kraus = (0..d * d)
                .map(|k| {
                    let (i, j) = (k / d, k % d);
                    let mut m = CMat::zeros((d, d));
                    m[(i, j)] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
                    m
                })
                .collect();
            (s, SiteChannel { kraus })
        })
        .collect();
    SiteChannelDriver::from_channels(geom, channels).expect("uniform dims")
}

fn run_nogo(cfg: &Config, p: &NogoParams) -> RunResult {
    let qd = QuantumDouble::build(2, 2, 2)?;
    let phi = qd.gs_basis()[0].clone();
    let noise = depolarizing_driver(qd.geometry.clone());
    let entries: Vec<Result<(f64, f64, f64, f64, f64), RunError>> = p
        .rates
        .par_iter()
        .map(|&rate| {
            let rep = overlap_probe(&qd, &phi, &noise, rate, p.t, p.ell, p.x_col, p.y_row)?;
            Ok((
                rate,
                rep.det_gram.norm(),
                rep.det_reference.norm(),
                rep.max_residual,
                rep.schwarz_defect,
            ))
        })
        .collect();
    let mut csv = String::from("r,t,ell,det_T,det_S,max_residual,schwarz_defect\n");
    let mut det_defects = vec![];
    let mut schwarz = vec![];
    for e in entries {
        let (rate, det_t, det_s, resid, sdef) = e?;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            f(rate),
            f(p.t),
            p.ell,
            f(det_t),
            f(det_s),
            f(resid),
            f(sdef)
        ));
        det_defects.push((det_t - det_s).abs());
        schwarz.push(sdef);
    }
    let mut summary = json!({
        "experiment": "nogo",
        "t": p.t,
        "ell": p.ell,
        "det_defects": det_defects,
        "schwarz_defects": schwarz,
        "det_monotone": det_defects.windows(2).all(|w| w[1] > w[0]),
        "schwarz_monotone": schwarz.windows(2).all(|w| w[1] > w[0]),
    });
    if let Some(g) = &p.ghz {
        let geom = Arc::new(LatticeGeometry::ring(g.n_sites, g.n));
        let gnoise = depolarizing_driver(geom);
        let rep = ghz_nogo_probe(g.m, g.n, g.n_sites, &gnoise, 0.0, p.t, p.ell, 0)?;
        summary["ghz_rank"] = json!(rep.rank);
        summary["ghz_expected_rank"] = json!(g.m);
    }
    // Ground-space basis in the interchange schema.
    let basis_json: Vec<crate::matrixjson::MatrixJson> = qd
        .gs_basis()
        .iter()
        .map(crate::matrixjson::MatrixJson::from_ket)
        .collect();
    summary["gs_basis"] = serde_json::to_value(basis_json).expect("serializable");
    if p.generation_samples > 0 {
        let mut r = rng_for(cfg.seed, 0xD0B1);
        let mut all_pass = true;
        for _ in 0..p.generation_samples {
            let coords = random_ket(qd.gs_dim(), &mut r);
            let rep = basis_generation_check(&coords, qd.n, 1e-9).map_err(RunError::from)?;
            all_pass &= rep.rank_ladder == qd.gs_dim() || rep.rank_diagonal == qd.gs_dim();
        }
        summary["generation_check_pass"] = json!(all_pass);
        summary["generation_samples"] = json!(p.generation_samples);
    }
    Ok(Artifacts {
        csvs: vec![(format!("{}_witness.csv", cfg.prefix), csv)],
        summary,
    })
}

// ---------------------------------------------------------------- spt

fn run_spt(cfg: &Config, p: &SptParams) -> RunResult {
    let policy = NumericPolicy::default();
    let geom = Arc::new(LatticeGeometry::ring(2, 4));
    let driver = SiteChannelDriver::uniform_reset(geom.clone(), &psi_plus_ket(2))
        .map_err(RunError::from)?;
    let lb = driver.lindbladian()?;
    let rep = pauli_projective_rep();
    let us: Vec<CMat> = (0..4).map(|g| rep.global_u(2, g)).collect();
    let covariant = fastdrive_core::models::covariance_residual(&lb, &us, &policy)?;
    let broken = SiteChannelDriver::uniform_reset(geom, &basis_ket(4, 0))
        .map_err(RunError::from)?;
    let negative =
        fastdrive_core::models::covariance_residual(&broken.lindbladian()?, &us, &policy)?;
    // Bridge trajectory at one site per factor (dense-exact) plus the
    // rigorous bound at the configured size.
    let small = SptBridge::new(1, trivial_rep(), pauli_projective_rep());
    let drv = small.driver()?;
    let rho0 = outer(&small.phi0(), &small.phi0());
    let phi1 = small.phi1();
    let target = outer(&phi1, &phi1);
    let mut csv = String::from("t,trace_distance,trace,min_eig\n");
    for &t in &p.times {
        let ev = drv.closed_form_evolve(&rho0, t)?;
        csv.push_str(&format!(
            "{},{},{},{}\n",
            f(t),
            f(trace_distance(&ev, &target)),
            f(trace(&ev).re),
            f(fastdrive_core::qstate::min_eigval(&ev)?)
        ));
    }
    let big = SptBridge::new(p.sites_per_factor, trivial_rep(), pauli_projective_rep());
    let final_small = trace_distance(&drv.closed_form_evolve(&rho0, p.t_bridge)?, &target);
    let _ = pair_chain_ket(2, 2);
    Ok(Artifacts {
        csvs: vec![(format!("{}_bridge.csv", cfg.prefix), csv)],
        summary: json!({
            "experiment": "spt",
            "covariance_residual": covariant,
            "negative_control_residual": negative,
            "bridge_distance_exact_n1": final_small,
            "bridge_distance_bound": big.distance_bound(p.t_bridge),
            "t_bridge": p.t_bridge,
            "sites_per_factor": p.sites_per_factor,
        }),
    })
}

// ---------------------------------------------------------------- evolve

pub fn build_state(spec: &StateSpec) -> Result<CVec, String> {
    match spec {
        StateSpec::Basis { dims, index } => {
            let total: usize = dims.iter().product();
            if *index >= total {
                return Err(format!("basis index {index} out of range {total}"));
            }
            Ok(basis_ket(total, *index))
        }
        StateSpec::Ghz {
            levels,
            n_sites,
            local_dim,
        } => Ok(ghz_ket_levels(levels, *n_sites, *local_dim)),
        StateSpec::Ket { amplitudes } => {
            let k = amplitudes.to_ket()?;
            Ok(normalize(&k))
        }
    }
}

fn build_model(spec: &ModelSpec) -> Result<Lindbladian, RunError> {
    match spec {
        ModelSpec::AmplitudeDamping { gamma } => {
            let geom = LatticeGeometry::sites(vec![2]);
            let mut sm = CMat::zeros((2, 2));
            sm[(0, 1)] = C64::new(gamma.sqrt(), 0.0);
            Ok(Lindbladian::new(
                geom,
                vec![LindbladTerm::new(vec![0], None, vec![sm])],
            )?)
        }
        ModelSpec::ProductDriver { n_sites, target } => {
            let ket = target.to_ket().map_err(RunError::Config)?;
            let ket = normalize(&ket);
            let geom = Arc::new(LatticeGeometry::ring(*n_sites, ket.len()));
            Ok(product_driver(geom, &ket)?)
        }
        ModelSpec::GhzCondense { n_sites } => Ok(condensation_driver(*n_sites)?.lindbladian()?),
    }
}

fn run_evolve(cfg: &Config, p: &EvolveParams) -> RunResult {
    let lb = build_model(&p.model)?;
    let rho0_ket = build_state(&p.rho0).map_err(RunError::Config)?;
    if rho0_ket.len() != lb.dim() {
        return Err(RunError::Config(format!(
            "initial state dimension {} does not match model dimension {}",
            rho0_ket.len(),
            lb.dim()
        )));
    }
    let rho0 = outer(&rho0_ket, &rho0_ket);
    let target = match &p.target {
        Some(spec) => {
            let k = build_state(spec).map_err(RunError::Config)?;
            Some(outer(&k, &k))
        }
        None => None,
    };
    let traj = evolve_integrate(&lb, &rho0, &p.times, p.tol)?;
    let mut csv = String::from("t,trace_distance,trace,min_eig\n");
    let traces = traj.traces();
    let min_eigs = traj.min_eigenvalues();
    let dists: Vec<f64> = match &target {
        Some(t) => traj.distances_to(t),
        None => traj.distances_to(&rho0),
    };
    for (((t, d), tr), me) in p
        .times
        .iter()
        .zip(dists.iter())
        .zip(traces.iter())
        .zip(min_eigs.iter())
    {
        csv.push_str(&format!("{},{},{},{}\n", f(*t), f(*d), f(*tr), f(*me)));
    }
    let fit = fit_distances(&p.times, &dists);
    Ok(Artifacts {
        csvs: vec![(format!("{}_trajectory.csv", cfg.prefix), csv)],
        summary: json!({
            "experiment": "evolve",
            "distance_reference": if target.is_some() { "target" } else { "initial state" },
            "final_distance": dists.last(),
            "fitted_rate": fit.mu,
            "fitted_prefactor": fit.prefactor,
            "fit_window": fit.window,
            "one_norm_estimate": lb.one_norm_estimate(),
            "locality_radius": lb.locality_radius(),
        }),
    })
}
