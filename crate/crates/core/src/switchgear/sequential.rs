use crate::error::{Error, Result};
use crate::lindblad::{evolve_expm, evolve_integrate, Lindbladian};
use crate::policy::NumericPolicy;
use crate::qstate::CMat;

/// Exact piecewise-constant-generator evolution: stage `a` runs on
/// `[switch_times[a-1], switch_times[a])`, the last stage up to `t`.
/// This is the target every composite approximates.
pub fn sequential_oracle(
    stages: &[Lindbladian],
    switch_times: &[f64],
    rho0: &CMat,
    t: f64,
    policy: &NumericPolicy,
) -> Result<CMat> {
    if stages.is_empty() {
        return Err(Error::Invalid("need at least one stage".into()));
    }
    if switch_times.len() != stages.len() - 1 {
        return Err(Error::Invalid(format!(
            "{} stages need {} switch times, got {}",
            stages.len(),
            stages.len() - 1,
            switch_times.len()
        )));
    }
    let mut boundaries = vec![0.0];
    boundaries.extend_from_slice(switch_times);
    boundaries.push(t);
    for w in boundaries.windows(2) {
        if w[1] < w[0] {
            return Err(Error::Invalid("switch times must be ascending".into()));
        }
    }
    let mut rho = rho0.clone();
    for (a, stage) in stages.iter().enumerate() {
        let dt = (boundaries[a + 1].min(t) - boundaries[a]).max(0.0);
        if dt == 0.0 {
            continue;
        }
        rho = if stage.dim() <= policy.superop_guard {
            evolve_expm(stage, &rho, dt, policy)?
        } else {
            evolve_integrate(stage, &rho, &[0.0, dt], policy.ode_tol)?
                .final_state()
                .clone()
        };
    }
    Ok(rho)
}
