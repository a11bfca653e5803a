//! Adaptive Dormand-Prince 5(4) integration over complex state vectors.
//!
//! The integrator is matrix-free: the right-hand side is any closure filling
//! `dy` from `(t, y)`. Trajectories over density matrices or Heisenberg
//! operators flatten their state into the vector.

use crate::error::{Error, Result};
use crate::qstate::C64;

#[derive(Debug, Clone, Copy)]
pub struct OdeOpts {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOpts {
    fn default() -> Self {
        OdeOpts {
            rtol: 1e-9,
            atol: 1e-12,
            h_init: None,
            h_min: 1e-13,
            max_steps: 50_000_000,
        }
    }
}

impl OdeOpts {
    pub fn with_tol(tol: f64) -> Self {
        OdeOpts {
            rtol: tol,
            atol: tol * 1e-3,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

// Dormand-Prince coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rms_norm(e: &[C64], y0: &[C64], y1: &[C64], atol: f64, rtol: f64) -> f64 {
    let n = e.len().max(1);
    let mut acc = 0.0;
    for i in 0..e.len() {
        let sc = atol + rtol * y0[i].norm().max(y1[i].norm());
        let r = e[i].norm() / sc;
        acc += r * r;
    }
    (acc / n as f64).sqrt()
}

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1` in place.
pub fn integrate<F>(mut f: F, t0: f64, t1: f64, y: &mut Vec<C64>, opts: &OdeOpts) -> Result<OdeStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y.len();
    let mut stats = OdeStats::default();
    if (t1 - t0).abs() == 0.0 {
        return Ok(stats);
    }
    assert!(t1 > t0, "integration runs forward in time");
    let mut t = t0;
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![C64::new(0.0, 0.0); n]).collect();
    let mut ytmp = vec![C64::new(0.0, 0.0); n];
    let mut ynew = vec![C64::new(0.0, 0.0); n];
    let mut err = vec![C64::new(0.0, 0.0); n];

    f(t, y, &mut k[0]);
    stats.rhs_evals += 1;

    let rhs_scale: f64 = {
        let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nf: f64 = k[0].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if ny > 0.0 && nf > 0.0 {
            nf / ny
        } else {
            1.0
        }
    };
    let mut h = opts
        .h_init
        .unwrap_or_else(|| ((t1 - t0) / 100.0).min(0.1 / rhs_scale.max(1e-12)));
    h = h.min(t1 - t0);

    let mut fsal_valid = true;
    while t < t1 {
        if stats.steps > opts.max_steps {
            return Err(Error::Invalid(format!(
                "integrator exceeded {} steps",
                opts.max_steps
            )));
        }
        h = h.min(t1 - t);
        if h < opts.h_min * t.abs().max(1.0) {
            let rate = {
                let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let nf: f64 = k[0].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                nf / ny.max(1e-300)
            };
            return Err(Error::StepSizeUnderflow { t, h, rate });
        }
        if !fsal_valid {
            f(t, y, &mut k[0]);
            stats.rhs_evals += 1;
            fsal_valid = true;
        }
        for stage in 1..7 {
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate().take(stage) {
                    let a = A[stage][j];
                    if a != 0.0 {
                        acc += kj[i] * a;
                    }
                }
                ytmp[i] = y[i] + acc * h;
            }
            let (head, tail) = k.split_at_mut(stage);
            let _ = head;
            f(t + C[stage] * h, &ytmp, &mut tail[0]);
            stats.rhs_evals += 1;
        }
        for i in 0..n {
            let mut y5 = C64::new(0.0, 0.0);
            let mut y4 = C64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                if B5[j] != 0.0 {
                    y5 += kj[i] * B5[j];
                }
                if B4[j] != 0.0 {
                    y4 += kj[i] * B4[j];
                }
            }
            ynew[i] = y[i] + y5 * h;
            err[i] = (y5 - y4) * h;
        }
        let e = rms_norm(&err, y, &ynew, opts.atol, opts.rtol);
        if e <= 1.0 {
            t += h;
            std::mem::swap(y, &mut ynew);
            // FSAL: k7 is the derivative at the accepted point.
            k.swap(0, 6);
            stats.steps += 1;
        } else {
            stats.rejected += 1;
            fsal_valid = false;
        }
        let factor = if e > 0.0 {
            (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
    Ok(stats)
}

/// Integrate through an increasing time grid, calling `on_sample` at every
/// grid point (including `times[0]` with the initial state).
pub fn integrate_times<F, G>(
    mut f: F,
    times: &[f64],
    y0: &[C64],
    opts: &OdeOpts,
    mut on_sample: G,
) -> Result<OdeStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    G: FnMut(usize, &[C64]),
{
    assert!(!times.is_empty());
    for w in times.windows(2) {
        assert!(w[1] >= w[0], "time grid must be nondecreasing");
    }
    let mut y = y0.to_vec();
    on_sample(0, &y);
    let mut total = OdeStats::default();
    for i in 1..times.len() {
        let s = integrate(&mut f, times[i - 1], times[i], &mut y, opts)?;
        total.steps += s.steps;
        total.rejected += s.rejected;
        total.rhs_evals += s.rhs_evals;
        on_sample(i, &y);
    }
    Ok(total)
}
