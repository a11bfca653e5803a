use crate::error::{Error, Result};
use crate::lindblad::ode::{integrate_times, OdeOpts};
use crate::lindblad::Lindbladian;
use crate::policy::NumericPolicy;
use crate::qstate::{operator_norm, C64, CMat, LocalOperator};

/// Fitted light-cone parameters for `log C(x, t) ~ log K + v t - a x`.
#[derive(Debug, Clone, Copy)]
pub struct LrFit {
    pub velocity: f64,
    pub decay: f64,
    pub log_k: f64,
    pub points_used: usize,
}

#[derive(Debug, Clone)]
pub struct LightConeReport {
    pub distances: Vec<usize>,
    pub times: Vec<f64>,
    /// `commutator_norms[d][k] = || [A(t_k), B_d] ||`.
    pub commutator_norms: Vec<Vec<f64>>,
    pub fit: Option<LrFit>,
}

/// Evolve `A` in the Heisenberg picture and tabulate commutator norms with
/// single-site probes `B` at the given positions; fit the outside-cone decay.
pub fn lr_probe(
    lb: &Lindbladian,
    a: &LocalOperator,
    b_site_matrix: &CMat,
    b_positions: &[usize],
    times: &[f64],
    policy: &NumericPolicy,
) -> Result<LightConeReport> {
    a.validate(lb.geometry())?;
    let geom = lb.geometry().clone();
    let d = geom.total_dim();
    let a_full = a.embed(&geom)?;
    let b_ops: Vec<CMat> = b_positions
        .iter()
        .map(|&y| crate::qstate::embed(b_site_matrix, &[y], &geom))
        .collect::<Result<_>>()?;
    let distances: Vec<usize> = b_positions
        .iter()
        .map(|&y| {
            a.support
                .iter()
                .map(|&x| geom.distance(x, y))
                .min()
                .unwrap()
        })
        .collect();

    let mut norms = vec![vec![0.0f64; times.len()]; b_positions.len()];
    let y0: Vec<C64> = a_full.iter().cloned().collect();
    let mut scratch = CMat::zeros((d, d));
    integrate_times(
        |_t, y, dy| {
            for (dst, src) in scratch.iter_mut().zip(y.iter()) {
                *dst = *src;
            }
            let out = lb.apply_adjoint(&scratch).expect("validated");
            for (dst, src) in dy.iter_mut().zip(out.iter()) {
                *dst = *src;
            }
        },
        times,
        &y0,
        &OdeOpts::with_tol(policy.ode_tol.max(1e-9)),
        |k, y| {
            let at = CMat::from_shape_vec((d, d), y.to_vec()).expect("shape");
            for (bi, b) in b_ops.iter().enumerate() {
                let comm = at.dot(b) - b.dot(&at);
                norms[bi][k] = operator_norm(&comm);
            }
        },
    )?;

    // Fit on the outside-cone samples.
    let mut rows: Vec<(f64, f64, f64)> = vec![];
    for (bi, &dist) in distances.iter().enumerate() {
        for (k, &t) in times.iter().enumerate() {
            let c = norms[bi][k];
            if c > 1e-12 && c < 0.5 && t > 0.0 && dist > 0 {
                rows.push((t, dist as f64, c.ln()));
            }
        }
    }
    let fit = if rows.len() >= 4 {
        Some(fit_plane(&rows))
    } else {
        None
    };
    if fit.is_none() && norms.iter().flatten().all(|&c| c > 0.5) {
        return Err(Error::Invalid(
            "no cone regime sampled: all commutators above 0.5".into(),
        ));
    }
    Ok(LightConeReport {
        distances,
        times: times.to_vec(),
        commutator_norms: norms,
        fit,
    })
}

/// Least squares for `y = c0 + v t - a x`.
fn fit_plane(rows: &[(f64, f64, f64)]) -> LrFit {
    let n = rows.len() as f64;
    let (mut st, mut sx, mut sy) = (0.0, 0.0, 0.0);
    let (mut stt, mut sxx, mut stx, mut sty, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, x, y) in rows {
        st += t;
        sx += x;
        sy += y;
        stt += t * t;
        sxx += x * x;
        stx += t * x;
        sty += t * y;
        sxy += x * y;
    }
    // Normal equations for [c0, v, -a].
    let m = [
        [n, st, sx],
        [st, stt, stx],
        [sx, stx, sxx],
    ];
    let rhs = [sy, sty, sxy];
    let sol = solve3(m, rhs);
    LrFit {
        velocity: sol[1],
        decay: -sol[2],
        log_k: sol[0],
        points_used: rows.len(),
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for i in 0..3 {
        let mut piv = i;
        for r in i + 1..3 {
            if m[r][i].abs() > m[piv][i].abs() {
                piv = r;
            }
        }
        m.swap(i, piv);
        b.swap(i, piv);
        for r in i + 1..3 {
            let f = m[r][i] / m[i][i];
            for c in i..3 {
                m[r][c] -= f * m[i][c];
            }
            b[r] -= f * b[i];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let mut acc = b[i];
        for c in i + 1..3 {
            acc -= m[i][c] * x[c];
        }
        x[i] = acc / m[i][i];
    }
    x
}
