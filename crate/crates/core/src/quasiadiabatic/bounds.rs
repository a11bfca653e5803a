//! Evaluable bound reporters for the quasi-locality estimates. These are
//! shapes that measured norms get compared against in trend only; the
//! suppressed constants make them reporters, not assertions.

/// `u_mu(t) = exp(-mu t / ln^2 t)`, defined for `t > 1`.
pub fn u_mu(mu: f64, t: f64) -> f64 {
    assert!(t > 1.0, "u_mu needs t > 1");
    (-mu * t / t.ln().powi(2)).exp()
}

/// The clamped variant: constant at `u_mu(e^2)` below `t = e^2`.
pub fn u_mu_clamped(mu: f64, t: f64) -> f64 {
    let e2 = std::f64::consts::E * std::f64::consts::E;
    u_mu(mu, t.max(e2))
}

/// `I_lambda(t) ~ (lambda t)^10 u_(2/7)(lambda t)`: the filter-decay shape
/// entering the quasi-local term bounds.
pub fn i_lambda(lambda: f64, t: f64) -> f64 {
    let x = lambda * t;
    x.powi(10) * u_mu_clamped(2.0 / 7.0, x)
}
