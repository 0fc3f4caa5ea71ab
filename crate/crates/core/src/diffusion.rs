//! Law-of-large-numbers drift and diffusion coefficients of compound Hawkes
//! mid-price processes.
//!
//! The n-state formula in [`compute_limit_params`] is the reference
//! implementation. The two-state and fixed-tick closed forms are special
//! cases and are cross-checked against it.

use serde::{Deserialize, Serialize};

use crate::markov::{fundamental_solve, stationary_distribution, MarkTable, TransitionMatrix};
use crate::{Error, Result};

/// Mark-chain quantities entering the limit theorems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitParams {
    /// `â* = Σ πᵢ a(i)`
    pub a_star: f64,
    /// `σ̂* = √(Σ πᵢ v(i))`
    pub sigma_star: f64,
    pub pi: Vec<f64>,
    /// Centered marks `a(i) − â*`.
    pub b: Vec<f64>,
    /// Solution of `(P + Π* − I) g = b`.
    pub g: Vec<f64>,
    pub v: Vec<f64>,
}

/// The constant multiplying `W(t)` in the diffusion limit, in $/√s.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct DiffusionCoefficient(pub f64);

impl DiffusionCoefficient {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn compute_limit_params(p: &TransitionMatrix, marks: &MarkTable) -> Result<LimitParams> {
    let n = p.n();
    if marks.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{n} states but {} marks",
            marks.len()
        )));
    }
    let pi = stationary_distribution(p)?;
    let a_star = pi.expectation(&marks.a);
    let b: Vec<f64> = marks.a.iter().map(|a| a - a_star).collect();
    let g = fundamental_solve(p, &pi, &b)?;
    let v: Vec<f64> = (0..n)
        .map(|i| {
            let mut sq = 0.0;
            let mut lin = 0.0;
            for j in 0..n {
                let d = g[j] - g[i];
                sq += d * d * p.get(i, j);
                lin += d * p.get(i, j);
            }
            b[i] * b[i] + sq - 2.0 * b[i] * lin
        })
        .collect();
    // v(i) is a conditional second moment; clip round-off below zero.
    let v: Vec<f64> = v.into_iter().map(|x| x.max(0.0)).collect();
    let sigma_star = pi.expectation(&v).max(0.0).sqrt();
    Ok(LimitParams {
        a_star,
        sigma_star,
        pi: pi.pi,
        b,
        g,
        v,
    })
}

fn check_open_unit(name: &str, p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!("{name} = {p} must lie in (0, 1)")));
    }
    Ok(())
}

/// Two-state chain with down/up persistence `p_dd`, `p_uu` and marks
/// `a1` (down state) and `a2` (up state). Evaluated through the general
/// n-state formula.
pub fn two_state_closed_form(p_dd: f64, p_uu: f64, a1: f64, a2: f64) -> Result<LimitParams> {
    check_open_unit("p_dd", p_dd)?;
    check_open_unit("p_uu", p_uu)?;
    let p = TransitionMatrix::two_state(p_dd, p_uu)?;
    compute_limit_params(&p, &MarkTable::new(vec![a1, a2])?)
}

/// Fixed-tick model with marks `{−δ, +δ}`:
///
/// `a* = δ(2π* − 1)`,
/// `σ² = 4δ²((1 − p′ + π*(p′ − p)) / (p + p′ − 2)² − π*(1 − π*))`
///
/// with `π*` the ergodic probability of `+δ`, `p = p_uu` and `p′ = p_dd`.
/// The vectors `b`, `g`, `v` come from the general route.
pub fn chpdo_closed_form(p_dd: f64, p_uu: f64, delta: f64) -> Result<LimitParams> {
    check_open_unit("p_dd", p_dd)?;
    check_open_unit("p_uu", p_uu)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be > 0")));
    }
    let (p, p_prime) = (p_uu, p_dd);
    let pi_up = (1.0 - p_dd) / ((1.0 - p_dd) + (1.0 - p_uu));
    let a_star = delta * (2.0 * pi_up - 1.0);
    let var = 4.0
        * delta
        * delta
        * ((1.0 - p_prime + pi_up * (p_prime - p)) / ((p + p_prime - 2.0) * (p + p_prime - 2.0))
            - pi_up * (1.0 - pi_up));
    let general = two_state_closed_form(p_dd, p_uu, -delta, delta)?;
    Ok(LimitParams {
        a_star,
        sigma_star: var.max(0.0).sqrt(),
        ..general
    })
}

fn check_subcritical(mu_hat: f64) -> Result<()> {
    if !(mu_hat < 1.0) {
        return Err(Error::Supercritical(mu_hat));
    }
    if mu_hat < 0.0 {
        return Err(Error::InvalidParameter(format!("mu_hat = {mu_hat} must be >= 0")));
    }
    Ok(())
}

/// `σ̂* √(λ / (1 − μ̂))`.
pub fn diffusion_coefficient(sigma_star: f64, lambda: f64, mu_hat: f64) -> Result<DiffusionCoefficient> {
    check_subcritical(mu_hat)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be > 0")));
    }
    if !(sigma_star >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma* = {sigma_star} must be >= 0")));
    }
    Ok(DiffusionCoefficient(sigma_star * (lambda / (1.0 - mu_hat)).sqrt()))
}

/// `σ̂* √E[N[0,1]]` for non-linear arrivals.
pub fn nonlinear_diffusion_coefficient(
    sigma_star: f64,
    expected_unit_arrivals: f64,
) -> Result<DiffusionCoefficient> {
    if !(expected_unit_arrivals >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "E[N[0,1]] = {expected_unit_arrivals} must be >= 0"
        )));
    }
    if !(sigma_star >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma* = {sigma_star} must be >= 0")));
    }
    Ok(DiffusionCoefficient(sigma_star * expected_unit_arrivals.sqrt()))
}

/// `â* λ / (1 − μ̂)`, the drift of `S_{nt} / n` per unit `t`.
pub fn lln_drift(a_star: f64, lambda: f64, mu_hat: f64) -> Result<f64> {
    check_subcritical(mu_hat)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be > 0")));
    }
    Ok(a_star * lambda / (1.0 - mu_hat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_marks_have_no_volatility() {
        let p = TransitionMatrix::new(vec![
            vec![0.2, 0.5, 0.3],
            vec![0.4, 0.4, 0.2],
            vec![0.1, 0.1, 0.8],
        ])
        .unwrap();
        let lp = compute_limit_params(&p, &MarkTable::new(vec![0.01; 3]).unwrap()).unwrap();
        assert_relative_eq!(lp.a_star, 0.01, epsilon = 1e-15);
        assert!(lp.sigma_star < 1e-12);
    }

    #[test]
    fn aapl_fixed_tick() {
        let lp = chpdo_closed_form(0.4956, 0.4933, 0.005).unwrap();
        assert!((lp.sigma_star - 0.0049).abs() < 1e-4);
        assert!((lp.a_star - -1.1463e-5).abs() < 0.05 * 1.1463e-5);
        let general = two_state_closed_form(0.4956, 0.4933, -0.005, 0.005).unwrap();
        assert_relative_eq!(lp.sigma_star, general.sigma_star, epsilon = 1e-12);
        assert_relative_eq!(lp.a_star, general.a_star, epsilon = 1e-15);
    }

    #[test]
    fn intc_fixed_tick() {
        let lp = chpdo_closed_form(0.6106, 0.5588, 0.005).unwrap();
        assert!((lp.sigma_star - 0.0059).abs() / 0.0059 < 0.03);
        assert!((lp.a_star - -3.12e-4).abs() / 3.12e-4 < 0.03);
    }

    #[test]
    fn symmetric_iid_gives_tick_volatility() {
        let d = 0.005;
        for lp in [
            chpdo_closed_form(0.5, 0.5, d).unwrap(),
            two_state_closed_form(0.5, 0.5, -d, d).unwrap(),
        ] {
            assert_relative_eq!(lp.a_star, 0.0, epsilon = 1e-15);
            assert_relative_eq!(lp.sigma_star, d, epsilon = 1e-14);
        }
    }

    #[test]
    fn aapl_two_state_means() {
        let lp = two_state_closed_form(0.4956, 0.4933, -0.0172, 0.0170).unwrap();
        assert!((lp.a_star - -1.56e-4).abs() < 2e-5, "{}", lp.a_star);
        assert!((lp.sigma_star - 0.0169).abs() < 1e-4, "{}", lp.sigma_star);
    }

    #[test]
    fn equal_two_state_marks() {
        let lp = two_state_closed_form(0.3, 0.6, 0.02, 0.02).unwrap();
        assert_relative_eq!(lp.a_star, 0.02, epsilon = 1e-15);
        assert!(lp.sigma_star < 1e-12);
    }

    #[test]
    fn degenerate_probabilities_rejected() {
        assert!(two_state_closed_form(0.0, 0.5, -1.0, 1.0).is_err());
        assert!(chpdo_closed_form(0.5, 1.0, 0.005).is_err());
        assert!(chpdo_closed_form(0.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn table9_theoretical_coefficients() {
        let intc = diffusion_coefficient(0.0059, 0.0471, 399.6389 / 760.4991).unwrap();
        assert!((intc.value() - 0.00186).abs() / 0.00186 < 0.01);
        let msft = diffusion_coefficient(0.0062, 0.0659, 479.3482 / 908.0032).unwrap();
        assert!((msft.value() - 0.00231).abs() / 0.00231 < 0.01);
        assert_eq!(diffusion_coefficient(0.0, 3.0, 0.5).unwrap().value(), 0.0);
        assert!(matches!(
            diffusion_coefficient(0.1, 1.0, 1.0),
            Err(Error::Supercritical(_))
        ));
    }

    #[test]
    fn nonlinear_coefficient() {
        let c = nonlinear_diffusion_coefficient(0.0049, 2.4840).unwrap();
        assert_relative_eq!(c.value(), 0.0049 * 2.4840f64.sqrt(), epsilon = 1e-15);
        assert!((c.value() - 0.00772).abs() < 5e-6);
        assert_eq!(nonlinear_diffusion_coefficient(0.3, 0.0).unwrap().value(), 0.0);
        assert!(nonlinear_diffusion_coefficient(0.3, -1.0).is_err());
        let lin = diffusion_coefficient(0.3, 2.0, 0.25).unwrap();
        let nl = nonlinear_diffusion_coefficient(0.3, 2.0 / 0.75).unwrap();
        assert_relative_eq!(lin.value(), nl.value(), epsilon = 1e-15);
    }

    #[test]
    fn drift() {
        assert_eq!(lln_drift(0.0, 1.0, 0.5).unwrap(), 0.0);
        let d = lln_drift(-1.1463e-5, 2.4841 * (1.0 - 0.40892), 0.40892).unwrap();
        assert!((d - -2.8475e-5).abs() < 1e-8, "{d}");
        assert!(lln_drift(1.0, 1.0, 1.2).is_err());
    }
}
