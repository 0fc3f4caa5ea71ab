//! Maximum-likelihood fitting of the exponential-kernel Hawkes model.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::hawkes::EventSequence;
use crate::optim::{nelder_mead, particle_swarm, Bounds, NelderMeadConfig, SwarmConfig};
use crate::par::{self, Exec};
use crate::{Error, Result};

/// Minimum number of events for a fit.
pub const MIN_EVENTS: usize = 10;

/// Smallest alpha reachable by the log-parameterised search.
pub const ALPHA_FLOOR: f64 = 1e-8;

/// `Σᵢ log λ(tᵢ) − Λ(T)` via the O(n) recursion
/// `Aᵢ = e^{−β(tᵢ−tᵢ₋₁)}(1 + Aᵢ₋₁)`, `λ(tᵢ) = λ + α Aᵢ`.
pub fn log_likelihood(lambda: f64, alpha: f64, beta: f64, events: &EventSequence) -> Result<f64> {
    if !(lambda > 0.0 && alpha >= 0.0 && beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need lambda > 0, alpha >= 0, beta > 0; got ({lambda}, {alpha}, {beta})"
        )));
    }
    let v = log_likelihood_unchecked(lambda, alpha, beta, events.times(), events.horizon());
    if !v.is_finite() {
        return Err(Error::NonFinite(format!(
            "log-likelihood at ({lambda}, {alpha}, {beta}) is {v}"
        )));
    }
    Ok(v)
}

fn log_likelihood_unchecked(lambda: f64, alpha: f64, beta: f64, times: &[f64], horizon: f64) -> f64 {
    let Some(&last) = times.last() else {
        return -lambda * horizon;
    };
    let mut a = 0.0;
    let mut prev = times[0];
    let mut log_sum = 0.0;
    for &t in times {
        a = (-beta * (t - prev)).exp() * a + 1.0;
        log_sum += (lambda + alpha * (a - 1.0)).ln();
        prev = t;
    }
    // Here `a = Σⱼ e^{−β(t_n − tⱼ)}`, so the compensator tail needs no
    // second pass.
    let tail = times.len() as f64 - (-beta * (horizon - last)).exp() * a;
    log_sum - lambda * horizon - alpha / beta * tail
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub lambda: (f64, f64),
    pub alpha: (f64, f64),
    pub beta: (f64, f64),
}

impl Default for ParamBox {
    fn default() -> Self {
        ParamBox {
            lambda: (1e-6, 1e3),
            alpha: (0.0, 1e6),
            beta: (1e-6, 1e6),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitConfig {
    pub bounds: ParamBox,
    /// Cap on objective evaluations across all phases.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Relative convergence threshold on the objective.
    pub tolerance: f64,
    pub particles: usize,
    pub exec: Exec,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            bounds: ParamBox::default(),
            budget: 20_000,
            restarts: 4,
            seed: 0,
            tolerance: 1e-12,
            particles: 24,
            exec: Exec::Auto,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        let b = &self.bounds;
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !(ok(b.lambda) && ok(b.alpha) && ok(b.beta)) {
            return Err(Error::InvalidParameter("empty or non-finite parameter box".into()));
        }
        if !(b.lambda.0 > 0.0 && b.beta.0 > 0.0 && b.alpha.0 >= 0.0) {
            return Err(Error::InvalidParameter(
                "lambda and beta lower bounds must be > 0, alpha's >= 0".into(),
            ));
        }
        if self.budget == 0 {
            return Err(Error::InvalidParameter("budget must be >= 1".into()));
        }
        Ok(())
    }

    fn log_box(&self) -> Bounds {
        let b = &self.bounds;
        Bounds::new(
            vec![b.lambda.0.ln(), b.alpha.0.max(ALPHA_FLOOR).ln(), b.beta.0.ln()],
            vec![b.lambda.1.ln(), b.alpha.1.ln(), b.beta.1.ln()],
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub loglik: f64,
    pub mu_hat: f64,
    /// `λ̂ / (1 − μ̂)`; absent for supercritical fits.
    pub expected_unit_arrivals: Option<f64>,
    pub supercritical: bool,
    pub converged: bool,
    pub evaluations: usize,
}

impl FitResult {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }
}

/// Multi-start swarm search over `(log λ, log α, log β)` followed by a
/// Nelder-Mead polish of the best point.
pub fn fit_mle(events: &EventSequence, config: &FitConfig) -> Result<FitResult> {
    if events.len() < MIN_EVENTS {
        return Err(Error::Unidentifiable(format!(
            "{} events; at least {MIN_EVENTS} required",
            events.len()
        )));
    }
    config.validate()?;
    let times = events.times();
    let horizon = events.horizon();
    let objective = |x: &[f64]| {
        -log_likelihood_unchecked(x[0].exp(), x[1].exp(), x[2].exp(), times, horizon)
    };
    let bounds = config.log_box();

    let restarts = config.restarts.max(1);
    let global_budget = config.budget * 3 / 5;
    let per_restart = global_budget / restarts;
    let mut evaluations = 0usize;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for r in 0..restarts {
        let cfg = SwarmConfig {
            particles: config.particles,
            max_evaluations: per_restart,
            seed: par::derive_seed(config.seed, par::stream::SWARM, r as u64),
            ..Default::default()
        };
        let res = particle_swarm(&objective, &bounds, &cfg, config.exec);
        evaluations += res.evaluations;
        if best.as_ref().is_none_or(|(_, v)| res.value < *v) {
            best = Some((res.x, res.value));
        }
    }

    let (start, start_val) = match best {
        Some(b) if b.1.is_finite() => b,
        _ => {
            // Global phase had no budget; start from the box centre.
            let centre: Vec<f64> = (0..3).map(|d| 0.5 * (bounds.lower[d] + bounds.upper[d])).collect();
            let v = objective(&centre);
            evaluations += 1;
            (centre, v)
        }
    };
    let remaining = config.budget.saturating_sub(evaluations);
    let nm = nelder_mead(
        &objective,
        &start,
        &bounds,
        &NelderMeadConfig {
            max_evaluations: remaining,
            ftol: config.tolerance,
            xtol: 1e-8,
            step: 0.05,
        },
    );
    evaluations += nm.evaluations;
    let (x, value) = if nm.value <= start_val {
        (nm.x, nm.value)
    } else {
        (start, start_val)
    };

    let (lambda, alpha, beta) = (x[0].exp(), x[1].exp(), x[2].exp());
    let mu_hat = alpha / beta;
    let supercritical = mu_hat >= 1.0;
    Ok(FitResult {
        lambda,
        alpha,
        beta,
        loglik: -value,
        mu_hat,
        expected_unit_arrivals: (!supercritical).then(|| lambda / (1.0 - mu_hat)),
        supercritical,
        converged: nm.converged && value.is_finite(),
        evaluations,
    })
}

/// `λ / (1 − α/β)`.
pub fn expected_unit_arrivals(lambda: f64, alpha: f64, beta: f64) -> Result<f64> {
    let mu_hat = alpha / beta;
    if !(mu_hat < 1.0) {
        return Err(Error::Supercritical(mu_hat));
    }
    Ok(lambda / (1.0 - mu_hat))
}

/// `N(T) / T`.
pub fn empirical_unit_arrivals(events: &EventSequence) -> Result<f64> {
    if !(events.horizon() > 0.0) {
        return Err(Error::InvalidParameter("horizon must be > 0".into()));
    }
    Ok(events.len() as f64 / events.horizon())
}
