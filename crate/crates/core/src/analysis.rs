//! End-to-end evaluation of a state model on one day of price changes.

use serde::{Deserialize, Serialize};

use crate::diffusion::{compute_limit_params, diffusion_coefficient, LimitParams};
use crate::empirical::{
    best_fit_coefficient, empirical_std_curve, theoretical_std_curve, transformed_mse, BestFit, StdCurve,
};
use crate::lob::{
    build_fixed_tick, build_quantile_states, build_two_state_mean, PriceChangeSeries, QuantileMode, StateModel,
    HALF_TICK,
};
use crate::markov::{estimate_transitions, TransitionMatrix};
use crate::mle::{fit_mle, FitConfig, FitResult};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Variant {
    Chpdo { delta: f64 },
    TwoState,
    Quantile { q: usize, mode: QuantileMode },
}

impl Variant {
    pub const CHPDO: Variant = Variant::Chpdo { delta: HALF_TICK };

    pub fn quantile(q: usize) -> Variant {
        Variant::Quantile {
            q,
            mode: QuantileMode::PerSide,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Variant::Chpdo { .. } => "chpdo".into(),
            Variant::TwoState => "two-state".into(),
            Variant::Quantile { q, .. } => format!("quantile-{q}"),
        }
    }

    pub fn build(&self, changes: &PriceChangeSeries) -> Result<(StateModel, Vec<usize>)> {
        match *self {
            Variant::Chpdo { delta } => build_fixed_tick(changes, delta),
            Variant::TwoState => build_two_state_mean(changes),
            Variant::Quantile { q, mode } => build_quantile_states(changes, q, mode),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VariantReport {
    pub variant: Variant,
    pub model: StateModel,
    pub states: Vec<usize>,
    pub chain: TransitionMatrix,
    pub limit: LimitParams,
    pub coefficient: f64,
    pub empirical: StdCurve,
    pub theoretical: StdCurve,
    /// Mean squared residual of the sqrt-transformed curves.
    pub mse: f64,
    pub best_fit: BestFit,
}

/// Maximum-likelihood arrival fit on the trimmed window.
pub fn fit_arrivals(changes: &PriceChangeSeries, config: &FitConfig) -> Result<FitResult> {
    fit_mle(&changes.events()?, config)
}

/// Builds the variant's state model, estimates its chain and compares the
/// empirical and theoretical std curves on `windows`.
pub fn evaluate_variant(
    changes: &PriceChangeSeries,
    fit: &FitResult,
    variant: Variant,
    windows: &[f64],
) -> Result<VariantReport> {
    if changes.len() < 2 {
        return Err(Error::Empty("fewer than two price changes".into()));
    }
    let (model, states) = variant.build(changes)?;
    let chain = estimate_transitions(&states, model.n())?;
    let limit = compute_limit_params(&chain, &model.marks)?;
    let coefficient = diffusion_coefficient(limit.sigma_star, fit.lambda, fit.mu_hat)?.value();
    let empirical = empirical_std_curve(changes, &changes.changes, limit.a_star, windows)?;
    let theoretical = theoretical_std_curve(coefficient, windows)?;
    let mse = transformed_mse(&empirical, &theoretical)?;
    let best_fit = best_fit_coefficient(&empirical, coefficient)?;
    Ok(VariantReport {
        variant,
        model,
        states,
        chain,
        limit,
        coefficient,
        empirical,
        theoretical,
        mse,
        best_fit,
    })
}
