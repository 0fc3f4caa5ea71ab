//! Compound Hawkes price paths: Hawkes arrivals carrying Markov-modulated
//! marks.

use crate::diffusion::{compute_limit_params, diffusion_coefficient, nonlinear_diffusion_coefficient, LimitParams};
use crate::hawkes::{estimate_unit_arrivals, simulate_with, EventSequence, HawkesSpec, SimOptions};
use crate::markov::{simulate_chain_with, stationary_distribution, MarkTable, TransitionMatrix};
use crate::par::{self, Rng};
use crate::{Error, Result};

/// Horizon of the stationary run used to estimate `E[N[0,1]]` for
/// non-linear links.
pub const UNIT_ARRIVALS_HORIZON: f64 = 1e5;

#[derive(Clone, Debug, PartialEq)]
pub struct CompoundModel {
    pub spec: HawkesSpec,
    pub chain: TransitionMatrix,
    pub marks: MarkTable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompoundPath {
    pub events: EventSequence,
    pub states: Vec<usize>,
    /// Price increment at each event.
    pub increments: Vec<f64>,
}

impl CompoundPath {
    /// `S_t − S_0`.
    pub fn displacement_at(&self, t: f64) -> f64 {
        let k = self.events.times().partition_point(|&s| s <= t);
        self.increments[..k].iter().sum()
    }

    /// Cumulative price path `(time, price)` starting at `s0`.
    pub fn price_path(&self, s0: f64) -> Vec<(f64, f64)> {
        let mut s = s0;
        self.events
            .times()
            .iter()
            .zip(&self.increments)
            .map(|(&t, &d)| {
                s += d;
                (t, s)
            })
            .collect()
    }
}

impl CompoundModel {
    pub fn new(spec: HawkesSpec, chain: TransitionMatrix, marks: MarkTable) -> Result<Self> {
        if chain.n() != marks.len() {
            return Err(Error::InvalidParameter(format!(
                "{} states but {} marks",
                chain.n(),
                marks.len()
            )));
        }
        chain.require_irreducible()?;
        Ok(CompoundModel { spec, chain, marks })
    }

    pub fn limit_params(&self) -> Result<LimitParams> {
        compute_limit_params(&self.chain, &self.marks)
    }

    /// `E[N[0,1]]` with its Monte Carlo standard error; exact (zero error)
    /// for linear subcritical processes.
    pub fn unit_arrivals(&self, seed: u64) -> Result<(f64, f64)> {
        if let Some(rate) = self.spec.stationary_rate() {
            return Ok((rate, 0.0));
        }
        self.spec.require_subcritical()?;
        estimate_unit_arrivals(
            &self.spec,
            UNIT_ARRIVALS_HORIZON,
            par::derive_seed(seed, par::stream::UNIT_ARRIVALS, 0),
        )
    }

    /// Diffusion coefficient of the limit theorem.
    pub fn diffusion_coefficient(&self, seed: u64) -> Result<f64> {
        let sigma = self.limit_params()?.sigma_star;
        let c = match self.spec.stationary_rate() {
            Some(_) => diffusion_coefficient(sigma, self.spec.baseline, self.spec.branching_ratio())?,
            None => nonlinear_diffusion_coefficient(sigma, self.unit_arrivals(seed)?.0)?,
        };
        Ok(c.value())
    }

    /// One path on `[0, horizon]`; the chain starts from its stationary law.
    pub fn simulate(&self, horizon: f64, arrivals: &mut Rng, marks: &mut Rng) -> Result<CompoundPath> {
        let events = simulate_with(&self.spec, horizon, arrivals, SimOptions::default())?;
        let states = if events.is_empty() {
            Vec::new()
        } else {
            let pi = stationary_distribution(&self.chain)?;
            simulate_chain_with(&self.chain, &pi.pi, events.len(), marks)?
        };
        let increments = states.iter().map(|&s| self.marks.a[s]).collect();
        Ok(CompoundPath {
            events,
            states,
            increments,
        })
    }

    /// Path `index` of the ensemble seeded by `seed`.
    pub fn simulate_indexed(&self, horizon: f64, seed: u64, index: u64) -> Result<CompoundPath> {
        let mut a = par::child_rng(seed, par::stream::ARRIVALS, index);
        let mut m = par::child_rng(seed, par::stream::MARKS, index);
        self.simulate(horizon, &mut a, &mut m)
    }
}
