//! Compound Hawkes models for limit-order-book mid-prices.
//!
//! The crate is organised along the pipeline it implements:
//!
//! * [`hawkes`]: intensity laws, compensators, thinning simulation.
//! * [`markov`]: mark chains: estimation, stationary law, fundamental solve.
//! * [`diffusion`]: LLN drift and FCLT diffusion coefficients.
//! * [`mle`]: exponential-kernel maximum likelihood with a swarm optimiser.
//! * [`lob`]: level-1 order book ingestion and state-model construction.
//! * [`empirical`]: windowed residual curves, regression, Monte Carlo checks.
//! * [`compound`]: compound price paths.
//! * [`fixture`]: synthetic order-book days.
//! * [`analysis`]: one-day evaluation of a state model.
//!
//! Monte Carlo loops run on rayon when the `parallel` feature is enabled
//! (the default) and fall back to plain iteration otherwise. Results are
//! identical either way because every path draws from its own seeded stream.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod compound;
pub mod diffusion;
pub mod empirical;
pub mod error;
pub mod fixture;
pub mod hawkes;
pub mod lob;
pub mod markov;
pub mod mle;
pub mod optim;
pub mod par;
pub mod quadrature;
pub mod stats;

pub use error::{Error, Result};
