//! Synthetic trading days in the order-book file format.
//!
//! Price moves arrive as a Hawkes process. Each move is a signed multiple of
//! the half tick drawn from the law of the current regime, and regimes follow
//! a Markov chain. The book keeps a one or two cent spread, so any multiple
//! of the half tick can be realised by integer cent quotes. Rows that leave
//! the quotes unchanged pad the file to a target message rate.

use rand::Rng as _;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::hawkes::{simulate_with, HawkesSpec, SimOptions};
use crate::lob::{LobRecord, HALF_TICK};
use crate::markov::{sample_from, simulate_chain_with, stationary_distribution, TransitionMatrix};
use crate::par::{self, Rng};
use crate::{Error, Result};

pub const SESSION_OPEN: f64 = 34_200.0;
pub const SESSION_CLOSE: f64 = 57_600.0;

const CENT: i64 = 100;

/// Distribution over signed half-tick multiples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TickLaw {
    pub ticks: Vec<i64>,
    pub probs: Vec<f64>,
}

impl TickLaw {
    pub fn new(ticks: Vec<i64>, probs: Vec<f64>) -> Result<Self> {
        if ticks.is_empty() || ticks.len() != probs.len() {
            return Err(Error::InvalidParameter("tick law needs matching non-empty vectors".into()));
        }
        if ticks.contains(&0) {
            return Err(Error::InvalidParameter("zero move in tick law".into()));
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| !(p >= 0.0)) || !(total > 0.0) {
            return Err(Error::InvalidParameter("tick law probabilities must be >= 0".into()));
        }
        Ok(TickLaw {
            ticks,
            probs: probs.iter().map(|p| p / total).collect(),
        })
    }

    pub fn point(k: i64) -> Result<Self> {
        Self::new(vec![k], vec![1.0])
    }

    /// `P(|k| = 1) = p_one`; the rest is geometric on `2, 3, …, max` with
    /// the given overall mean `|k|`. `sign` is +1 or −1.
    pub fn half_tick_geometric(sign: i64, p_one: f64, mean: f64, max: i64) -> Result<Self> {
        if !(0.0..1.0).contains(&p_one) || !(mean > 1.0) || max < 2 {
            return Err(Error::InvalidParameter("bad geometric tick law".into()));
        }
        let tail_mean = (mean - p_one) / (1.0 - p_one) - 2.0;
        let r = tail_mean / (1.0 + tail_mean);
        let mut ticks = vec![sign];
        let mut probs = vec![p_one];
        for k in 2..=max {
            ticks.push(sign * k);
            probs.push((1.0 - p_one) * (1.0 - r) * r.powi((k - 2) as i32));
        }
        Self::new(ticks, probs)
    }

    /// Mixture of point laws at consecutive tails starting from `from`
    /// with geometric decay chosen to hit `mean` (in ticks).
    pub fn geometric_from(sign: i64, from: i64, mean: f64, max: i64) -> Result<Self> {
        let extra = mean - from as f64;
        if !(extra > 0.0) {
            return Self::point(sign * from);
        }
        let r = extra / (1.0 + extra);
        let (ticks, probs) = (from..=max)
            .map(|k| (sign * k, (1.0 - r) * r.powi((k - from) as i32)))
            .unzip();
        Self::new(ticks, probs)
    }

    pub fn mean_ticks(&self) -> f64 {
        self.ticks.iter().zip(&self.probs).map(|(&k, p)| k as f64 * p).sum()
    }

    fn sample(&self, rng: &mut Rng) -> i64 {
        self.ticks[sample_from(&self.probs, rng)]
    }
}

#[derive(Clone, Debug)]
pub struct FixtureConfig {
    pub arrivals: HawkesSpec,
    pub regimes: TransitionMatrix,
    pub laws: Vec<TickLaw>,
    /// Book rows per second over the whole session, moves included.
    pub orders_per_second: Option<f64>,
    /// Opening mid-price in dollars.
    pub s0: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Fixed half-tick moves with INTC-scale arrivals.
    Intc,
    /// Fixed half-tick moves with MSFT-scale arrivals.
    Msft,
    /// Multi-tick moves, 61% above the half tick.
    Aapl,
    /// Twelve move regimes matched to a quantile breakdown.
    Amzn,
    /// Heavy-tailed iid moves for model comparisons.
    MultiMagnitude,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Intc, Preset::Msft, Preset::Aapl, Preset::Amzn, Preset::MultiMagnitude];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Intc => "intc",
            Preset::Msft => "msft",
            Preset::Aapl => "aapl",
            Preset::Amzn => "amzn",
            Preset::MultiMagnitude => "multi-magnitude",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn config(&self, seed: u64) -> Result<FixtureConfig> {
        let sign_laws = |down: TickLaw, up: TickLaw| vec![down, up];
        let (arrivals, regimes, laws, ops, s0) = match self {
            Preset::Intc => (
                HawkesSpec::exponential(0.0471, 399.6389, 760.4991)?,
                TransitionMatrix::two_state(0.6106, 0.5588)?,
                sign_laws(TickLaw::point(-1)?, TickLaw::point(1)?),
                176.0,
                25.0,
            ),
            Preset::Msft => (
                HawkesSpec::exponential(0.0659, 479.3482, 908.0032)?,
                TransitionMatrix::two_state(0.6269, 0.5827)?,
                sign_laws(TickLaw::point(-1)?, TickLaw::point(1)?),
                173.0,
                30.0,
            ),
            Preset::Aapl => {
                // Baseline scaled so the trimmed six-hour window holds about
                // 64,350 moves with the fitted branching ratio.
                let mu = 1045.2676 / 2556.1844;
                let rate = 64_350.0 / (SESSION_CLOSE - SESSION_OPEN - 1800.0);
                (
                    HawkesSpec::exponential(rate * (1.0 - mu), 1045.2676, 2556.1844)?,
                    TransitionMatrix::two_state(0.4956, 0.4933)?,
                    sign_laws(
                        TickLaw::half_tick_geometric(-1, 0.39, 0.0172 / HALF_TICK, 60)?,
                        TickLaw::half_tick_geometric(1, 0.39, 0.0170 / HALF_TICK, 60)?,
                    ),
                    51.0,
                    585.0,
                )
            }
            Preset::Amzn => {
                let (pi, laws) = amzn_regimes()?;
                (
                    HawkesSpec::exponential(0.6443, 653.7524, 1556.1702)?,
                    TransitionMatrix::new(vec![pi; 12])?,
                    laws,
                    25.0,
                    220.0,
                )
            }
            Preset::MultiMagnitude => {
                // |k| ∝ k⁻² on 1..=60 half ticks, symmetric and iid.
                let ticks: Vec<i64> = (1..=60).flat_map(|k| [-k, k]).collect();
                let probs: Vec<f64> = (1..=60i64)
                    .flat_map(|k| {
                        let w = 1.0 / (k * k) as f64;
                        [w, w]
                    })
                    .collect();
                (
                    HawkesSpec::exponential(0.6, 1.0, 2.5)?,
                    TransitionMatrix::new(vec![vec![1.0]])?,
                    vec![TickLaw::new(ticks, probs)?],
                    20.0,
                    100.0,
                )
            }
        };
        Ok(FixtureConfig {
            arrivals,
            regimes,
            laws,
            orders_per_second: Some(ops),
            s0,
            seed,
        })
    }
}

/// Ergodic probabilities and move laws of the twelve AMZN-like regimes.
/// Regimes whose mean is not a half-tick multiple mix neighbouring moves.
fn amzn_regimes() -> Result<(Vec<f64>, Vec<TickLaw>)> {
    let pi = vec![
        0.0275, 0.0281, 0.0264, 0.0382, 0.0576, 0.3249, 0.2321, 0.0923, 0.0578, 0.0353, 0.0412, 0.0387,
    ];
    let total: f64 = pi.iter().sum();
    let pi = pi.into_iter().map(|p| p / total).collect();
    let laws = vec![
        TickLaw::geometric_from(-1, 8, 0.0524 / HALF_TICK, 40)?,
        TickLaw::new(vec![-6, -7], vec![0.64, 0.36])?,
        TickLaw::point(-5)?,
        TickLaw::point(-4)?,
        TickLaw::point(-3)?,
        TickLaw::new(vec![-1, -2], vec![0.72, 0.28])?,
        TickLaw::point(1)?,
        TickLaw::point(2)?,
        TickLaw::point(3)?,
        TickLaw::point(4)?,
        TickLaw::new(vec![5, 6], vec![0.58, 0.42])?,
        TickLaw::geometric_from(1, 7, 0.0476 / HALF_TICK, 40)?,
    ];
    Ok((pi, laws))
}

/// Quotes with a one or two cent spread, in 10⁻⁴ dollars.
struct Book {
    bid: i64,
    ask: i64,
}

impl Book {
    /// Moves the mid by `k` half ticks. Even moves shift both sides; odd
    /// moves toggle the spread between one and two cents.
    fn shift(&mut self, k: i64) {
        let spread = self.ask - self.bid;
        let new_spread = if k % 2 == 0 { spread } else { 3 * CENT - spread };
        let sum = self.bid + self.ask + k * CENT;
        self.bid = (sum - new_spread) / 2;
        self.ask = self.bid + new_spread;
    }
}

/// One synthetic session as raw order-book records.
pub fn generate(cfg: &FixtureConfig) -> Result<Vec<LobRecord>> {
    if cfg.laws.len() != cfg.regimes.n() {
        return Err(Error::InvalidParameter(format!(
            "{} regimes but {} move laws",
            cfg.regimes.n(),
            cfg.laws.len()
        )));
    }
    if !(cfg.s0 > 0.02) {
        return Err(Error::InvalidParameter(format!("s0 = {} too small", cfg.s0)));
    }
    let session = SESSION_CLOSE - SESSION_OPEN;
    let mut arr_rng = par::child_rng(cfg.seed, par::stream::FIXTURE, 0);
    let mut reg_rng = par::child_rng(cfg.seed, par::stream::FIXTURE, 1);
    let mut mov_rng = par::child_rng(cfg.seed, par::stream::FIXTURE, 2);
    let mut fill_rng = par::child_rng(cfg.seed, par::stream::FILLER, 0);

    let events = simulate_with(&cfg.arrivals, session, &mut arr_rng, SimOptions::default())?;
    let moves: Vec<i64> = if events.is_empty() {
        Vec::new()
    } else {
        let pi = stationary_distribution(&cfg.regimes)?;
        simulate_chain_with(&cfg.regimes, &pi.pi, events.len(), &mut reg_rng)?
            .into_iter()
            .map(|r| cfg.laws[r].sample(&mut mov_rng))
            .collect()
    };

    // Filler arrival times: a Poisson stream topping up the move rate.
    let mut filler = Vec::new();
    if let Some(ops) = cfg.orders_per_second {
        let rate = ops - events.len() as f64 / session;
        if rate > 0.0 {
            let mut t = 0.0;
            loop {
                let w: f64 = Exp1.sample(&mut fill_rng);
                t += w / rate;
                if t >= session {
                    break;
                }
                filler.push(t);
            }
        }
    }

    let mid2 = (cfg.s0 * 2.0 * 10_000.0 / CENT as f64).round() as i64 * CENT;
    let mut book = Book {
        bid: mid2 / 2 - CENT / 2,
        ask: mid2 / 2 + CENT / 2,
    };
    if (book.bid + book.ask) % CENT != 0 || book.bid % CENT != 0 {
        book.bid = (mid2 / 2 / CENT) * CENT;
        book.ask = book.bid + CENT;
    }
    let mut out = Vec::with_capacity(events.len() + filler.len() + 2);
    let mut order_id = 1u64;
    let mut push = |out: &mut Vec<LobRecord>, t: f64, ty: i32, dir: i32, book: &Book, rng: &mut Rng| {
        let size = 100 * rng.random_range(1..=10u64);
        out.push(LobRecord {
            time: SESSION_OPEN + t,
            event_type: ty,
            order_id,
            size,
            price: if dir > 0 { book.bid } else { book.ask },
            direction: dir,
            ask_price: book.ask,
            ask_size: 100 * rng.random_range(1..=50u64),
            bid_price: book.bid,
            bid_size: 100 * rng.random_range(1..=50u64),
        });
        order_id += 1;
    };

    push(&mut out, 0.0, 1, 1, &book, &mut fill_rng);
    let mut fi = 0;
    for (&t, &k) in events.times().iter().zip(&moves) {
        while fi < filler.len() && filler[fi] < t {
            let dir = if fill_rng.random::<bool>() { 1 } else { -1 };
            push(&mut out, filler[fi], 1, dir, &book, &mut fill_rng);
            fi += 1;
        }
        book.shift(k);
        if book.bid <= 0 {
            return Err(Error::InvalidParameter("synthetic price went non-positive".into()));
        }
        push(&mut out, t, 4, if k > 0 { -1 } else { 1 }, &book, &mut fill_rng);
    }
    for &t in &filler[fi..] {
        let dir = if fill_rng.random::<bool>() { 1 } else { -1 };
        push(&mut out, t, 1, dir, &book, &mut fill_rng);
    }
    push(&mut out, session, 1, 1, &book, &mut fill_rng);
    Ok(out)
}
