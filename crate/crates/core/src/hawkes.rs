//! One-dimensional Hawkes processes: intensity laws, compensators and an
//! exact thinning sampler.
//!
//! The conditional intensity is `h(λ + Σ_{tᵢ<t} μ(t − tᵢ))` for a baseline
//! rate `λ`, an excitation kernel `μ` and a monotone link `h`.

use std::io::Write;
use std::path::Path;

use rand::Rng as _;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::par::{self, Rng};
use crate::quadrature::adaptive_simpson;
use crate::{Error, Result};

/// Per-gap absolute tolerance for the numerical compensator.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Default explosion guard for [`simulate`].
pub const DEFAULT_MAX_EVENTS: usize = 10_000_000;

/// Fraction of a stationary run discarded before measuring rates.
pub const BURN_IN_FRACTION: f64 = 0.1;

/// Response function `μ(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ExcitationKernel {
    /// `α e^{-βt}`
    Exponential { alpha: f64, beta: f64 },
    /// `k / (c + t)^p`
    PowerLaw { k: f64, c: f64, p: f64 },
    Null,
}

impl ExcitationKernel {
    pub fn exponential(alpha: f64, beta: f64) -> Result<Self> {
        let k = ExcitationKernel::Exponential { alpha, beta };
        k.validate()?;
        Ok(k)
    }

    pub fn power_law(k: f64, c: f64, p: f64) -> Result<Self> {
        let kernel = ExcitationKernel::PowerLaw { k, c, p };
        kernel.validate()?;
        Ok(kernel)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ExcitationKernel::Exponential { alpha, beta } => {
                if !(alpha >= 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidParameter(format!("alpha = {alpha} must be >= 0")));
                }
                if !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::InvalidParameter(format!("beta = {beta} must be > 0")));
                }
            }
            ExcitationKernel::PowerLaw { k, c, p } => {
                if !(k >= 0.0 && k.is_finite()) {
                    return Err(Error::InvalidParameter(format!("k = {k} must be >= 0")));
                }
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::InvalidParameter(format!("c = {c} must be > 0")));
                }
                if !(p > 1.0 && p.is_finite()) {
                    return Err(Error::InvalidParameter(format!("p = {p} must be > 1")));
                }
            }
            ExcitationKernel::Null => {}
        }
        Ok(())
    }

    /// `μ(s)` for `s >= 0`.
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            ExcitationKernel::Exponential { alpha, beta } => alpha * (-beta * s).exp(),
            ExcitationKernel::PowerLaw { k, c, p } => k * (c + s).powf(-p),
            ExcitationKernel::Null => 0.0,
        }
    }

    /// `∫₀ˢ μ(u) du`.
    pub fn integral(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match *self {
            ExcitationKernel::Exponential { alpha, beta } => -alpha / beta * (-beta * s).exp_m1(),
            ExcitationKernel::PowerLaw { k, c, p } => {
                k / (p - 1.0) * (c.powf(1.0 - p) - (c + s).powf(1.0 - p))
            }
            ExcitationKernel::Null => 0.0,
        }
    }

    pub fn branching_ratio(&self) -> f64 {
        branching_ratio(self)
    }

    /// Whether `∫₀^∞ s μ(s) ds < ∞`, which the diffusion limit needs.
    pub fn has_finite_first_moment(&self) -> bool {
        match *self {
            ExcitationKernel::PowerLaw { k, p, .. } => k == 0.0 || p > 2.0,
            _ => true,
        }
    }
}

/// `μ̂ = ∫₀^∞ μ(s) ds`.
pub fn branching_ratio(kernel: &ExcitationKernel) -> f64 {
    match *kernel {
        ExcitationKernel::Exponential { alpha, beta } => alpha / beta,
        ExcitationKernel::PowerLaw { k, c, p } => k * c.powf(1.0 - p) / (p - 1.0),
        ExcitationKernel::Null => 0.0,
    }
}

/// Monotone map applied to the linear intensity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NonlinearLink {
    Identity,
    /// `h(x) = 1` for `x > 0`, else `0`.
    Indicator,
    /// `h(x) = min(max(x, 0), ceiling)`.
    Capped { ceiling: f64 },
}

impl NonlinearLink {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            NonlinearLink::Identity => x,
            NonlinearLink::Indicator => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            NonlinearLink::Capped { ceiling } => x.clamp(0.0, ceiling),
        }
    }

    fn validate(&self) -> Result<()> {
        if let NonlinearLink::Capped { ceiling } = *self {
            if !(ceiling > 0.0 && ceiling.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "link ceiling = {ceiling} must be > 0"
                )));
            }
        }
        Ok(())
    }
}

/// Full intensity law: baseline, kernel and link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HawkesSpec {
    pub baseline: f64,
    pub kernel: ExcitationKernel,
    pub link: NonlinearLink,
}

impl HawkesSpec {
    pub fn new(baseline: f64, kernel: ExcitationKernel, link: NonlinearLink) -> Result<Self> {
        if !(baseline > 0.0 && baseline.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "baseline = {baseline} must be > 0"
            )));
        }
        kernel.validate()?;
        link.validate()?;
        Ok(HawkesSpec {
            baseline,
            kernel,
            link,
        })
    }

    /// Linear exponential-kernel process.
    pub fn exponential(baseline: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(
            baseline,
            ExcitationKernel::exponential(alpha, beta)?,
            NonlinearLink::Identity,
        )
    }

    pub fn poisson(rate: f64) -> Result<Self> {
        Self::new(rate, ExcitationKernel::Null, NonlinearLink::Identity)
    }

    pub fn branching_ratio(&self) -> f64 {
        self.kernel.branching_ratio()
    }

    /// Branching ratio, or an error if a linear process would explode.
    pub fn require_subcritical(&self) -> Result<f64> {
        let mu_hat = self.branching_ratio();
        if self.link == NonlinearLink::Identity && mu_hat >= 1.0 {
            return Err(Error::Supercritical(mu_hat));
        }
        Ok(mu_hat)
    }

    /// Stationary mean rate `λ / (1 − μ̂)`; only defined for the identity link.
    pub fn stationary_rate(&self) -> Option<f64> {
        match self.link {
            NonlinearLink::Identity => {
                let mu_hat = self.branching_ratio();
                (mu_hat < 1.0).then(|| self.baseline / (1.0 - mu_hat))
            }
            _ => None,
        }
    }

    /// Conditions that do not block simulation but void the diffusion limit.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.kernel.has_finite_first_moment() {
            out.push(format!(
                "kernel {:?} has infinite first moment; the diffusion limit does not apply",
                self.kernel
            ));
        }
        if self.link == NonlinearLink::Identity && self.branching_ratio() >= 1.0 {
            out.push(format!("branching ratio {} >= 1", self.branching_ratio()));
        }
        out
    }

    /// `Σ_{tᵢ<t} μ(t − tᵢ)`.
    fn excitation(&self, times: &[f64], t: f64) -> f64 {
        if self.kernel == ExcitationKernel::Null {
            return 0.0;
        }
        times
            .iter()
            .take_while(|&&ti| ti < t)
            .map(|&ti| self.kernel.eval(t - ti))
            .sum()
    }
}

/// Observed event times on `[0, horizon]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventSequence {
    times: Vec<f64>,
    horizon: f64,
}

impl EventSequence {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidEvents(format!("horizon {horizon} must be >= 0")));
        }
        if let Some(&first) = times.first() {
            if !(first >= 0.0) {
                return Err(Error::InvalidEvents(format!("first time {first} < 0")));
            }
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidEvents(format!(
                "times not strictly increasing at index {}",
                i + 1
            )));
        }
        if let Some(&last) = times.last() {
            if last > horizon {
                return Err(Error::InvalidEvents(format!(
                    "last time {last} beyond horizon {horizon}"
                )));
            }
        }
        Ok(EventSequence { times, horizon })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Shifts every time and the horizon by `dt`.
    pub fn translated(&self, dt: f64) -> Result<Self> {
        EventSequence::new(
            self.times.iter().map(|t| t + dt).collect(),
            self.horizon + dt,
        )
    }

    /// Events in `[from, horizon]`, re-based so that `from` becomes 0.
    pub fn after(&self, from: f64) -> Result<Self> {
        let times = self
            .times
            .iter()
            .filter(|&&t| t >= from)
            .map(|t| t - from)
            .collect();
        EventSequence::new(times, (self.horizon - from).max(0.0))
    }

    /// Writes `time,mark`; the mark column is left empty when `marks` is None.
    pub fn write_csv(&self, path: impl AsRef<Path>, marks: Option<&[f64]>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "time,mark").map_err(io)?;
        for (i, t) in self.times.iter().enumerate() {
            match marks.and_then(|m| m.get(i)) {
                Some(m) => writeln!(w, "{t:.16e},{m:.16e}").map_err(io)?,
                None => writeln!(w, "{t:.16e},").map_err(io)?,
            }
        }
        w.flush().map_err(io)
    }

    /// Reads a `time,mark` file. Without an explicit horizon the last event
    /// time is used.
    pub fn read_csv(path: impl AsRef<Path>, horizon: Option<f64>) -> Result<(Self, Vec<Option<f64>>)> {
        let path = path.as_ref();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_path(path)?;
        let mut times = Vec::new();
        let mut marks = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let parse_err = |msg: String| Error::Parse {
                path: path.display().to_string(),
                line,
                msg,
            };
            let t: f64 = rec
                .get(0)
                .ok_or_else(|| parse_err("missing time".into()))?
                .trim()
                .parse()
                .map_err(|e| parse_err(format!("bad time: {e}")))?;
            let mark = match rec.get(1).map(str::trim) {
                None | Some("") => None,
                Some(s) => Some(s.parse().map_err(|e| parse_err(format!("bad mark: {e}")))?),
            };
            times.push(t);
            marks.push(mark);
        }
        let horizon = horizon.unwrap_or_else(|| times.last().copied().unwrap_or(0.0));
        Ok((EventSequence::new(times, horizon)?, marks))
    }
}

/// Conditional intensity `h(λ + Σ_{tᵢ<t} μ(t − tᵢ))`.
pub fn intensity_at(spec: &HawkesSpec, events: &EventSequence, t: f64) -> f64 {
    spec.link
        .apply(spec.baseline + spec.excitation(events.times(), t))
}

fn check_window(events: &EventSequence, t: f64) -> Result<()> {
    if !(t >= 0.0 && t <= events.horizon()) {
        return Err(Error::OutOfWindow {
            t,
            horizon: events.horizon(),
        });
    }
    Ok(())
}

/// `Λ(t) = ∫₀ᵗ λ(s) ds`, in closed form for the identity link and by
/// adaptive quadrature otherwise.
pub fn compensator(spec: &HawkesSpec, events: &EventSequence, t: f64) -> Result<f64> {
    check_window(events, t)?;
    match spec.link {
        NonlinearLink::Identity => Ok(spec.baseline * t
            + events
                .times()
                .iter()
                .take_while(|&&ti| ti < t)
                .map(|&ti| spec.kernel.integral(t - ti))
                .sum::<f64>()),
        _ => compensator_numeric(spec, events, t),
    }
}

/// Quadrature compensator, valid for every link. Integrates each gap
/// between events separately so the integrand is smooth on each piece.
pub fn compensator_numeric(spec: &HawkesSpec, events: &EventSequence, t: f64) -> Result<f64> {
    check_window(events, t)?;
    let mut walker = GapWalker::new(spec, events.times());
    Ok(walker.advance_to(t))
}

/// Time-rescaled inter-arrivals `Λ(tᵢ) − Λ(tᵢ₋₁)` with `t₀ = 0`.
pub fn rescaled_interarrivals(spec: &HawkesSpec, events: &EventSequence) -> Result<Vec<f64>> {
    if events.is_empty() {
        return Err(Error::Empty("no events to rescale".into()));
    }
    let times = events.times();
    let mut out = Vec::with_capacity(times.len());
    match (spec.link, spec.kernel) {
        (NonlinearLink::Identity, ExcitationKernel::Exponential { alpha, beta }) => {
            // decay = Σ_{i<j} e^{-β(t_j - t_i)}, updated in O(1) per event.
            let mut decay = 0.0;
            let mut prev_t = 0.0;
            let mut prev_lambda = 0.0;
            for (j, &tj) in times.iter().enumerate() {
                if j > 0 {
                    decay = (decay + 1.0) * (-beta * (tj - prev_t)).exp();
                }
                let lambda = spec.baseline * tj + alpha / beta * (j as f64 - decay);
                out.push(lambda - prev_lambda);
                prev_lambda = lambda;
                prev_t = tj;
            }
        }
        (NonlinearLink::Identity, _) => {
            let mut prev = 0.0;
            for &tj in times {
                let lambda = compensator(spec, events, tj)?;
                out.push(lambda - prev);
                prev = lambda;
            }
        }
        _ => {
            let mut walker = GapWalker::new(spec, times);
            let mut prev = 0.0;
            for &tj in times {
                let lambda = walker.advance_to(tj);
                out.push(lambda - prev);
                prev = lambda;
            }
        }
    }
    Ok(out)
}

/// Integrates the intensity forward gap by gap.
struct GapWalker<'a> {
    spec: &'a HawkesSpec,
    times: &'a [f64],
    /// Events strictly before `pos` have been absorbed into the state.
    next: usize,
    pos: f64,
    /// Exponential kernel only: `Σ α e^{-β(pos − tᵢ)}` over absorbed events.
    exp_state: f64,
    total: f64,
}

impl<'a> GapWalker<'a> {
    fn new(spec: &'a HawkesSpec, times: &'a [f64]) -> Self {
        GapWalker {
            spec,
            times,
            next: 0,
            pos: 0.0,
            exp_state: 0.0,
            total: 0.0,
        }
    }

    fn integrate_gap(&self, a: f64, b: f64) -> f64 {
        let spec = self.spec;
        let history = &self.times[..self.next];
        match spec.kernel {
            ExcitationKernel::Exponential { beta, .. } => {
                let s0 = self.exp_state;
                let f = |s: f64| spec.link.apply(spec.baseline + s0 * (-beta * (s - a)).exp());
                adaptive_simpson(&f, a, b, QUADRATURE_TOL)
            }
            ExcitationKernel::PowerLaw { .. } => {
                let f = |s: f64| {
                    let ex: f64 = history.iter().map(|&ti| spec.kernel.eval(s - ti)).sum();
                    spec.link.apply(spec.baseline + ex)
                };
                adaptive_simpson(&f, a, b, QUADRATURE_TOL)
            }
            ExcitationKernel::Null => (b - a) * spec.link.apply(spec.baseline),
        }
    }

    fn advance_to(&mut self, t: f64) -> f64 {
        while self.next < self.times.len() && self.times[self.next] < t {
            let ti = self.times[self.next];
            self.step(ti);
            if let ExcitationKernel::Exponential { alpha, .. } = self.spec.kernel {
                self.exp_state += alpha;
            }
            self.next += 1;
        }
        self.step(t);
        self.total
    }

    fn step(&mut self, to: f64) {
        if to <= self.pos {
            return;
        }
        self.total += self.integrate_gap(self.pos, to);
        if let ExcitationKernel::Exponential { beta, .. } = self.spec.kernel {
            self.exp_state *= (-beta * (to - self.pos)).exp();
        }
        self.pos = to;
    }
}

/// Sampler settings.
#[derive(Clone, Copy, Debug)]
pub struct SimOptions {
    pub max_events: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            max_events: DEFAULT_MAX_EVENTS,
        }
    }
}

/// Simulates a path on `[0, horizon]` by thinning. Deterministic per seed.
pub fn simulate(spec: &HawkesSpec, horizon: f64, seed: u64) -> Result<EventSequence> {
    let mut rng = par::rng(seed);
    simulate_with(spec, horizon, &mut rng, SimOptions::default())
}

/// Thinning sampler. The dominating rate is the intensity just after the
/// current point; it is valid because every kernel decays monotonically and
/// every link is non-decreasing.
pub fn simulate_with(
    spec: &HawkesSpec,
    horizon: f64,
    rng: &mut Rng,
    opts: SimOptions,
) -> Result<EventSequence> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidParameter(format!("horizon {horizon} must be > 0")));
    }
    spec.require_subcritical()?;

    let mut times: Vec<f64> = Vec::new();
    let mut t = 0.0;
    // Linear excitation at the current time `t`, right-continuous.
    let mut excite = 0.0;
    loop {
        let bound = spec.link.apply(spec.baseline + excite);
        if bound <= 0.0 {
            break;
        }
        let wait: f64 = Exp1.sample(rng);
        let cand = t + wait / bound;
        if cand > horizon {
            break;
        }
        excite = match spec.kernel {
            ExcitationKernel::Exponential { beta, .. } => excite * (-beta * (cand - t)).exp(),
            ExcitationKernel::PowerLaw { .. } => spec.excitation(&times, cand),
            ExcitationKernel::Null => 0.0,
        };
        t = cand;
        let rate = spec.link.apply(spec.baseline + excite);
        let u: f64 = rng.random();
        if u * bound <= rate {
            times.push(t);
            if times.len() > opts.max_events {
                return Err(Error::Explosion(opts.max_events));
            }
            excite += spec.kernel.eval(0.0);
        }
    }
    EventSequence::new(times, horizon)
}

/// Estimates `E[N[0,1]]` under the stationary measure from one long run:
/// the first [`BURN_IN_FRACTION`] of the horizon is discarded and the
/// standard error comes from non-overlapping unit-interval batch means.
/// Returns `(mean, standard_error)`.
pub fn estimate_unit_arrivals(spec: &HawkesSpec, horizon: f64, seed: u64) -> Result<(f64, f64)> {
    let path = simulate(spec, horizon, seed)?;
    let start = BURN_IN_FRACTION * horizon;
    let kept = path.after(start)?;
    let span = kept.horizon();
    let batches = 100usize;
    let width = span / batches as f64;
    let mut counts = vec![0.0; batches];
    for &t in kept.times() {
        let b = ((t / width) as usize).min(batches - 1);
        counts[b] += 1.0;
    }
    let rates: Vec<f64> = counts.iter().map(|c| c / width).collect();
    let mean = kept.len() as f64 / span;
    let se = crate::stats::sample_std(&rates) / (batches as f64).sqrt();
    Ok((mean, se))
}
