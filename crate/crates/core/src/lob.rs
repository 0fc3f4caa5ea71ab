//! Level-1 order book ingestion and mark/state model construction.
//!
//! Input is a LOBSTER-style pair: a message file
//! `time,type,orderid,size,price,direction` and an order book file
//! `askprice,asksize,bidprice,bidsize`, both headerless, prices in
//! 10⁻⁴ dollars.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::hawkes::EventSequence;
use crate::markov::{MarkTable, TransitionMatrix};
use crate::{Error, Result};

/// Price units per dollar in the input files.
pub const PRICE_SCALE: f64 = 10_000.0;

/// Half a cent: the smallest mid-price move with cent ticks.
pub const HALF_TICK: f64 = 0.005;

/// Seconds trimmed from each end of the session.
pub const DEFAULT_TRIM: f64 = 900.0;

/// LOBSTER marks an empty side with these sentinels.
const EMPTY_ASK: i64 = 9_999_999_999;
const EMPTY_BID: i64 = -9_999_999_999;

/// One raw row of the message/order book pair.
#[derive(Clone, Debug, PartialEq)]
pub struct LobRecord {
    pub time: f64,
    pub event_type: i32,
    pub order_id: u64,
    pub size: u64,
    pub price: i64,
    pub direction: i32,
    pub ask_price: i64,
    pub ask_size: u64,
    pub bid_price: i64,
    pub bid_size: u64,
}

/// Best quotes at one update, prices in 10⁻⁴ dollars.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LobRow {
    pub time: f64,
    pub bid_ticks: i64,
    pub ask_ticks: i64,
}

impl LobRow {
    pub fn bid(&self) -> f64 {
        self.bid_ticks as f64 / PRICE_SCALE
    }

    pub fn ask(&self) -> f64 {
        self.ask_ticks as f64 / PRICE_SCALE
    }

    pub fn mid(&self) -> f64 {
        (self.bid_ticks + self.ask_ticks) as f64 / (2.0 * PRICE_SCALE)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LobSeries {
    pub rows: Vec<LobRow>,
    /// Input rows before rejection.
    pub raw_rows: usize,
    pub rejected_crossed: usize,
    pub rejected_empty: usize,
}

impl LobSeries {
    /// Builds a series from raw records, dropping crossed and one-sided books.
    pub fn from_records(records: &[LobRecord]) -> Self {
        let mut rows = Vec::with_capacity(records.len());
        let mut crossed = 0;
        let mut empty = 0;
        for r in records {
            if r.ask_price == EMPTY_ASK || r.bid_price == EMPTY_BID || r.ask_price <= 0 || r.bid_price <= 0 {
                empty += 1;
            } else if r.bid_price > r.ask_price {
                crossed += 1;
            } else {
                rows.push(LobRow {
                    time: r.time,
                    bid_ticks: r.bid_price,
                    ask_ticks: r.ask_price,
                });
            }
        }
        if crossed > 0 {
            log::warn!("rejected {crossed} crossed book rows");
        }
        LobSeries {
            rows,
            raw_rows: records.len(),
            rejected_crossed: crossed,
            rejected_empty: empty,
        }
    }
}

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, path: &Path, line: usize, name: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(idx).ok_or_else(|| Error::Parse {
        path: path.display().to_string(),
        line,
        msg: format!("missing column {name}"),
    })?;
    raw.trim().parse().map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line,
        msg: format!("bad {name} {raw:?}: {e}"),
    })
}

/// Reads both files into raw records.
pub fn read_records(message_file: impl AsRef<Path>, orderbook_file: impl AsRef<Path>) -> Result<Vec<LobRecord>> {
    let mpath = message_file.as_ref();
    let bpath = orderbook_file.as_ref();
    let mut mrdr = open_reader(mpath)?;
    let mut brdr = open_reader(bpath)?;
    let mut out = Vec::new();
    let mut mrecs = mrdr.records();
    let mut brecs = brdr.records();
    let mut line = 0usize;
    loop {
        line += 1;
        match (mrecs.next(), brecs.next()) {
            (None, None) => break,
            (Some(_), None) | (None, Some(_)) => {
                return Err(Error::Parse {
                    path: format!("{} / {}", mpath.display(), bpath.display()),
                    line,
                    msg: "message and order book row counts differ".into(),
                })
            }
            (Some(m), Some(b)) => {
                let m = m?;
                let b = b?;
                out.push(LobRecord {
                    time: field(&m, 0, mpath, line, "time")?,
                    event_type: field(&m, 1, mpath, line, "type")?,
                    order_id: field(&m, 2, mpath, line, "orderid")?,
                    size: field(&m, 3, mpath, line, "size")?,
                    price: field(&m, 4, mpath, line, "price")?,
                    direction: field(&m, 5, mpath, line, "direction")?,
                    ask_price: field(&b, 0, bpath, line, "askprice")?,
                    ask_size: field(&b, 1, bpath, line, "asksize")?,
                    bid_price: field(&b, 2, bpath, line, "bidprice")?,
                    bid_size: field(&b, 3, bpath, line, "bidsize")?,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Empty(format!("{} has no rows", mpath.display())));
    }
    Ok(out)
}

/// Writes records in the same format [`read_records`] accepts.
pub fn write_records(
    records: &[LobRecord],
    message_file: impl AsRef<Path>,
    orderbook_file: impl AsRef<Path>,
) -> Result<()> {
    let mpath = message_file.as_ref();
    let bpath = orderbook_file.as_ref();
    let mf = std::fs::File::create(mpath).map_err(|e| Error::io(mpath, e))?;
    let bf = std::fs::File::create(bpath).map_err(|e| Error::io(bpath, e))?;
    let mut mw = std::io::BufWriter::new(mf);
    let mut bw = std::io::BufWriter::new(bf);
    for r in records {
        writeln!(
            mw,
            "{},{},{},{},{},{}",
            r.time, r.event_type, r.order_id, r.size, r.price, r.direction
        )
        .map_err(|e| Error::io(mpath, e))?;
        writeln!(bw, "{},{},{},{}", r.ask_price, r.ask_size, r.bid_price, r.bid_size)
            .map_err(|e| Error::io(bpath, e))?;
    }
    mw.flush().map_err(|e| Error::io(mpath, e))?;
    bw.flush().map_err(|e| Error::io(bpath, e))
}

pub fn parse_lob(message_file: impl AsRef<Path>, orderbook_file: impl AsRef<Path>) -> Result<LobSeries> {
    let records = read_records(message_file, orderbook_file)?;
    let series = LobSeries::from_records(&records);
    if let Some(i) = series.rows.windows(2).position(|w| w[1].time < w[0].time) {
        return Err(Error::InvalidEvents(format!(
            "book times decrease after row {}",
            i + 1
        )));
    }
    Ok(series)
}

/// Signed mid-price moves inside the trimmed window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceChangeSeries {
    pub times: Vec<f64>,
    pub changes: Vec<f64>,
    /// Mid-price at the start of the window.
    pub s0: f64,
    pub start: f64,
    pub end: f64,
}

impl PriceChangeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Arrival times re-based to the window start.
    pub fn events(&self) -> Result<EventSequence> {
        EventSequence::new(
            self.times.iter().map(|t| t - self.start).collect(),
            self.end - self.start,
        )
    }

    /// Every change multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        PriceChangeSeries {
            changes: self.changes.iter().map(|x| x * c).collect(),
            s0: self.s0 * c,
            ..self.clone()
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "time,change").map_err(io)?;
        for (t, c) in self.times.iter().zip(&self.changes) {
            writeln!(w, "{t:.16e},{c}").map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Mid-price change events in `[open + trim, close − trim]`. Rows sharing a
/// timestamp collapse to the last one; repeated mids emit nothing.
pub fn mid_price_events(series: &LobSeries, trim: f64) -> Result<PriceChangeSeries> {
    let rows = &series.rows;
    let (first, last) = match (rows.first(), rows.last()) {
        (Some(f), Some(l)) => (f.time, l.time),
        _ => return Err(Error::Empty("order book has no valid rows".into())),
    };
    let start = first + trim;
    let end = last - trim;
    if !(end > start) {
        return Err(Error::Empty(format!(
            "window [{start}, {end}] is empty after trimming {trim} s"
        )));
    }
    // Last row per timestamp, restricted to the window.
    let mut book: Vec<&LobRow> = Vec::new();
    for r in rows.iter().filter(|r| r.time >= start && r.time <= end) {
        match book.last_mut() {
            Some(prev) if prev.time == r.time => *prev = r,
            _ => book.push(r),
        }
    }
    let Some(first_row) = book.first() else {
        return Err(Error::Empty("no book updates inside the trimmed window".into()));
    };
    // Twice the mid in 10⁻⁴ units keeps the arithmetic exact.
    let mut prev_mid2 = first_row.bid_ticks + first_row.ask_ticks;
    let s0 = prev_mid2 as f64 / (2.0 * PRICE_SCALE);
    let mut times = Vec::new();
    let mut changes = Vec::new();
    for r in &book[1..] {
        let mid2 = r.bid_ticks + r.ask_ticks;
        if mid2 != prev_mid2 {
            times.push(r.time);
            changes.push((mid2 - prev_mid2) as f64 / (2.0 * PRICE_SCALE));
            prev_mid2 = mid2;
        }
    }
    Ok(PriceChangeSeries {
        times,
        changes,
        s0,
        start,
        end,
    })
}

/// How a state model was built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StateRule {
    FixedTick { delta: f64 },
    TwoStateMean,
    Quantile { q: usize, mode: QuantileMode },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantileMode {
    /// `q` probability levels on each side.
    PerSide,
    /// `q` levels split evenly between the two sides.
    Total,
}

/// Partition of observed changes into ordered states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateModel {
    /// Lower edge of each state; state `i` covers `[boundaries[i], boundaries[i + 1])`.
    pub boundaries: Vec<f64>,
    /// Top of the last state, which is closed on both ends.
    pub upper: f64,
    pub marks: MarkTable,
    pub rule: StateRule,
}

impl StateModel {
    pub fn n(&self) -> usize {
        self.boundaries.len()
    }

    /// State index of a change; values outside the observed range go to the
    /// nearest end state.
    pub fn assign(&self, x: f64) -> usize {
        self.boundaries.partition_point(|&b| b <= x).saturating_sub(1)
    }
}

/// JSON form: the mark-chain layout plus `boundaries`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateModelFile {
    pub n: usize,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub pi: Vec<f64>,
    pub boundaries: Vec<f64>,
    pub upper: f64,
    pub counts: Vec<usize>,
    pub rule: StateRule,
}

impl StateModelFile {
    pub fn new(model: &StateModel, p: &TransitionMatrix, pi: &[f64], states: &[usize]) -> Self {
        let mut counts = vec![0; model.n()];
        for &s in states {
            counts[s] += 1;
        }
        StateModelFile {
            n: model.n(),
            p: p.rows().to_vec(),
            a: model.marks.a.clone(),
            pi: pi.to_vec(),
            boundaries: model.boundaries.clone(),
            upper: model.upper,
            counts,
            rule: model.rule.clone(),
        }
    }
}

fn sign_states(changes: &PriceChangeSeries) -> Result<Vec<usize>> {
    if let Some(i) = changes.changes.iter().position(|&c| c == 0.0 || !c.is_finite()) {
        return Err(Error::InvalidParameter(format!("change {} at index {i} is zero or non-finite", changes.changes[i])));
    }
    Ok(changes.changes.iter().map(|&c| usize::from(c > 0.0)).collect())
}

fn extremes(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// State 0 ↔ −δ for downward moves, state 1 ↔ +δ for upward ones.
pub fn build_fixed_tick(changes: &PriceChangeSeries, delta: f64) -> Result<(StateModel, Vec<usize>)> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} must be > 0")));
    }
    let states = sign_states(changes)?;
    let (lo, hi) = extremes(&changes.changes);
    Ok((
        StateModel {
            boundaries: vec![lo.min(-delta), 0.0],
            upper: hi.max(delta),
            marks: MarkTable::new(vec![-delta, delta])?,
            rule: StateRule::FixedTick { delta },
        },
        states,
    ))
}

/// Two states valued at the mean downward and mean upward move.
pub fn build_two_state_mean(changes: &PriceChangeSeries) -> Result<(StateModel, Vec<usize>)> {
    let states = sign_states(changes)?;
    let (mut sum, mut cnt) = ([0.0; 2], [0usize; 2]);
    for (&s, &c) in states.iter().zip(&changes.changes) {
        sum[s] += c;
        cnt[s] += 1;
    }
    if cnt[0] == 0 || cnt[1] == 0 {
        return Err(Error::InvalidParameter(
            "two-state model needs both upward and downward moves".into(),
        ));
    }
    let (lo, hi) = extremes(&changes.changes);
    Ok((
        StateModel {
            boundaries: vec![lo, 0.0],
            upper: hi,
            marks: MarkTable::new(vec![sum[0] / cnt[0] as f64, sum[1] / cnt[1] as f64])?,
            rule: StateRule::TwoStateMean,
        },
        states,
    ))
}

/// Order-statistic quantile with linear interpolation; `sorted` ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Lower edges from one side: quantiles at levels `j / q`, `j = 0 … q − 1`.
/// Level 0 is the side's minimum, which keeps the two signs apart.
fn side_edges(sorted: &[f64], q: usize) -> Vec<f64> {
    (0..q).map(|j| quantile_sorted(sorted, j as f64 / q as f64)).collect()
}

/// Quantile-based n-state model. Downward and upward moves are binned
/// separately, duplicate edges are dropped, and edges that capture no
/// observation are merged into their left neighbour.
pub fn build_quantile_states(
    changes: &PriceChangeSeries,
    q: usize,
    mode: QuantileMode,
) -> Result<(StateModel, Vec<usize>)> {
    if q < 2 {
        return Err(Error::InvalidParameter(format!("q = {q} must be >= 2")));
    }
    sign_states(changes)?;
    let mut down: Vec<f64> = changes.changes.iter().copied().filter(|&c| c < 0.0).collect();
    let mut up: Vec<f64> = changes.changes.iter().copied().filter(|&c| c > 0.0).collect();
    if down.is_empty() || up.is_empty() {
        return Err(Error::InvalidParameter(
            "quantile states need both upward and downward moves".into(),
        ));
    }
    down.sort_by(f64::total_cmp);
    up.sort_by(f64::total_cmp);
    let per_side = match mode {
        QuantileMode::PerSide => q,
        QuantileMode::Total => (q / 2).max(1),
    };
    let mut edges = side_edges(&down, per_side);
    edges.extend(side_edges(&up, per_side));
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let (lo, hi) = extremes(&changes.changes);
    if edges[0] > lo {
        edges.insert(0, lo);
    }

    // Drop edges whose bin is empty.
    let mut counts = vec![0usize; edges.len()];
    for &c in &changes.changes {
        counts[edges.partition_point(|&b| b <= c) - 1] += 1;
    }
    let edges: Vec<f64> = edges
        .into_iter()
        .zip(&counts)
        .filter(|(_, &n)| n > 0)
        .map(|(e, _)| e)
        .collect();

    let mut sums = vec![0.0; edges.len()];
    let mut cnt = vec![0usize; edges.len()];
    let states: Vec<usize> = changes
        .changes
        .iter()
        .map(|&c| {
            let s = edges.partition_point(|&b| b <= c) - 1;
            sums[s] += c;
            cnt[s] += 1;
            s
        })
        .collect();
    let marks: Vec<f64> = sums.iter().zip(&cnt).map(|(s, &n)| s / n as f64).collect();
    Ok((
        StateModel {
            boundaries: edges,
            upper: hi,
            marks: MarkTable::new(marks)?,
            rule: StateRule::Quantile { q, mode },
        },
        states,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiquiditySummary {
    pub orders_per_second: f64,
    pub daily_price_changes: usize,
}

/// Book updates per second over the untrimmed session and the number of
/// mid-price changes.
pub fn liquidity_summary(series: &LobSeries, changes: &PriceChangeSeries) -> LiquiditySummary {
    let span = match (series.rows.first(), series.rows.last()) {
        (Some(f), Some(l)) if l.time > f.time => l.time - f.time,
        _ => f64::NAN,
    };
    LiquiditySummary {
        orders_per_second: series.raw_rows as f64 / span,
        daily_price_changes: changes.len(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TickHistogram {
    /// `(multiple of a half tick, count)`, ascending.
    pub bins: Vec<(u64, usize)>,
    pub fraction_above_half_tick: f64,
}

/// Counts of `|change|` in half-tick multiples.
pub fn tick_histogram(changes: &[f64]) -> TickHistogram {
    let mut map = std::collections::BTreeMap::new();
    let mut above = 0usize;
    for &c in changes {
        let k = (c.abs() / HALF_TICK).round() as u64;
        *map.entry(k).or_insert(0usize) += 1;
        if c.abs() > HALF_TICK * (1.0 + 1e-9) {
            above += 1;
        }
    }
    TickHistogram {
        bins: map.into_iter().collect(),
        fraction_above_half_tick: if changes.is_empty() {
            0.0
        } else {
            above as f64 / changes.len() as f64
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn series_from_mids(mids: &[f64]) -> LobSeries {
        let rows = mids
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let m2 = (m * 2.0 * PRICE_SCALE).round() as i64;
                let bid = m2 / 2 - 50;
                LobRow {
                    time: i as f64,
                    bid_ticks: bid,
                    ask_ticks: m2 - bid,
                }
            })
            .collect::<Vec<_>>();
        LobSeries {
            raw_rows: rows.len(),
            rows,
            rejected_crossed: 0,
            rejected_empty: 0,
        }
    }

    fn pcs(changes: &[f64]) -> PriceChangeSeries {
        PriceChangeSeries {
            times: (1..=changes.len()).map(|i| i as f64).collect(),
            changes: changes.to_vec(),
            s0: 10.0,
            start: 0.0,
            end: changes.len() as f64 + 1.0,
        }
    }

    #[test]
    fn unit_conversion() {
        let r = LobRow {
            time: 0.0,
            bid_ticks: 5_857_100,
            ask_ticks: 5_857_500,
        };
        assert_eq!(r.bid(), 585.71);
        assert_eq!(r.ask(), 585.75);
    }

    #[test]
    fn collapses_repeated_mids() {
        let s = series_from_mids(&[10.0, 10.0, 10.005, 10.0]);
        let pc = mid_price_events(&s, 0.0).unwrap();
        assert_eq!(pc.changes, vec![0.005, -0.005]);
        assert_eq!(pc.times, vec![2.0, 3.0]);
        assert_eq!(pc.s0, 10.0);
    }

    #[test]
    fn constant_mid_gives_empty_series() {
        let s = series_from_mids(&[10.0; 5]);
        assert!(mid_price_events(&s, 0.0).unwrap().is_empty());
    }

    #[test]
    fn duplicate_timestamps_keep_last() {
        let mut s = series_from_mids(&[10.0, 10.01, 10.02, 10.03]);
        s.rows[2].time = 1.0; // rows 1 and 2 share t = 1
        let pc = mid_price_events(&s, 0.0).unwrap();
        assert_eq!(pc.times, vec![1.0, 3.0]);
        assert_relative_eq!(pc.changes[0], 0.02, epsilon = 1e-12);
    }

    #[test]
    fn trimming_everything_is_an_error() {
        let s = series_from_mids(&[10.0, 10.01]);
        assert!(mid_price_events(&s, 900.0).is_err());
    }

    #[test]
    fn fixed_tick_is_sign_based() {
        let (m, s) = build_fixed_tick(&pcs(&[0.01, -0.005]), HALF_TICK).unwrap();
        assert_eq!(s, vec![1, 0]);
        assert_eq!(m.marks.a, vec![-0.005, 0.005]);
    }

    #[test]
    fn two_state_means() {
        let (m, s) = build_two_state_mean(&pcs(&[-0.01, 0.02, 0.04])).unwrap();
        assert_eq!(s, vec![0, 1, 1]);
        assert_relative_eq!(m.marks.a[0], -0.01);
        assert_relative_eq!(m.marks.a[1], 0.03, epsilon = 1e-15);
        assert!(build_two_state_mean(&pcs(&[0.01, 0.02])).is_err());
    }

    #[test]
    fn two_quantiles_on_pure_ticks_is_fixed_tick() {
        let (m, s) = build_quantile_states(&pcs(&[-0.005, 0.005, 0.005, -0.005, 0.005]), 2, QuantileMode::PerSide)
            .unwrap();
        assert_eq!(m.marks.a, vec![-0.005, 0.005]);
        assert_eq!(s, vec![0, 1, 1, 0, 1]);
    }

    #[test]
    fn identical_downward_moves_collapse() {
        let mut ch = vec![-0.01; 50];
        ch.extend((1..=50).map(|k| 0.005 * k as f64));
        let (m, _) = build_quantile_states(&pcs(&ch), 16, QuantileMode::PerSide).unwrap();
        assert_eq!(m.marks.a.iter().filter(|&&a| a < 0.0).count(), 1);
        assert!(m.n() > 5);
    }

    #[test]
    fn quantile_assignment_rules() {
        let ch = [-0.03, -0.02, -0.01, -0.01, 0.01, 0.02, 0.02, 0.05];
        let (m, s) = build_quantile_states(&pcs(&ch), 4, QuantileMode::PerSide).unwrap();
        for w in m.marks.a.windows(2) {
            assert!(w[0] < w[1]);
        }
        // the maximum lands in the last state, the minimum in the first
        assert_eq!(s[0], 0);
        assert_eq!(s[7], m.n() - 1);
        for (&c, &st) in ch.iter().zip(&s) {
            assert_eq!(m.assign(c), st);
        }
    }

    #[test]
    fn quantile_interpolates_between_order_statistics() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 0.5), 2.5);
        assert_eq!(quantile_sorted(&xs, 1.0), 4.0);
    }

    #[test]
    fn liquidity() {
        let mut s = series_from_mids(&vec![10.0; 101]);
        for (i, r) in s.rows.iter_mut().enumerate() {
            r.time = i as f64 * 0.5;
        }
        s.raw_rows = 100;
        let ch = pcs(&[0.005; 7]);
        let l = liquidity_summary(&s, &ch);
        assert_eq!(l.orders_per_second, 2.0);
        assert_eq!(l.daily_price_changes, 7);
        assert_eq!(liquidity_summary(&s, &pcs(&[])).daily_price_changes, 0);
    }

    #[test]
    fn tick_histogram_fractions() {
        assert_eq!(tick_histogram(&[0.005, -0.005, 0.005, -0.005]).fraction_above_half_tick, 0.0);
        let h = tick_histogram(&[0.005, 0.01, 0.015]);
        assert_relative_eq!(h.fraction_above_half_tick, 2.0 / 3.0);
        assert_eq!(h.bins, vec![(1, 1), (2, 1), (3, 1)]);
    }

    #[test]
    fn empty_files_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.csv");
        let b = dir.path().join("b.csv");
        std::fs::write(&m, "").unwrap();
        std::fs::write(&b, "").unwrap();
        assert!(matches!(parse_lob(&m, &b), Err(Error::Empty(_))));
    }

    #[test]
    fn malformed_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.csv");
        let b = dir.path().join("b.csv");
        std::fs::write(&m, "34200.1,1,1,100,5857500,1\n34200.2,1,2,x,5857500,1\n").unwrap();
        std::fs::write(&b, "5857500,100,5857100,100\n5857500,100,5857100,100\n").unwrap();
        match parse_lob(&m, &b) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn crossed_rows_are_counted() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("m.csv");
        let b = dir.path().join("b.csv");
        std::fs::write(&m, "1.0,1,1,100,100,1\n2.0,1,2,100,100,1\n").unwrap();
        std::fs::write(&b, "5857500,100,5857100,100\n5857000,100,5857100,100\n").unwrap();
        let s = parse_lob(&m, &b).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert_eq!(s.rejected_crossed, 1);
    }
}
