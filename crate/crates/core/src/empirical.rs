//! Windowed residual curves, goodness-of-fit summaries and Monte Carlo
//! checks of the limit theorems.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::compound::CompoundModel;
use crate::hawkes::EventSequence;
use crate::lob::PriceChangeSeries;
use crate::par::{self, Exec};
use crate::stats;
use crate::{Error, Result};

/// Window grid `10, 20, …, 1200` seconds.
pub fn default_windows() -> Vec<f64> {
    (1..=120).map(|k| 10.0 * k as f64).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    Empirical,
    Theoretical,
    SqrtTransformed,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Empirical => "empirical",
            CurveKind::Theoretical => "theoretical",
            CurveKind::SqrtTransformed => "sqrt-transformed",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "empirical" => Some(CurveKind::Empirical),
            "theoretical" => Some(CurveKind::Theoretical),
            "sqrt-transformed" => Some(CurveKind::SqrtTransformed),
            _ => None,
        }
    }
}

/// Standard deviation as a function of window length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StdCurve {
    pub windows: Vec<f64>,
    pub std: Vec<f64>,
    pub kind: CurveKind,
}

impl StdCurve {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

/// Writes curves as `window_seconds,std,kind` rows. `label` is appended to
/// the kind when given, e.g. `theoretical:quantile-16`.
pub fn write_curves_csv(path: impl AsRef<Path>, curves: &[(&StdCurve, Option<&str>)]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "window_seconds,std,kind").map_err(io)?;
    for (c, label) in curves {
        let kind = match label {
            Some(l) => format!("{}:{l}", c.kind.as_str()),
            None => c.kind.as_str().to_string(),
        };
        for (n, s) in c.windows.iter().zip(&c.std) {
            writeln!(w, "{n},{s:e},{kind}").map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Reads curves written by [`write_curves_csv`], grouped by the kind column.
pub fn read_curves_csv(path: impl AsRef<Path>) -> Result<Vec<(StdCurve, Option<String>)>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut out: Vec<(StdCurve, Option<String>)> = Vec::new();
    let mut current: Option<String> = None;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |msg: String| Error::Parse {
            path: path.display().to_string(),
            line: i + 2,
            msg,
        };
        let n: f64 = rec[0].parse().map_err(|e| bad(format!("window: {e}")))?;
        let s: f64 = rec[1].parse().map_err(|e| bad(format!("std: {e}")))?;
        let tag = rec[2].to_string();
        if current.as_deref() != Some(tag.as_str()) {
            let (kind, label) = match tag.split_once(':') {
                Some((k, l)) => (k, Some(l.to_string())),
                None => (tag.as_str(), None),
            };
            let kind = CurveKind::parse(kind).ok_or_else(|| bad(format!("unknown kind {kind:?}")))?;
            out.push((
                StdCurve {
                    windows: Vec::new(),
                    std: Vec::new(),
                    kind,
                },
                label,
            ));
            current = Some(tag);
        }
        let c = &mut out.last_mut().expect("pushed above").0;
        c.windows.push(n);
        c.std.push(s);
    }
    Ok(out)
}

/// `S*ᵢ` over disjoint windows of length `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowResiduals {
    pub n: f64,
    pub values: Vec<f64>,
}

/// `S*ᵢ = (S_{(i+1)n} − S_{in}) − (N((i+1)n) − N(in)) a*` over complete
/// windows `[start + in, start + (i+1)n)`. Events are `(time, mark)` pairs
/// sorted by time.
pub fn window_residuals_raw(
    times: &[f64],
    marks: &[f64],
    start: f64,
    end: f64,
    a_star: f64,
    n: f64,
) -> Result<WindowResiduals> {
    if !(n > 0.0) {
        return Err(Error::InvalidParameter(format!("window {n} must be > 0")));
    }
    if times.len() != marks.len() {
        return Err(Error::InvalidParameter(format!(
            "{} times but {} marks",
            times.len(),
            marks.len()
        )));
    }
    let windows = ((end - start) / n).floor();
    if !(windows >= 2.0) {
        return Err(Error::TooFewWindows(format!("{windows} complete windows of {n} s")));
    }
    let windows = windows as usize;
    let mut disp = vec![0.0; windows];
    let mut count = vec![0usize; windows];
    for (&t, &a) in times.iter().zip(marks) {
        let k = ((t - start) / n).floor();
        if k >= 0.0 && (k as usize) < windows {
            disp[k as usize] += a;
            count[k as usize] += 1;
        }
    }
    Ok(WindowResiduals {
        n,
        values: disp
            .iter()
            .zip(&count)
            .map(|(d, &c)| d - c as f64 * a_star)
            .collect(),
    })
}

pub fn window_residuals(
    changes: &PriceChangeSeries,
    marks: &[f64],
    a_star: f64,
    n: f64,
) -> Result<WindowResiduals> {
    window_residuals_raw(&changes.times, marks, changes.start, changes.end, a_star, n)
}

/// Sample standard deviation of `S*ᵢ` at each window length.
pub fn empirical_std_curve(
    changes: &PriceChangeSeries,
    marks: &[f64],
    a_star: f64,
    windows: &[f64],
) -> Result<StdCurve> {
    let std = windows
        .iter()
        .map(|&n| window_residuals(changes, marks, a_star, n).map(|r| stats::sample_std(&r.values)))
        .collect::<Result<Vec<_>>>()?;
    Ok(StdCurve {
        windows: windows.to_vec(),
        std,
        kind: CurveKind::Empirical,
    })
}

/// `coefficient · √n`.
pub fn theoretical_std_curve(coefficient: f64, windows: &[f64]) -> Result<StdCurve> {
    if !(coefficient >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "coefficient {coefficient} must be >= 0"
        )));
    }
    Ok(StdCurve {
        windows: windows.to_vec(),
        std: windows.iter().map(|n| coefficient * n.sqrt()).collect(),
        kind: CurveKind::Theoretical,
    })
}

pub fn sqrt_transform(curve: &StdCurve) -> StdCurve {
    StdCurve {
        windows: curve.windows.clone(),
        std: curve.std.iter().map(|s| s.sqrt()).collect(),
        kind: CurveKind::SqrtTransformed,
    }
}

/// Mean over the grid of the squared pointwise difference. Callers pass
/// sqrt-transformed curves for the variance-stabilised comparison.
pub fn mean_squared_residual(a: &StdCurve, b: &StdCurve) -> Result<f64> {
    if a.windows != b.windows || a.is_empty() {
        return Err(Error::GridMismatch(format!("{} vs {} points", a.len(), b.len())));
    }
    let sum: f64 = a.std.iter().zip(&b.std).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

/// [`mean_squared_residual`] after applying [`sqrt_transform`] to both.
pub fn transformed_mse(empirical: &StdCurve, theoretical: &StdCurve) -> Result<f64> {
    mean_squared_residual(&sqrt_transform(empirical), &sqrt_transform(theoretical))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestFit {
    pub coefficient: f64,
    pub theoretical: f64,
    pub percent_error: f64,
}

/// Least squares of `std` on `√n` through the origin:
/// `c* = Σ stdᵢ √nᵢ / Σ nᵢ`, compared against `theoretical`.
pub fn best_fit_coefficient(empirical: &StdCurve, theoretical: f64) -> Result<BestFit> {
    if empirical.len() < 2 {
        return Err(Error::InvalidParameter("need at least two curve points".into()));
    }
    let num: f64 = empirical.windows.iter().zip(&empirical.std).map(|(n, s)| s * n.sqrt()).sum();
    let den: f64 = empirical.windows.iter().sum();
    let c = num / den;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("degenerate curve, coefficient {c}")));
    }
    Ok(BestFit {
        coefficient: c,
        theoretical,
        percent_error: (theoretical - c).abs() / c * 100.0,
    })
}

/// Sorted inter-arrival times against Exp(1/mean) quantiles at levels
/// `(i + ½) / m`.
pub fn qq_poisson_data(events: &EventSequence) -> Result<Vec<(f64, f64)>> {
    if events.len() < 10 {
        return Err(Error::InvalidParameter(format!(
            "{} events; at least 10 required",
            events.len()
        )));
    }
    let mut gaps: Vec<f64> = events.times().windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    let m = gaps.len() as f64;
    let mean = stats::mean(&gaps);
    Ok(gaps
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let p = (i as f64 + 0.5) / m;
            (g, -mean * (-p).ln_1p())
        })
        .collect())
}

/// Number of events in `[t, t + window)` on the grid `t = 0, step, 2·step, …`
/// with `t + window ≤ horizon`.
pub fn clustering_counts(events: &EventSequence, window: f64, step: f64) -> Vec<(f64, u64)> {
    if events.is_empty() || !(window > 0.0 && step > 0.0) {
        return Vec::new();
    }
    let times = events.times();
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 * step;
        if t + window > events.horizon() {
            break;
        }
        let lo = times.partition_point(|&s| s < t);
        let hi = times.partition_point(|&s| s < t + window);
        out.push((t, (hi - lo) as u64));
        k += 1;
    }
    out
}

/// Outcome of an ensemble check of the diffusion limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FcltReport {
    /// Sample std of `(S_{nt} − S_0 − N(nt) â*) / √n`.
    pub sample: f64,
    /// `coefficient · √t`.
    pub predicted: f64,
    pub z: f64,
    pub paths: usize,
    pub seed: u64,
    pub standard_error: f64,
    pub ks_statistic: f64,
    pub ks_rejects: bool,
}

/// Outcome of an ensemble check of the law of large numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlnReport {
    /// Ensemble mean of `(S_{nt} − S_0) / n`.
    pub sample: f64,
    /// `â* E[N[0,1]] t`.
    pub predicted: f64,
    pub z: f64,
    pub paths: usize,
    pub seed: u64,
    pub standard_error: f64,
    pub unit_arrivals: f64,
}

fn check_ensemble(n: f64, t: f64, paths: usize) -> Result<()> {
    if !(n > 0.0 && t > 0.0) {
        return Err(Error::InvalidParameter(format!("n = {n} and t = {t} must be > 0")));
    }
    if paths < 2 {
        return Err(Error::InvalidParameter("need at least two paths".into()));
    }
    Ok(())
}

fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff.abs() < 1e-12 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    }
}

/// Per-path `(S_{nt} − S_0, N(nt))`.
fn ensemble(model: &CompoundModel, horizon: f64, paths: usize, seed: u64, exec: Exec) -> Result<Vec<(f64, usize)>> {
    par::map_indexed(paths, exec, |i| {
        let p = model.simulate_indexed(horizon, seed, i as u64)?;
        Ok((p.increments.iter().sum(), p.events.len()))
    })
    .into_iter()
    .collect()
}

pub fn verify_fclt(
    model: &CompoundModel,
    n: f64,
    t: f64,
    paths: usize,
    seed: u64,
    exec: Exec,
) -> Result<FcltReport> {
    verify_fclt_with(model, n, t, paths, seed, exec, None)
}

/// As [`verify_fclt`]; `a_star` overrides the centring constant.
pub fn verify_fclt_with(
    model: &CompoundModel,
    n: f64,
    t: f64,
    paths: usize,
    seed: u64,
    exec: Exec,
    a_star: Option<f64>,
) -> Result<FcltReport> {
    check_ensemble(n, t, paths)?;
    let lp = model.limit_params()?;
    let a_star = a_star.unwrap_or(lp.a_star);
    let predicted = model.diffusion_coefficient(seed)? * t.sqrt();
    let stat: Vec<f64> = ensemble(model, n * t, paths, seed, exec)?
        .into_iter()
        .map(|(s, k)| (s - k as f64 * a_star) / n.sqrt())
        .collect();
    // The limit is centred, so the spread is measured about zero.
    let sample = (stat.iter().map(|x| x * x).sum::<f64>() / paths as f64).sqrt();
    let se = predicted / (2.0 * paths as f64).sqrt();
    let (ks_statistic, ks_rejects) = if predicted > 0.0 {
        let scaled: Vec<f64> = stat.iter().map(|x| x / predicted).collect();
        stats::ks_std_normal(&scaled, 0.01)
    } else {
        (0.0, false)
    };
    Ok(FcltReport {
        sample,
        predicted,
        z: z_score(sample - predicted, se),
        paths,
        seed,
        standard_error: se,
        ks_statistic,
        ks_rejects,
    })
}

pub fn verify_lln(
    model: &CompoundModel,
    n: f64,
    t: f64,
    paths: usize,
    seed: u64,
    exec: Exec,
) -> Result<LlnReport> {
    check_ensemble(n, t, paths)?;
    let a_star = model.limit_params()?.a_star;
    let (unit, unit_se) = model.unit_arrivals(seed)?;
    let predicted = a_star * unit * t;
    let xs: Vec<f64> = ensemble(model, n * t, paths, seed, exec)?
        .into_iter()
        .map(|(s, _)| s / n)
        .collect();
    let sample = stats::mean(&xs);
    let sample_se = stats::sample_std(&xs) / (paths as f64).sqrt();
    let model_se = (a_star * t * unit_se).abs();
    let se = sample_se.hypot(model_se);
    Ok(LlnReport {
        sample,
        predicted,
        z: z_score(sample - predicted, se),
        paths,
        seed,
        standard_error: se,
        unit_arrivals: unit,
    })
}
