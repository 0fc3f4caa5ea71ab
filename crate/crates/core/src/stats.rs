//! Small statistical helpers shared by the diagnostics and the Monte Carlo
//! verifiers.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the (count - 1) denominator.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Two-sided one-sample Kolmogorov-Smirnov statistic against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Critical value of the KS statistic at level `alpha` (Stephens'
/// finite-sample correction of the Kolmogorov limit).
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    let rn = (n as f64).sqrt();
    c / (rn + 0.12 + 0.11 / rn)
}

pub fn exp1_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x).exp_m1()
    }
}

pub fn std_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// KS test of `samples` against Exp(1). Returns `(statistic, rejects)`.
pub fn ks_exp1(samples: &[f64], alpha: f64) -> (f64, bool) {
    let d = ks_statistic(samples, exp1_cdf);
    (d, d > ks_critical(samples.len(), alpha))
}

/// KS test of `samples` against N(0, 1). Returns `(statistic, rejects)`.
pub fn ks_std_normal(samples: &[f64], alpha: f64) -> (f64, bool) {
    let normal = Normal::standard();
    let d = ks_statistic(samples, |x| normal.cdf(x));
    (d, d > ks_critical(samples.len(), alpha))
}

/// Index of dispersion test for Poisson counts: `sum (x - mean)^2 / mean`
/// is chi-square with `m - 1` degrees of freedom. Returns
/// `(statistic, rejects)` for a two-sided test at level `alpha`.
pub fn poisson_dispersion_test(counts: &[u64], alpha: f64) -> (f64, bool) {
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let m = mean(&xs);
    let d = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / m;
    let chi = ChiSquared::new((xs.len() - 1) as f64).expect("dof > 0");
    let lo = chi.inverse_cdf(alpha / 2.0);
    let hi = chi.inverse_cdf(1.0 - alpha / 2.0);
    (d, d < lo || d > hi)
}

/// Asymptotic variance rate `lim Var(sum_{k<=m} x_k) / m` of a stationary
/// series, estimated by overlapping batch means with batch length `batch`.
pub fn batch_means_variance_rate(xs: &[f64], batch: usize) -> f64 {
    let n = xs.len();
    assert!(batch >= 1 && n > batch, "series shorter than one batch");
    let m = mean(xs);
    let mut window: f64 = xs[..batch].iter().map(|x| x - m).sum();
    let mut acc = window * window;
    for k in batch..n {
        window += (xs[k] - m) - (xs[k - batch] - m);
        acc += window * window;
    }
    let batches = (n - batch + 1) as f64;
    let b = batch as f64;
    // Standard OBM scaling with the small-sample bias correction.
    acc / batches / b * (n as f64) / (n as f64 - b)
}
