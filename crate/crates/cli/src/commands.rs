use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use hawkes_lob::analysis::{evaluate_variant, fit_arrivals, Variant};
use hawkes_lob::compound::CompoundModel;
use hawkes_lob::diffusion::LimitParams;
use hawkes_lob::empirical::{
    clustering_counts, default_windows, qq_poisson_data, sqrt_transform, verify_fclt_with, verify_lln, write_curves_csv,
    BestFit, FcltReport, LlnReport,
};
use hawkes_lob::fixture::{generate, Preset};
use hawkes_lob::hawkes::{EventSequence, ExcitationKernel, HawkesSpec, NonlinearLink};
use hawkes_lob::lob::{
    liquidity_summary, mid_price_events, parse_lob, tick_histogram, write_records, QuantileMode, StateModelFile,
};
use hawkes_lob::markov::{MarkModel, MarkTable, TransitionMatrix};
use hawkes_lob::mle::{empirical_unit_arrivals, fit_mle, FitConfig, FitResult};
use hawkes_lob::par::Exec;

use crate::{AnalyzeArgs, Failure, FitArgs, FixtureArgs, LinkArg, ModelArgs, SimulateArgs, VariantArg, VerifyArgs};

type Outcome = std::result::Result<(), Failure>;

fn build_model(m: &ModelArgs) -> anyhow::Result<CompoundModel> {
    let link = match m.link {
        LinkArg::Identity => NonlinearLink::Identity,
        LinkArg::Indicator => NonlinearLink::Indicator,
        LinkArg::Capped => NonlinearLink::Capped { ceiling: m.ceiling },
    };
    let spec = HawkesSpec::new(m.lambda, ExcitationKernel::exponential(m.alpha, m.beta)?, link)?;
    spec.require_subcritical()?;
    for w in spec.warnings() {
        log::warn!("{w}");
    }
    let (chain, marks) = match &m.model {
        Some(path) => MarkModel::read_json(path)?.parts()?,
        None => (
            TransitionMatrix::two_state(m.p[0], m.p[1])?,
            MarkTable::new(vec![-m.delta, m.delta])?,
        ),
    };
    Ok(CompoundModel::new(spec, chain, marks)?)
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn create_out(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_rows<T>(path: &Path, header: &str, rows: &[T], fmt: impl Fn(&T) -> String) -> anyhow::Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{}", fmt(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn simulate(a: &SimulateArgs, seed: u64) -> Outcome {
    let model = build_model(&a.model)?;
    create_out(&a.out)?;
    let path = model.simulate_indexed(a.horizon, seed, 0)?;
    path.events.write_csv(a.out.join("events.csv"), Some(&path.increments))?;
    let prices = path.price_path(a.s0);
    write_rows(&a.out.join("path.csv"), "time,price", &prices, |(t, s)| format!("{t:.16e},{s:.16e}"))?;
    println!(
        "{} events on [0, {}]; {:.4} per unit time",
        path.events.len(),
        a.horizon,
        path.events.len() as f64 / a.horizon
    );
    Ok(())
}

#[derive(Serialize)]
struct FitReport<'a> {
    #[serde(flatten)]
    fit: &'a FitResult,
    events: usize,
    horizon: f64,
    /// Observed events per unit time.
    empirical_unit_arrivals: f64,
}

pub fn fit(a: &FitArgs, seed: u64) -> Outcome {
    let (events, _) = EventSequence::read_csv(&a.events, a.horizon)
        .with_context(|| format!("reading {}", a.events.display()))?;
    let config = FitConfig {
        budget: a.budget,
        restarts: a.restarts,
        seed,
        ..Default::default()
    };
    let fit = fit_mle(&events, &config)?;
    let empirical = empirical_unit_arrivals(&events)?;
    create_out(&a.out)?;
    write_json(
        &a.out,
        "fit.json",
        &FitReport {
            fit: &fit,
            events: events.len(),
            horizon: events.horizon(),
            empirical_unit_arrivals: empirical,
        },
    )?;
    println!("{:>10} {:>12} {:>12} {:>8}", "lambda", "alpha", "beta", "mu_hat");
    println!("{:>10.4} {:>12.4} {:>12.4} {:>8.4}", fit.lambda, fit.alpha, fit.beta, fit.mu_hat);
    match fit.expected_unit_arrivals {
        Some(e) => println!("E[N[0,1]]: model {e:.4}, empirical {empirical:.4}"),
        None => println!("E[N[0,1]]: supercritical fit, empirical {empirical:.4}"),
    }
    if !fit.converged {
        println!("optimizer did not converge within {} evaluations", fit.evaluations);
    }
    Ok(())
}

#[derive(Serialize)]
struct LimitReport<'a> {
    variant: &'a Variant,
    #[serde(flatten)]
    limit: &'a LimitParams,
    diffusion_coefficient: f64,
    fit: &'a FitResult,
}

#[derive(Serialize)]
struct MseReport<'a> {
    variant: &'a Variant,
    mse: f64,
}

#[derive(Serialize)]
struct BestFitReport<'a> {
    variant: &'a Variant,
    #[serde(flatten)]
    best_fit: &'a BestFit,
}

pub fn analyze(a: &AnalyzeArgs, seed: u64) -> Outcome {
    for f in [&a.message, &a.orderbook] {
        if !f.exists() {
            return Err(anyhow::anyhow!("{}: no such file", f.display()).into());
        }
    }
    let series = parse_lob(&a.message, &a.orderbook)?;
    let changes = mid_price_events(&series, a.trim)?;
    let windows = a.windows.clone().unwrap_or_else(default_windows);
    let variant = match a.variant {
        VariantArg::Chpdo => Variant::Chpdo { delta: a.delta },
        VariantArg::TwoState => Variant::TwoState,
        VariantArg::Quantile => Variant::Quantile {
            q: a.q,
            mode: if a.quantiles_total {
                QuantileMode::Total
            } else {
                QuantileMode::PerSide
            },
        },
    };
    let fit = fit_arrivals(
        &changes,
        &FitConfig {
            budget: a.budget,
            seed,
            ..Default::default()
        },
    )
    .context("fitting arrivals")?;
    let report = evaluate_variant(&changes, &fit, variant, &windows).context("evaluating state model")?;
    let events = changes.events()?;

    create_out(&a.out)?;
    write_json(&a.out, "liquidity.json", &liquidity_summary(&series, &changes))?;
    write_json(
        &a.out,
        "states.json",
        &StateModelFile::new(&report.model, &report.chain, &report.limit.pi, &report.states),
    )?;
    write_json(
        &a.out,
        "limit_params.json",
        &LimitReport {
            variant: &variant,
            limit: &report.limit,
            diffusion_coefficient: report.coefficient,
            fit: &fit,
        },
    )?;
    let sqrt_emp = sqrt_transform(&report.empirical);
    let sqrt_theo = sqrt_transform(&report.theoretical);
    write_curves_csv(
        a.out.join("curves.csv"),
        &[
            (&report.empirical, None),
            (&report.theoretical, None),
            (&sqrt_emp, Some("empirical")),
            (&sqrt_theo, Some("theoretical")),
        ],
    )?;
    write_json(&a.out, "mse.json", &MseReport { variant: &variant, mse: report.mse })?;
    write_json(
        &a.out,
        "bestfit.json",
        &BestFitReport {
            variant: &variant,
            best_fit: &report.best_fit,
        },
    )?;
    let qq = qq_poisson_data(&events)?;
    write_rows(&a.out.join("qq.csv"), "empirical,exponential", &qq, |(e, t)| format!("{e},{t}"))?;
    let counts = clustering_counts(&events, a.cluster_window, 1.0);
    write_rows(&a.out.join("clustering.csv"), "time,count", &counts, |(t, c)| format!("{t},{c}"))?;
    let hist = tick_histogram(&changes.changes);
    write_rows(&a.out.join("tick_hist.csv"), "half_ticks,count", &hist.bins, |(k, c)| format!("{k},{c}"))?;

    println!(
        "{} price changes, {} states, coefficient {:.6}, best fit {:.6} ({:.2}% error), mse {:.3e}",
        changes.len(),
        report.model.n(),
        report.coefficient,
        report.best_fit.coefficient,
        report.best_fit.percent_error,
        report.mse
    );
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    lln: LlnReport,
    fclt: FcltReport,
    a_star_override: Option<f64>,
    z_max: f64,
    pass: bool,
}

pub fn verify(a: &VerifyArgs, seed: u64) -> Outcome {
    let model = build_model(&a.model)?;
    let lln = verify_lln(&model, a.n, a.t, a.paths, seed, Exec::Auto)?;
    let fclt = verify_fclt_with(&model, a.n, a.t, a.paths, seed, Exec::Auto, a.a_star_override)?;
    let pass = lln.z.abs() <= a.z_max && fclt.z.abs() <= a.z_max;
    println!(
        "lln: sample {:.6e} predicted {:.6e} z {:.2}",
        lln.sample, lln.predicted, lln.z
    );
    println!(
        "fclt: sample {:.6e} predicted {:.6e} z {:.2} ks {:.4}",
        fclt.sample, fclt.predicted, fclt.z, fclt.ks_statistic
    );
    let (zl, zf) = (lln.z, fclt.z);
    create_out(&a.out)?;
    write_json(
        &a.out,
        "verify.json",
        &VerifyReport {
            lln,
            fclt,
            a_star_override: a.a_star_override,
            z_max: a.z_max,
            pass,
        },
    )?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification(format!("|z| above {} (lln {zl:.2}, fclt {zf:.2})", a.z_max)))
    }
}

pub fn fixture(a: &FixtureArgs, seed: u64) -> Outcome {
    let Some(preset) = Preset::parse(&a.preset) else {
        let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
        return Err(anyhow::anyhow!("unknown preset {:?}; expected one of {}", a.preset, names.join(", ")).into());
    };
    let mut cfg = preset.config(seed)?;
    if a.no_filler {
        cfg.orders_per_second = None;
    }
    let records = generate(&cfg)?;
    create_out(&a.out)?;
    let message = a.out.join(format!("{}_message.csv", preset.name()));
    let orderbook = a.out.join(format!("{}_orderbook.csv", preset.name()));
    write_records(&records, &message, &orderbook)?;
    println!("{} rows: {} {}", records.len(), message.display(), orderbook.display());
    Ok(())
}
