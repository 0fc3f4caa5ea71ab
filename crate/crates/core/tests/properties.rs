use proptest::prelude::*;

use hawkes_lob::empirical::{best_fit_coefficient, empirical_std_curve, theoretical_std_curve};
use hawkes_lob::lob::{build_quantile_states, mid_price_events, LobRow, LobSeries, PriceChangeSeries, QuantileMode};
use hawkes_lob::markov::{estimate_transitions, stationary_distribution};

fn series(moves: &[(f64, i64)]) -> PriceChangeSeries {
    let mut t = 0.0;
    let mut times = Vec::new();
    let mut changes = Vec::new();
    for &(gap, k) in moves {
        t += gap;
        times.push(t);
        changes.push(k as f64 * 0.005);
    }
    PriceChangeSeries {
        times,
        changes,
        s0: 50.0,
        start: 0.0,
        end: t + 1.0,
    }
}

fn moves() -> impl Strategy<Value = Vec<(f64, i64)>> {
    prop::collection::vec((0.01f64..5.0, prop_oneof![-20i64..=-1, 1i64..=20]), 40..400)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantile_states_partition_and_preserve_the_mean(m in moves(), q in 1usize..24) {
        let ch = series(&m);
        prop_assume!(ch.changes.iter().any(|&c| c > 0.0) && ch.changes.iter().any(|&c| c < 0.0));
        for mode in [QuantileMode::PerSide, QuantileMode::Total] {
            let (model, states) = build_quantile_states(&ch, q.max(2), mode).unwrap();
            prop_assert_eq!(states.len(), ch.len());
            let mut sum = vec![0.0; model.n()];
            let mut count = vec![0usize; model.n()];
            for (&s, &c) in states.iter().zip(&ch.changes) {
                prop_assert_eq!(model.assign(c), s);
                sum[s] += c;
                count[s] += 1;
            }
            for i in 0..model.n() {
                prop_assert!(count[i] > 0);
                prop_assert!((sum[i] / count[i] as f64 - model.marks.a[i]).abs() < 1e-12);
            }
            prop_assert!(model.marks.a.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn estimated_chain_is_stochastic(m in moves()) {
        let ch = series(&m);
        prop_assume!(ch.changes.iter().any(|&c| c > 0.0) && ch.changes.iter().any(|&c| c < 0.0));
        let (model, states) = build_quantile_states(&ch, 4, QuantileMode::PerSide).unwrap();
        if let Ok(p) = estimate_transitions(&states, model.n()) {
            for row in p.rows() {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            if let Ok(pi) = stationary_distribution(&p) {
                prop_assert!((pi.pi.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn curves_and_fit_scale_linearly(m in moves(), c in 0.1f64..10.0) {
        let ch = series(&m);
        let grid = [10.0, 20.0, 40.0];
        prop_assume!(ch.end >= 2.0 * 40.0);
        let base = empirical_std_curve(&ch, &ch.changes, 0.0, &grid).unwrap();
        let sc = ch.scaled(c);
        let scaled = empirical_std_curve(&sc, &sc.changes, 0.0, &grid).unwrap();
        for (a, b) in base.std.iter().zip(&scaled.std) {
            prop_assert!((a * c - b).abs() <= 1e-9 * b.abs().max(1e-12));
        }
        if let (Ok(f0), Ok(f1)) = (best_fit_coefficient(&base, 1.0), best_fit_coefficient(&scaled, c)) {
            prop_assert!((f0.coefficient * c - f1.coefficient).abs() <= 1e-9 * f1.coefficient);
            prop_assert!((f0.percent_error - f1.percent_error).abs() <= 1e-6);
        }
    }

    #[test]
    fn curves_ignore_a_time_shift(m in moves(), dt in 0.0f64..1e4) {
        let ch = series(&m);
        let grid = [10.0, 30.0];
        prop_assume!(ch.end >= 60.0);
        let shifted = PriceChangeSeries {
            times: ch.times.iter().map(|t| t + dt).collect(),
            start: ch.start + dt,
            end: ch.end + dt,
            ..ch.clone()
        };
        // Shifted times are rounded, so events within an ulp of a window
        // edge may switch windows; compare only when no event is that close.
        let near_edge = ch.times.iter().any(|t| grid.iter().any(|n| {
            let r = t / n;
            (r - r.round()).abs() < 1e-9
        }));
        prop_assume!(!near_edge);
        let a = empirical_std_curve(&ch, &ch.changes, 0.001, &grid).unwrap();
        let b = empirical_std_curve(&shifted, &shifted.changes, 0.001, &grid).unwrap();
        for (x, y) in a.std.iter().zip(&b.std) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn theoretical_curve_is_its_own_best_fit(c in 1e-5f64..1.0) {
        let grid: Vec<f64> = (1..=120).map(|k| 10.0 * k as f64).collect();
        let f = best_fit_coefficient(&theoretical_std_curve(c, &grid).unwrap(), c).unwrap();
        prop_assert!(f.percent_error < 1e-10);
    }

    #[test]
    fn mid_price_events_are_idempotent(
        quotes in prop::collection::vec((0.0f64..3.0, -3i64..=3, 1i64..=2), 5..200)
    ) {
        let mut t = 0.0;
        let mut bid = 1_000_000i64;
        let mut rows = Vec::new();
        for (gap, step, spread) in quotes {
            t += gap;
            bid += step * 100;
            rows.push(LobRow { time: t, bid_ticks: bid, ask_ticks: bid + spread * 100 });
        }
        let s = LobSeries { raw_rows: rows.len(), rows, rejected_crossed: 0, rejected_empty: 0 };
        let Ok(once) = mid_price_events(&s, 0.0) else { return Ok(()) };
        // Rebuild a book from the emitted changes and extract again.
        let mut mid2 = (once.s0 * 20_000.0).round() as i64;
        let mut rebuilt = vec![LobRow { time: once.start, bid_ticks: mid2 / 2, ask_ticks: mid2 - mid2 / 2 }];
        for (&tt, &c) in once.times.iter().zip(&once.changes) {
            mid2 += (c * 20_000.0).round() as i64;
            rebuilt.push(LobRow { time: tt, bid_ticks: mid2 / 2, ask_ticks: mid2 - mid2 / 2 });
        }
        let end = once.end;
        if rebuilt.last().map(|r| r.time) != Some(end) {
            let last = *rebuilt.last().unwrap();
            rebuilt.push(LobRow { time: end, ..last });
        }
        let s2 = LobSeries { raw_rows: rebuilt.len(), rows: rebuilt, rejected_crossed: 0, rejected_empty: 0 };
        let twice = mid_price_events(&s2, 0.0).unwrap();
        prop_assert_eq!(&once.times, &twice.times);
        prop_assert_eq!(&once.changes, &twice.changes);
    }
}
