use hawkes_lob::compound::CompoundModel;
use hawkes_lob::empirical::{clustering_counts, qq_poisson_data, window_residuals_raw};
use hawkes_lob::fixture::{generate, Preset};
use hawkes_lob::hawkes::{simulate, HawkesSpec};
use hawkes_lob::lob::{mid_price_events, parse_lob, read_records, write_records, LobSeries};
use hawkes_lob::markov::{MarkTable, TransitionMatrix};
use hawkes_lob::stats::{poisson_dispersion_test, sample_std};

const MESSAGE: &str = "\
34200.0,1,1,100,1000100,1
34200.5,1,2,100,1000400,-1
34201.0,4,1,100,1000100,1
34201.0,1,3,50,1000200,1
34202.25,3,3,50,1000200,1
34203.0,1,4,10,1000500,-1
34204.0,4,2,100,1000400,-1
34205.0,1,5,20,1000300,1
34206.0,2,5,10,1000300,1
34207.5,1,6,30,1000600,-1
";

const ORDERBOOK: &str = "\
1000400,200,1000100,100
1000400,100,1000100,300
1000400,100,1000000,200
1000400,100,1000200,50
1000400,100,1000100,200
1000400,110,1000100,200
1000500,10,1000100,200
1000500,10,1000300,20
1000500,10,1000300,10
1000500,10,1000300,10
";

#[test]
fn ten_row_book_round_trips_and_yields_known_moves() {
    let dir = tempfile::tempdir().unwrap();
    let (m, b) = (dir.path().join("m.csv"), dir.path().join("b.csv"));
    std::fs::write(&m, MESSAGE).unwrap();
    std::fs::write(&b, ORDERBOOK).unwrap();
    let recs = read_records(&m, &b).unwrap();
    assert_eq!(recs.len(), 10);

    let (m2, b2) = (dir.path().join("m2.csv"), dir.path().join("b2.csv"));
    write_records(&recs, &m2, &b2).unwrap();
    assert_eq!(read_records(&m2, &b2).unwrap(), recs);

    // Mids: 100.025 100.025, then 100.03 at 34201.0 (last row of the
    // timestamp wins), 100.025 100.025 100.03 100.04 100.04 100.04.
    let ch = mid_price_events(&parse_lob(&m, &b).unwrap(), 0.0).unwrap();
    assert_eq!(ch.times, vec![34201.0, 34202.25, 34204.0, 34205.0]);
    assert_eq!(ch.changes, vec![0.005, -0.005, 0.005, 0.01]);
    assert_eq!(ch.s0, 100.025);
}

#[test]
fn fixture_survives_the_file_round_trip() {
    let cfg = Preset::Intc.config(4).unwrap();
    let recs = generate(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (m, b) = (dir.path().join("m.csv"), dir.path().join("b.csv"));
    write_records(&recs, &m, &b).unwrap();
    let from_file = mid_price_events(&parse_lob(&m, &b).unwrap(), 900.0).unwrap();
    let in_memory = mid_price_events(&LobSeries::from_records(&recs), 900.0).unwrap();
    assert_eq!(from_file, in_memory);
    assert!(from_file.changes.iter().all(|c| c.abs() == 0.005));
}

#[test]
fn window_residual_spread_matches_the_diffusion_coefficient() {
    let model = CompoundModel::new(
        HawkesSpec::exponential(1.0, 1.0, 2.0).unwrap(),
        TransitionMatrix::two_state(0.6, 0.55).unwrap(),
        MarkTable::new(vec![-0.005, 0.005]).unwrap(),
    )
    .unwrap();
    let coef = model.diffusion_coefficient(0).unwrap();
    let a_star = model.limit_params().unwrap().a_star;
    let n = 60.0;
    let mut values = Vec::new();
    for seed in 0..20 {
        let p = model.simulate_indexed(6000.0, seed, 0).unwrap();
        let r = window_residuals_raw(p.events.times(), &p.increments, 0.0, 6000.0, a_star, n).unwrap();
        values.extend(r.values);
    }
    let ratio = sample_std(&values) / (coef * n.sqrt());
    assert!((ratio - 1.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn hawkes_counts_are_overdispersed_and_poisson_counts_are_not() {
    let hawkes = simulate(&HawkesSpec::exponential(0.5, 1.5, 2.0).unwrap(), 5000.0, 1).unwrap();
    let counts: Vec<u64> = clustering_counts(&hawkes, 1.0, 1.0).into_iter().map(|(_, c)| c).collect();
    let (d, rejects) = poisson_dispersion_test(&counts, 0.01);
    assert!(rejects && d > counts.len() as f64, "dispersion {d}");

    let poisson = simulate(&HawkesSpec::poisson(2.0).unwrap(), 5000.0, 1).unwrap();
    let counts: Vec<u64> = clustering_counts(&poisson, 1.0, 1.0).into_iter().map(|(_, c)| c).collect();
    assert!(!poisson_dispersion_test(&counts, 0.01).1);
}

#[test]
fn qq_of_poisson_gaps_lies_near_the_diagonal() {
    let ev = simulate(&HawkesSpec::poisson(3.0).unwrap(), 3000.0, 5).unwrap();
    let qq = qq_poisson_data(&ev).unwrap();
    let mid = &qq[qq.len() / 10..qq.len() * 9 / 10];
    let worst = mid.iter().map(|(e, t)| (e - t).abs() / t).fold(0.0, f64::max);
    assert!(worst < 0.1, "{worst}");
}
