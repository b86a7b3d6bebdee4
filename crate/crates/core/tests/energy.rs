use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ehscn_core::deployment::HarvestSpec;
use ehscn_core::energy::{
    complementarity, load_trace, normalize_peak, parse_timestamp, resample_average, ColumnSpec, HarvesterModel,
    LoadedTrace,
};
use ehscn_core::rng::stream;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn load(name: &str) -> LoadedTrace {
    let spec = ColumnSpec { has_header: true, ..Default::default() };
    load_trace(BufReader::new(File::open(fixture(name)).unwrap()), &spec).unwrap()
}

/// Records as written in the file, without any cleaning.
fn raw(name: &str) -> Vec<(i64, f64)> {
    std::fs::read_to_string(fixture(name))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let (t, v) = l.split_once(',').unwrap();
            (parse_timestamp(t).unwrap().and_utc().timestamp(), v.parse().unwrap())
        })
        .collect()
}

#[test]
fn solar_fixture_clamps_night_readings() {
    let loaded = load("solar_15min.csv");
    let records = raw("solar_15min.csv");
    assert_eq!(loaded.trace.len(), records.len());
    assert_eq!(loaded.trace.resolution_s(), 900);
    assert_eq!(loaded.clamped, records.iter().filter(|r| r.1 < 0.0).count());
    assert!(loaded.clamped > 0);
    for (s, r) in loaded.trace.samples().iter().zip(&records) {
        assert_eq!(*s, r.1.max(0.0));
    }
}

#[test]
fn wind_fixture_gap_is_filled_with_neighbour_mean() {
    let loaded = load("wind_15min.csv");
    let records = raw("wind_15min.csv");
    let gap = records.windows(2).position(|w| w[1].0 - w[0].0 == 1800).expect("one dropped record");
    assert_eq!(records.windows(2).filter(|w| w[1].0 - w[0].0 != 900).count(), 1);
    assert_eq!(loaded.interpolated, 1);
    assert_eq!(loaded.trace.len(), records.len() + 1);
    let s = loaded.trace.samples();
    assert!((s[gap + 1] - (records[gap].1 + records[gap + 1].1) / 2.0).abs() < 1e-9);
    assert_eq!(s[gap + 2], records[gap + 1].1);
}

#[test]
fn fifteen_day_average_matches_independent_sum() {
    let trace = load("solar_15min.csv").trace;
    let out = resample_average(&trace, 15 * 86_400).unwrap();
    assert_eq!(out.len(), 2);
    assert_eq!(out.resolution_s(), 1_296_000);
    for (i, v) in out.samples().iter().enumerate() {
        // Compensated summation as the reference.
        let (mut sum, mut c) = (0.0f64, 0.0f64);
        for x in &trace.samples()[i * 1440..(i + 1) * 1440] {
            let y = x - c;
            let t = sum + y;
            c = (t - sum) - y;
            sum = t;
        }
        assert!((v - sum / 1440.0).abs() <= 1e-12 * v.abs());
    }
    assert_eq!(resample_average(&trace, 900).unwrap(), trace);
    assert!(resample_average(&trace, 1000).is_err());
}

#[test]
fn fixture_pairs_are_complementary() {
    let a = load("antiphase_a.csv").trace;
    let b = load("antiphase_b.csv").trace;
    assert_eq!((a.len(), b.len()), (96, 96));
    assert!((complementarity(&a, &b).unwrap() + 1.0).abs() <= 1e-12);
    let hourly = |name| normalize_peak(&resample_average(&load(name).trace, 3600).unwrap()).unwrap();
    let (solar, wind) = (hourly("solar_15min.csv"), hourly("wind_15min.csv"));
    assert_eq!(solar.samples().iter().copied().fold(0.0, f64::max), 1.0);
    assert!(complementarity(&solar, &wind).unwrap() < 0.0);
    // Once the gap is filled the raw series line up.
    assert!(complementarity(&load("solar_15min.csv").trace, &load("wind_15min.csv").trace).is_ok());
}

#[test]
fn scaled_trace_harvester_delivers_mean_rate() {
    let trace = Arc::new(load("wind_15min.csv").trace);
    let spec = HarvestSpec::Trace { p_eh_w: 0.02, trace: Arc::clone(&trace), random_phase: true };
    let mut phases = stream(3, &[0]);
    let mut rng = stream(3, &[1]);
    for _ in 0..5 {
        let model = spec.model_for_node(60.0, &mut phases);
        assert!(matches!(model, HarvesterModel::TraceScaled { .. }));
        let cycle: f64 = (0..trace.len() as u64).map(|t| model.sample_energy(t, 60.0, &mut rng)).sum();
        let mean_w = cycle / (trace.len() as f64 * 60.0);
        assert!((mean_w - 0.02).abs() < 1e-12);
        assert!((model.mean_rate_w(60.0) - 0.02).abs() < 1e-12);
    }
}

#[test]
fn bernoulli_harvester_law_of_large_numbers() {
    let spec = HarvestSpec::Bernoulli { p_eh_w: 0.02, arrival_prob: 0.3 };
    let model = spec.model_for_node(1.0, &mut stream(0, &[]));
    let mut rng = stream(4, &[]);
    let n = 100_000;
    let total: f64 = (0..n).map(|t| model.sample_energy(t, 1.0, &mut rng)).sum();
    let sd = model.energy_variance(1.0).sqrt() / (n as f64).sqrt();
    assert!((total / n as f64 - 0.02).abs() < 4.0 * sd);
}
