mod support;

use ehscn_core::rng::stream;
use ehscn_core::spatial::{
    associate_nearest, generate_ppp, required_power, LinkPower, Point, PointSet, RadioConfig, Region, Topology,
};
use rand::Rng;
use support::{ks_critical_1pct, ks_statistic};

#[test]
fn nearest_distance_is_rayleigh_on_torus() {
    let region = Region::new(1000.0, Topology::Torus).unwrap();
    let lambda = 1e-4;
    let mut samples = Vec::with_capacity(10_000);
    for i in 0..10_000u64 {
        let mut r = stream(99, &[i]);
        let scbs = generate_ppp(lambda, &region, &mut r);
        if scbs.is_empty() {
            continue;
        }
        let user = Point::new(r.random_range(0.0..1000.0), r.random_range(0.0..1000.0));
        let d = scbs.iter().map(|s| region.distance(&user, s)).fold(f64::INFINITY, f64::min);
        samples.push(d);
    }
    let n = samples.len();
    assert!(n >= 10_000 - 5);
    let d = ks_statistic(&mut samples, |r| 1.0 - (-std::f64::consts::PI * lambda * r * r).exp());
    assert!(d < ks_critical_1pct(n), "KS statistic {d} over {n} samples");
}

#[test]
fn bounded_square_shows_edge_effect() {
    // Without wrap-around, users near the boundary sit farther from their
    // nearest station, so the Rayleigh law should be rejected.
    let region = Region::new(1000.0, Topology::Bounded).unwrap();
    let lambda = 2e-5;
    let mut samples = Vec::new();
    for i in 0..10_000u64 {
        let mut r = stream(100, &[i]);
        let scbs = generate_ppp(lambda, &region, &mut r);
        if scbs.is_empty() {
            continue;
        }
        let user = Point::new(r.random_range(0.0..1000.0), r.random_range(0.0..1000.0));
        samples.push(scbs.iter().map(|s| region.distance(&user, s)).fold(f64::INFINITY, f64::min));
    }
    let n = samples.len();
    let d = ks_statistic(&mut samples, |r| 1.0 - (-std::f64::consts::PI * lambda * r * r).exp());
    assert!(d > ks_critical_1pct(n));
}

#[test]
fn torus_association_matches_scan_with_wrapped_images() {
    let region = Region::new(200.0, Topology::Torus).unwrap();
    for seed in 0..50u64 {
        let mut r = stream(seed, &[7]);
        let mut pts = |n: usize| {
            let v = (0..n).map(|_| Point::new(r.random_range(0.0..200.0), r.random_range(0.0..200.0))).collect();
            PointSet::new(&region, v).unwrap()
        };
        let (users, scbs) = (pts(20), pts(5));
        let got = associate_nearest(&users, &scbs, &region).unwrap();
        for (k, u) in users.iter().enumerate() {
            // Distance to the closest of the nine periodic images.
            let image_dist = |s: &Point| {
                let mut best = f64::INFINITY;
                for dx in [-200.0, 0.0, 200.0] {
                    for dy in [-200.0, 0.0, 200.0] {
                        best = best.min(((u.x - s.x - dx).powi(2) + (u.y - s.y - dy).powi(2)).sqrt());
                    }
                }
                best
            };
            let dists: Vec<f64> = scbs.iter().map(image_dist).collect();
            let min = dists.iter().copied().fold(f64::INFINITY, f64::min);
            let want = dists.iter().position(|&d| d <= min + 1e-9).unwrap();
            assert_eq!(got[k], want);
        }
    }
}

#[test]
fn required_power_hand_value() {
    let radio = RadioConfig { gamma_th: 10.0, noise_w: 1e-13, alpha: 4.0, ..RadioConfig::default() };
    match required_power(50.0, &radio) {
        LinkPower::Feasible(p) => assert!((p - 6.25e-6).abs() < 1e-18),
        LinkPower::Infeasible => panic!("no cap configured"),
    }
    let capped = RadioConfig { p_max_w: Some(1e-6), ..radio };
    assert_eq!(required_power(50.0, &capped), LinkPower::Infeasible);
    assert_eq!(required_power(0.2, &radio), required_power(1.0, &radio));
}
