//! Spatial deployments: Poisson point processes on a square region,
//! nearest-cell association and SNR-target power control.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpatialError {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid radio configuration: {0}")]
    InvalidRadio(String),
    #[error("point ({x}, {y}) lies outside the region")]
    OutOfRegion { x: f64, y: f64 },
    #[error("no base station available for association")]
    NoCoverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn euclidean(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Opposite edges are identified; removes boundary effects.
    #[default]
    Torus,
    Bounded,
}

/// Square region `[0, side)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    side_m: f64,
    topology: Topology,
}

impl Region {
    pub fn new(side_m: f64, topology: Topology) -> Result<Self, SpatialError> {
        if !(side_m.is_finite() && side_m > 0.0) {
            return Err(SpatialError::InvalidRegion(format!("side length {side_m} must be positive")));
        }
        Ok(Self { side_m, topology })
    }

    pub fn side_m(&self) -> f64 {
        self.side_m
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn area(&self) -> f64 {
        self.side_m * self.side_m
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0.0..self.side_m).contains(&p.x) && (0.0..self.side_m).contains(&p.y)
    }

    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        match self.topology {
            Topology::Bounded => a.euclidean(b),
            Topology::Torus => {
                let wrap = |d: f64| {
                    let d = d.abs();
                    d.min(self.side_m - d)
                };
                wrap(a.x - b.x).hypot(wrap(a.y - b.y))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointSet(Vec<Point>);

impl PointSet {
    pub fn new(region: &Region, points: Vec<Point>) -> Result<Self, SpatialError> {
        if let Some(p) = points.iter().find(|p| !region.contains(p)) {
            return Err(SpatialError::OutOfRegion { x: p.x, y: p.y });
        }
        Ok(Self(points))
    }

    pub fn points(&self) -> &[Point] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.0.iter()
    }
}

/// Inverse-CDF Poisson sample for a single uniform `u`.
///
/// Monotone in `mean` for fixed `u`, which couples realizations at
/// different densities under a shared stream.
pub fn poisson_inverse(mean: f64, u: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    // Walk the pmf in log space so large means do not underflow exp(-mean).
    let ln_mean = mean.ln();
    let mut ln_p = -mean;
    let mut cdf = 0.0;
    let limit = (mean + 40.0 * mean.sqrt() + 40.0) as usize;
    for k in 0..limit {
        cdf += ln_p.exp();
        if u < cdf {
            return k;
        }
        ln_p += ln_mean - ((k + 1) as f64).ln();
    }
    limit
}

/// Homogeneous Poisson point process of `density` points per m².
///
/// The first draw fixes the count; positions follow as consecutive
/// `(x, y)` uniforms, so a denser realization extends a sparser one drawn
/// from the same stream.
pub fn generate_ppp<R: Rng + ?Sized>(density: f64, region: &Region, rng: &mut R) -> PointSet {
    let u: f64 = rng.random();
    let count = poisson_inverse(density.max(0.0) * region.area(), u);
    let side = region.side_m;
    let coord = |rng: &mut R| {
        let v = rng.random::<f64>() * side;
        if v < side {
            v
        } else {
            0.0
        }
    };
    let points = (0..count)
        .map(|_| {
            let x = coord(rng);
            let y = coord(rng);
            Point { x, y }
        })
        .collect();
    PointSet(points)
}

/// Maps each user to its nearest base station, ties to the lowest index.
pub fn associate_nearest(users: &PointSet, scbs: &PointSet, region: &Region) -> Result<Vec<usize>, SpatialError> {
    if scbs.is_empty() {
        return Err(SpatialError::NoCoverage);
    }
    Ok(users
        .iter()
        .map(|u| {
            let mut best = (0, f64::INFINITY);
            for (m, s) in scbs.iter().enumerate() {
                let d = region.distance(u, s);
                if d < best.1 {
                    best = (m, d);
                }
            }
            best.0
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    /// Linear receive-SNR target.
    pub gamma_th: f64,
    pub alpha: f64,
    pub noise_w: f64,
    pub d_min_m: f64,
    pub p_max_w: Option<f64>,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self { gamma_th: 10.0, alpha: 4.0, noise_w: 1e-13, d_min_m: 1.0, p_max_w: None }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<(), SpatialError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !pos(self.gamma_th) {
            return Err(SpatialError::InvalidRadio("gamma_th must be positive".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > 2.0) {
            return Err(SpatialError::InvalidRadio("alpha must exceed 2".into()));
        }
        if !pos(self.noise_w) {
            return Err(SpatialError::InvalidRadio("noise power must be positive".into()));
        }
        if !pos(self.d_min_m) {
            return Err(SpatialError::InvalidRadio("d_min must be positive".into()));
        }
        if let Some(p) = self.p_max_w {
            if !pos(p) {
                return Err(SpatialError::InvalidRadio("p_max must be positive".into()));
            }
        }
        Ok(())
    }

    /// Path gain `max(d, d_min)^-alpha`.
    pub fn gain(&self, distance_m: f64) -> f64 {
        distance_m.max(self.d_min_m).powf(-self.alpha)
    }

    /// Unclamped power needed to reach SNR `gamma` at `distance_m`.
    pub fn power_for_snr(&self, gamma: f64, distance_m: f64) -> f64 {
        gamma * self.noise_w * distance_m.max(self.d_min_m).powf(self.alpha)
    }

    pub fn exceeds_cap(&self, power_w: f64) -> bool {
        self.p_max_w.is_some_and(|cap| power_w > cap)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Transmit power needed on one link, or a marker when it exceeds the cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LinkPower {
    Feasible(f64),
    Infeasible,
}

impl LinkPower {
    pub fn watts(&self) -> Option<f64> {
        match self {
            Self::Feasible(p) => Some(*p),
            Self::Infeasible => None,
        }
    }
}

pub fn required_power(distance_m: f64, radio: &RadioConfig) -> LinkPower {
    let p = radio.power_for_snr(radio.gamma_th, distance_m);
    if radio.exceeds_cap(p) {
        LinkPower::Infeasible
    } else {
        LinkPower::Feasible(p)
    }
}

/// Writes `kind,x,y` rows for plotting.
pub fn write_points_csv<W: Write>(mut out: W, scbs: &PointSet, users: &PointSet) -> std::io::Result<()> {
    writeln!(out, "kind,x,y")?;
    for p in scbs.iter() {
        writeln!(out, "scbs,{},{}", p.x, p.y)?;
    }
    for p in users.iter() {
        writeln!(out, "user,{},{}", p.x, p.y)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn torus(side: f64) -> Region {
        Region::new(side, Topology::Torus).unwrap()
    }

    #[test]
    fn zero_density_is_empty() {
        let mut rng = stream(1, &[]);
        assert!(generate_ppp(0.0, &torus(100.0), &mut rng).is_empty());
    }

    #[test]
    fn ppp_count_moments() {
        let region = torus(1000.0);
        let n = 10_000;
        let counts: Vec<f64> = (0..n).map(|i| generate_ppp(1e-3, &region, &mut stream(5, &[i])).len() as f64).collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 1000.0).abs() <= 3.0 * 1000f64.sqrt(), "mean {mean}");
        // Poisson: variance equals the mean
        assert!((var / 1000.0 - 1.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn poisson_inverse_matches_pmf() {
        // P(N=0) = e^-2, P(N<=1) = 3e^-2
        let e = (-2.0f64).exp();
        assert_eq!(poisson_inverse(2.0, e * 0.999), 0);
        assert_eq!(poisson_inverse(2.0, e * 1.001), 1);
        assert_eq!(poisson_inverse(2.0, 3.0 * e * 0.999), 1);
        assert_eq!(poisson_inverse(2.0, 3.0 * e * 1.001), 2);
        // large mean does not underflow
        let k = poisson_inverse(5000.0, 0.5);
        assert!((k as f64 - 5000.0).abs() < 5.0);
    }

    #[test]
    fn denser_process_extends_sparser() {
        let region = torus(500.0);
        let sparse = generate_ppp(1e-4, &region, &mut stream(9, &[1]));
        let dense = generate_ppp(3e-4, &region, &mut stream(9, &[1]));
        assert!(dense.len() >= sparse.len());
        assert_eq!(&dense.points()[..sparse.len()], sparse.points());
    }

    #[test]
    fn association_rules() {
        let region = Region::new(100.0, Topology::Bounded).unwrap();
        let users = PointSet::new(&region, vec![Point::new(50.0, 50.0), Point::new(1.0, 1.0)]).unwrap();
        let one = PointSet::new(&region, vec![Point::new(10.0, 10.0)]).unwrap();
        assert_eq!(associate_nearest(&users, &one, &region).unwrap(), vec![0, 0]);

        let three =
            PointSet::new(&region, vec![Point::new(40.0, 50.0), Point::new(99.0, 99.0), Point::new(60.0, 50.0)])
                .unwrap();
        assert_eq!(associate_nearest(&users, &three, &region).unwrap()[0], 0);
        assert_eq!(associate_nearest(&users, &PointSet::default(), &region), Err(SpatialError::NoCoverage));
    }

    #[test]
    fn torus_wraps_distance() {
        let region = torus(100.0);
        let d = region.distance(&Point::new(1.0, 1.0), &Point::new(99.0, 99.0));
        assert!((d - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn association_matches_exhaustive_scan() {
        let region = torus(200.0);
        for seed in 0..50 {
            let users = generate_ppp(20.0 / region.area(), &region, &mut stream(seed, &[0]));
            let scbs = generate_ppp(5.0 / region.area(), &region, &mut stream(seed, &[1]));
            if scbs.is_empty() {
                continue;
            }
            let got = associate_nearest(&users, &scbs, &region).unwrap();
            for (k, u) in users.iter().enumerate() {
                // oracle: full distance table, smallest distance then smallest index
                let mut table: Vec<(f64, usize)> =
                    scbs.iter().enumerate().map(|(m, s)| (region.distance(u, s), m)).collect();
                table.sort_by(|a, b| a.partial_cmp(b).unwrap());
                assert_eq!(got[k], table[0].1);
            }
        }
    }

    #[test]
    fn required_power_examples() {
        let radio = RadioConfig { gamma_th: 10.0, alpha: 4.0, noise_w: 1e-13, d_min_m: 1.0, p_max_w: None };
        assert_eq!(required_power(1.0, &radio), LinkPower::Feasible(10.0 * 1e-13));
        assert_eq!(required_power(0.2, &radio), LinkPower::Feasible(10.0 * 1e-13));
        let p50 = required_power(50.0, &radio).watts().unwrap();
        assert!((p50 - 6.25e-6).abs() < 1e-18);
        let p100 = required_power(100.0, &radio).watts().unwrap();
        assert!((p100 / p50 - 16.0).abs() < 1e-12);

        let capped = RadioConfig { p_max_w: Some(1e-6), ..radio };
        assert_eq!(required_power(50.0, &capped), LinkPower::Infeasible);
        assert!(matches!(required_power(10.0, &capped), LinkPower::Feasible(_)));
    }

    #[test]
    fn radio_validation() {
        assert!(RadioConfig::default().validate().is_ok());
        assert!(RadioConfig { alpha: 2.0, ..Default::default() }.validate().is_err());
        assert!(RadioConfig { noise_w: 0.0, ..Default::default() }.validate().is_err());
        assert!(RadioConfig { p_max_w: Some(-1.0), ..Default::default() }.validate().is_err());
        assert!(Region::new(0.0, Topology::Torus).is_err());
    }

    #[test]
    fn points_csv() {
        let region = torus(10.0);
        let s = PointSet::new(&region, vec![Point::new(1.0, 2.0)]).unwrap();
        let u = PointSet::new(&region, vec![Point::new(3.5, 4.0)]).unwrap();
        let mut buf = Vec::new();
        write_points_csv(&mut buf, &s, &u).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "kind,x,y\nscbs,1,2\nuser,3.5,4\n");
    }

    proptest! {
        #[test]
        fn ppp_points_in_region(seed in 0u64..1000, side in 1.0..500.0f64) {
            let region = torus(side);
            let pts = generate_ppp(50.0 / region.area(), &region, &mut stream(seed, &[]));
            prop_assert!(pts.iter().all(|p| region.contains(p)));
        }

        #[test]
        fn required_power_monotone(d in 0.0..300.0f64, dd in 0.0..50.0f64,
                                   g in 0.1..1e4f64, alpha in 2.01..6.0f64) {
            let radio = RadioConfig { gamma_th: g, alpha, ..Default::default() };
            let p = |r: &RadioConfig, d| required_power(d, r).watts().unwrap();
            prop_assert!(p(&radio, d + dd) >= p(&radio, d));
            let louder = RadioConfig { gamma_th: g * 2.0, noise_w: 2e-13, ..radio };
            prop_assert!(p(&louder, d) >= p(&radio, d));
            let steeper = RadioConfig { alpha: alpha + 0.5, ..radio };
            prop_assert!(p(&steeper, d) >= p(&radio, d));
        }

        #[test]
        fn association_equivariant_under_user_permutation(seed in 0u64..200) {
            let region = torus(100.0);
            let users = generate_ppp(12.0 / region.area(), &region, &mut stream(seed, &[0]));
            let scbs = generate_ppp(4.0 / region.area(), &region, &mut stream(seed, &[1]));
            prop_assume!(!scbs.is_empty());
            let a = associate_nearest(&users, &scbs, &region).unwrap();
            let mut rev = users.points().to_vec();
            rev.reverse();
            let b = associate_nearest(&PointSet::new(&region, rev).unwrap(), &scbs, &region).unwrap();
            let mut b_rev = b.clone();
            b_rev.reverse();
            prop_assert_eq!(&a, &b_rev);
            let again = associate_nearest(&users, &scbs, &region).unwrap();
            prop_assert_eq!(a, again);
        }
    }
}
