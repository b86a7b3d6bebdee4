use std::io::BufRead;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use super::TraceError;

/// Uniformly sampled average-power series of a generation feed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    start: NaiveDateTime,
    resolution_s: u64,
    samples: Vec<f64>,
}

impl EnergyTrace {
    pub fn new(start: NaiveDateTime, resolution_s: u64, samples: Vec<f64>) -> Result<Self, TraceError> {
        if resolution_s == 0 {
            return Err(TraceError::Invalid("resolution must be positive".into()));
        }
        if samples.is_empty() {
            return Err(TraceError::Invalid("trace has no samples".into()));
        }
        if let Some(bad) = samples.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(TraceError::Invalid(format!("sample {bad} is not a finite nonnegative power")));
        }
        Ok(Self { start, resolution_s, samples })
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn resolution_s(&self) -> u64 {
        self.resolution_s
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Population variance of the samples.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / self.samples.len() as f64
    }

    pub fn timestamp(&self, index: usize) -> NaiveDateTime {
        self.start + chrono::Duration::seconds((index as u64 * self.resolution_s) as i64)
    }
}

/// Which columns of a delimited file hold the timestamp and the value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub timestamp_col: usize,
    pub value_col: usize,
    pub has_header: bool,
    pub delimiter: char,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        Self { timestamp_col: 0, value_col: 1, has_header: false, delimiter: ',' }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedTrace {
    pub trace: EnergyTrace,
    /// Readings below zero that were clamped to 0.
    pub clamped: usize,
    /// Samples synthesized by linear interpolation across gaps.
    pub interpolated: usize,
}

pub fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let raw = raw.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.naive_utc());
    }
    const FORMATS: &[&str] = &["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
        .or_else(|| NaiveDate::parse_from_str(raw, "%Y-%m-%d").ok().and_then(|d| d.and_hms_opt(0, 0, 0)))
}

/// Reads `timestamp,value` records into a uniform trace.
///
/// Blank lines and `#` comments are skipped. The resolution is the smallest
/// spacing between consecutive records; larger gaps must be whole multiples
/// of it and are filled by linear interpolation. Negative readings are
/// clamped to zero and counted.
pub fn load_trace<R: BufRead>(reader: R, spec: &ColumnSpec) -> Result<LoadedTrace, TraceError> {
    let mut records: Vec<(NaiveDateTime, f64, usize)> = Vec::new();
    let mut clamped = 0;
    let mut header_pending = spec.has_header;
    let needed = spec.timestamp_col.max(spec.value_col) + 1;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if header_pending {
            header_pending = false;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(spec.delimiter).map(str::trim).collect();
        if fields.len() < needed {
            return Err(TraceError::Parse {
                line: line_no,
                message: format!("expected at least {needed} fields, found {}", fields.len()),
            });
        }
        let ts = parse_timestamp(fields[spec.timestamp_col]).ok_or_else(|| TraceError::Parse {
            line: line_no,
            message: format!("bad timestamp {:?}", fields[spec.timestamp_col]),
        })?;
        let value: f64 = fields[spec.value_col].parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
            TraceError::Parse { line: line_no, message: format!("bad value {:?}", fields[spec.value_col]) }
        })?;
        if let Some(&(prev, _, _)) = records.last() {
            if ts <= prev {
                return Err(TraceError::Ordering { line: line_no });
            }
        }
        let value = if value < 0.0 {
            clamped += 1;
            0.0
        } else {
            value
        };
        records.push((ts, value, line_no));
    }

    if records.len() < 2 {
        return Err(TraceError::InsufficientData { found: records.len() });
    }

    let mut gaps = Vec::with_capacity(records.len() - 1);
    for pair in records.windows(2) {
        let ms = (pair[1].0 - pair[0].0).num_milliseconds();
        if ms % 1000 != 0 {
            return Err(TraceError::Parse {
                line: pair[1].2,
                message: "sub-second timestamp spacing is not supported".into(),
            });
        }
        gaps.push(ms / 1000);
    }
    let resolution = *gaps.iter().min().expect("at least one gap") as u64;

    let mut samples = Vec::with_capacity(records.len());
    let mut interpolated = 0;
    samples.push(records[0].1);
    for (pair, &gap) in records.windows(2).zip(&gaps) {
        if !(gap as u64).is_multiple_of(resolution) {
            return Err(TraceError::IrregularSpacing { line: pair[1].2, gap_s: gap, resolution_s: resolution });
        }
        let steps = gap as u64 / resolution;
        let (a, b) = (pair[0].1, pair[1].1);
        for j in 1..steps {
            let frac = j as f64 / steps as f64;
            samples.push(a + (b - a) * frac);
            interpolated += 1;
        }
        samples.push(b);
    }

    Ok(LoadedTrace { trace: EnergyTrace::new(records[0].0, resolution, samples)?, clamped, interpolated })
}

/// Block-averages a trace into windows of `window_s` seconds. A trailing
/// partial window is averaged over the samples it actually covers.
pub fn resample_average(trace: &EnergyTrace, window_s: u64) -> Result<EnergyTrace, TraceError> {
    if window_s == 0 || !window_s.is_multiple_of(trace.resolution_s) {
        return Err(TraceError::Alignment(format!(
            "window {window_s} s is not a positive multiple of the resolution {} s",
            trace.resolution_s
        )));
    }
    let per_window = (window_s / trace.resolution_s) as usize;
    let samples =
        trace.samples.chunks(per_window).map(|chunk| chunk.iter().sum::<f64>() / chunk.len() as f64).collect();
    EnergyTrace::new(trace.start, window_s, samples)
}

/// Divides every sample by the global peak.
pub fn normalize_peak(trace: &EnergyTrace) -> Result<EnergyTrace, TraceError> {
    let peak = trace.samples.iter().copied().fold(0.0_f64, f64::max);
    if peak <= 0.0 {
        return Err(TraceError::Degenerate("all samples are zero".into()));
    }
    let samples = trace.samples.iter().map(|v| v / peak).collect();
    EnergyTrace::new(trace.start, trace.resolution_s, samples)
}

/// Pearson correlation of two aligned traces; complementary sources score
/// near -1.
pub fn complementarity(a: &EnergyTrace, b: &EnergyTrace) -> Result<f64, TraceError> {
    if a.len() != b.len() {
        return Err(TraceError::Alignment(format!("lengths differ: {} vs {}", a.len(), b.len())));
    }
    if a.resolution_s != b.resolution_s {
        return Err(TraceError::Alignment(format!("resolutions differ: {} s vs {} s", a.resolution_s, b.resolution_s)));
    }
    if a.len() < 2 {
        return Err(TraceError::InsufficientData { found: a.len() });
    }
    let (ma, mb) = (a.mean(), b.mean());
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.samples.iter().zip(&b.samples) {
        let (dx, dy) = (x - ma, y - mb);
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return Err(TraceError::Degenerate("trace has zero variance".into()));
    }
    Ok((cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0))
}
