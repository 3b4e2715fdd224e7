// Copyright 2026 The dyndl Authors
// SPDX-License-Identifier: Apache-2.0

//! Velocity traces: CSV ingestion, resampling and synthesis.
//!
//! The CSV schema is a `t_s,velocity` header followed by one sample per row.
//! Velocity is held constant between samples.

use std::fmt;
use std::path::Path as FsPath;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::{s_to_ns, Nanos, NS_PER_MS, NS_PER_S};

/// Velocities above this are rejected by default (m/s).
pub const DEFAULT_V_MAX: f64 = 40.0;

/// Sample spacing of synthesized scenarios.
pub const SYNTH_STEP_NS: Nanos = 100 * NS_PER_MS;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },
    #[error("row {row}: timestamps must be strictly increasing")]
    NonMonotonicTime { row: usize },
    #[error("row {row}: negative velocity {value}")]
    NegativeVelocity { row: usize, value: f64 },
    #[error("row {row}: velocity {value} m/s exceeds the limit of {v_max} m/s")]
    VelocityTooHigh { row: usize, value: f64, v_max: f64 },
    #[error("scenario has no samples")]
    EmptyScenario,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Mps,
    Kmh,
}

impl Units {
    pub fn to_mps(self, v: f64) -> f64 {
        match self {
            Units::Mps => v,
            Units::Kmh => v / 3.6,
        }
    }
}

impl FromStr for Units {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mps" | "m/s" => Ok(Units::Mps),
            "kmh" | "km/h" => Ok(Units::Kmh),
            other => Err(format!("unknown velocity unit '{other}' (expected mps or kmh)")),
        }
    }
}

/// A velocity trace in m/s over integer-nanosecond timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    samples: Vec<(Nanos, f64)>,
}

impl Scenario {
    pub fn new(name: impl Into<String>, samples: Vec<(Nanos, f64)>) -> Result<Self, ScenarioError> {
        Self::with_limit(name, samples, DEFAULT_V_MAX)
    }

    pub fn with_limit(name: impl Into<String>, samples: Vec<(Nanos, f64)>, v_max: f64) -> Result<Self, ScenarioError> {
        if samples.is_empty() {
            return Err(ScenarioError::EmptyScenario);
        }
        for (row, &(t, v)) in samples.iter().enumerate() {
            check_velocity(row + 1, v, v_max)?;
            if row > 0 && t <= samples[row - 1].0 {
                return Err(ScenarioError::NonMonotonicTime { row: row + 1 });
            }
        }
        Ok(Scenario { name: name.into(), samples })
    }

    pub fn samples(&self) -> &[(Nanos, f64)] {
        &self.samples
    }

    pub fn start(&self) -> Nanos {
        self.samples[0].0
    }

    pub fn end(&self) -> Nanos {
        self.samples[self.samples.len() - 1].0
    }

    /// Zero-order hold; times before the first sample take its value.
    pub fn velocity_at(&self, t: Nanos) -> f64 {
        let idx = self.samples.partition_point(|&(ts, _)| ts <= t);
        self.samples[idx.saturating_sub(1)].1
    }

    pub fn from_csv_str(text: &str, units: Units, name: &str, v_max: f64) -> Result<Self, ScenarioError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut records = reader.records();
        let header = records
            .next()
            .ok_or_else(|| ScenarioError::Parse { row: 1, column: 1, message: "missing `t_s,velocity` header".into() })?
            .map_err(|e| csv_error(e, 1))?;
        if header.len() != 2 || &header[0] != "t_s" || &header[1] != "velocity" {
            return Err(ScenarioError::Parse {
                row: 1,
                column: 1,
                message: format!("expected header `t_s,velocity`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut samples = Vec::new();
        for (k, rec) in records.enumerate() {
            let row = k + 2;
            let rec = rec.map_err(|e| csv_error(e, row))?;
            if rec.len() != 2 {
                return Err(ScenarioError::Parse { row, column: rec.len().min(2) + 1, message: "expected 2 fields".into() });
            }
            let t = parse_seconds(&rec[0]).map_err(|message| ScenarioError::Parse { row, column: 1, message })?;
            let raw: f64 = rec[1]
                .parse()
                .map_err(|_| ScenarioError::Parse { row, column: 2, message: format!("invalid velocity `{}`", &rec[1]) })?;
            if !raw.is_finite() {
                return Err(ScenarioError::Parse { row, column: 2, message: format!("invalid velocity `{}`", &rec[1]) });
            }
            let v = units.to_mps(raw);
            check_velocity(row, v, v_max)?;
            if let Some(&(prev, _)) = samples.last() {
                if t <= prev {
                    return Err(ScenarioError::NonMonotonicTime { row });
                }
            }
            samples.push((t, v));
        }
        if samples.is_empty() {
            return Err(ScenarioError::Parse { row: 2, column: 1, message: "no samples after header".into() });
        }
        Ok(Scenario { name: name.to_string(), samples })
    }

    pub fn load(path: impl AsRef<FsPath>, units: Units) -> Result<Self, ScenarioError> {
        Self::load_with_limit(path, units, DEFAULT_V_MAX)
    }

    pub fn load_with_limit(path: impl AsRef<FsPath>, units: Units, v_max: f64) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self::from_csv_str(&text, units, &name, v_max)
    }

    /// CSV in m/s; loading it back with [`Units::Mps`] is lossless.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t_s", "velocity"]).expect("in-memory write");
        for &(t, v) in &self.samples {
            let ts = format!("{}.{:09}", t / NS_PER_S, t % NS_PER_S);
            w.write_record([ts, format!("{v}")]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }

    pub fn save(&self, path: impl AsRef<FsPath>) -> Result<(), ScenarioError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string())
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })
    }

    /// Zero-order-hold resampling onto `start + k·dt` up to the last sample.
    pub fn resample(&self, dt: Nanos) -> Result<Scenario, ScenarioError> {
        if dt == 0 {
            return Err(ScenarioError::InvalidParams("resampling step must be positive".into()));
        }
        let (start, end) = (self.start(), self.end());
        let samples = (0..=(end - start) / dt)
            .map(|k| {
                let t = start + k * dt;
                (t, self.velocity_at(t))
            })
            .collect();
        Ok(Scenario { name: self.name.clone(), samples })
    }

    pub fn synthesize(kind: &SynthKind, horizon: Nanos) -> Result<Scenario, ScenarioError> {
        kind.validate()?;
        if horizon == 0 {
            return Err(ScenarioError::InvalidParams("horizon must be positive".into()));
        }
        let steps = horizon.div_ceil(SYNTH_STEP_NS);
        let times: Vec<Nanos> = (0..=steps).map(|k| (k * SYNTH_STEP_NS).min(horizon)).collect();
        let samples: Vec<(Nanos, f64)> = match *kind {
            SynthKind::Constant { v } => times.iter().map(|&t| (t, v)).collect(),
            SynthKind::Ramp { v1, v2, duration_s } => times
                .iter()
                .map(|&t| {
                    let frac = (t as f64 / (duration_s * NS_PER_S as f64)).min(1.0);
                    (t, v1 + (v2 - v1) * frac)
                })
                .collect(),
            SynthKind::Square { v_lo, v_hi, period_s } => {
                let half = s_to_ns(period_s / 2.0);
                times.iter().map(|&t| (t, if (t / half) % 2 == 0 { v_lo } else { v_hi })).collect()
            }
            SynthKind::RandomDrive { seed, v_max, a_max } => random_drive(&times, seed, v_max, a_max),
        };
        let mut samples = samples;
        samples.dedup_by_key(|s| s.0);
        Scenario::new(kind.to_string(), samples)
    }
}

fn check_velocity(row: usize, v: f64, v_max: f64) -> Result<(), ScenarioError> {
    if v < 0.0 || v.is_nan() {
        return Err(ScenarioError::NegativeVelocity { row, value: v });
    }
    if v > v_max {
        return Err(ScenarioError::VelocityTooHigh { row, value: v, v_max });
    }
    Ok(())
}

fn csv_error(e: csv::Error, row: usize) -> ScenarioError {
    ScenarioError::Parse { row, column: 1, message: e.to_string() }
}

/// Plain decimals convert exactly; other notations go through `f64`.
fn parse_seconds(text: &str) -> Result<Nanos, String> {
    let bad = || format!("invalid timestamp `{text}`");
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    let digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !int.is_empty() && digits(int) && digits(frac) && frac.len() <= 9 {
        let whole: Nanos = int.parse().map_err(|_| bad())?;
        let mut frac_ns: Nanos = 0;
        if !frac.is_empty() {
            frac_ns = frac.parse::<Nanos>().map_err(|_| bad())? * 10u64.pow(9 - frac.len() as u32);
        }
        return whole.checked_mul(NS_PER_S).and_then(|w| w.checked_add(frac_ns)).ok_or_else(bad);
    }
    let secs: f64 = text.parse().map_err(|_| bad())?;
    if !(secs >= 0.0 && secs.is_finite()) {
        return Err(bad());
    }
    Ok(s_to_ns(secs))
}

/// Synthetic scenario shapes. Velocities in m/s, durations in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SynthKind {
    Constant { v: f64 },
    Ramp { v1: f64, v2: f64, duration_s: f64 },
    Square { v_lo: f64, v_hi: f64, period_s: f64 },
    /// Piecewise cruise-and-accelerate drive towards random target speeds.
    RandomDrive { seed: u64, v_max: f64, a_max: f64 },
}

impl SynthKind {
    fn validate(&self) -> Result<(), ScenarioError> {
        let in_range = |v: f64| (0.0..=DEFAULT_V_MAX).contains(&v);
        let ok = match *self {
            SynthKind::Constant { v } => in_range(v),
            SynthKind::Ramp { v1, v2, duration_s } => in_range(v1) && in_range(v2) && duration_s > 0.0,
            SynthKind::Square { v_lo, v_hi, period_s } => in_range(v_lo) && in_range(v_hi) && period_s >= 0.2,
            SynthKind::RandomDrive { v_max, a_max, .. } => in_range(v_max) && v_max > 0.0 && a_max > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ScenarioError::InvalidParams(format!("{self:?}")))
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SynthKind::Constant { v } => write!(f, "constant-{v}"),
            SynthKind::Ramp { v1, v2, duration_s } => write!(f, "ramp-{v1}-{v2}-{duration_s}s"),
            SynthKind::Square { v_lo, v_hi, period_s } => write!(f, "square-{v_lo}-{v_hi}-{period_s}s"),
            SynthKind::RandomDrive { seed, .. } => write!(f, "random-{seed}"),
        }
    }
}

fn random_drive(times: &[Nanos], seed: u64, v_max: f64, a_max: f64) -> Vec<(Nanos, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = rng.gen_range(0.0..=v_max);
    let mut target = v;
    let mut accel = 0.0;
    let mut hold_until = 0.0;
    let mut out = Vec::with_capacity(times.len());
    let mut prev_t = 0.0;
    for &t in times {
        let ts = t as f64 / NS_PER_S as f64;
        let dt = ts - prev_t;
        prev_t = ts;
        if (target - v).abs() < 1e-9 && ts >= hold_until {
            target = rng.gen_range(0.0..=v_max);
            accel = rng.gen_range(0.2 * a_max..=a_max);
            hold_until = ts + rng.gen_range(1.0..8.0);
        }
        let step = accel * dt;
        v = if target > v { (v + step).min(target) } else { (v - step).max(target) };
        out.push((t, v.clamp(0.0, v_max)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kmh_conversion() {
        let s = Scenario::from_csv_str("t_s,velocity\n0,0\n1,10\n", Units::Kmh, "x", DEFAULT_V_MAX).unwrap();
        assert_eq!(s.samples()[0], (0, 0.0));
        assert_eq!(s.samples()[1].0, NS_PER_S);
        assert!((s.samples()[1].1 - 2.778).abs() < 1e-3);
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(Scenario::from_csv_str("", Units::Mps, "x", 40.0), Err(ScenarioError::Parse { row: 1, .. })));
        assert!(matches!(
            Scenario::from_csv_str("t_s,velocity\n1,5\n0,6\n", Units::Mps, "x", 40.0),
            Err(ScenarioError::NonMonotonicTime { row: 3 })
        ));
        assert!(matches!(
            Scenario::from_csv_str("t_s,velocity\n0,-1\n", Units::Mps, "x", 40.0),
            Err(ScenarioError::NegativeVelocity { row: 2, .. })
        ));
        assert!(matches!(
            Scenario::from_csv_str("t_s,velocity\n0,abc\n", Units::Mps, "x", 40.0),
            Err(ScenarioError::Parse { row: 2, column: 2, .. })
        ));
        assert!(matches!(
            Scenario::from_csv_str("t_s,velocity\n0,41\n", Units::Mps, "x", 40.0),
            Err(ScenarioError::VelocityTooHigh { .. })
        ));
        assert!(matches!(
            Scenario::from_csv_str("time,v\n0,1\n", Units::Mps, "x", 40.0),
            Err(ScenarioError::Parse { row: 1, .. })
        ));
    }

    #[test]
    fn exact_timestamps() {
        assert_eq!(parse_seconds("1.5").unwrap(), 1_500_000_000);
        assert_eq!(parse_seconds("0.000000001").unwrap(), 1);
        assert_eq!(parse_seconds("2").unwrap(), 2 * NS_PER_S);
        assert_eq!(parse_seconds("1e-3").unwrap(), NS_PER_MS);
        assert!(parse_seconds("-1").is_err());
    }

    #[test]
    fn resample_examples() {
        let c = Scenario::new("c", vec![(0, 3.0), (10 * NS_PER_S, 3.0)]).unwrap();
        let r = c.resample(NS_PER_S).unwrap();
        assert_eq!(r.samples().len(), 11);
        assert!(r.samples().iter().all(|&(_, v)| v == 3.0));

        let step = Scenario::new("s", vec![(0, 0.0), (5 * NS_PER_S, 30.0), (10 * NS_PER_S, 30.0)]).unwrap();
        let r = step.resample(NS_PER_S).unwrap();
        assert_eq!(r.samples()[4], (4 * NS_PER_S, 0.0));
        assert_eq!(r.samples()[5], (5 * NS_PER_S, 30.0));

        let big = step.resample(100 * NS_PER_S).unwrap();
        assert_eq!(big.samples(), &[(0, 0.0)]);
        assert!(step.resample(0).is_err());
    }

    #[test]
    fn synthesized_shapes() {
        let c = Scenario::synthesize(&SynthKind::Constant { v: 31.667 }, 60 * NS_PER_S).unwrap();
        assert_eq!(c.start(), 0);
        assert_eq!(c.end(), 60 * NS_PER_S);
        let sq = Scenario::synthesize(&SynthKind::Square { v_lo: 5.0, v_hi: 30.0, period_s: 20.0 }, 60 * NS_PER_S)
            .unwrap();
        assert_eq!(sq.velocity_at(5 * NS_PER_S), 5.0);
        assert_eq!(sq.velocity_at(15 * NS_PER_S), 30.0);
        assert_eq!(sq.velocity_at(25 * NS_PER_S), 5.0);
        assert!(Scenario::synthesize(&SynthKind::Constant { v: 50.0 }, NS_PER_S).is_err());

        let kind = SynthKind::RandomDrive { seed: 7, v_max: 31.0, a_max: 3.0 };
        let a = Scenario::synthesize(&kind, 60 * NS_PER_S).unwrap();
        let b = Scenario::synthesize(&kind, 60 * NS_PER_S).unwrap();
        assert_eq!(a, b);
        for w in a.samples().windows(2) {
            let dv = (w[1].1 - w[0].1).abs();
            assert!(dv <= 3.0 * 0.1 + 1e-9);
        }
    }

    proptest! {
        #[test]
        fn save_load_round_trip(raw in proptest::collection::vec((1u64..5_000_000_000, 0.0f64..40.0), 1..40)) {
            let mut t = 0;
            let samples: Vec<(Nanos, f64)> = raw.iter().map(|&(dt, v)| { t += dt; (t, v) }).collect();
            let s = Scenario::new("rt", samples).unwrap();
            let back = Scenario::from_csv_str(&s.to_csv_string(), Units::Mps, "rt", DEFAULT_V_MAX).unwrap();
            prop_assert_eq!(back.samples(), s.samples());
        }

        #[test]
        fn resample_idempotent(raw in proptest::collection::vec((1u64..3_000_000_000, 0.0f64..40.0), 1..20),
                               dt in 1_000_000u64..2_000_000_000) {
            let mut t = 0;
            let samples: Vec<(Nanos, f64)> = raw.iter().map(|&(d, v)| { t += d; (t, v) }).collect();
            let s = Scenario::new("r", samples).unwrap();
            let once = s.resample(dt).unwrap();
            let twice = once.resample(dt).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
