//! Seeded synthetic series with five injected anomaly types.
//!
//! The clean base is a sum of sinusoids plus Gaussian noise:
//! `x_t = sum_i A_i sin(2 pi (t mod T_i) / T_i + phi_i) + eps_t`. Reducing
//! `t` modulo the period keeps integer-period signals bit-exactly periodic.
//! Draw order from [`SplitMix64`]: one phase per component, then one noise
//! variate per timestamp (only when `noise_std > 0`), then placement and
//! injection draws in plan order.
//!
//! Injection rules (labels are set on the affected indices only):
//!
//! - `global`: one point set to `mean ± global_sigmas * std` of the base.
//! - `contextual`: one point set to `local_mean ± contextual_sigmas *
//!   local_std` over the preceding `contextual_window` base points, clamped
//!   into the base's `[min, max]` so it is never a global outlier.
//! - `seasonal`: the dominant sinusoid runs `seasonal_factor` times faster
//!   inside the segment, phase-continuous at its start, same amplitude.
//! - `trend`: a ramp `beta * (t - start)` is added; after the segment the
//!   offset decays linearly to zero over an unlabeled relaxation window of
//!   the same length.
//! - `shapelet`: the segment is replaced by a square wave with the segment's
//!   mean and half-range, at the dominant period.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::{write_dataset, CurveEntry, Dataset, DatasetError, DatasetManifest, DefaultSplit};
use crate::rng::SplitMix64;
use crate::series::{split_series, SeriesError, TimeSeries, DEFAULT_RATIO};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
    #[error("cannot place {kind:?} anomaly of length {len} without overlap")]
    PlanInfeasible { kind: AnomalyKind, len: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    Global,
    Contextual,
    Seasonal,
    Trend,
    Shapelet,
}

impl AnomalyKind {
    fn is_point(self) -> bool {
        matches!(self, AnomalyKind::Global | AnomalyKind::Contextual)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub period: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyRequest {
    pub kind: AnomalyKind,
    #[serde(default = "one")]
    pub count: usize,
    /// Segment length range; ignored for point kinds.
    #[serde(default = "default_min_len")]
    pub min_len: usize,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
}

fn one() -> usize {
    1
}

fn default_min_len() -> usize {
    20
}

fn default_max_len() -> usize {
    60
}

impl AnomalyRequest {
    pub fn new(kind: AnomalyKind, count: usize) -> Self {
        Self {
            kind,
            count,
            min_len: default_min_len(),
            max_len: default_max_len(),
        }
    }

    pub fn with_len(mut self, min_len: usize, max_len: usize) -> Self {
        self.min_len = min_len;
        self.max_len = max_len;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectRegion {
    #[default]
    TestOnly,
    Anywhere,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InjectionParams {
    pub global_sigmas: f64,
    pub contextual_sigmas: f64,
    pub contextual_window: usize,
    pub seasonal_factor: f64,
    /// Peak trend offset in units of the base standard deviation.
    pub trend_magnitude: f64,
}

impl Default for InjectionParams {
    fn default() -> Self {
        Self {
            global_sigmas: 8.0,
            contextual_sigmas: 4.0,
            contextual_window: 32,
            seasonal_factor: 2.0,
            trend_magnitude: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub id: String,
    pub length: usize,
    pub components: Vec<Sinusoid>,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub anomalies: Vec<AnomalyRequest>,
    #[serde(default)]
    pub inject_region: InjectRegion,
    #[serde(default)]
    pub params: InjectionParams,
    #[serde(default)]
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(id: impl Into<String>, length: usize, seed: u64) -> Self {
        Self {
            id: id.into(),
            length,
            components: vec![Sinusoid {
                period: 50.0,
                amplitude: 1.0,
            }],
            noise_std: 0.0,
            anomalies: Vec::new(),
            inject_region: InjectRegion::TestOnly,
            params: InjectionParams::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidConfig(msg));
        if self.length < 100 {
            return bad(format!("length must be >= 100, got {}", self.length));
        }
        if self.components.is_empty() {
            return bad("at least one sinusoid is required".into());
        }
        for c in &self.components {
            if !(c.period > 0.0 && c.period.is_finite()) || !(c.amplitude >= 0.0 && c.amplitude.is_finite()) {
                return bad(format!("invalid sinusoid {c:?}"));
            }
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise_std must be >= 0, got {}", self.noise_std));
        }
        for a in &self.anomalies {
            if a.count == 0 {
                return bad(format!("{:?}: count must be >= 1", a.kind));
            }
            if !a.kind.is_point() && (a.min_len == 0 || a.min_len > a.max_len) {
                return bad(format!("{:?}: invalid length range {}..={}", a.kind, a.min_len, a.max_len));
            }
        }
        let p = &self.params;
        if p.contextual_window < 2 || p.seasonal_factor.is_nan() || p.seasonal_factor <= 0.0 {
            return bad("contextual_window must be >= 2 and seasonal_factor > 0".into());
        }
        Ok(())
    }
}

struct Placement {
    kind: AnomalyKind,
    start: usize,
    len: usize,
}

fn dominant(components: &[Sinusoid]) -> usize {
    let mut best = 0;
    for (i, c) in components.iter().enumerate() {
        if c.amplitude > components[best].amplitude {
            best = i;
        }
    }
    best
}

fn phase_angle(t: usize, period: f64, phase: f64) -> f64 {
    TAU * (t as f64).rem_euclid(period) / period + phase
}

fn moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Generates one labeled series with a 4:1:5 split.
#[allow(clippy::needless_range_loop)]
pub fn generate(config: &SynthConfig) -> Result<TimeSeries, SynthError> {
    config.validate()?;
    let n = config.length;
    let mut rng = SplitMix64::new(config.seed);
    let phases: Vec<f64> = config.components.iter().map(|_| rng.next_f64() * TAU).collect();
    let mut base: Vec<f64> = (0..n)
        .map(|t| {
            config
                .components
                .iter()
                .zip(&phases)
                .map(|(c, &phi)| c.amplitude * phase_angle(t, c.period, phi).sin())
                .sum()
        })
        .collect();
    if config.noise_std > 0.0 {
        for x in &mut base {
            *x += config.noise_std * rng.normal();
        }
    }

    let split = split_series(n, DEFAULT_RATIO)?;
    let region = match config.inject_region {
        InjectRegion::TestOnly => split.valid_end..n,
        InjectRegion::Anywhere => 0..n,
    };
    let placements = place(config, region, &mut rng)?;

    let (global_mean, global_std) = moments(&base);
    let scale = if global_std > 0.0 { global_std } else { 1.0 };
    let base_min = base.iter().copied().fold(f64::INFINITY, f64::min);
    let base_max = base.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let d = dominant(&config.components);
    let dom = config.components[d];
    let p = &config.params;

    let mut values = base.clone();
    let mut labels = vec![0u8; n];
    for pl in &placements {
        let (s, e) = (pl.start, pl.start + pl.len - 1);
        labels[s..=e].fill(1);
        match pl.kind {
            AnomalyKind::Global => {
                values[s] = global_mean + rng.sign() * p.global_sigmas * scale;
            }
            AnomalyKind::Contextual => {
                let lo = s.saturating_sub(p.contextual_window);
                let ctx = if lo < s { &base[lo..s] } else { &base[s + 1..(s + 1 + p.contextual_window).min(n)] };
                let (local_mean, local_std) = moments(ctx);
                let spread = p.contextual_sigmas * if local_std > 0.0 { local_std } else { scale };
                let sign = rng.sign();
                let candidate = |sg: f64| (local_mean + sg * spread).clamp(base_min, base_max);
                let mut v = candidate(sign);
                if (v - base[s]).abs() < 0.5 * spread {
                    v = candidate(-sign);
                }
                values[s] = v;
            }
            AnomalyKind::Seasonal => {
                let theta_s = phase_angle(s, dom.period, phases[d]);
                for t in s..=e {
                    let original = dom.amplitude * phase_angle(t, dom.period, phases[d]).sin();
                    let offset = TAU * (t - s) as f64 / dom.period;
                    let faster = dom.amplitude * (theta_s + p.seasonal_factor * offset).sin();
                    values[t] += faster - original;
                }
            }
            AnomalyKind::Trend => {
                let beta = rng.sign() * p.trend_magnitude * scale / pl.len as f64;
                for t in s..=e {
                    values[t] += beta * (t - s) as f64;
                }
                let peak = beta * (e - s) as f64;
                for t in e + 1..=(e + pl.len).min(n - 1) {
                    values[t] += peak * (1.0 - (t - e) as f64 / pl.len as f64);
                }
            }
            AnomalyKind::Shapelet => {
                let seg = &base[s..=e];
                let (mean, _) = moments(seg);
                let lo = seg.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = seg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let half_range = if hi > lo { (hi - lo) / 2.0 } else { scale };
                for t in s..=e {
                    let wave = (TAU * (t - s) as f64 / dom.period).sin();
                    values[t] = mean + if wave >= 0.0 { half_range } else { -half_range };
                }
            }
        }
    }
    Ok(TimeSeries::new(config.id.clone(), values, labels, split)?)
}

const PLACEMENT_ATTEMPTS: usize = 1000;

fn place(
    config: &SynthConfig,
    region: std::ops::Range<usize>,
    rng: &mut SplitMix64,
) -> Result<Vec<Placement>, SynthError> {
    let n = config.length;
    // Reserved indices, including each footprint's one-point margin.
    let mut taken = vec![false; n];
    let mut out = Vec::new();
    for req in &config.anomalies {
        for _ in 0..req.count {
            let len = if req.kind.is_point() {
                1
            } else {
                rng.range_inclusive(req.min_len, req.max_len)
            };
            let footprint = if req.kind == AnomalyKind::Trend { 2 * len } else { len };
            let infeasible = SynthError::PlanInfeasible { kind: req.kind, len };
            if footprint > region.len() {
                return Err(infeasible);
            }
            let last_start = region.end - footprint;
            let mut placed = None;
            for _ in 0..PLACEMENT_ATTEMPTS {
                let start = rng.range_inclusive(region.start, last_start);
                let lo = start.saturating_sub(1);
                let hi = (start + footprint).min(n - 1);
                if !taken[lo..=hi].iter().any(|&b| b) {
                    placed = Some(start);
                    break;
                }
            }
            let start = placed.ok_or(infeasible)?;
            taken[start..start + footprint].fill(true);
            out.push(Placement {
                kind: req.kind,
                start,
                len,
            });
        }
    }
    Ok(out)
}

/// Document accepted by `tsadbench gen`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthDatasetConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_delay: Option<usize>,
    pub curves: Vec<SynthConfig>,
}

/// Generates every curve and writes the canonical dataset layout.
pub fn generate_dataset(config: &SynthDatasetConfig, root: impl AsRef<Path>) -> Result<Dataset, SynthError> {
    if config.curves.is_empty() {
        return Err(SynthError::InvalidConfig("no curves requested".into()));
    }
    let mut ids = HashSet::new();
    for c in &config.curves {
        if !ids.insert(c.id.as_str()) {
            return Err(SynthError::InvalidConfig(format!("duplicate curve id '{}'", c.id)));
        }
    }
    let series = config.curves.iter().map(generate).collect::<Result<Vec<_>, _>>()?;
    let dataset = Dataset {
        manifest: DatasetManifest {
            name: config.name.clone(),
            default_split: DefaultSplit::Ratio(DEFAULT_RATIO),
            k_delay: config.k_delay,
            curves: config.curves.iter().map(|c| CurveEntry::new(c.id.clone())).collect(),
        },
        series,
    };
    crate::datasets::parse_manifest(&dataset.manifest.to_json())?;
    write_dataset(root, &dataset)?;
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::load_dataset;
    use crate::series::extract_segments;

    fn config_with(kind: AnomalyKind, count: usize) -> SynthConfig {
        let mut c = SynthConfig::new("c", 2000, 17);
        c.noise_std = 0.05;
        c.components.push(Sinusoid {
            period: 13.0,
            amplitude: 0.3,
        });
        c.anomalies.push(AnomalyRequest::new(kind, count));
        c
    }

    #[test]
    fn noise_free_base_is_a_sinusoid() {
        let c = SynthConfig::new("c", 400, 3);
        let s = generate(&c).unwrap();
        assert!(s.labels().iter().all(|&l| l == 0));
        let mut rng = SplitMix64::new(3);
        let phi = rng.next_f64() * TAU;
        for (t, v) in s.values().iter().enumerate() {
            assert_eq!(*v, (TAU * (t as f64 % 50.0) / 50.0 + phi).sin());
        }
        // Exactly periodic.
        assert_eq!(s.values()[7], s.values()[357]);
    }

    #[test]
    fn deterministic_per_seed() {
        let mut c = config_with(AnomalyKind::Shapelet, 2);
        c.anomalies.push(AnomalyRequest::new(AnomalyKind::Global, 3));
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        let mut other = c.clone();
        other.seed += 1;
        assert_ne!(generate(&c).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn global_anomaly_deviates_strongly() {
        let c = config_with(AnomalyKind::Global, 4);
        let s = generate(&c).unwrap();
        let mut clean = c.clone();
        clean.anomalies.clear();
        let base = generate(&clean).unwrap();
        let (_, std) = moments(base.values());
        let segs = extract_segments(s.labels());
        assert_eq!(segs.len(), 4);
        for seg in segs {
            assert_eq!(seg.len(), 1);
            let dev = (s.values()[seg.start] - base.values()[seg.start]).abs();
            assert!(dev >= 6.0 * std, "deviation {dev} vs std {std}");
        }
    }

    #[test]
    fn contextual_stays_within_base_range() {
        let c = config_with(AnomalyKind::Contextual, 5);
        let s = generate(&c).unwrap();
        let mut clean = c.clone();
        clean.anomalies.clear();
        let base = generate(&clean).unwrap();
        let lo = base.values().iter().copied().fold(f64::INFINITY, f64::min);
        let hi = base.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (i, &l) in s.labels().iter().enumerate() {
            if l == 1 {
                assert!((lo..=hi).contains(&s.values()[i]));
                assert_ne!(s.values()[i], base.values()[i]);
            }
        }
    }

    #[test]
    fn labels_only_on_injected_indices() {
        for kind in [AnomalyKind::Seasonal, AnomalyKind::Trend, AnomalyKind::Shapelet] {
            let c = config_with(kind, 3);
            let s = generate(&c).unwrap();
            let mut clean = c.clone();
            clean.anomalies.clear();
            let base = generate(&clean).unwrap();
            let segs = extract_segments(s.labels());
            assert_eq!(segs.len(), 3, "{kind:?}");
            let split = s.split();
            assert!(s.labels()[..split.valid_end].iter().all(|&l| l == 0));
            for (i, (a, b)) in s.values().iter().zip(base.values()).enumerate() {
                if a != b && s.labels()[i] == 0 {
                    // Only the trend relaxation tail may differ unlabeled.
                    assert_eq!(kind, AnomalyKind::Trend, "index {i}");
                    let seg = segs.iter().find(|g| g.end < i && i <= g.end + g.len()).unwrap();
                    assert!(i > seg.end);
                }
            }
        }
    }

    #[test]
    fn trend_relaxation_returns_to_base() {
        let c = config_with(AnomalyKind::Trend, 1);
        let s = generate(&c).unwrap();
        let mut clean = c.clone();
        clean.anomalies.clear();
        let base = generate(&clean).unwrap();
        let seg = extract_segments(s.labels())[0];
        let after = seg.end + seg.len();
        assert!((s.values()[after] - base.values()[after]).abs() < 1e-12);
    }

    #[test]
    fn infeasible_plans() {
        let mut c = SynthConfig::new("c", 100, 1);
        c.anomalies.push(AnomalyRequest::new(AnomalyKind::Shapelet, 1).with_len(60, 60));
        assert!(matches!(generate(&c), Err(SynthError::PlanInfeasible { .. })));
        let mut c = SynthConfig::new("c", 100, 1);
        c.anomalies.push(AnomalyRequest::new(AnomalyKind::Global, 40));
        assert!(matches!(generate(&c), Err(SynthError::PlanInfeasible { .. })));
        assert!(generate(&SynthConfig::new("c", 99, 1)).is_err());
    }

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let config = SynthDatasetConfig {
            name: "synthetic".into(),
            k_delay: Some(5),
            curves: (0..5)
                .map(|i| {
                    let mut c = config_with(AnomalyKind::Global, 2);
                    c.id = format!("curve{i}");
                    c.seed = i;
                    c
                })
                .collect(),
        };
        let written = generate_dataset(&config, dir.path()).unwrap();
        let loaded = load_dataset(dir.path()).unwrap();
        assert_eq!(loaded.series.len(), 5);
        assert_eq!(loaded, written);

        let empty = SynthDatasetConfig {
            curves: vec![],
            ..config.clone()
        };
        assert!(generate_dataset(&empty, dir.path()).is_err());
    }
}
