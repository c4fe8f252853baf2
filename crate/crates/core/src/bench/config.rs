//! Run configuration: a single JSON document.
//!
//! ```json
//! {
//!   "datasets": ["data/synth"],
//!   "detectors": [
//!     {"name": "ar", "builtin": {"kind": "ar", "window": 32}},
//!     {"name": "deep", "external": {"command": ["python", "det.py"]}, "parameter_count": 120000}
//!   ],
//!   "schemas": ["naive", "zero_shot"],
//!   "criteria": ["reduced_length_pa", "event_wise_pa:k=dataset:l=0"],
//!   "k_delay_overrides": {"synth": 5},
//!   "workers": 4,
//!   "seed": 7,
//!   "allow_statistical_pooling": false
//! }
//! ```
//!
//! Every field except `datasets` and `detectors` has a default. Relative
//! dataset paths resolve against the directory holding the config file.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::BenchError;
use crate::detectors::DetectorConfig;
use crate::external::ExternalDetectorSpec;
use crate::metrics::{EvalCriterion, PaVariant, DEFAULT_PROLONG_LEN};
use crate::schemas::Schema;

/// Where a criterion's latency limit comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KDelaySpec {
    /// No latency constraint.
    Off,
    Fixed(usize),
    /// Per-dataset: override, else the manifest's `k_delay`, else off.
    Dataset,
}

/// An evaluation criterion as written in configs and on the command line:
/// `variant[:k=N|k=dataset][:l=N]`, e.g. `rl:k=dataset:l=9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CriterionSpec {
    pub variant: PaVariant,
    pub k_delay: KDelaySpec,
    pub prolong_len: usize,
}

impl CriterionSpec {
    pub fn new(variant: PaVariant) -> Self {
        Self {
            variant,
            k_delay: KDelaySpec::Off,
            prolong_len: DEFAULT_PROLONG_LEN,
        }
    }

    pub fn with_k_delay(mut self, k: KDelaySpec) -> Self {
        self.k_delay = k;
        self
    }

    pub fn with_prolong_len(mut self, len: usize) -> Self {
        self.prolong_len = len;
        self
    }

    pub fn resolve(&self, dataset_k: Option<usize>) -> EvalCriterion {
        let k = match self.k_delay {
            KDelaySpec::Off => None,
            KDelaySpec::Fixed(k) => Some(k),
            KDelaySpec::Dataset => dataset_k,
        };
        EvalCriterion::new(self.variant).with_k_delay(k).with_prolong_len(self.prolong_len)
    }

    /// File-name friendly form, e.g. `event_wise_pa_kdataset_l9`.
    pub fn slug(&self) -> String {
        let k = match self.k_delay {
            KDelaySpec::Off => String::new(),
            KDelaySpec::Fixed(k) => format!("_k{k}"),
            KDelaySpec::Dataset => "_kdataset".into(),
        };
        format!("{}{k}_l{}", self.variant, self.prolong_len)
    }
}

impl From<EvalCriterion> for CriterionSpec {
    fn from(c: EvalCriterion) -> Self {
        Self {
            variant: c.variant,
            k_delay: c.k_delay.map_or(KDelaySpec::Off, KDelaySpec::Fixed),
            prolong_len: c.prolong_len,
        }
    }
}

impl fmt::Display for CriterionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.variant)?;
        match self.k_delay {
            KDelaySpec::Off => {}
            KDelaySpec::Fixed(k) => write!(f, ":k={k}")?,
            KDelaySpec::Dataset => write!(f, ":k=dataset")?,
        }
        write!(f, ":l={}", self.prolong_len)
    }
}

impl FromStr for CriterionSpec {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: String| BenchError::Config(format!("criterion '{s}': {msg}"));
        let mut parts = s.trim().split(':');
        let variant: PaVariant = parts
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|e: crate::metrics::MetricsError| bad(e.to_string()))?;
        let mut spec = CriterionSpec::new(variant);
        let (mut seen_k, mut seen_l) = (false, false);
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got '{part}'")))?;
            let number = || {
                value
                    .parse::<usize>()
                    .map_err(|_| bad(format!("'{value}' is not a non-negative integer")))
            };
            match key {
                "k" if !seen_k => {
                    seen_k = true;
                    spec.k_delay = if value == "dataset" {
                        KDelaySpec::Dataset
                    } else {
                        KDelaySpec::Fixed(number()?)
                    };
                }
                "l" if !seen_l => {
                    seen_l = true;
                    spec.prolong_len = number()?;
                }
                "k" | "l" => return Err(bad(format!("'{key}' given twice"))),
                other => return Err(bad(format!("unknown option '{other}'"))),
            }
        }
        Ok(spec)
    }
}

impl Serialize for CriterionSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CriterionSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorSource {
    Builtin(DetectorConfig),
    External(ExternalDetectorSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    /// Defaults to the built-in kind name; required for external detectors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub source: DetectorSource,
    /// Declared model size of an external detector, used for the
    /// inference-time / size trade-off plot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter_count: Option<usize>,
}

impl DetectorSpec {
    pub fn builtin(config: DetectorConfig) -> Self {
        Self {
            name: None,
            source: DetectorSource::Builtin(config),
            parameter_count: None,
        }
    }

    pub fn external(name: impl Into<String>, spec: ExternalDetectorSpec) -> Self {
        Self {
            name: Some(name.into()),
            source: DetectorSource::External(spec),
            parameter_count: None,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> String {
        match (&self.name, &self.source) {
            (Some(name), _) => name.clone(),
            (None, DetectorSource::Builtin(c)) => c.kind.as_str().to_string(),
            (None, DetectorSource::External(_)) => String::new(),
        }
    }

    /// Built-in detectors are the statistical ones: they assume a single
    /// stationary training series.
    pub fn is_statistical(&self) -> bool {
        matches!(self.source, DetectorSource::Builtin(_))
    }
}

fn default_schemas() -> Vec<Schema> {
    vec![Schema::Naive]
}

fn default_criteria() -> Vec<CriterionSpec> {
    PaVariant::ALL.into_iter().map(CriterionSpec::new).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub datasets: Vec<PathBuf>,
    pub detectors: Vec<DetectorSpec>,
    #[serde(default = "default_schemas")]
    pub schemas: Vec<Schema>,
    /// Defaults to the three variants with `l=9` and no latency limit.
    #[serde(default = "default_criteria")]
    pub criteria: Vec<CriterionSpec>,
    /// Dataset name (or `"*"` for every dataset) to K; wins over the
    /// manifest for `k=dataset` criteria.
    #[serde(default)]
    pub k_delay_overrides: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    /// Seed for zero-shot partitions.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub allow_statistical_pooling: bool,
}

impl RunConfig {
    pub fn new(datasets: Vec<PathBuf>, detectors: Vec<DetectorSpec>) -> Self {
        Self {
            datasets,
            detectors,
            schemas: default_schemas(),
            criteria: default_criteria(),
            k_delay_overrides: BTreeMap::new(),
            output_dir: None,
            workers: 0,
            seed: 0,
            allow_statistical_pooling: false,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let err = |m: &str| Err(BenchError::Config(m.to_string()));
        if self.datasets.is_empty() {
            return err("at least one dataset is required");
        }
        if self.detectors.is_empty() {
            return err("at least one detector is required");
        }
        if self.schemas.is_empty() {
            return err("at least one schema is required");
        }
        if self.criteria.is_empty() {
            return err("at least one criterion is required");
        }
        let mut names = HashSet::new();
        for d in &self.detectors {
            let name = d.name();
            if name.is_empty() {
                return err("external detectors need a name");
            }
            if name.contains(['/', '\\']) || name == "." || name == ".." {
                return Err(BenchError::Config(format!("detector name '{name}' is not a valid directory name")));
            }
            if !names.insert(name.clone()) {
                return Err(BenchError::Config(format!("duplicate detector name '{name}'")));
            }
            match &d.source {
                DetectorSource::Builtin(c) => c.validate().map_err(|e| BenchError::Config(format!("{name}: {e}")))?,
                DetectorSource::External(s) => s.validate().map_err(|e| BenchError::Config(format!("{name}: {e}")))?,
            }
        }
        let mut seen = HashSet::new();
        for s in &self.schemas {
            if !seen.insert(*s) {
                return Err(BenchError::Config(format!("schema '{s}' listed twice")));
            }
        }
        let mut seen = HashSet::new();
        for c in &self.criteria {
            if !seen.insert(*c) {
                return Err(BenchError::Config(format!("criterion '{c}' listed twice")));
            }
        }
        Ok(())
    }
}

pub fn parse_run_config(text: &str) -> Result<RunConfig, BenchError> {
    let config: RunConfig = serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Reads a config file, resolving relative dataset paths against its
/// directory.
pub fn load_run_config(path: impl AsRef<Path>) -> Result<RunConfig, BenchError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
    let mut config = parse_run_config(&text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    for d in &mut config.datasets {
        if d.is_relative() {
            *d = base.join(&*d);
        }
    }
    if let Some(out) = &mut config.output_dir {
        if out.is_relative() {
            *out = base.join(&*out);
        }
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::DetectorKind;
    use proptest::prelude::*;

    #[test]
    fn criterion_grammar() {
        let c: CriterionSpec = "rl".parse().unwrap();
        assert_eq!(c, CriterionSpec::new(PaVariant::ReducedLengthPa));
        assert_eq!(c.to_string(), "reduced_length_pa:l=9");
        let c: CriterionSpec = "event_wise_pa:k=3:l=0".parse().unwrap();
        assert_eq!(c.k_delay, KDelaySpec::Fixed(3));
        assert_eq!(c.prolong_len, 0);
        assert_eq!(c.slug(), "event_wise_pa_k3_l0");
        let c: CriterionSpec = "pw:l=2:k=dataset".parse().unwrap();
        assert_eq!(c.to_string(), "point_wise_pa:k=dataset:l=2");
        assert_eq!(c.resolve(Some(4)).k_delay, Some(4));
        assert_eq!(c.resolve(None).k_delay, None);
        for bad in ["", "xx", "rl:k", "rl:k=-1", "rl:k=1:k=2", "rl:m=3", "rl:l=dataset", "rl::"] {
            assert!(bad.parse::<CriterionSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = parse_run_config(r#"{"datasets":["d"],"detectors":[{"builtin":{"kind":"ar"}}]}"#).unwrap();
        assert_eq!(c.schemas, vec![Schema::Naive]);
        assert_eq!(c.criteria.len(), 3);
        assert_eq!(c.detectors[0].name(), "ar");
        assert!(c.detectors[0].is_statistical());

        let c = parse_run_config(
            r#"{"datasets":["d"],"detectors":[{"name":"x","external":{"command":["sh"]},"parameter_count":5}],
                "criteria":["ew:k=dataset"],"schemas":["zero_shot"],"k_delay_overrides":{"d":2}}"#,
        )
        .unwrap();
        assert_eq!(c.detectors[0].parameter_count, Some(5));
        assert!(!c.detectors[0].is_statistical());
        assert_eq!(c.criteria[0].k_delay, KDelaySpec::Dataset);

        for bad in [
            r#"{"datasets":[],"detectors":[{"builtin":{"kind":"ar"}}]}"#,
            r#"{"datasets":["d"],"detectors":[]}"#,
            r#"{"datasets":["d"],"detectors":[{"builtin":{"kind":"ar"}}],"schemas":[]}"#,
            r#"{"datasets":["d"],"detectors":[{"builtin":{"kind":"ar"}},{"builtin":{"kind":"ar","window":3}}]}"#,
            r#"{"datasets":["d"],"detectors":[{"external":{"command":["sh"]}}]}"#,
            r#"{"datasets":["d"],"detectors":[{"builtin":{"kind":"sub_lof","window":1}}]}"#,
            r#"{"datasets":["d"],"detectors":[{"builtin":{"kind":"ar"}}],"criteria":["rl","rl:l=9"]}"#,
            r#"{"datasets":["d"],"detectors":[{"builtin":{"kind":"ar"}}],"bogus":1}"#,
        ] {
            assert!(matches!(parse_run_config(bad), Err(BenchError::Config(_))), "{bad}");
        }
    }

    #[test]
    fn config_round_trip() {
        let mut c = RunConfig::new(
            vec!["a".into()],
            vec![DetectorSpec::builtin(DetectorConfig::new(DetectorKind::MatrixProfile).with_window(8))],
        );
        c.criteria = vec!["rl:k=dataset:l=3".parse().unwrap()];
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(parse_run_config(&text).unwrap(), c);
    }

    proptest! {
        #[test]
        fn criterion_display_round_trips(v in 0usize..3, k in prop_oneof![Just(None), Just(Some(None)), (0usize..50).prop_map(|k| Some(Some(k)))], l in 0usize..30) {
            let k = match k {
                None => KDelaySpec::Off,
                Some(None) => KDelaySpec::Dataset,
                Some(Some(k)) => KDelaySpec::Fixed(k),
            };
            let spec = CriterionSpec::new(PaVariant::ALL[v]).with_k_delay(k).with_prolong_len(l);
            prop_assert_eq!(spec.to_string().parse::<CriterionSpec>().unwrap(), spec);
        }
    }
}
