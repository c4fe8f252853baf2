use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Default extension applied to the end of every true segment.
pub const DEFAULT_PROLONG_LEN: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaVariant {
    PointWisePa,
    EventWisePa,
    ReducedLengthPa,
}

impl PaVariant {
    pub const ALL: [PaVariant; 3] = [
        PaVariant::PointWisePa,
        PaVariant::EventWisePa,
        PaVariant::ReducedLengthPa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PaVariant::PointWisePa => "point_wise_pa",
            PaVariant::EventWisePa => "event_wise_pa",
            PaVariant::ReducedLengthPa => "reduced_length_pa",
        }
    }
}

impl fmt::Display for PaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PaVariant {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "point_wise_pa" | "point_wise" | "pw" => Ok(PaVariant::PointWisePa),
            "event_wise_pa" | "event_wise" | "ew" => Ok(PaVariant::EventWisePa),
            "reduced_length_pa" | "reduced_length" | "rl" => Ok(PaVariant::ReducedLengthPa),
            other => Err(MetricsError::InvalidCriterion(format!(
                "unknown point-adjustment variant '{other}'"
            ))),
        }
    }
}

/// A fully resolved evaluation configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EvalCriterion {
    pub variant: PaVariant,
    /// Latency limit; `None` disables the k-delay constraint.
    #[serde(default)]
    pub k_delay: Option<usize>,
    #[serde(default = "default_prolong_len")]
    pub prolong_len: usize,
}

fn default_prolong_len() -> usize {
    DEFAULT_PROLONG_LEN
}

impl Default for EvalCriterion {
    fn default() -> Self {
        Self::new(PaVariant::ReducedLengthPa)
    }
}

impl EvalCriterion {
    pub fn new(variant: PaVariant) -> Self {
        Self {
            variant,
            k_delay: None,
            prolong_len: DEFAULT_PROLONG_LEN,
        }
    }

    pub fn with_k_delay(mut self, k: Option<usize>) -> Self {
        self.k_delay = k;
        self
    }

    pub fn with_prolong_len(mut self, len: usize) -> Self {
        self.prolong_len = len;
        self
    }

    /// File-name friendly identifier, e.g. `reduced_length_pa_k3_l9`.
    pub fn slug(&self) -> String {
        match self.k_delay {
            Some(k) => format!("{}_k{}_l{}", self.variant, k, self.prolong_len),
            None => format!("{}_l{}", self.variant, self.prolong_len),
        }
    }
}

impl fmt::Display for EvalCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.variant)?;
        if let Some(k) = self.k_delay {
            write!(f, ":k={k}")?;
        }
        write!(f, ":l={}", self.prolong_len)
    }
}
