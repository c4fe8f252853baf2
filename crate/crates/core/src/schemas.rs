//! Learning schemas: how training pools map to evaluation targets.
//!
//! - naive: one task per series, trained on that series alone.
//! - all-in-one: one task whose pool holds every series' train region.
//! - zero-shot: the series are split into two disjoint halves by a seeded
//!   shuffle; one half trains, the other is evaluated.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SplitMix64;
use crate::series::TimeSeries;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("dataset has no series to plan")]
    EmptyDataset,
    #[error("zero-shot planning needs at least 2 series, found {0}")]
    TooFewSeries(usize),
    #[error("unknown schema '{0}'")]
    UnknownSchema(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    Naive,
    AllInOne,
    ZeroShot,
}

impl Schema {
    pub fn as_str(self) -> &'static str {
        match self {
            Schema::Naive => "naive",
            Schema::AllInOne => "all_in_one",
            Schema::ZeroShot => "zero_shot",
        }
    }

    /// Schemas whose training pool mixes several series.
    pub fn is_pooled(self) -> bool {
        !matches!(self, Schema::Naive)
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Schema {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Schema::Naive),
            "all_in_one" | "all-in-one" => Ok(Schema::AllInOne),
            "zero_shot" | "zero-shot" => Ok(Schema::ZeroShot),
            other => Err(PlanError::UnknownSchema(other.to_string())),
        }
    }
}

/// Half-open index range `[start, end)` of one series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionRef {
    pub series_id: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    /// Training regions; each stays a separate segment, never concatenated.
    pub train_refs: Vec<RegionRef>,
    /// Test regions to score.
    pub eval_refs: Vec<RegionRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkPlan {
    pub schema: Schema,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub tasks: Vec<Task>,
}

impl BenchmarkPlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialization is infallible")
    }
}

fn train_ref(series: &TimeSeries) -> RegionRef {
    RegionRef {
        series_id: series.id().to_string(),
        start: 0,
        end: series.split().train_end,
    }
}

fn test_ref(series: &TimeSeries) -> RegionRef {
    RegionRef {
        series_id: series.id().to_string(),
        start: series.split().valid_end,
        end: series.len(),
    }
}

pub fn plan_naive(series: &[TimeSeries]) -> Result<BenchmarkPlan, PlanError> {
    if series.is_empty() {
        return Err(PlanError::EmptyDataset);
    }
    Ok(BenchmarkPlan {
        schema: Schema::Naive,
        seed: None,
        tasks: series
            .iter()
            .map(|s| Task {
                train_refs: vec![train_ref(s)],
                eval_refs: vec![test_ref(s)],
            })
            .collect(),
    })
}

pub fn plan_all_in_one(series: &[TimeSeries]) -> Result<BenchmarkPlan, PlanError> {
    if series.is_empty() {
        return Err(PlanError::EmptyDataset);
    }
    Ok(BenchmarkPlan {
        schema: Schema::AllInOne,
        seed: None,
        tasks: vec![Task {
            train_refs: series.iter().map(train_ref).collect(),
            eval_refs: series.iter().map(test_ref).collect(),
        }],
    })
}

/// Ids are sorted, shuffled with Fisher–Yates over SplitMix64(`seed`), and
/// the first `ceil(m / 2)` form the training subset.
pub fn plan_zero_shot(series: &[TimeSeries], seed: u64) -> Result<BenchmarkPlan, PlanError> {
    if series.len() < 2 {
        return Err(PlanError::TooFewSeries(series.len()));
    }
    let mut order: Vec<&TimeSeries> = series.iter().collect();
    order.sort_by(|a, b| a.id().cmp(b.id()));
    SplitMix64::new(seed).shuffle(&mut order);
    let n_train = series.len().div_ceil(2);
    let (train, test) = order.split_at(n_train);
    Ok(BenchmarkPlan {
        schema: Schema::ZeroShot,
        seed: Some(seed),
        tasks: vec![Task {
            train_refs: train.iter().map(|s| train_ref(s)).collect(),
            eval_refs: test.iter().map(|s| test_ref(s)).collect(),
        }],
    })
}

pub fn plan(series: &[TimeSeries], schema: Schema, seed: u64) -> Result<BenchmarkPlan, PlanError> {
    match schema {
        Schema::Naive => plan_naive(series),
        Schema::AllInOne => plan_all_in_one(series),
        Schema::ZeroShot => plan_zero_shot(series, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn dataset(m: usize) -> Vec<TimeSeries> {
        (0..m)
            .map(|i| {
                TimeSeries::with_ratio_split(format!("s{i:02}"), vec![0.0; 20 + i], vec![0; 20 + i])
                    .unwrap()
            })
            .collect()
    }

    fn ids(refs: &[RegionRef]) -> BTreeSet<String> {
        refs.iter().map(|r| r.series_id.clone()).collect()
    }

    fn assert_no_test_in_training(plan: &BenchmarkPlan, series: &[TimeSeries]) {
        for task in &plan.tasks {
            for r in &task.train_refs {
                let s = series.iter().find(|s| s.id() == r.series_id).unwrap();
                assert!(r.end <= s.split().valid_end);
            }
            for r in &task.eval_refs {
                let s = series.iter().find(|s| s.id() == r.series_id).unwrap();
                assert_eq!((r.start, r.end), (s.split().valid_end, s.len()));
            }
        }
    }

    #[test]
    fn naive_is_self_referential() {
        let data = dataset(3);
        let plan = plan_naive(&data).unwrap();
        assert_eq!(plan.tasks.len(), 3);
        for task in &plan.tasks {
            assert_eq!(ids(&task.train_refs), ids(&task.eval_refs));
            assert_eq!(task.train_refs.len(), 1);
        }
        assert_eq!(plan_naive(&dataset(1)).unwrap().tasks.len(), 1);
        assert_eq!(plan_naive(&[]), Err(PlanError::EmptyDataset));
        assert_no_test_in_training(&plan, &data);
    }

    #[test]
    fn all_in_one_pools_everything_once() {
        let data = dataset(4);
        let plan = plan_all_in_one(&data).unwrap();
        assert_eq!(plan.tasks.len(), 1);
        let task = &plan.tasks[0];
        assert_eq!(task.train_refs.len(), 4);
        assert_eq!(ids(&task.train_refs).len(), 4);
        assert_eq!(task.eval_refs.len(), 4);
        assert_no_test_in_training(&plan, &data);

        let single = dataset(1);
        let pooled = plan_all_in_one(&single).unwrap();
        assert_eq!(pooled.tasks, plan_naive(&single).unwrap().tasks);
    }

    #[test]
    fn zero_shot_halves() {
        let data = dataset(4);
        let plan = plan_zero_shot(&data, 99).unwrap();
        let task = &plan.tasks[0];
        assert_eq!(task.train_refs.len(), 2);
        assert_eq!(task.eval_refs.len(), 2);
        assert!(ids(&task.train_refs).is_disjoint(&ids(&task.eval_refs)));
        assert_eq!(plan_zero_shot(&data, 99).unwrap().to_json(), plan.to_json());
        assert_eq!(plan_zero_shot(&dataset(1), 0), Err(PlanError::TooFewSeries(1)));
        assert_no_test_in_training(&plan, &data);
    }

    #[test]
    fn zero_shot_odd_count_favours_training() {
        let plan = plan_zero_shot(&dataset(5), 1).unwrap();
        assert_eq!(plan.tasks[0].train_refs.len(), 3);
        assert_eq!(plan.tasks[0].eval_refs.len(), 2);
    }

    #[test]
    fn zero_shot_partitions_for_many_seeds() {
        let data = dataset(10);
        let all: BTreeSet<String> = data.iter().map(|s| s.id().to_string()).collect();
        let mut distinct = BTreeSet::new();
        for seed in 0..100u64 {
            let plan = plan_zero_shot(&data, seed.wrapping_mul(0x9E37_79B9)).unwrap();
            let train = ids(&plan.tasks[0].train_refs);
            let test = ids(&plan.tasks[0].eval_refs);
            assert_eq!((train.len(), test.len()), (5, 5));
            assert!(train.is_disjoint(&test));
            assert_eq!(train.union(&test).cloned().collect::<BTreeSet<_>>(), all);
            distinct.insert(train.into_iter().collect::<Vec<_>>());
        }
        assert!(distinct.len() > 1);
    }

    #[test]
    fn schema_names_round_trip() {
        for s in [Schema::Naive, Schema::AllInOne, Schema::ZeroShot] {
            assert_eq!(s.as_str().parse::<Schema>().unwrap(), s);
        }
        assert!("kfold".parse::<Schema>().is_err());
    }
}
