use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// One curve's headline metrics, tagged with its dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveScore {
    pub dataset: String,
    pub curve: String,
    pub f1_best: f64,
    pub auprc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetScore {
    pub dataset: String,
    pub curves: usize,
    pub f1_best: f64,
    pub auprc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub datasets: Vec<DatasetScore>,
    pub f1_best: f64,
    pub auprc: f64,
}

// Summation in sorted order makes the result independent of input order down
// to the last bit.
fn mean(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// Dataset score = unweighted mean over its curves; overall = unweighted mean
/// over datasets, regardless of how many curves each dataset holds.
pub fn aggregate(
    per_curve: &[CurveScore],
    datasets: &[String],
) -> Result<AggregateReport, MetricsError> {
    let mut grouped: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for name in datasets {
        grouped.entry(name.as_str()).or_default();
    }
    for c in per_curve {
        let entry = grouped.entry(c.dataset.as_str()).or_default();
        entry.0.push(c.f1_best);
        entry.1.push(c.auprc);
    }
    if grouped.is_empty() {
        return Err(MetricsError::EmptyDataset(String::new()));
    }
    let mut out = Vec::with_capacity(grouped.len());
    for (name, (f1s, auprcs)) in grouped {
        if f1s.is_empty() {
            return Err(MetricsError::EmptyDataset(name.to_string()));
        }
        out.push(DatasetScore {
            dataset: name.to_string(),
            curves: f1s.len(),
            f1_best: mean(f1s),
            auprc: mean(auprcs),
        });
    }
    Ok(AggregateReport {
        f1_best: mean(out.iter().map(|d| d.f1_best).collect()),
        auprc: mean(out.iter().map(|d| d.auprc).collect()),
        datasets: out,
    })
}
