//! Aggregation (mean ± sample SD per scenario/strategy group) and Welch's
//! unequal-variance two-sided t-test.

use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::records::RunRecord;

/// No records were supplied to aggregate over.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("no records to aggregate")]
pub struct EmptyGroup;

/// Per-(scenario, strategy) summary row.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    /// Scenario id.
    pub scenario: String,
    /// Strategy name.
    pub strategy: String,
    /// Records in the group.
    pub n: usize,
    /// Mean evaluation success over all records.
    pub success_mean: f64,
    /// Sample (n−1) SD of evaluation success; 0 for a single record.
    pub success_sd: f64,
    /// Mean and sample SD of time-to-adapt over *converged* records only;
    /// `None` when nothing in the group converged.
    pub time_to_adapt: Option<(f64, f64)>,
    /// Records excluded from the time-to-adapt mean.
    pub did_not_converge: usize,
    /// Set when a reported SD is the degenerate single-sample 0.
    pub single_sample: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n−1 denominator); 0 for fewer than two points.
fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Groups records by (scenario, strategy) and summarizes each group. Rows
/// come back in lexicographic (scenario, strategy) order, so the table is
/// invariant to the input's record order.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<AggregateRow>, EmptyGroup> {
    if records.is_empty() {
        return Err(EmptyGroup);
    }
    let mut groups: BTreeMap<(String, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.scenario.clone(), r.strategy.clone())).or_default().push(r);
    }
    let mut rows = Vec::with_capacity(groups.len());
    for ((scenario, strategy), group) in groups {
        let success: Vec<f64> = group.iter().map(|r| r.post_novelty_success).collect();
        let tta: Vec<f64> =
            group.iter().filter(|r| r.converged).map(|r| r.time_to_adapt as f64).collect();
        rows.push(AggregateRow {
            scenario,
            strategy,
            n: group.len(),
            success_mean: mean(&success),
            success_sd: sample_sd(&success),
            time_to_adapt: if tta.is_empty() {
                None
            } else {
                Some((mean(&tta), sample_sd(&tta)))
            },
            did_not_converge: group.len() - tta.len(),
            single_sample: group.len() == 1,
        });
    }
    Ok(rows)
}

/// Both samples are too small or too flat for a t-statistic.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("samples too small or variance degenerate for a t-test")]
pub struct DegenerateVariance;

/// Welch's t-test result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Welch {
    /// The t statistic.
    pub t: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    /// Two-sided p-value.
    pub p: f64,
}

/// Welch's unequal-variance t-test, two-sided.
///
/// Samples of identical mean and zero pooled variance report `t = 0`,
/// `p = 1` (indistinguishable); zero variance with differing means has no
/// finite statistic and errors.
pub fn welch_ttest(a: &[f64], b: &[f64]) -> Result<Welch, DegenerateVariance> {
    if a.len() < 2 || b.len() < 2 {
        return Err(DegenerateVariance);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_sd(a).powi(2), sample_sd(b).powi(2));
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        return if ma == mb {
            Ok(Welch { t: 0.0, df: na + nb - 2.0, p: 1.0 })
        } else {
            Err(DegenerateVariance)
        };
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2
        / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|_| DegenerateVariance)?;
    let p = (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0);
    Ok(Welch { t, df, p })
}
