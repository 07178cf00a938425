//! Binary classification metrics: ranking areas, confusion-matrix ratios and
//! decision-threshold selection.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

fn class_counts(labels: &[bool]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&l| l).count();
    (pos, labels.len() - pos)
}

fn check_lengths(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    Ok(())
}

fn require_both_classes(labels: &[bool]) -> Result<(usize, usize)> {
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateClass(format!(
            "need both classes, got {pos} positive / {neg} negative"
        )));
    }
    Ok((pos, neg))
}

/// Area under the ROC curve as the Mann–Whitney statistic: the fraction of
/// (positive, negative) pairs ranked correctly, ties counting one half.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let (pos, neg) = require_both_classes(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Twice the positive rank sum keeps every quantity an exact integer.
    let mut twice_rank_sum: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let twice_rank = (i + j + 2) as u64;
        let tied_pos = order[i..=j].iter().filter(|&&k| labels[k]).count() as u64;
        twice_rank_sum += twice_rank * tied_pos;
        i = j + 1;
    }
    let pos = pos as u64;
    let twice_u = twice_rank_sum - pos * (pos + 1);
    Ok(twice_u as f64 / 2.0 / (pos * neg as u64) as f64)
}

/// Average precision: `Σ (R_n − R_{n−1})·P_n` over a descending ranking, ties
/// broken by original index.
pub fn auprc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let (pos, _) = class_counts(labels);
    if pos == 0 {
        return Err(Error::DegenerateClass("average precision needs a positive".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &idx) in order.iter().enumerate() {
        if labels[idx] {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / pos as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    /// Positive prediction iff `score ≥ tau`.
    pub fn at_threshold(scores: &[f64], labels: &[bool], tau: f64) -> Self {
        let mut c = Self::default();
        for (&s, &l) in scores.iter().zip(labels) {
            match (s >= tau, l) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Threshold-dependent metrics. `None` marks a ratio with a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionMetrics {
    pub counts: ConfusionCounts,
    pub accuracy: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
}

impl ConfusionMetrics {
    pub fn from_counts(c: ConfusionCounts) -> Self {
        Self {
            counts: c,
            accuracy: ratio(c.tp + c.tn, c.total()),
            sensitivity: ratio(c.tp, c.tp + c.fn_),
            specificity: ratio(c.tn, c.tn + c.fp),
            ppv: ratio(c.tp, c.tp + c.fp),
            npv: ratio(c.tn, c.tn + c.fn_),
        }
    }
}

pub fn confusion_metrics(scores: &[f64], labels: &[bool], tau: f64) -> Result<ConfusionMetrics> {
    check_lengths(scores, labels)?;
    require_both_classes(labels)?;
    Ok(ConfusionMetrics::from_counts(ConfusionCounts::at_threshold(
        scores, labels, tau,
    )))
}

/// Criterion maximized when picking the decision threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThresholdCriterion {
    /// Sensitivity + specificity − 1.
    #[default]
    Youden,
    Accuracy,
}

impl FromStr for ThresholdCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "youden" => Ok(Self::Youden),
            "accuracy" => Ok(Self::Accuracy),
            other => Err(Error::Config(format!("unknown threshold criterion '{other}'"))),
        }
    }
}

impl fmt::Display for ThresholdCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Youden => "youden",
            Self::Accuracy => "accuracy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub tau: f64,
    pub criterion_value: f64,
}

/// Scans every distinct score as a candidate threshold and keeps the one that
/// maximizes `criterion`; ties go to the smallest threshold.
pub fn select_threshold(
    scores: &[f64],
    labels: &[bool],
    criterion: ThresholdCriterion,
) -> Result<ThresholdReport> {
    check_lengths(scores, labels)?;
    let (pos, neg) = require_both_classes(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Walk candidates in ascending order; at candidate τ everything strictly
    // below it is predicted negative.
    let mut best: Option<ThresholdReport> = None;
    let (mut below_pos, mut below_neg) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let tau = scores[order[i]];
        let tp = pos - below_pos;
        let tn = below_neg;
        let value = match criterion {
            ThresholdCriterion::Youden => tp as f64 / pos as f64 + tn as f64 / neg as f64 - 1.0,
            ThresholdCriterion::Accuracy => (tp + tn) as f64 / (pos + neg) as f64,
        };
        // Criterion values reached along different count paths can differ in
        // the last bit; only a real improvement moves the threshold up.
        if best.is_none_or(|b| value > b.criterion_value + 1e-12) {
            best = Some(ThresholdReport {
                tau,
                criterion_value: value,
            });
        }
        while i < order.len() && scores[order[i]] == tau {
            if labels[order[i]] {
                below_pos += 1;
            } else {
                below_neg += 1;
            }
            i += 1;
        }
    }
    Ok(best.expect("at least one candidate"))
}

/// The seven reported classification metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Auroc,
    Auprc,
    Accuracy,
    Sensitivity,
    Specificity,
    Ppv,
    Npv,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Auroc,
        Metric::Auprc,
        Metric::Accuracy,
        Metric::Sensitivity,
        Metric::Specificity,
        Metric::Ppv,
        Metric::Npv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Auroc => "auroc",
            Metric::Auprc => "auprc",
            Metric::Accuracy => "accuracy",
            Metric::Sensitivity => "sensitivity",
            Metric::Specificity => "specificity",
            Metric::Ppv => "ppv",
            Metric::Npv => "npv",
        }
    }

    /// Evaluates the metric; threshold-free metrics ignore `tau`. An
    /// undefined ratio surfaces as `Ok(None)`.
    pub fn evaluate(self, scores: &[f64], labels: &[bool], tau: f64) -> Result<Option<f64>> {
        Ok(match self {
            Metric::Auroc => Some(auroc(scores, labels)?),
            Metric::Auprc => Some(auprc(scores, labels)?),
            _ => {
                let m = confusion_metrics(scores, labels, tau)?;
                match self {
                    Metric::Accuracy => m.accuracy,
                    Metric::Sensitivity => m.sensitivity,
                    Metric::Specificity => m.specificity,
                    Metric::Ppv => m.ppv,
                    Metric::Npv => m.npv,
                    Metric::Auroc | Metric::Auprc => unreachable!(),
                }
            }
        })
    }
}

/// A metric value with its standard error; both absent when undefined.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: Option<f64>,
    pub se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub tau: f64,
    pub estimates: Vec<(Metric, Estimate)>,
}

impl MetricsReport {
    pub fn get(&self, metric: Metric) -> Estimate {
        self.estimates
            .iter()
            .find(|(m, _)| *m == metric)
            .map(|(_, e)| *e)
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const L1100: [bool; 4] = [true, true, false, false];

    #[test]
    fn auroc_examples() {
        assert_eq!(auroc(&[0.9, 0.8, 0.3], &[true, true, false]).unwrap(), 1.0);
        assert_eq!(auroc(&[0.9, 0.6, 0.4], &[true, false, true]).unwrap(), 0.5);
        assert_eq!(auroc(&[0.2; 5], &[true, false, true, false, false]).unwrap(), 0.5);
        assert!(matches!(
            auroc(&[0.1, 0.2], &[true, true]),
            Err(Error::DegenerateClass(_))
        ));
    }

    #[test]
    fn auprc_examples() {
        assert_eq!(auprc(&[0.9, 0.1], &[true, false]).unwrap(), 1.0);
        assert_eq!(auprc(&[0.9, 0.1], &[false, true]).unwrap(), 0.5);
        assert_eq!(auprc(&[0.3, 0.2, 0.9], &[true; 3]).unwrap(), 1.0);
        assert!(matches!(
            auprc(&[0.3], &[false]),
            Err(Error::DegenerateClass(_))
        ));
    }

    #[test]
    fn confusion_examples() {
        let s = [0.9, 0.8, 0.2, 0.1];
        let m = confusion_metrics(&s, &L1100, 0.5).unwrap();
        for v in [m.accuracy, m.sensitivity, m.specificity, m.ppv, m.npv] {
            assert_eq!(v, Some(1.0));
        }
        let m = confusion_metrics(&s, &L1100, 0.15).unwrap();
        assert_eq!(m.accuracy, Some(0.75));
        assert_eq!(m.sensitivity, Some(1.0));
        assert_eq!(m.specificity, Some(0.5));
        assert_eq!(m.ppv, Some(2.0 / 3.0));
        assert_eq!(m.npv, Some(1.0));
        let m = confusion_metrics(&s, &L1100, 0.95).unwrap();
        assert_eq!(m.sensitivity, Some(0.0));
        assert_eq!(m.ppv, None);
        assert_eq!(m.npv, Some(0.5));
    }

    #[test]
    fn threshold_examples() {
        let r = select_threshold(&[0.9, 0.8, 0.2, 0.1], &L1100, ThresholdCriterion::Youden)
            .unwrap();
        assert_eq!(r.tau, 0.8);
        assert_eq!(r.criterion_value, 1.0);

        // Inverted ranking: J is 0 at the lowest candidate and negative above.
        let r = select_threshold(&[0.1, 0.2, 0.8, 0.9], &L1100, ThresholdCriterion::Youden)
            .unwrap();
        assert_eq!(r.tau, 0.1);
        assert_eq!(r.criterion_value, 0.0);

        let r = select_threshold(&[0.4; 4], &L1100, ThresholdCriterion::Youden).unwrap();
        assert_eq!(r.tau, 0.4);
    }

    #[test]
    fn threshold_by_accuracy() {
        let s = [0.9, 0.7, 0.6, 0.5, 0.1];
        let l = [true, false, true, false, false];
        let r = select_threshold(&s, &l, ThresholdCriterion::Accuracy).unwrap();
        // 0.6 and 0.9 both reach 4/5; the smaller wins.
        assert_eq!(r.tau, 0.6);
        assert_eq!(r.criterion_value, 0.8);
    }

    #[test]
    fn metric_dispatch() {
        let s = [0.9, 0.8, 0.2, 0.1];
        assert_eq!(Metric::Auroc.evaluate(&s, &L1100, 0.5).unwrap(), Some(1.0));
        assert_eq!(Metric::Ppv.evaluate(&s, &L1100, 2.0).unwrap(), None);
    }
}
