use std::cmp::Ordering;

use serde::Serialize;

use super::{MlError, ScoredItem};
use crate::returns::Label;

fn class_counts(items: &[ScoredItem]) -> Result<(u64, u64), MlError> {
    let pos = items.iter().filter(|i| i.label.is_positive()).count() as u64;
    let neg = items.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(MlError::SingleClass);
    }
    if items.iter().any(|i| !i.score.is_finite()) {
        return Err(MlError::NonFinite);
    }
    Ok((pos, neg))
}

/// Mann-Whitney AUC; ties count one half.
///
/// Computed from doubled average ranks in integers, so reversing the
/// scores gives exactly `1 - auc`.
pub fn roc_auc(items: &[ScoredItem]) -> Result<f64, MlError> {
    let (pos, neg) = class_counts(items)?;
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[a].score.total_cmp(&items[b].score));
    // sum over positives of 2 * average rank (1-based)
    let mut rank_sum2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && items[order[j + 1]].score == items[order[i]].score {
            j += 1;
        }
        let twice_avg = (i + 1 + j + 1) as u128;
        let p = order[i..=j].iter().filter(|&&k| items[k].label.is_positive()).count() as u128;
        rank_sum2 += twice_avg * p;
        i = j + 1;
    }
    let (p, n) = (pos as u128, neg as u128);
    let u2 = rank_sum2 - p * (p + 1);
    let d = 2 * p * n;
    // The smaller side is snapped to a multiple of 2^-53 so that `1 - x`
    // is representable and reversal is exact in both directions.
    let small = |num: u128| 1.0 - (1.0 - num as f64 / d as f64);
    Ok(if 2 * u2 > d { 1.0 - small(d - u2) } else { small(u2) })
}

/// ROC vertices from (0,0) to (1,1), one per distinct score.
pub fn roc_points(items: &[ScoredItem]) -> Result<Vec<(f64, f64)>, MlError> {
    let (pos, neg) = class_counts(items)?;
    let mut sorted: Vec<&ScoredItem> = items.iter().collect();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut out = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    for (i, it) in sorted.iter().enumerate() {
        if it.label.is_positive() {
            tp += 1;
        } else {
            fp += 1;
        }
        if i + 1 == sorted.len() || sorted[i + 1].score != it.score {
            out.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub k: usize,
    pub true_positives: usize,
    pub precision: f64,
    pub recall: f64,
}

fn rank_order(a: &ScoredItem, b: &ScoredItem) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.venue_id.cmp(&b.venue_id))
}

/// Precision and recall when the top `k` items are predicted positive, for
/// every `k`. Ties in score are broken by venue id.
pub fn pr_curve(items: &[ScoredItem]) -> Result<Vec<PrPoint>, MlError> {
    let (pos, _) = class_counts(items)?;
    let mut sorted: Vec<&ScoredItem> = items.iter().collect();
    sorted.sort_by(|a, b| rank_order(a, b));
    let mut tp = 0usize;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, it)| {
            tp += usize::from(it.label.is_positive());
            PrPoint {
                k: i + 1,
                true_positives: tp,
                precision: tp as f64 / (i + 1) as f64,
                recall: tp as f64 / pos as f64,
            }
        })
        .collect())
}

/// Precision/recall of a fixed set of positive predictions. Precision is 0
/// when nothing is predicted positive.
pub fn precision_recall(labels: &[Label], predicted: &[bool]) -> (f64, f64) {
    let tp = labels.iter().zip(predicted).filter(|(l, &p)| p && l.is_positive()).count();
    let pp = predicted.iter().filter(|&&p| p).count();
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    let precision = if pp == 0 { 0.0 } else { tp as f64 / pp as f64 };
    let recall = if pos == 0 { 0.0 } else { tp as f64 / pos as f64 };
    (precision, recall)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub auc: f64,
    pub roc_points: Vec<(f64, f64)>,
    pub pr_curve: Vec<PrPoint>,
    /// At the report's operating point.
    pub precision: f64,
    pub recall: f64,
}

impl EvalReport {
    /// Curves plus precision/recall of the given positive predictions.
    pub fn with_predictions(items: &[ScoredItem], predicted: &[bool]) -> Result<Self, MlError> {
        let labels: Vec<Label> = items.iter().map(|i| i.label).collect();
        let (precision, recall) = precision_recall(&labels, predicted);
        Ok(Self { auc: roc_auc(items)?, roc_points: roc_points(items)?, pr_curve: pr_curve(items)?, precision, recall })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Smaller values rank first.
    Ascending,
    Descending,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Ascending => Direction::Descending,
            Direction::Descending => Direction::Ascending,
        }
    }
}

/// Single-feature ranking evaluation. The operating point predicts the top
/// `P` items positive, `P` being the number of positives.
pub fn rank_sweep(
    venue_ids: &[String],
    values: &[f64],
    labels: &[Label],
    direction: Direction,
) -> Result<EvalReport, MlError> {
    if venue_ids.len() != values.len() || values.len() != labels.len() {
        return Err(MlError::Dimension { expected: venue_ids.len(), got: values.len().min(labels.len()) });
    }
    let sign = if direction == Direction::Ascending { -1.0 } else { 1.0 };
    let items: Vec<ScoredItem> = venue_ids
        .iter()
        .zip(values)
        .zip(labels)
        .map(|((id, &v), &label)| ScoredItem { venue_id: id.clone(), score: sign * v, label })
        .collect();
    let (auc, roc_points, pr_curve) = (roc_auc(&items)?, roc_points(&items)?, pr_curve(&items)?);
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    let at = pr_curve[pos - 1];
    Ok(EvalReport { auc, roc_points, pr_curve, precision: at.precision, recall: at.recall })
}
