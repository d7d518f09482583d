//! ROC AUC and dataset-level metrics.

use alloc::vec::Vec;

use crate::{
    error::{Result, SesaError},
    model::Example,
};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Metrics {
    pub auc: f64,
    pub mse: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// Area under the ROC curve via the rank-sum statistic, with tied scores
/// sharing their average rank (half credit per tied pair).
///
/// Ranks are accumulated doubled in integers so the statistic is exact, and
/// the quotient is always formed on the smaller side of ½; this makes
/// `auc(s) + auc(−s) == 1.0` hold bit-exactly.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(SesaError::Dimension {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(SesaError::Numeric("scores must be finite".into()));
    }
    let n_pos = labels.iter().filter(|&&y| y).count() as u128;
    let n_neg = labels.len() as u128 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(SesaError::UndefinedMetric("AUC needs both positive and negative labels"));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // twice the rank sum of the positives
    let mut pos_rank2: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1..=end average to (start + 1 + end) / 2
        let rank2 = (start + 1 + end) as u128;
        let tied_pos = order[start..end].iter().filter(|&&i| labels[i]).count() as u128;
        pos_rank2 += rank2 * tied_pos;
        start = end;
    }
    let u2 = pos_rank2 - n_pos * (n_pos + 1);
    let total2 = 2 * n_pos * n_neg;
    Ok(if 2 * u2 <= total2 {
        u2 as f64 / total2 as f64
    } else {
        1.0 - (total2 - u2) as f64 / total2 as f64
    })
}

pub fn evaluate_scores(scores: &[f64], labels: &[bool]) -> Result<Metrics> {
    let auc = roc_auc(scores, labels)?;
    let mse = crate::train::mse_loss(scores, labels)?;
    let n_pos = labels.iter().filter(|&&y| y).count();
    Ok(Metrics {
        auc,
        mse,
        n_pos,
        n_neg: labels.len() - n_pos,
    })
}

/// Scores every example independently and summarizes.
pub fn evaluate<F>(dataset: &[Example], mut score_fn: F) -> Result<Metrics>
where
    F: FnMut(&Example) -> Result<f64>,
{
    let scores = dataset.iter().map(&mut score_fn).collect::<Result<Vec<_>>>()?;
    let labels: Vec<bool> = dataset.iter().map(|e| e.label).collect();
    evaluate_scores(&scores, &labels)
}
