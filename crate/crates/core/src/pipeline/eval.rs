//! Binary classification metrics: confusion counts and the recognition rate
//! `(TP + TN) / total`.

use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("{predictions} predictions but {truth} ground-truth labels")]
    LengthMismatch { predictions: usize, truth: usize },
    #[error("cannot evaluate an empty prediction set")]
    EmptyInput,
}

/// Confusion counts with the derived recognition rate.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub true_pos: usize,
    pub true_neg: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub recognition_rate: f64,
}

impl EvalReport {
    pub fn total(&self) -> usize {
        self.true_pos + self.true_neg + self.false_pos + self.false_neg
    }
}

/// Tally predictions against ground truth.
pub fn recognition_rate(predictions: &[Label], truth: &[Label]) -> Result<EvalReport, EvalError> {
    if predictions.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            truth: truth.len(),
        });
    }
    if predictions.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let mut report = EvalReport {
        true_pos: 0,
        true_neg: 0,
        false_pos: 0,
        false_neg: 0,
        recognition_rate: 0.0,
    };
    for (p, t) in predictions.iter().zip(truth) {
        match (p, t) {
            (Label::Positive, Label::Positive) => report.true_pos += 1,
            (Label::Negative, Label::Negative) => report.true_neg += 1,
            (Label::Positive, Label::Negative) => report.false_pos += 1,
            (Label::Negative, Label::Positive) => report.false_neg += 1,
        }
    }
    report.recognition_rate =
        (report.true_pos + report.true_neg) as f64 / predictions.len() as f64;
    Ok(report)
}
