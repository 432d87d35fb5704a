//! Accuracy and macro-averaged F1 for the two-class problem.
//!
//! Precision or recall with a zero denominator is 0, and so is F1 when
//! both are 0.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, UserTypeId};

/// Counts indexed `[gold][predicted]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 2]; 2],
}

impl ConfusionMatrix {
    pub fn from_labels(preds: &[UserTypeId], gold: &[UserTypeId]) -> Result<ConfusionMatrix> {
        if preds.len() != gold.len() {
            return Err(Error::Shape(format!(
                "{} predictions for {} gold labels",
                preds.len(),
                gold.len()
            )));
        }
        if preds.is_empty() {
            return Err(Error::EmptyEvaluation("no labels".into()));
        }
        let mut m = ConfusionMatrix::default();
        for (p, g) in preds.iter().zip(gold) {
            m.counts[g.index()][p.index()] += 1;
        }
        Ok(m)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        self.counts[0][0] + self.counts[1][1]
    }

    pub fn accuracy(&self) -> f64 {
        self.correct() as f64 / self.total() as f64
    }

    pub fn precision(&self, class: usize) -> f64 {
        let predicted = self.counts[0][class] + self.counts[1][class];
        safe_div(self.counts[class][class], predicted)
    }

    pub fn recall(&self, class: usize) -> f64 {
        let actual = self.counts[class][0] + self.counts[class][1];
        safe_div(self.counts[class][class], actual)
    }

    /// `2PR / (P + R)`, evaluated as `2tp / (2tp + fp + fn)` so the result
    /// is a single rounded division.
    pub fn f1(&self, class: usize) -> f64 {
        let other = 1 - class;
        let tp = self.counts[class][class];
        let errors = self.counts[class][other] + self.counts[other][class];
        if tp == 0 {
            0.0
        } else {
            (2 * tp) as f64 / (2 * tp + errors) as f64
        }
    }

    pub fn macro_f1(&self) -> f64 {
        (self.f1(0) + self.f1(1)) / 2.0
    }
}

fn safe_div(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn accuracy(preds: &[UserTypeId], gold: &[UserTypeId]) -> Result<f64> {
    Ok(ConfusionMatrix::from_labels(preds, gold)?.accuracy())
}

pub fn macro_f1(preds: &[UserTypeId], gold: &[UserTypeId]) -> Result<f64> {
    Ok(ConfusionMatrix::from_labels(preds, gold)?.macro_f1())
}
