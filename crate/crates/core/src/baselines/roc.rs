//! Reject Option Classifier: inside the low-confidence band `|f| ≤ θ` the
//! disadvantaged group gets the positive label and the advantaged group the
//! negative one; outside it the prediction is `f > 0`.

use crate::error::{invalid, Result, RtoError};
use crate::metrics::{expected_accuracy, parity_gap};
use crate::model::ScoredExample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocRule {
    pub theta: f64,
    pub advantaged_group: usize,
    pub disadvantaged_group: usize,
}

impl RocRule {
    pub fn predict(&self, score: f64, group: usize) -> bool {
        if score.abs() <= self.theta {
            group == self.disadvantaged_group
        } else {
            score > 0.0
        }
    }

    pub fn predict_all(&self, examples: &[ScoredExample]) -> Vec<f64> {
        examples
            .iter()
            .map(|e| f64::from(u8::from(self.predict(e.score, e.group))))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocFit {
    pub rule: RocRule,
    pub validation_gap: f64,
    pub validation_accuracy: f64,
    /// No θ in the grid met the parity target; `rule` minimizes the gap instead.
    pub failed: bool,
}

/// `{0.01, 0.02, …, 1.00}`.
pub fn default_theta_grid() -> Vec<f64> {
    (1..=100).map(|i| f64::from(i) / 100.0).collect()
}

fn positive_rates(examples: &[ScoredExample]) -> Result<[f64; 2]> {
    let mut pos = [0usize; 2];
    let mut n = [0usize; 2];
    for e in examples {
        if !(1..=2).contains(&e.group) {
            return Err(RtoError::UnknownGroup { group: e.group, groups: 2 });
        }
        n[e.group - 1] += 1;
        pos[e.group - 1] += usize::from(e.score > 0.0);
    }
    if let Some(k) = n.iter().position(|&c| c == 0) {
        return Err(RtoError::EmptyGroup(k + 1));
    }
    Ok([pos[0] as f64 / n[0] as f64, pos[1] as f64 / n[1] as f64])
}

/// Tunes θ on `validation`. The disadvantaged group is the one whose base
/// classifier (`f > 0`) has the lower positive rate on `examples`. Among θ
/// values whose validation gap is at most `epsilon_target`, the most accurate
/// wins, ties going to the smaller θ.
pub fn roc_fit(
    examples: &[ScoredExample],
    theta_grid: &[f64],
    epsilon_target: f64,
    validation: &[ScoredExample],
    groups: usize,
) -> Result<RocFit> {
    if groups != 2 {
        return Err(RtoError::UnsupportedCriterion(format!(
            "the reject option classifier needs exactly 2 groups, got {groups}"
        )));
    }
    if examples.is_empty() || validation.is_empty() {
        return Err(RtoError::EmptyDataset);
    }
    if theta_grid.is_empty() || theta_grid.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        return Err(invalid("theta grid must be non-empty and inside (0, 1]"));
    }
    let rates = positive_rates(examples)?;
    let (advantaged_group, disadvantaged_group) = if rates[0] < rates[1] { (2, 1) } else { (1, 2) };
    let ids: Vec<usize> = validation.iter().map(|e| e.group).collect();
    let labels: Vec<Option<bool>> = validation.iter().map(|e| e.label).collect();

    let mut best_feasible: Option<RocFit> = None;
    let mut least_gap: Option<RocFit> = None;
    for &theta in theta_grid {
        let rule = RocRule { theta, advantaged_group, disadvantaged_group };
        let h = rule.predict_all(validation);
        let fit = RocFit {
            rule,
            validation_gap: parity_gap(&h, &ids, 2)?,
            validation_accuracy: expected_accuracy(&h, &labels)?,
            failed: false,
        };
        let better = |current: &Option<RocFit>, key: fn(&RocFit) -> f64| match current {
            None => true,
            Some(c) => {
                key(&fit) > key(c) || (key(&fit) == key(c) && fit.rule.theta < c.rule.theta)
            }
        };
        if fit.validation_gap <= epsilon_target && better(&best_feasible, |f| f.validation_accuracy) {
            best_feasible = Some(fit.clone());
        }
        if better(&least_gap, |f| -f.validation_gap) {
            least_gap = Some(fit);
        }
    }
    Ok(best_feasible.unwrap_or_else(|| RocFit {
        failed: true,
        ..least_gap.expect("grid is non-empty")
    }))
}
