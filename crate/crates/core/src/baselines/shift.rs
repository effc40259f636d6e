//! Shift inference: bias as distribution shift, corrected by reweighting the
//! class posterior with `p(y)p(s)/p(y,s)` per (label, group) cell.

use crate::error::{invalid, Result, RtoError};
use crate::model::{check_group, ScoredExample};

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftInferenceRule {
    /// `factors[k][y]`; NaN where the joint cell is empty.
    pub factors: Vec<[f64; 2]>,
    /// `(group, label)` cells with no training mass.
    pub zero_cells: Vec<(usize, bool)>,
}

impl ShiftInferenceRule {
    /// Estimates the correction factors from labeled examples, with the group
    /// id playing the role of `s`.
    pub fn estimate(examples: &[ScoredExample], groups: usize) -> Result<Self> {
        if examples.is_empty() {
            return Err(RtoError::EmptyDataset);
        }
        let mut joint = vec![[0u64; 2]; groups];
        for e in examples {
            check_group(e.group, groups)?;
            let y = e
                .label
                .ok_or_else(|| RtoError::MissingField(format!("label of {}", e.id)))?;
            joint[e.group - 1][usize::from(y)] += 1;
        }
        let n = examples.len() as u64;
        let by_label = [
            joint.iter().map(|c| c[0]).sum::<u64>(),
            joint.iter().map(|c| c[1]).sum::<u64>(),
        ];
        let mut zero_cells = Vec::new();
        let factors = joint
            .iter()
            .enumerate()
            .map(|(k, cell)| {
                let n_k = cell[0] + cell[1];
                let mut f = [f64::NAN; 2];
                for y in 0..2 {
                    if cell[y] == 0 {
                        zero_cells.push((k + 1, y == 1));
                    } else {
                        f[y] = (by_label[y] * n_k) as f64 / (n * cell[y]) as f64;
                    }
                }
                f
            })
            .collect();
        Ok(Self { factors, zero_cells })
    }

    /// Corrected `p(y=1|x)` for a calibrated probability in group `group`.
    pub fn apply(&self, prob: f64, group: usize) -> Result<f64> {
        shift_inference_apply(prob, group, self)
    }

    /// Hard prediction: corrected probability above 1/2.
    pub fn predict(&self, prob: f64, group: usize) -> Result<bool> {
        Ok(self.apply(prob, group)? > 0.5)
    }
}

pub fn shift_inference_apply(prob: f64, group: usize, rule: &ShiftInferenceRule) -> Result<f64> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(invalid(format!("probability must lie in [0, 1], got {prob}")));
    }
    check_group(group, rule.factors.len())?;
    if rule.zero_cells.iter().any(|&(k, _)| k == group) {
        return Err(RtoError::DegenerateStatistics(format!(
            "group {group} has an empty (label, group) cell"
        )));
    }
    let [f0, f1] = rule.factors[group - 1];
    if f0 == f1 {
        return Ok(prob);
    }
    let u1 = prob * f1;
    let u0 = (1.0 - prob) * f0;
    Ok(u1 / (u0 + u1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labelled(cells: &[(usize, bool, usize)]) -> Vec<ScoredExample> {
        let mut out = Vec::new();
        for &(g, y, count) in cells {
            for _ in 0..count {
                let id = format!("e{}", out.len());
                out.push(ScoredExample::new(id, 0.0, g, None, Some(y)).unwrap());
            }
        }
        out
    }

    #[test]
    fn independence_means_identity() {
        let ex = labelled(&[(1, true, 10), (1, false, 30), (2, true, 5), (2, false, 15)]);
        let rule = ShiftInferenceRule::estimate(&ex, 2).unwrap();
        assert_eq!(rule.factors, vec![[1.0, 1.0], [1.0, 1.0]]);
        for p in [0.0, 0.1, 0.37, 0.9, 1.0] {
            assert_eq!(rule.apply(p, 1).unwrap(), p);
        }
    }

    #[test]
    fn correction_matches_hand_computation() {
        // p(y=1)=0.5, p(s=1)=0.5, p(y=1,s=1)=0.4 → factor 0.625; p(y=0,s=1)=0.1 → 2.5
        let ex = labelled(&[(1, true, 40), (1, false, 10), (2, true, 10), (2, false, 40)]);
        let rule = ShiftInferenceRule::estimate(&ex, 2).unwrap();
        assert_eq!(rule.factors[0], [2.5, 0.625]);
        let expected = 0.5 * 0.625 / (0.5 * 0.625 + 0.5 * 2.5);
        assert!((rule.apply(0.5, 1).unwrap() - expected).abs() < 1e-15);
        assert!(!rule.predict(0.5, 1).unwrap());
    }

    #[test]
    fn empty_cell_is_flagged_then_rejected() {
        let ex = labelled(&[(1, true, 4), (2, true, 3), (2, false, 3)]);
        let rule = ShiftInferenceRule::estimate(&ex, 2).unwrap();
        assert_eq!(rule.zero_cells, vec![(1, false)]);
        assert!(matches!(rule.apply(0.4, 1), Err(RtoError::DegenerateStatistics(_))));
        assert!(rule.apply(0.4, 2).is_ok());
    }

    proptest! {
        #[test]
        fn zero_and_one_are_fixed_points(a in 1usize..50, b in 1usize..50, c in 1usize..50, d in 1usize..50) {
            let ex = labelled(&[(1, true, a), (1, false, b), (2, true, c), (2, false, d)]);
            let rule = ShiftInferenceRule::estimate(&ex, 2).unwrap();
            for g in [1, 2] {
                prop_assert_eq!(rule.apply(0.0, g).unwrap(), 0.0);
                prop_assert_eq!(rule.apply(1.0, g).unwrap(), 1.0);
                prop_assert!(rule.factors[g - 1].iter().all(|&f| f > 0.0));
            }
        }
    }
}
