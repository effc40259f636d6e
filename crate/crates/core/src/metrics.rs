//! Bias and accuracy measurement, theoretical bounds, and the covariance
//! impossibility witness.
//!
//! Every average here is an order-independent sum (terms are sorted before
//! summation), so permuting the examples leaves reports bit-identical.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, RtoError};
use crate::model::{check_group, ScoredExample};

/// One evaluation of a decision rule on a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(rename = "group_means")]
    pub per_group_mean_h: Vec<f64>,
    pub parity_gap: f64,
    #[serde(rename = "covariances")]
    pub conditional_covariances: Option<Vec<f64>>,
    pub expected_accuracy: Option<f64>,
    #[serde(rename = "n_per_group")]
    pub sample_sizes: Vec<usize>,
}

impl MetricsReport {
    /// Single-line JSON encoding.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report is always serializable")
    }
}

fn exact_order_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(RtoError::Mismatch(format!("{a} predictions for {b} entries")));
    }
    Ok(())
}

/// Per-group mean of `h` and group sizes; `groups` holds 1-based ids.
pub fn group_means(h: &[f64], groups: &[usize], group_count: usize) -> Result<(Vec<f64>, Vec<usize>)> {
    check_lengths(h.len(), groups.len())?;
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); group_count];
    for (&v, &g) in h.iter().zip(groups) {
        check_group(g, group_count)?;
        buckets[g - 1].push(v);
    }
    let sizes: Vec<usize> = buckets.iter().map(Vec::len).collect();
    if let Some(k) = sizes.iter().position(|&n| n == 0) {
        return Err(RtoError::EmptyGroup(k + 1));
    }
    let means = buckets
        .into_iter()
        .map(|b| {
            let n = b.len() as f64;
            exact_order_sum(b) / n
        })
        .collect();
    Ok((means, sizes))
}

fn spread(means: &[f64]) -> f64 {
    let max = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = means.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// `max_k mean(h | k) − min_k mean(h | k)`.
pub fn parity_gap(h: &[f64], groups: &[usize], group_count: usize) -> Result<f64> {
    let (means, _) = group_means(h, groups, group_count)?;
    Ok(spread(&means))
}

/// Empirical `E[h·1_S | k] − E[h | k]·E[1_S | k]` within group `group`.
pub fn conditional_covariance(
    h: &[f64],
    sensitive: &[Option<bool>],
    groups: &[usize],
    group: usize,
) -> Result<f64> {
    check_lengths(h.len(), sensitive.len())?;
    check_lengths(h.len(), groups.len())?;
    let mut hs = Vec::new();
    let mut hb = Vec::new();
    let mut ones = 0usize;
    for ((&v, bit), &g) in h.iter().zip(sensitive).zip(groups) {
        if g != group {
            continue;
        }
        let bit = bit.ok_or_else(|| RtoError::MissingField("sensitive bit".into()))?;
        hs.push(v);
        if bit {
            hb.push(v);
            ones += 1;
        }
    }
    if hs.is_empty() {
        return Err(RtoError::EmptyGroup(group));
    }
    let n = hs.len() as f64;
    let e_hb = exact_order_sum(hb) / n;
    let e_h = exact_order_sum(hs) / n;
    Ok(e_hb - e_h * (ones as f64 / n))
}

/// Mean of `h·y + (1 − h)(1 − y)`.
pub fn expected_accuracy(h: &[f64], labels: &[Option<bool>]) -> Result<f64> {
    check_lengths(h.len(), labels.len())?;
    if h.is_empty() {
        return Err(RtoError::EmptyDataset);
    }
    let terms = h
        .iter()
        .zip(labels)
        .map(|(&v, y)| {
            let y = y.ok_or_else(|| RtoError::MissingField("label".into()))?;
            Ok(if y { v } else { 1.0 - v })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(exact_order_sum(terms) / h.len() as f64)
}

/// Assembles a report; covariances and accuracy are filled in only when the
/// sensitive bits (resp. labels) are present on every example.
pub fn evaluate(examples: &[ScoredExample], h: &[f64], group_count: usize) -> Result<MetricsReport> {
    check_lengths(h.len(), examples.len())?;
    let groups: Vec<usize> = examples.iter().map(|e| e.group).collect();
    let (means, sizes) = group_means(h, &groups, group_count)?;
    let sensitive: Vec<Option<bool>> = examples.iter().map(|e| e.sensitive).collect();
    let covariances = if sensitive.iter().all(Option::is_some) {
        Some(
            (1..=group_count)
                .map(|g| conditional_covariance(h, &sensitive, &groups, g))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let labels: Vec<Option<bool>> = examples.iter().map(|e| e.label).collect();
    let accuracy = if labels.iter().all(Option::is_some) {
        Some(expected_accuracy(h, &labels)?)
    } else {
        None
    };
    Ok(MetricsReport {
        parity_gap: spread(&means),
        per_group_mean_h: means,
        conditional_covariances: covariances,
        expected_accuracy: accuracy,
        sample_sizes: sizes,
    })
}

/// High-probability bound on the population parity gap of a rule fitted on
/// `n` fresh examples: `ε + 8√(2 ln(eN/2)/N) + 2√(ln(2K/δ)/N)`.
pub fn parity_generalization_bound(n: usize, groups: usize, delta: f64, epsilon: f64) -> Result<f64> {
    if n == 0 || groups == 0 {
        return Err(invalid("N and K must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(epsilon >= 0.0) {
        return Err(invalid("epsilon must be >= 0"));
    }
    let n = n as f64;
    let complexity = 8.0 * (2.0 * (std::f64::consts::E * n / 2.0).ln() / n).sqrt();
    let confidence = 2.0 * ((2.0 * groups as f64 / delta).ln() / n).sqrt();
    Ok(epsilon + complexity + confidence)
}

/// Excess-risk bound for synthetic data where the Bayes regressor is known:
/// `2γ + 8(2 + 1/γ)/N^{1/3} + E|2η − 1 − f| + 4√((2K + 2 ln(2/δ))/N)`.
pub fn consistent_excess_risk_bound(
    n: usize,
    groups: usize,
    gamma: f64,
    delta: f64,
    calibration_error: f64,
) -> Result<f64> {
    if n == 0 || groups == 0 {
        return Err(invalid("N and K must be at least 1"));
    }
    if !(gamma > 0.0) {
        return Err(invalid("gamma must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta must lie in (0, 1)"));
    }
    let n = n as f64;
    Ok(2.0 * gamma
        + 8.0 * (2.0 + 1.0 / gamma) / n.cbrt()
        + calibration_error
        + 4.0 * ((2.0 * groups as f64 + 2.0 * (2.0 / delta).ln()) / n).sqrt())
}

/// `E|2η(x) − 1 − f(x)|` under the given weights.
pub fn calibration_error(scores: &[f64], eta: &[f64], weights: &[f64]) -> Result<f64> {
    check_lengths(scores.len(), eta.len())?;
    check_lengths(scores.len(), weights.len())?;
    Ok(scores
        .iter()
        .zip(eta)
        .zip(weights)
        .map(|((&f, &e), &w)| w * (2.0 * e - 1.0 - f).abs())
        .sum())
}

/// Misclassification risk `E[h(1 − η) + (1 − h)η]` under the given weights.
pub fn risk_under_eta(h: &[f64], eta: &[f64], weights: &[f64]) -> Result<f64> {
    check_lengths(h.len(), eta.len())?;
    check_lengths(h.len(), weights.len())?;
    Ok(h.iter()
        .zip(eta)
        .zip(weights)
        .map(|((&v, &e), &w)| w * (v * (1.0 - e) + (1.0 - v) * e))
        .sum())
}

/// The partition used to show that a deterministic predictor correlates
/// with the sensitive attribute on some pair of groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilityWitness {
    /// Membership of each point in `W`.
    pub in_witness: Vec<bool>,
    /// `(E_W f + E_W̄ f)/2`, reported only.
    pub beta: f64,
    /// `p(W)|C(f,γ|W)| + p(W̄)|C(f,γ|W̄)|`
    pub lhs: f64,
    /// `½·E|γ − γ̄|·min{E f, 1 − E f}`
    pub rhs: f64,
}

impl ImpossibilityWitness {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs - 1e-12
    }
}

/// Builds `W = {x : (γ(x) − γ̄)(f(x) − β) > 0}` for a binary predictor `f`
/// and evaluates both sides of the covariance lower bound.
pub fn impossibility_witness(
    predictor: &[bool],
    sensitive_prob: &[f64],
    weights: &[f64],
) -> Result<ImpossibilityWitness> {
    check_lengths(predictor.len(), sensitive_prob.len())?;
    check_lengths(predictor.len(), weights.len())?;
    if predictor.is_empty() {
        return Err(RtoError::EmptyDataset);
    }
    if weights.iter().any(|&w| !(w >= 0.0)) || sensitive_prob.iter().any(|g| !(0.0..=1.0).contains(g)) {
        return Err(invalid("weights must be >= 0 and probabilities in [0, 1]"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("weights sum to {total}, expected 1")));
    }
    let f: Vec<f64> = predictor.iter().map(|&b| f64::from(u8::from(b))).collect();
    let gamma_bar: f64 = sensitive_prob.iter().zip(weights).map(|(g, w)| g * w).sum();
    let in_w: Vec<bool> = predictor
        .iter()
        .zip(sensitive_prob)
        .map(|(&fx, &g)| if fx { g > gamma_bar } else { g <= gamma_bar })
        .collect();

    // (mass, E[f], E[γ], C(f, γ)) restricted to one side of the partition
    let side = |member: bool| -> (f64, f64, f64, f64) {
        let idx: Vec<usize> = (0..f.len()).filter(|&i| in_w[i] == member).collect();
        let mass: f64 = idx.iter().map(|&i| weights[i]).sum();
        if mass <= 0.0 {
            return (0.0, 0.0, 0.0, 0.0);
        }
        let e = |v: &dyn Fn(usize) -> f64| idx.iter().map(|&i| weights[i] * v(i)).sum::<f64>() / mass;
        let ef = e(&|i| f[i]);
        let eg = e(&|i| sensitive_prob[i]);
        let efg = e(&|i| f[i] * sensitive_prob[i]);
        (mass, ef, eg, efg - ef * eg)
    };
    let (pw, ef_w, _, cov_w) = side(true);
    let (pn, ef_n, _, cov_n) = side(false);
    let lhs = pw * cov_w.abs() + pn * cov_n.abs();
    let mean_f: f64 = f.iter().zip(weights).map(|(a, w)| a * w).sum();
    let dispersion: f64 = sensitive_prob
        .iter()
        .zip(weights)
        .map(|(g, w)| w * (g - gamma_bar).abs())
        .sum();
    let rhs = 0.5 * dispersion * mean_f.min(1.0 - mean_f);
    Ok(ImpossibilityWitness {
        in_witness: in_w,
        beta: 0.5 * (ef_w + ef_n),
        lhs,
        rhs,
    })
}
