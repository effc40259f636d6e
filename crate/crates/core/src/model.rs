//! Core types and the randomized ramp decision rule.
//!
//! A trained rule keeps, for every group `k`, a pair of nonnegative
//! multipliers `(λ_k, μ_k)`. The effective threshold shift is
//! `ν_k = λ_k − μ_k` and an example with score `f` and constraint
//! coefficient `z` is labelled positive with probability
//!
//! ```text
//! h(x) = clamp((f − ν_k·z) / γ, 0, 1)
//! ```
//!
//! The band of width `γ` above the threshold is where the rule randomizes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, RtoError};

/// One classifier output together with its group membership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredExample {
    pub id: String,
    /// Classifier output in `[-1, 1]`.
    pub score: f64,
    /// 1-based group id.
    pub group: usize,
    /// Membership bit of the sensitive class used by the covariance criterion.
    pub sensitive: Option<bool>,
    pub label: Option<bool>,
}

impl ScoredExample {
    /// Builds an example, rejecting scores outside `[-1, 1]` and group id 0.
    pub fn new(
        id: impl Into<String>,
        score: f64,
        group: usize,
        sensitive: Option<bool>,
        label: Option<bool>,
    ) -> Result<Self> {
        validate_score(score)?;
        if group == 0 {
            return Err(invalid("group ids are 1-based"));
        }
        Ok(Self {
            id: id.into(),
            score,
            group,
            sensitive,
            label,
        })
    }

    /// Zero-based group index.
    #[inline]
    pub fn group_index(&self) -> usize {
        self.group - 1
    }
}

pub(crate) fn validate_score(score: f64) -> Result<()> {
    if !score.is_finite() {
        return Err(RtoError::Data(format!("non-finite score {score}")));
    }
    if !(-1.0..=1.0).contains(&score) {
        return Err(RtoError::Data(format!("score {score} outside [-1, 1]")));
    }
    Ok(())
}

/// Converts a probability estimate `p̂(y=1|x)` into a score `2p̂ − 1`.
pub fn probability_to_score(probability: f64) -> Result<f64> {
    if !probability.is_finite() || !(0.0..=1.0).contains(&probability) {
        return Err(RtoError::Data(format!(
            "probability {probability} outside [0, 1]"
        )));
    }
    Ok(2.0 * probability - 1.0)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

/// Smoothed positive part: `0` for `w ≤ 0`, `w²/(2γ)` on `[0, γ]`, `w − γ/2` above.
pub fn xi_gamma(w: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(xi(w, gamma))
}

/// Derivative of [`xi_gamma`], i.e. `clamp(w/γ, 0, 1)`.
pub fn xi_gamma_derivative(w: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(xi_prime(w, gamma))
}

#[inline]
pub(crate) fn xi(w: f64, gamma: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else if w <= gamma {
        w * w / (2.0 * gamma)
    } else {
        w - gamma / 2.0
    }
}

#[inline]
pub(crate) fn xi_prime(w: f64, gamma: f64) -> f64 {
    (w / gamma).clamp(0.0, 1.0)
}

/// The fairness criterion before compilation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Criterion {
    /// Per-group mean prediction within `ε/2` of `ρ`.
    StatisticalParity { rho: f64, epsilon: f64 },
    /// Per-group `|Cov(h, 1_S)| ≤ ε`.
    ConditionalCovariance { epsilon: f64 },
}

impl Criterion {
    pub fn epsilon(&self) -> f64 {
        match *self {
            Criterion::StatisticalParity { epsilon, .. } => epsilon,
            Criterion::ConditionalCovariance { epsilon } => epsilon,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Criterion::StatisticalParity { .. } => "statistical_parity",
            Criterion::ConditionalCovariance { .. } => "conditional_covariance",
        }
    }

    fn validate(&self) -> Result<()> {
        let eps = self.epsilon();
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(invalid(format!("epsilon must be >= 0, got {eps}")));
        }
        if let Criterion::StatisticalParity { rho, .. } = *self {
            if !(0.0..=1.0).contains(&rho) {
                return Err(invalid(format!("rho must lie in [0, 1], got {rho}")));
            }
        }
        Ok(())
    }
}

/// A criterion compiled to the general form `|Σ_{i∈S_k} (z_i h_i − b)| ≤ ε_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub criterion: Criterion,
    /// The offset `b`.
    pub offset: f64,
    /// `|S_k|` on the sample the spec was compiled from.
    pub group_sizes: Vec<usize>,
    /// Total slack `ε_k` per group.
    pub group_slack: Vec<f64>,
    /// Empirical mean of the sensitive bit per group (covariance only).
    pub group_rho: Option<Vec<f64>>,
}

impl ConstraintSpec {
    pub fn groups(&self) -> usize {
        self.group_sizes.len()
    }

    /// Slack per example: `ε/2` for parity, `ε` for covariance.
    pub fn per_sample_slack(&self) -> f64 {
        match self.criterion {
            Criterion::StatisticalParity { epsilon, .. } => epsilon / 2.0,
            Criterion::ConditionalCovariance { epsilon } => epsilon,
        }
    }

    /// The coefficient `z_i` of an example.
    #[inline]
    pub fn coefficient(&self, example: &ScoredExample) -> Result<f64> {
        match self.criterion {
            Criterion::StatisticalParity { .. } => Ok(1.0),
            Criterion::ConditionalCovariance { .. } => {
                let bit = example.sensitive.ok_or_else(|| {
                    RtoError::MissingField(format!("sensitive bit of example {}", example.id))
                })?;
                let rho_k = self
                    .group_rho
                    .as_ref()
                    .and_then(|r| r.get(example.group_index()))
                    .ok_or(RtoError::UnknownGroup {
                        group: example.group,
                        groups: self.groups(),
                    })?;
                Ok(f64::from(u8::from(bit)) - rho_k)
            }
        }
    }

    /// Coefficients for a whole sample, checking group ids along the way.
    pub fn coefficients(&self, examples: &[ScoredExample]) -> Result<Vec<f64>> {
        examples
            .iter()
            .map(|e| {
                check_group(e.group, self.groups())?;
                self.coefficient(e)
            })
            .collect()
    }
}

pub(crate) fn check_group(group: usize, groups: usize) -> Result<()> {
    if group == 0 || group > groups {
        return Err(RtoError::UnknownGroup { group, groups });
    }
    Ok(())
}

/// Compiles `criterion` against a training sample with `groups` groups.
pub fn compile_constraint(
    criterion: Criterion,
    examples: &[ScoredExample],
    groups: usize,
) -> Result<ConstraintSpec> {
    criterion.validate()?;
    if groups == 0 {
        return Err(invalid("at least one group is required"));
    }
    let mut sizes = vec![0usize; groups];
    let mut ones = vec![0usize; groups];
    let covariance = matches!(criterion, Criterion::ConditionalCovariance { .. });
    for e in examples {
        check_group(e.group, groups)?;
        sizes[e.group_index()] += 1;
        if covariance {
            match e.sensitive {
                Some(true) => ones[e.group_index()] += 1,
                Some(false) => {}
                None => {
                    return Err(RtoError::MissingField(format!(
                        "sensitive bit of example {}",
                        e.id
                    )))
                }
            }
        }
    }
    if let Some(k) = sizes.iter().position(|&n| n == 0) {
        return Err(RtoError::EmptyGroup(k + 1));
    }
    let (offset, per_sample, group_rho) = match criterion {
        Criterion::StatisticalParity { rho, epsilon } => (rho, epsilon / 2.0, None),
        Criterion::ConditionalCovariance { epsilon } => {
            let rho_k = ones
                .iter()
                .zip(&sizes)
                .map(|(&o, &n)| o as f64 / n as f64)
                .collect();
            (0.0, epsilon, Some(rho_k))
        }
    };
    let group_slack = sizes.iter().map(|&n| n as f64 * per_sample).collect();
    Ok(ConstraintSpec {
        criterion,
        offset,
        group_sizes: sizes,
        group_slack,
        group_rho,
    })
}

/// Nonnegative multipliers `(λ_k, μ_k)` used at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

impl Multipliers {
    pub fn zeros(groups: usize) -> Self {
        Self {
            lambda: vec![0.0; groups],
            mu: vec![0.0; groups],
        }
    }

    /// Splits per-group shifts `ν_k` into `λ_k = [ν_k]⁺`, `μ_k = [−ν_k]⁺`.
    pub fn from_nu(nu: &[f64]) -> Self {
        Self {
            lambda: nu.iter().map(|&v| v.max(0.0)).collect(),
            mu: nu.iter().map(|&v| (-v).max(0.0)).collect(),
        }
    }

    pub fn groups(&self) -> usize {
        self.lambda.len()
    }

    #[inline]
    pub fn nu(&self, k: usize) -> f64 {
        self.lambda[k] - self.mu[k]
    }

    pub fn nus(&self) -> Vec<f64> {
        (0..self.groups()).map(|k| self.nu(k)).collect()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.lambda.len() != self.mu.len() {
            return Err(invalid("lambda and mu lengths differ"));
        }
        for (&l, &m) in self.lambda.iter().zip(&self.mu) {
            if !(l >= 0.0 && m >= 0.0) || !l.is_finite() || !m.is_finite() {
                return Err(invalid(format!(
                    "multipliers must be finite and nonnegative, got ({l}, {m})"
                )));
            }
        }
        Ok(())
    }
}

/// Dual iterate of projected SGD, with running averages of every
/// post-projection iterate since the averaging window was last restarted.
///
/// Averages are accumulated lazily: group `k` contributes its current value
/// for every step since it was last touched.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    lambda_sum: Vec<f64>,
    mu_sum: Vec<f64>,
    last_touched: Vec<u64>,
    group_steps: Vec<u64>,
    window_start: u64,
    pub step_count: u64,
}

impl DualState {
    pub fn new(groups: usize) -> Self {
        Self {
            lambda: vec![0.0; groups],
            mu: vec![0.0; groups],
            lambda_sum: vec![0.0; groups],
            mu_sum: vec![0.0; groups],
            last_touched: vec![0; groups],
            group_steps: vec![0; groups],
            window_start: 0,
            step_count: 0,
        }
    }

    pub fn groups(&self) -> usize {
        self.lambda.len()
    }

    /// Number of updates group `k` has received.
    pub fn group_steps(&self, k: usize) -> u64 {
        self.group_steps[k]
    }

    /// One projected step on group `k`; every other group keeps its value.
    #[inline]
    pub fn step(&mut self, k: usize, rate: f64, grad_lambda: f64, grad_mu: f64) {
        self.step_count += 1;
        let t = self.step_count;
        let idle = (t - 1 - self.last_touched[k]) as f64;
        self.lambda_sum[k] += self.lambda[k] * idle;
        self.mu_sum[k] += self.mu[k] * idle;
        self.lambda[k] = (self.lambda[k] - rate * grad_lambda).max(0.0);
        self.mu[k] = (self.mu[k] - rate * grad_mu).max(0.0);
        self.lambda_sum[k] += self.lambda[k];
        self.mu_sum[k] += self.mu[k];
        self.last_touched[k] = t;
        self.group_steps[k] += 1;
    }

    /// Forgets the iterates so far; later averages cover only later steps.
    pub fn restart_averaging(&mut self) {
        let t = self.step_count;
        self.lambda_sum.iter_mut().for_each(|v| *v = 0.0);
        self.mu_sum.iter_mut().for_each(|v| *v = 0.0);
        self.last_touched.iter_mut().for_each(|v| *v = t);
        self.window_start = t;
    }

    fn average(&self, values: &[f64], sums: &[f64]) -> Vec<f64> {
        let t = self.step_count;
        let window = t - self.window_start;
        if window == 0 {
            return values.to_vec();
        }
        values
            .iter()
            .zip(sums)
            .zip(&self.last_touched)
            .map(|((&v, &s), &last)| (s + v * (t - last) as f64) / window as f64)
            .collect()
    }

    pub fn lambda_avg(&self) -> Vec<f64> {
        self.average(&self.lambda, &self.lambda_sum)
    }

    pub fn mu_avg(&self) -> Vec<f64> {
        self.average(&self.mu, &self.mu_sum)
    }

    pub fn current(&self) -> Multipliers {
        Multipliers {
            lambda: self.lambda.clone(),
            mu: self.mu.clone(),
        }
    }

    pub fn averaged(&self) -> Multipliers {
        Multipliers {
            lambda: self.lambda_avg(),
            mu: self.mu_avg(),
        }
    }
}

/// Provenance of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetadata {
    pub seed: u64,
    pub schedule: String,
    pub epochs: usize,
    pub dual_objective: f64,
}

/// A fitted randomized threshold rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RtoModel {
    pub gamma: f64,
    pub constraint: ConstraintSpec,
    pub multipliers: Multipliers,
    pub metadata: TrainingMetadata,
}

impl RtoModel {
    pub fn new(
        gamma: f64,
        constraint: ConstraintSpec,
        multipliers: Multipliers,
        metadata: TrainingMetadata,
    ) -> Result<Self> {
        check_gamma(gamma)?;
        multipliers.validate()?;
        if multipliers.groups() != constraint.groups() {
            return Err(RtoError::Mismatch(format!(
                "{} multiplier pairs for {} groups",
                multipliers.groups(),
                constraint.groups()
            )));
        }
        Ok(Self {
            gamma,
            constraint,
            multipliers,
            metadata,
        })
    }

    pub fn groups(&self) -> usize {
        self.constraint.groups()
    }

    /// Errors unless the model was trained for exactly `groups` groups.
    pub fn check_groups(&self, groups: usize) -> Result<()> {
        if groups != self.groups() {
            return Err(RtoError::Mismatch(format!(
                "model has K={} but the data declares K={groups}",
                self.groups()
            )));
        }
        Ok(())
    }

    /// Probability of predicting the positive class.
    pub fn predict_probability(&self, example: &ScoredExample) -> Result<f64> {
        check_group(example.group, self.groups())?;
        validate_score(example.score)?;
        let z = self.constraint.coefficient(example)?;
        let nu = self.multipliers.nu(example.group_index());
        Ok(ramp(example.score, nu, z, self.gamma))
    }

    pub fn predict_all(&self, examples: &[ScoredExample]) -> Result<Vec<f64>> {
        examples.iter().map(|e| self.predict_probability(e)).collect()
    }

    /// Draws a hard label with probability [`Self::predict_probability`].
    pub fn sample_prediction<R: Rng + ?Sized>(
        &self,
        example: &ScoredExample,
        rng: &mut R,
    ) -> Result<bool> {
        let h = self.predict_probability(example)?;
        Ok(bernoulli(h, rng))
    }
}

#[inline]
pub(crate) fn ramp(score: f64, nu: f64, z: f64, gamma: f64) -> f64 {
    ((score - nu * z) / gamma).clamp(0.0, 1.0)
}

/// `u < p` with `u` uniform on `[0, 1)`; exact at `p = 0` and `p = 1`.
#[inline]
pub(crate) fn bernoulli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.gen::<f64>() < p
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ex(score: f64, group: usize) -> ScoredExample {
        ScoredExample::new("x", score, group, None, None).unwrap()
    }

    fn parity_model(gamma: f64, nu: &[f64]) -> RtoModel {
        let data: Vec<_> = (1..=nu.len()).map(|g| ex(0.0, g)).collect();
        let spec = compile_constraint(
            Criterion::StatisticalParity {
                rho: 0.5,
                epsilon: 0.0,
            },
            &data,
            nu.len(),
        )
        .unwrap();
        let meta = TrainingMetadata {
            seed: 0,
            schedule: "fixed".into(),
            epochs: 0,
            dual_objective: 0.0,
        };
        RtoModel::new(gamma, spec, Multipliers::from_nu(nu), meta).unwrap()
    }

    #[test]
    fn xi_gamma_values() {
        assert_eq!(xi_gamma(0.0, 0.1).unwrap(), 0.0);
        assert_abs_diff_eq!(xi_gamma(0.1, 0.1).unwrap(), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(xi_gamma(0.05, 0.1).unwrap(), 0.0125, epsilon = 1e-15);
        assert_abs_diff_eq!(xi_gamma(0.3, 0.1).unwrap(), 0.25, epsilon = 1e-15);
        assert_eq!(xi_gamma(-4.0, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn xi_gamma_rejects_nonpositive_gamma() {
        assert!(matches!(xi_gamma(0.2, 0.0), Err(RtoError::InvalidParameter(_))));
        assert!(matches!(
            xi_gamma_derivative(0.2, -1.0),
            Err(RtoError::InvalidParameter(_))
        ));
    }

    #[test]
    fn xi_derivative_values() {
        assert_eq!(xi_gamma_derivative(-0.2, 0.1).unwrap(), 0.0);
        assert_abs_diff_eq!(xi_gamma_derivative(0.05, 0.1).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(xi_gamma_derivative(0.2, 0.1).unwrap(), 1.0);
    }

    #[test]
    fn prediction_examples() {
        let m = parity_model(0.1, &[0.84]);
        assert_abs_diff_eq!(m.predict_probability(&ex(0.89, 1)).unwrap(), 0.5, epsilon = 1e-12);
        let m = parity_model(0.1, &[0.0]);
        assert_eq!(m.predict_probability(&ex(-0.5, 1)).unwrap(), 0.0);
        assert_abs_diff_eq!(m.predict_probability(&ex(0.05, 1)).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn unknown_group_is_an_error() {
        let m = parity_model(0.1, &[0.0, 0.1]);
        assert!(matches!(
            m.predict_probability(&ex(0.0, 3)),
            Err(RtoError::UnknownGroup { group: 3, groups: 2 })
        ));
    }

    #[test]
    fn gamma_zero_rejected() {
        let m = parity_model(0.1, &[0.0]);
        let err = RtoModel::new(0.0, m.constraint, m.multipliers, m.metadata).unwrap_err();
        assert!(matches!(err, RtoError::InvalidParameter(_)));
    }

    #[test]
    fn out_of_range_scores_rejected() {
        assert!(ScoredExample::new("a", 1.2, 1, None, None).is_err());
        assert!(ScoredExample::new("a", f64::NAN, 1, None, None).is_err());
        assert!(ScoredExample::new("a", 0.3, 0, None, None).is_err());
        assert_abs_diff_eq!(probability_to_score(0.945).unwrap(), 0.89, epsilon = 1e-12);
        assert!(probability_to_score(1.5).is_err());
    }

    #[test]
    fn sampling_extremes_and_frequency() {
        let m = parity_model(0.1, &[0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            assert!(m.sample_prediction(&ex(1.0, 1), &mut rng).unwrap());
            assert!(!m.sample_prediction(&ex(-1.0, 1), &mut rng).unwrap());
        }
        // h = 0.7 at f = 0.07
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let e = ex(0.07, 1);
        assert_abs_diff_eq!(m.predict_probability(&e).unwrap(), 0.7, epsilon = 1e-12);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| m.sample_prediction(&e, &mut rng).unwrap())
            .count();
        assert!((hits as f64 / n as f64 - 0.7).abs() < 0.01);
    }

    #[test]
    fn compile_parity() {
        let mut data: Vec<_> = (0..100).map(|_| ex(0.0, 1)).collect();
        data.extend((0..50).map(|_| ex(0.0, 2)));
        let spec = compile_constraint(
            Criterion::StatisticalParity {
                rho: 0.4,
                epsilon: 0.0,
            },
            &data,
            2,
        )
        .unwrap();
        assert_eq!(spec.offset, 0.4);
        assert_eq!(spec.group_slack, vec![0.0, 0.0]);
        assert_eq!(spec.coefficient(&data[0]).unwrap(), 1.0);

        let data: Vec<_> = (0..200).map(|_| ex(0.0, 1)).collect();
        let spec = compile_constraint(
            Criterion::StatisticalParity {
                rho: 0.3,
                epsilon: 0.1,
            },
            &data,
            1,
        )
        .unwrap();
        assert_abs_diff_eq!(spec.group_slack[0], 10.0, epsilon = 1e-12);
    }

    #[test]
    fn compile_covariance() {
        let data: Vec<_> = (0..8)
            .map(|i| ScoredExample::new(format!("{i}"), 0.1, 1, Some(i < 2), None).unwrap())
            .collect();
        let spec =
            compile_constraint(Criterion::ConditionalCovariance { epsilon: 0.0 }, &data, 1).unwrap();
        assert_eq!(spec.offset, 0.0);
        assert_eq!(spec.group_rho.as_deref(), Some(&[0.25][..]));
        assert_abs_diff_eq!(spec.coefficient(&data[0]).unwrap(), 0.75);
        assert_abs_diff_eq!(spec.coefficient(&data[5]).unwrap(), -0.25);
    }

    #[test]
    fn compile_errors() {
        let data = vec![ex(0.0, 1)];
        let crit = Criterion::StatisticalParity {
            rho: 0.5,
            epsilon: 0.0,
        };
        assert!(matches!(
            compile_constraint(crit, &data, 2),
            Err(RtoError::EmptyGroup(2))
        ));
        assert!(matches!(
            compile_constraint(Criterion::ConditionalCovariance { epsilon: 0.0 }, &data, 1),
            Err(RtoError::MissingField(_))
        ));
        let bad = Criterion::StatisticalParity {
            rho: 1.5,
            epsilon: 0.0,
        };
        assert!(compile_constraint(bad, &data, 1).is_err());
    }

    #[test]
    fn covariance_prediction_requires_bit() {
        let data = vec![
            ScoredExample::new("a", 0.1, 1, Some(true), None).unwrap(),
            ScoredExample::new("b", 0.1, 1, Some(false), None).unwrap(),
        ];
        let spec =
            compile_constraint(Criterion::ConditionalCovariance { epsilon: 0.0 }, &data, 1).unwrap();
        let meta = TrainingMetadata {
            seed: 0,
            schedule: "fixed".into(),
            epochs: 0,
            dual_objective: 0.0,
        };
        let m = RtoModel::new(0.1, spec, Multipliers::from_nu(&[0.2]), meta).unwrap();
        assert!(matches!(
            m.predict_probability(&ex(0.1, 1)),
            Err(RtoError::MissingField(_))
        ));
        // z = 0.5: (0.1 - 0.2*0.5)/0.1 = 0
        assert_abs_diff_eq!(m.predict_probability(&data[0]).unwrap(), 0.0, epsilon = 1e-12);
        // z = -0.5: (0.1 + 0.1)/0.1 -> 1
        assert_eq!(m.predict_probability(&data[1]).unwrap(), 1.0);
    }

    #[test]
    fn restarted_average_covers_only_later_steps() {
        let mut state = DualState::new(2);
        for _ in 0..10 {
            state.step(0, 1.0, -1.0, 0.5);
        }
        state.restart_averaging();
        assert_eq!(state.lambda_avg(), state.lambda);
        let mut seen = Vec::new();
        for t in 0..6 {
            state.step(t % 2, 0.5, -1.0, 0.0);
            seen.push(state.lambda[0]);
        }
        let expected = seen.iter().sum::<f64>() / 6.0;
        assert_abs_diff_eq!(state.lambda_avg()[0], expected, epsilon = 1e-12);
        assert_eq!(state.step_count, 16);
    }

    #[test]
    fn dual_state_averages_match_explicit_mean() {
        let mut state = DualState::new(3);
        let mut history_l = vec![Vec::new(); 3];
        let mut history_m = vec![Vec::new(); 3];
        let grads = [(-0.3, 0.2), (0.5, -0.4), (-0.1, -0.1), (0.2, 0.7)];
        for t in 0..40usize {
            let k = (t * 7 + 1) % 3;
            let (gl, gm) = grads[t % grads.len()];
            state.step(k, 0.1, gl, gm);
            for g in 0..3 {
                history_l[g].push(state.lambda[g]);
                history_m[g].push(state.mu[g]);
            }
        }
        let avg_l = state.lambda_avg();
        let avg_m = state.mu_avg();
        for g in 0..3 {
            let el: f64 = history_l[g].iter().sum::<f64>() / 40.0;
            let em: f64 = history_m[g].iter().sum::<f64>() / 40.0;
            assert_abs_diff_eq!(avg_l[g], el, epsilon = 1e-12);
            assert_abs_diff_eq!(avg_m[g], em, epsilon = 1e-12);
            assert!(state.lambda[g] >= 0.0 && state.mu[g] >= 0.0);
        }
    }

    proptest! {
        #[test]
        fn xi_is_convex(w1 in -3.0f64..3.0, w2 in -3.0f64..3.0, t in 0.0f64..=1.0, gamma in 0.001f64..1.0) {
            let lhs = xi(t * w1 + (1.0 - t) * w2, gamma);
            let rhs = t * xi(w1, gamma) + (1.0 - t) * xi(w2, gamma);
            prop_assert!(lhs <= rhs + 1e-12);
        }

        #[test]
        fn derivative_matches_finite_differences(w in -2.0f64..2.0, gamma in 0.01f64..1.0) {
            prop_assume!(w.abs() > 1e-4 && (w - gamma).abs() > 1e-4);
            let h = 1e-7;
            let fd = (xi(w + h, gamma) - xi(w - h, gamma)) / (2.0 * h);
            prop_assert!((fd - xi_prime(w, gamma)).abs() < 1e-6);
        }

        #[test]
        fn ramp_is_monotone_with_width_gamma(nu in -1.0f64..1.0, gamma in 0.01f64..0.5, a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(ramp(lo, nu, 1.0, gamma) <= ramp(hi, nu, 1.0, gamma));
            prop_assert_eq!(ramp(nu, nu, 1.0, gamma), 0.0);
            prop_assert!(ramp(nu + gamma, nu, 1.0, gamma) >= 1.0 - 1e-12);
            prop_assert_eq!(ramp(nu + gamma * (1.0 + 1e-9), nu, 1.0, gamma), 1.0);
        }

        #[test]
        fn compilation_is_reproducible(scores in prop::collection::vec((-1.0f64..1.0, 1usize..=3, any::<bool>()), 3..40)) {
            let mut data: Vec<_> = scores.iter().enumerate()
                .map(|(i, &(s, g, b))| ScoredExample::new(i.to_string(), s, g, Some(b), None).unwrap())
                .collect();
            for g in 1..=3 {
                data.push(ScoredExample::new(format!("pad{g}"), 0.0, g, Some(false), None).unwrap());
            }
            for crit in [Criterion::StatisticalParity { rho: 0.3, epsilon: 0.05 }, Criterion::ConditionalCovariance { epsilon: 0.02 }] {
                let a = compile_constraint(crit, &data, 3).unwrap();
                let b = compile_constraint(crit, &data, 3).unwrap();
                prop_assert_eq!(a, b);
            }
        }
    }
}
