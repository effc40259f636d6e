//! Projected stochastic gradient descent on the dual of the regularized
//! post-processing problem.
//!
//! For an example of group `k` with score `f` and coefficient `z`, writing
//! `d = z·ξ'_γ(f − ν_k z)` and `s` for the per-example slack, the stochastic
//! gradients are
//!
//! ```text
//! g_λ = s + b − d        g_μ = s − b + d
//! ```
//!
//! and both multipliers are projected back onto `[0, ∞)` after the step.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, RtoError};
use crate::model::{
    check_group, validate_score, xi, xi_prime, ConstraintSpec, DualState, Multipliers, RtoModel,
    ScoredExample, TrainingMetadata,
};

/// Learning-rate schedule. Decaying schedules are indexed by the 1-based
/// count `t` of updates the group being stepped has received, so small
/// groups are not starved by the others' progress.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Schedule {
    Fixed(f64),
    /// `c / √t`
    InverseSqrt(f64),
    /// `c / t`
    RobbinsMonro(f64),
}

impl Schedule {
    #[inline]
    pub fn rate(&self, t: u64) -> f64 {
        match *self {
            Schedule::Fixed(a) => a,
            Schedule::InverseSqrt(c) => c / (t as f64).sqrt(),
            Schedule::RobbinsMonro(c) => c / t as f64,
        }
    }

    fn constant(&self) -> f64 {
        match *self {
            Schedule::Fixed(c) | Schedule::InverseSqrt(c) | Schedule::RobbinsMonro(c) => c,
        }
    }

    /// `0.1·√(K/T)` with `T = epochs·N` updates.
    pub fn default_fixed(groups: usize, examples: usize, epochs: usize) -> Self {
        let steps = (examples.max(1) * epochs.max(1)) as f64;
        Schedule::Fixed(0.1 * (groups as f64 / steps).sqrt())
    }

    pub fn describe(&self) -> String {
        match *self {
            Schedule::Fixed(a) => format!("fixed:{a:.16e}"),
            Schedule::InverseSqrt(c) => format!("inverse_sqrt:{c:.16e}"),
            Schedule::RobbinsMonro(c) => format!("robbins_monro:{c:.16e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub schedule: Schedule,
    pub max_epochs: usize,
    /// Stop once `max_k |Δλ_k| + |Δμ_k|` over an epoch falls below this;
    /// zero runs every epoch.
    pub convergence_tolerance: f64,
    pub seed: u64,
    pub use_averaged_iterates: bool,
    /// Epochs excluded from the average; the window restarts after them.
    pub burn_in_epochs: usize,
    pub shuffle_per_epoch: bool,
    pub record_trace: bool,
}

impl TrainConfig {
    pub const DEFAULT_EPOCHS: usize = 50;
    pub const DEFAULT_TOLERANCE: f64 = 1e-6;

    /// Fixed rate `0.1·√(K/T)`, 50 epochs, iterates averaged over the
    /// second half of training.
    pub fn for_data(examples: usize, groups: usize, seed: u64) -> Self {
        Self::with_schedule(
            Schedule::default_fixed(groups, examples, Self::DEFAULT_EPOCHS),
            Self::DEFAULT_EPOCHS,
            seed,
        )
    }

    /// Averaging (over the second half of the epochs) is on for a fixed rate
    /// and off otherwise.
    pub fn with_schedule(schedule: Schedule, max_epochs: usize, seed: u64) -> Self {
        Self {
            schedule,
            max_epochs,
            convergence_tolerance: Self::DEFAULT_TOLERANCE,
            seed,
            use_averaged_iterates: matches!(schedule, Schedule::Fixed(_)),
            burn_in_epochs: max_epochs / 2,
            shuffle_per_epoch: true,
            record_trace: false,
        }
    }

    fn validate(&self) -> Result<()> {
        let c = self.schedule.constant();
        if !(c > 0.0) || !c.is_finite() {
            return Err(invalid(format!("learning rate must be positive, got {c}")));
        }
        if self.max_epochs == 0 {
            return Err(invalid("max_epochs must be at least 1"));
        }
        if !(self.convergence_tolerance >= 0.0) {
            return Err(invalid("convergence tolerance must be non-negative"));
        }
        Ok(())
    }
}

/// Per-epoch snapshot of the multipliers the model would use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub epoch: usize,
    pub nu: Vec<f64>,
    pub dual_objective: f64,
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub model: RtoModel,
    pub state: DualState,
    pub trace: Vec<TraceRecord>,
    pub epochs_run: usize,
    pub converged: bool,
}

/// Epoch-by-epoch record of a run; empty unless tracing was enabled.
pub fn convergence_trace(run: &TrainRun) -> &[TraceRecord] {
    &run.trace
}

/// Flattened view of a training sample.
struct Prepared {
    scores: Vec<f64>,
    coefs: Vec<f64>,
    groups: Vec<usize>,
}

fn prepare(examples: &[ScoredExample], spec: &ConstraintSpec) -> Result<Prepared> {
    if examples.is_empty() {
        return Err(RtoError::EmptyDataset);
    }
    let k = spec.groups();
    let mut counts = vec![0usize; k];
    let mut scores = Vec::with_capacity(examples.len());
    let mut groups = Vec::with_capacity(examples.len());
    for e in examples {
        validate_score(e.score)?;
        check_group(e.group, k)?;
        counts[e.group_index()] += 1;
        scores.push(e.score);
        groups.push(e.group_index());
    }
    if let Some(g) = counts.iter().position(|&c| c == 0) {
        return Err(RtoError::EmptyGroup(g + 1));
    }
    let coefs = spec.coefficients(examples)?;
    Ok(Prepared {
        scores,
        coefs,
        groups,
    })
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

/// Runs projected SGD and returns the fitted model with its diagnostics.
pub fn train(
    examples: &[ScoredExample],
    spec: &ConstraintSpec,
    gamma: f64,
    config: &TrainConfig,
) -> Result<TrainRun> {
    check_gamma(gamma)?;
    config.validate()?;
    let data = prepare(examples, spec)?;
    let k = spec.groups();
    let b = spec.offset;
    let slack = spec.per_sample_slack();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut state = DualState::new(k);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut epochs_run = 0;
    let mut averaging = false;

    for epoch in 1..=config.max_epochs {
        if epoch == config.burn_in_epochs + 1 && epoch > 1 {
            state.restart_averaging();
        }
        if config.shuffle_per_epoch {
            order.shuffle(&mut rng);
        }
        let before = state.current();
        for &i in &order {
            let g = data.groups[i];
            let z = data.coefs[i];
            let nu = state.lambda[g] - state.mu[g];
            let d = z * xi_prime(data.scores[i] - nu * z, gamma);
            let grad_lambda = slack + b - d;
            let grad_mu = slack - b + d;
            debug_assert!(grad_lambda.abs() <= slack + b.abs() + z.abs() + 1e-12);
            debug_assert!(grad_mu.abs() <= slack + b.abs() + z.abs() + 1e-12);
            let rate = config.schedule.rate(state.group_steps(g) + 1);
            state.step(g, rate, grad_lambda, grad_mu);
            debug_assert!(state.lambda[g] >= 0.0 && state.mu[g] >= 0.0);
        }
        epochs_run = epoch;

        averaging = config.use_averaged_iterates && epoch > config.burn_in_epochs;
        if config.record_trace {
            let m = effective(&state, averaging);
            trace.push(TraceRecord {
                epoch,
                nu: m.nus(),
                dual_objective: objective(&data, b, slack, gamma, &m),
            });
        }

        let movement = (0..k)
            .map(|g| (state.lambda[g] - before.lambda[g]).abs() + (state.mu[g] - before.mu[g]).abs())
            .fold(0.0, f64::max);
        if movement < config.convergence_tolerance {
            converged = true;
            break;
        }
    }

    // Stopping inside the burn-in means the raw iterate has already settled.
    let multipliers = effective(&state, averaging);
    let final_objective = objective(&data, b, slack, gamma, &multipliers);
    let metadata = TrainingMetadata {
        seed: config.seed,
        schedule: config.schedule.describe(),
        epochs: epochs_run,
        dual_objective: final_objective,
    };
    let model = RtoModel::new(gamma, spec.clone(), multipliers, metadata)?;
    Ok(TrainRun {
        model,
        state,
        trace,
        epochs_run,
        converged,
    })
}

fn effective(state: &DualState, averaging: bool) -> Multipliers {
    if averaging {
        state.averaged()
    } else {
        state.current()
    }
}

fn objective(data: &Prepared, b: f64, slack: f64, gamma: f64, m: &Multipliers) -> f64 {
    let total: f64 = (0..data.scores.len())
        .map(|i| {
            let g = data.groups[i];
            let (l, u) = (m.lambda[g], m.mu[g]);
            let nu = l - u;
            slack * (l + u) + b * nu + xi(data.scores[i] - nu * data.coefs[i], gamma)
        })
        .sum();
    total / data.scores.len() as f64
}

/// Empirical mean of `s(λ_k+μ_k) + b(λ_k−μ_k) + ξ_γ(f − (λ_k−μ_k)z)`.
pub fn dual_objective(
    examples: &[ScoredExample],
    spec: &ConstraintSpec,
    gamma: f64,
    multipliers: &Multipliers,
) -> Result<f64> {
    check_gamma(gamma)?;
    multipliers.validate()?;
    if multipliers.groups() != spec.groups() {
        return Err(RtoError::Mismatch(format!(
            "{} multiplier pairs for {} groups",
            multipliers.groups(),
            spec.groups()
        )));
    }
    let data = prepare(examples, spec)?;
    Ok(objective(
        &data,
        spec.offset,
        spec.per_sample_slack(),
        gamma,
        multipliers,
    ))
}

/// Expected suboptimality bound of the averaged iterate after `steps` updates
/// at a fixed rate: `(1+ρ+ε)²α + (‖μ*‖² + ‖λ*‖²)/(2Tα)`.
pub fn averaged_sgd_gap_bound(
    rho: f64,
    epsilon: f64,
    alpha: f64,
    steps: u64,
    lambda_star: &[f64],
    mu_star: &[f64],
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    if steps == 0 {
        return Err(invalid("T must be at least 1"));
    }
    let norm: f64 = lambda_star.iter().chain(mu_star).map(|v| v * v).sum();
    let lead = 1.0 + rho + epsilon;
    Ok(lead * lead * alpha + norm / (2.0 * steps as f64 * alpha))
}
