//! Self-checks: SGD against the exact oracle, the covariance impossibility
//! inequality, and the held-out parity bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rto_core::data::generate_calibrated;
use rto_core::metrics::{impossibility_witness, parity_gap, parity_generalization_bound};
use rto_core::oracle::solve_all;
use rto_core::{
    compile_constraint, train, ConstraintSpec, Criterion, Result, ScoredExample, Schedule,
    TrainConfig,
};

pub const OBJECTIVE_TOLERANCE: f64 = 1e-3;
pub const PREDICTION_TOLERANCE: f64 = 1e-2;
/// Total SGD updates per oracle-check run; epochs are derived from it.
const STEP_BUDGET: usize = 20_000_000;
const MAX_EPOCHS: usize = 40_000;

/// SGD setting used to compare against the oracle: `0.1/√t` on the per-group
/// clock, last iterate, no early stop.
pub fn precise_config(examples: usize, seed: u64) -> TrainConfig {
    let epochs = (STEP_BUDGET / examples.max(1)).clamp(50, MAX_EPOCHS);
    let mut config = TrainConfig::with_schedule(Schedule::InverseSqrt(0.1), epochs, seed);
    config.convergence_tolerance = 0.0;
    config
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleAgreement {
    /// `|F_sgd − F*|` on the per-example scale.
    pub objective_gap: f64,
    pub max_h_diff: f64,
    /// Oracle `|primal + dual|`.
    pub duality_gap: f64,
    pub sgd_h: Vec<f64>,
    pub oracle_h: Vec<f64>,
}

impl OracleAgreement {
    pub fn passes(&self) -> bool {
        self.objective_gap <= OBJECTIVE_TOLERANCE && self.max_h_diff <= PREDICTION_TOLERANCE
    }
}

pub fn oracle_agreement(
    examples: &[ScoredExample],
    spec: &ConstraintSpec,
    gamma: f64,
    config: &TrainConfig,
) -> Result<OracleAgreement> {
    let oracle = solve_all(examples, spec, gamma, 1e-12)?;
    let run = train(examples, spec, gamma, config)?;
    let sgd_h = run.model.predict_all(examples)?;
    let max_h_diff = sgd_h
        .iter()
        .zip(&oracle.h)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(OracleAgreement {
        objective_gap: (run.model.metadata.dual_objective - oracle.mean_dual_objective()).abs(),
        max_h_diff,
        duality_gap: oracle.duality_gap.abs(),
        sgd_h,
        oracle_h: oracle.h,
    })
}

/// A small random parity instance: `K ∈ 1..=3`, `N ∈ 20..=200` with every
/// group present, `γ ∈ {0.05, 0.1}`, `ε ∈ {0, 0.05}`, `ρ ∈ [0.2, 0.8)`,
/// uniform scores.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub examples: Vec<ScoredExample>,
    pub groups: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub rho: f64,
}

impl RandomInstance {
    pub fn generate(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let groups = rng.gen_range(1..=3);
        let n = rng.gen_range(20..=200);
        let gamma = if rng.gen::<bool>() { 0.05 } else { 0.1 };
        let epsilon = if rng.gen::<bool>() { 0.0 } else { 0.05 };
        let rho = rng.gen_range(0.2..0.8);
        let examples = (0..n)
            .map(|i| {
                let g = if i < groups { i + 1 } else { rng.gen_range(1..=groups) };
                let f: f64 = rng.gen_range(-1.0..=1.0);
                ScoredExample::new(format!("r{i}"), f, g, None, None).expect("valid example")
            })
            .collect();
        Self { examples, groups, gamma, epsilon, rho }
    }

    pub fn spec(&self) -> Result<ConstraintSpec> {
        compile_constraint(
            Criterion::StatisticalParity { rho: self.rho, epsilon: self.epsilon },
            &self.examples,
            self.groups,
        )
    }
}

/// Runs the impossibility witness on `trials` random discrete instances and
/// returns how many satisfy the inequality.
pub fn impossibility_trials(trials: usize, seed: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut passes = 0;
    for _ in 0..trials {
        let m = rng.gen_range(2..=20);
        let raw: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let predictor: Vec<bool> = (0..m).map(|_| rng.gen()).collect();
        let sensitive: Vec<f64> = (0..m)
            .map(|_| match rng.gen_range(0..4) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.gen(),
            })
            .collect();
        if impossibility_witness(&predictor, &sensitive, &weights)?.holds() {
            passes += 1;
        }
    }
    Ok(passes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditResult {
    pub within: usize,
    pub trials: usize,
    pub bound: f64,
    pub worst_gap: f64,
}

/// Trains on `n` calibrated synthetic examples per trial (two groups with
/// logit means ±0.5, ρ = label mean, γ = 0.05, default training) and checks
/// the parity gap on `n` fresh examples against the high-probability bound.
pub fn bound_audit(trials: usize, n: usize, delta: f64, epsilon: f64, seed: u64) -> Result<AuditResult> {
    let bound = parity_generalization_bound(n, 2, delta, epsilon)?;
    let mut within = 0;
    let mut worst_gap: f64 = 0.0;
    for t in 0..trials as u64 {
        let base = seed.wrapping_add(2 * t);
        let train_set = generate_calibrated(n, &[0.5, -0.5], base)?;
        let test_set = generate_calibrated(n, &[0.5, -0.5], base.wrapping_add(1))?;
        let rho = train_set.label_mean().expect("synthetic data is labelled");
        let spec = compile_constraint(
            Criterion::StatisticalParity { rho, epsilon },
            &train_set.examples,
            2,
        )?;
        let run = train(&train_set.examples, &spec, 0.05, &TrainConfig::for_data(n, 2, base))?;
        let h = run.model.predict_all(&test_set.examples)?;
        let gap = parity_gap(&h, &test_set.group_ids(), 2)?;
        worst_gap = worst_gap.max(gap);
        if gap <= bound {
            within += 1;
        }
    }
    Ok(AuditResult { within, trials, bound, worst_gap })
}
