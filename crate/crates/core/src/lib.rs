//! Fair post-processing of binary classifier scores.
//!
//! A score `f(x) ∈ [−1, 1]` is turned into a randomized, group-aware
//! threshold rule `h(x) = clamp((f(x) − ν_k)/γ, 0, 1)` whose group means obey
//! a parity (or conditional-covariance) constraint. The thresholds `ν_k` come
//! from projected SGD on the Lagrange dual of a regularized QP; [`oracle`]
//! solves the same dual exactly for verification.

pub mod baselines;
pub mod data;
pub mod error;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod trainer;

pub use error::{Result, RtoError};
pub use model::{
    compile_constraint, probability_to_score, xi_gamma, xi_gamma_derivative, ConstraintSpec,
    Criterion, DualState, Multipliers, RtoModel, ScoredExample, TrainingMetadata,
};
pub use trainer::{train, Schedule, TrainConfig, TrainRun};
