//! Competing post-processors and a logistic-regression score producer.

mod linear;
mod roc;
mod shift;

pub use linear::{
    default_c_grid, linear_scorer_fit, select_c, LinearScorer, LogisticConfig,
};
pub use roc::{default_theta_grid, roc_fit, RocFit, RocRule};
pub use shift::{shift_inference_apply, ShiftInferenceRule};
