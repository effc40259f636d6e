//! Datasets, file formats, and generators.
//!
//! Every shuffle and every random draw in this crate uses `ChaCha8Rng`
//! (rand_chacha 0.3) seeded with `SeedableRng::seed_from_u64`, and shuffles
//! use rand 0.8's `SliceRandom::shuffle`.

pub mod adult;
mod ingest;
mod model_io;
mod split;
mod synthetic;

use serde::{Deserialize, Serialize};

use crate::model::ScoredExample;

pub use ingest::{ingest_scores, write_scores, ScoreColumn};
pub use model_io::{load_model, model_from_text, model_to_text, save_model, FORMAT_VERSION};
pub use split::{check_disjoint, three_way_split};
pub use synthetic::{
    dccc_bias_injection, example1_spec, generate, generate_calibrated, generate_example1,
    generate_saturated, Atom, SyntheticSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitTag {
    TrainPost,
    Validation,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub examples: Vec<ScoredExample>,
    /// Declared group count `K`.
    pub groups: usize,
    pub provenance: String,
    pub split: Option<SplitTag>,
    /// `η(x) = p(y=1|x)` per example, known only for synthetic data.
    pub bayes_regressor: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(examples: Vec<ScoredExample>, groups: usize, provenance: impl Into<String>) -> Self {
        Self {
            examples,
            groups,
            provenance: provenance.into(),
            split: None,
            bayes_regressor: None,
        }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Empirical mean of the labels, if every example has one.
    pub fn label_mean(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        let ones = self
            .examples
            .iter()
            .map(|e| e.label.map(u32::from))
            .sum::<Option<u32>>()?;
        Some(f64::from(ones) / self.len() as f64)
    }

    pub fn group_ids(&self) -> Vec<usize> {
        self.examples.iter().map(|e| e.group).collect()
    }

    pub(crate) fn subset(&self, idx: &[usize], split: SplitTag) -> Dataset {
        Dataset {
            examples: idx.iter().map(|&i| self.examples[i].clone()).collect(),
            groups: self.groups,
            provenance: self.provenance.clone(),
            split: Some(split),
            bayes_regressor: self
                .bayes_regressor
                .as_ref()
                .map(|eta| idx.iter().map(|&i| eta[i]).collect()),
        }
    }
}
