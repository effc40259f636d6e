//! Adult pipeline: fit the logistic scorer on one third of the records and
//! split the scored remainder into post-processing train/validation/test.

use std::path::Path;

use rto_core::baselines::{linear_scorer_fit, LogisticConfig};
use rto_core::data::adult::{load_adult, scored_dataset, scorer_split, FeatureEncoder};
use rto_core::data::{three_way_split, Dataset};
use rto_core::Result;

#[derive(Debug, Clone)]
pub struct AdultSplits {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
    /// Hard-label accuracy of the scorer on the post-processing records.
    pub scorer_accuracy: f64,
}

pub fn prepare(dir: impl AsRef<Path>, seed: u64, logistic: &LogisticConfig) -> Result<AdultSplits> {
    let records = load_adult(dir)?;
    let (scorer_records, post) = scorer_split(&records, seed);
    let encoder = FeatureEncoder::fit(&scorer_records)?;
    let labels: Vec<bool> = scorer_records.iter().map(|r| r.label).collect();
    let scorer = linear_scorer_fit(&encoder.encode_all(&scorer_records), &labels, logistic)?;
    let post_labels: Vec<bool> = post.iter().map(|r| r.label).collect();
    let scorer_accuracy = scorer.accuracy(&encoder.encode_all(&post), &post_labels)?;
    let scored = scored_dataset(&post, &encoder, &scorer)?;
    let (train, validation, test) = three_way_split(&scored, seed)?;
    Ok(AdultSplits { train, validation, test, scorer_accuracy })
}
