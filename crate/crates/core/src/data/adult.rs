//! UCI Adult income data: parsing, feature encoding, and the scorer/post-processing split.
//!
//! The sensitive attribute is sex. Group 1 is female (sensitive bit 1) and
//! group 2 is male; the positive label is income `>50K`. Categorical columns
//! are one-hot encoded with `?` kept as its own category, and numeric columns
//! are z-scored with statistics from the scorer's training rows.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::LinearScorer;
use crate::data::Dataset;
use crate::error::{Result, RtoError};
use crate::model::ScoredExample;

const NUMERIC: [usize; 6] = [0, 2, 4, 10, 11, 12];
const CATEGORICAL: [usize; 8] = [1, 3, 5, 6, 7, 8, 9, 13];
const SEX: usize = 9;

#[derive(Debug, Clone, PartialEq)]
pub struct AdultRecord {
    /// Stable identifier (`<file stem>-<line>`).
    pub id: String,
    pub numeric: [f64; 6],
    pub categorical: [String; 8],
    pub female: bool,
    pub label: bool,
}

impl AdultRecord {
    pub fn group(&self) -> usize {
        if self.female {
            1
        } else {
            2
        }
    }
}

/// Parses one UCI file. Blank lines and the `|`-prefixed banner of
/// `adult.test` are skipped; the test file's trailing `.` on labels is accepted.
pub fn parse_adult(text: &str, source: &str) -> Result<Vec<AdultRecord>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('|') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 15 {
            return Err(RtoError::Parse {
                line,
                message: format!("{source}: expected 15 fields, got {}", fields.len()),
            });
        }
        let mut numeric = [0.0; 6];
        for (slot, &c) in numeric.iter_mut().zip(&NUMERIC) {
            *slot = fields[c].parse().map_err(|_| RtoError::Parse {
                line,
                message: format!("{source}: bad number {:?}", fields[c]),
            })?;
        }
        let categorical = CATEGORICAL.map(|c| fields[c].to_string());
        let female = match fields[SEX] {
            "Female" => true,
            "Male" => false,
            other => {
                return Err(RtoError::Parse {
                    line,
                    message: format!("{source}: unknown sex {other:?}"),
                })
            }
        };
        let label = match fields[14].trim_end_matches('.') {
            ">50K" => true,
            "<=50K" => false,
            other => {
                return Err(RtoError::Parse {
                    line,
                    message: format!("{source}: unknown income label {other:?}"),
                })
            }
        };
        out.push(AdultRecord {
            id: format!("{source}-{line}"),
            numeric,
            categorical,
            female,
            label,
        });
    }
    Ok(out)
}

/// Reads `adult.data` and `adult.test` from `dir` and concatenates them.
pub fn load_adult(dir: impl AsRef<Path>) -> Result<Vec<AdultRecord>> {
    let dir = dir.as_ref();
    let mut all = Vec::new();
    for name in ["adult.data", "adult.test"] {
        let text = fs::read_to_string(dir.join(name))?;
        all.extend(parse_adult(&text, name.trim_start_matches("adult."))?);
    }
    Ok(all)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEncoder {
    means: [f64; 6],
    stds: [f64; 6],
    vocab: Vec<BTreeMap<String, usize>>,
    dim: usize,
}

impl FeatureEncoder {
    pub fn fit(records: &[AdultRecord]) -> Result<Self> {
        if records.is_empty() {
            return Err(RtoError::EmptyDataset);
        }
        let n = records.len() as f64;
        let mut means = [0.0; 6];
        let mut stds = [0.0; 6];
        for j in 0..6 {
            let m = records.iter().map(|r| r.numeric[j]).sum::<f64>() / n;
            let v = records.iter().map(|r| (r.numeric[j] - m).powi(2)).sum::<f64>() / n;
            means[j] = m;
            stds[j] = if v > 0.0 { v.sqrt() } else { 1.0 };
        }
        let mut dim = 6;
        let mut vocab = Vec::with_capacity(8);
        for j in 0..8 {
            let mut values: Vec<&str> = records.iter().map(|r| r.categorical[j].as_str()).collect();
            values.sort_unstable();
            values.dedup();
            let map: BTreeMap<String, usize> = values
                .into_iter()
                .enumerate()
                .map(|(i, v)| (v.to_string(), dim + i))
                .collect();
            dim += map.len();
            vocab.push(map);
        }
        Ok(Self { means, stds, vocab, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Categories unseen during fitting encode as all zeros.
    pub fn encode(&self, record: &AdultRecord) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for j in 0..6 {
            x[j] = (record.numeric[j] - self.means[j]) / self.stds[j];
        }
        for (j, map) in self.vocab.iter().enumerate() {
            if let Some(&col) = map.get(&record.categorical[j]) {
                x[col] = 1.0;
            }
        }
        x
    }

    pub fn encode_all(&self, records: &[AdultRecord]) -> Vec<Vec<f64>> {
        records.iter().map(|r| self.encode(r)).collect()
    }
}

/// Seeded shuffle; the first third trains the scorer and the rest is left
/// for post-processing, so the two never share a row.
pub fn scorer_split(records: &[AdultRecord], seed: u64) -> (Vec<AdultRecord>, Vec<AdultRecord>) {
    let mut shuffled = records.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let post = shuffled.split_off(shuffled.len() / 3);
    (shuffled, post)
}

/// Scores records with a fitted scorer, producing a two-group dataset.
pub fn scored_dataset(
    records: &[AdultRecord],
    encoder: &FeatureEncoder,
    scorer: &LinearScorer,
) -> Result<Dataset> {
    let examples = records
        .iter()
        .map(|r| {
            let score = scorer.score(&encoder.encode(r))?;
            ScoredExample::new(r.id.clone(), score, r.group(), Some(r.female), Some(r.label))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(examples, 2, "adult"))
}
