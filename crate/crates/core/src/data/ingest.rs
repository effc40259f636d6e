use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Result, RtoError};
use crate::model::{probability_to_score, ScoredExample};

/// How the second column is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreColumn {
    /// Decide from the header name (`score` or `prob`).
    #[default]
    Auto,
    Score,
    Probability,
}

fn parse_bit(cell: &str, line: usize, column: &str) -> Result<Option<bool>> {
    match cell.trim() {
        "" => Ok(None),
        "0" => Ok(Some(false)),
        "1" => Ok(Some(true)),
        other => Err(RtoError::Parse {
            line,
            message: format!("{column} must be 0 or 1, got {other:?}"),
        }),
    }
}

/// Reads a score file.
///
/// Layout: an optional first line `# groups=K`, then a CSV header naming
/// `id`, `score` or `prob`, `group`, and optionally `sensitive` and `label`.
/// Without the comment line, `K` is the largest group id present.
pub fn ingest_scores(path: impl AsRef<Path>, column: ScoreColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let (declared, body, offset) = match text.lines().next() {
        Some(first) if first.trim_start().starts_with('#') => {
            let spec = first.trim_start().trim_start_matches('#').trim();
            let value = spec
                .strip_prefix("groups=")
                .ok_or_else(|| RtoError::Parse {
                    line: 1,
                    message: format!("expected '# groups=K', got {first:?}"),
                })?;
            let k = value.trim().parse::<usize>().map_err(|e| RtoError::Parse {
                line: 1,
                message: format!("bad group count: {e}"),
            })?;
            let rest = text.split_once('\n').map_or("", |(_, r)| r);
            (Some(k), rest, 1)
        }
        _ => (None, text.as_str(), 0),
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| RtoError::Parse {
            line: 1 + offset,
            message: e.to_string(),
        })?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let id_col = find("id").ok_or_else(|| RtoError::Parse {
        line: 1 + offset,
        message: "missing 'id' column".into(),
    })?;
    let group_col = find("group").ok_or_else(|| RtoError::Parse {
        line: 1 + offset,
        message: "missing 'group' column".into(),
    })?;
    let (score_col, is_prob) = match (column, find("score"), find("prob")) {
        (ScoreColumn::Score, Some(c), _) | (ScoreColumn::Auto, Some(c), _) => (c, false),
        (ScoreColumn::Probability, _, Some(c)) | (ScoreColumn::Auto, None, Some(c)) => (c, true),
        _ => {
            return Err(RtoError::Parse {
                line: 1 + offset,
                message: "missing 'score' or 'prob' column".into(),
            })
        }
    };
    let sensitive_col = find("sensitive");
    let label_col = find("label");

    let mut examples = Vec::new();
    let mut seen = HashSet::new();
    let mut max_group = 0;
    for record in reader.records() {
        let record = record.map_err(|e| RtoError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize) + offset,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize) + offset;
        let cell = |c: usize| record.get(c).unwrap_or("");
        let id = cell(id_col).to_string();
        let raw: f64 = cell(score_col).parse().map_err(|_| RtoError::Parse {
            line,
            message: format!("bad number {:?}", cell(score_col)),
        })?;
        let score = if is_prob {
            probability_to_score(raw).map_err(|e| RtoError::Validation {
                line,
                message: e.to_string(),
            })?
        } else {
            raw
        };
        let group: usize = cell(group_col).parse().map_err(|_| RtoError::Parse {
            line,
            message: format!("bad group {:?}", cell(group_col)),
        })?;
        if let Some(k) = declared {
            if group > k {
                return Err(RtoError::Validation {
                    line,
                    message: format!("group {group} exceeds declared K={k}"),
                });
            }
        }
        let sensitive = match sensitive_col {
            Some(c) => parse_bit(cell(c), line, "sensitive")?,
            None => None,
        };
        let label = match label_col {
            Some(c) => parse_bit(cell(c), line, "label")?,
            None => None,
        };
        let example = ScoredExample::new(id.clone(), score, group, sensitive, label)
            .map_err(|e| RtoError::Validation {
                line,
                message: e.to_string(),
            })?;
        if !seen.insert(id.clone()) {
            return Err(RtoError::Validation {
                line,
                message: format!("duplicate id {id:?}"),
            });
        }
        max_group = max_group.max(group);
        examples.push(example);
    }
    let groups = declared.unwrap_or(max_group);
    Ok(Dataset::new(examples, groups, path.display().to_string()))
}

/// Writes a dataset in the layout read by [`ingest_scores`], with a
/// `# groups=K` line. Scores use the shortest round-trip decimal form.
pub fn write_scores(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# groups={}\n", dataset.groups));
    out.push_str("id,score,group,sensitive,label\n");
    let bit = |b: Option<bool>| b.map_or(String::new(), |v| u8::from(v).to_string());
    for e in &dataset.examples {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.id,
            e.score,
            e.group,
            bit(e.sensitive),
            bit(e.label)
        ));
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}
