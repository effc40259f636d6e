//! Line-oriented model file.
//!
//! ```text
//! format_version=1
//! gamma=5.0000000000000003e-2
//! criterion=statistical_parity
//! rho=4.0000000000000002e-1      (`none` for the covariance criterion)
//! epsilon=0.0000000000000000e0
//! K=2
//! group_sizes=34286,25714
//! group_rho=...                  (covariance criterion only)
//! seed=42
//! schedule=fixed:1.2909944487358056e-3
//! epochs=50
//! dual_objective=...
//! 1 <lambda_1> <mu_1>
//! 2 <lambda_2> <mu_2>
//! ```
//!
//! Floats use 17 significant digits so every value survives a round trip.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Result, RtoError};
use crate::model::{ConstraintSpec, Criterion, Multipliers, RtoModel, TrainingMetadata};

pub const FORMAT_VERSION: u32 = 1;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

pub fn model_to_text(model: &RtoModel) -> String {
    let c = &model.constraint;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| out.push_str(&format!("{k}={v}\n"));
    kv("format_version", FORMAT_VERSION.to_string());
    kv("gamma", num(model.gamma));
    kv("criterion", c.criterion.name().to_string());
    kv(
        "rho",
        match c.criterion {
            Criterion::StatisticalParity { rho, .. } => num(rho),
            Criterion::ConditionalCovariance { .. } => "none".into(),
        },
    );
    kv("epsilon", num(c.criterion.epsilon()));
    kv("K", c.groups().to_string());
    kv("group_sizes", join(&c.group_sizes));
    if let Some(r) = &c.group_rho {
        kv("group_rho", r.iter().map(|&x| num(x)).collect::<Vec<_>>().join(","));
    }
    kv("seed", model.metadata.seed.to_string());
    kv("schedule", model.metadata.schedule.clone());
    kv("epochs", model.metadata.epochs.to_string());
    kv("dual_objective", num(model.metadata.dual_objective));
    for k in 0..model.groups() {
        out.push_str(&format!(
            "{} {} {}\n",
            k + 1,
            num(model.multipliers.lambda[k]),
            num(model.multipliers.mu[k])
        ));
    }
    out
}

fn ser(msg: impl Into<String>) -> RtoError {
    RtoError::Serialization(msg.into())
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| ser(format!("bad value for {key}: {value:?}")))
}

pub fn model_from_text(text: &str) -> Result<RtoModel> {
    let mut header: HashMap<&str, &str> = HashMap::new();
    let mut rows = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some((k, v)) = line.split_once('=') {
            if !rows.is_empty() {
                return Err(ser("header line after multiplier rows"));
            }
            header.insert(k.trim(), v.trim());
        } else {
            rows.push(line);
        }
    }
    let get = |k: &str| header.get(k).copied().ok_or_else(|| ser(format!("missing header {k}")));

    let version: u32 = parse("format_version", get("format_version")?)?;
    if version != FORMAT_VERSION {
        return Err(RtoError::Version(format!(
            "{version} (expected {FORMAT_VERSION})"
        )));
    }
    let epsilon: f64 = parse("epsilon", get("epsilon")?)?;
    let criterion = match get("criterion")? {
        "statistical_parity" => Criterion::StatisticalParity {
            rho: parse("rho", get("rho")?)?,
            epsilon,
        },
        "conditional_covariance" => Criterion::ConditionalCovariance { epsilon },
        other => return Err(ser(format!("unknown criterion {other:?}"))),
    };
    let k: usize = parse("K", get("K")?)?;
    let list = |key: &str| -> Result<Vec<&str>> {
        let v = get(key)?;
        let items: Vec<&str> = if v.is_empty() { vec![] } else { v.split(',').collect() };
        if items.len() != k {
            return Err(ser(format!("{key} has {} entries, expected {k}", items.len())));
        }
        Ok(items)
    };
    let group_sizes = list("group_sizes")?
        .into_iter()
        .map(|s| parse("group_sizes", s))
        .collect::<Result<Vec<usize>>>()?;
    let group_rho = match criterion {
        Criterion::ConditionalCovariance { .. } => Some(
            list("group_rho")?
                .into_iter()
                .map(|s| parse("group_rho", s))
                .collect::<Result<Vec<f64>>>()?,
        ),
        Criterion::StatisticalParity { .. } => None,
    };
    let per_sample = match criterion {
        Criterion::StatisticalParity { .. } => epsilon / 2.0,
        Criterion::ConditionalCovariance { .. } => epsilon,
    };
    let constraint = ConstraintSpec {
        criterion,
        offset: match criterion {
            Criterion::StatisticalParity { rho, .. } => rho,
            Criterion::ConditionalCovariance { .. } => 0.0,
        },
        group_slack: group_sizes.iter().map(|&n| n as f64 * per_sample).collect(),
        group_sizes,
        group_rho,
    };

    if rows.len() != k {
        return Err(ser(format!("{} multiplier rows, expected {k}", rows.len())));
    }
    let mut lambda = vec![0.0; k];
    let mut mu = vec![0.0; k];
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(ser(format!("malformed multiplier row {row:?}")));
        }
        let idx: usize = parse("group index", fields[0])?;
        if idx != i + 1 {
            return Err(ser(format!("multiplier row {idx} out of order")));
        }
        lambda[i] = parse("lambda", fields[1])?;
        mu[i] = parse("mu", fields[2])?;
    }
    let metadata = TrainingMetadata {
        seed: parse("seed", get("seed")?)?,
        schedule: get("schedule")?.to_string(),
        epochs: parse("epochs", get("epochs")?)?,
        dual_objective: parse("dual_objective", get("dual_objective")?)?,
    };
    let gamma: f64 = parse("gamma", get("gamma")?)?;
    RtoModel::new(gamma, constraint, Multipliers { lambda, mu }, metadata)
}

pub fn save_model(path: impl AsRef<Path>, model: &RtoModel) -> Result<()> {
    fs::write(path, model_to_text(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<RtoModel> {
    model_from_text(&fs::read_to_string(path)?)
}
