//! Hyperparameter sweep over (γ, ρ) with validation-based selection.

use std::io::Write;

use rayon::prelude::*;
use rto_core::data::{check_disjoint, Dataset};
use rto_core::metrics::evaluate;
use rto_core::{compile_constraint, train, Criterion, Result, RtoError, RtoModel, TrainConfig};

pub const DEFAULT_GAMMAS: [f64; 5] = [0.01, 0.02, 0.05, 0.1, 0.2];
pub const DEFAULT_RHO_OFFSETS: [f64; 5] = [-0.1, -0.05, 0.0, 0.05, 0.1];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub gammas: Vec<f64>,
    pub rhos: Vec<f64>,
    pub epsilon: f64,
}

impl SweepGrid {
    /// Sorts both axes, clamps ρ into [0, 1] and drops duplicates. Returns
    /// warnings for anything that was changed.
    pub fn new(gammas: Vec<f64>, rhos: Vec<f64>, epsilon: f64) -> Result<(Self, Vec<String>)> {
        let mut warnings = Vec::new();
        if gammas.is_empty() || rhos.is_empty() {
            return Err(RtoError::InvalidParameter("sweep grids must be non-empty".into()));
        }
        if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(RtoError::InvalidParameter(format!("gamma must be positive, got {g}")));
        }
        if !(epsilon >= 0.0) {
            return Err(RtoError::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
        }
        let mut clamped = Vec::with_capacity(rhos.len());
        for r in rhos {
            if r.is_nan() {
                return Err(RtoError::InvalidParameter("rho is NaN".into()));
            }
            let c = r.clamp(0.0, 1.0);
            if c != r {
                warnings.push(format!("rho {r} clamped to {c}"));
            }
            clamped.push(c);
        }
        let tidy = |mut v: Vec<f64>, what: &str, warnings: &mut Vec<String>| {
            let before = v.len();
            v.sort_by(f64::total_cmp);
            v.dedup();
            if v.len() < before {
                warnings.push(format!("dropped {} duplicate {what} value(s)", before - v.len()));
            }
            v
        };
        let gammas = tidy(gammas, "gamma", &mut warnings);
        let rhos = tidy(clamped, "rho", &mut warnings);
        Ok((Self { gammas, rhos, epsilon }, warnings))
    }

    /// `mean ± {0, 0.05, 0.1}` around the training label mean.
    pub fn default_rhos(label_mean: f64) -> Vec<f64> {
        DEFAULT_RHO_OFFSETS.iter().map(|d| label_mean + d).collect()
    }

    /// Grid points in row order: γ-major, both ascending.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.gammas
            .iter()
            .flat_map(|&g| self.rhos.iter().map(move |&r| (g, r)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub rho: f64,
    pub val_parity_gap: f64,
    pub val_accuracy: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub models: Vec<RtoModel>,
    pub selected: usize,
    /// No row met the gap target; `selected` is then the gap-minimizing row.
    pub no_feasible_point: bool,
}

impl SweepResult {
    pub fn selected_model(&self) -> &RtoModel {
        &self.models[self.selected]
    }

    /// CSV with columns `gamma,rho,val_parity_gap,val_accuracy,feasible,selected`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "gamma,rho,val_parity_gap,val_accuracy,feasible,selected")?;
        for (i, r) in self.rows.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.gamma,
                r.rho,
                r.val_parity_gap,
                r.val_accuracy,
                u8::from(r.feasible),
                u8::from(i == self.selected)
            )?;
        }
        Ok(())
    }
}

/// Seed for grid point `index`, decorrelated from neighbouring indices.
pub fn point_seed(master: u64, index: usize) -> u64 {
    master ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Trains one parity model per grid point (in parallel) and picks the most
/// accurate one whose validation gap is at most `target_epsilon`; ties go to
/// the earlier row. `config_for(n, seed)` builds the training config.
pub fn run_sweep<F>(
    train_set: &Dataset,
    validation: &Dataset,
    grid: &SweepGrid,
    target_epsilon: f64,
    master_seed: u64,
    config_for: F,
) -> Result<SweepResult>
where
    F: Fn(usize, u64) -> TrainConfig + Sync,
{
    if !(target_epsilon >= 0.0) {
        return Err(RtoError::InvalidParameter(format!(
            "target epsilon must be >= 0, got {target_epsilon}"
        )));
    }
    check_disjoint(train_set, validation)?;
    if train_set.groups != validation.groups {
        return Err(RtoError::Mismatch(format!(
            "train has K={} but validation has K={}",
            train_set.groups, validation.groups
        )));
    }
    if validation.examples.iter().any(|e| e.label.is_none()) {
        return Err(RtoError::MissingField("validation labels".into()));
    }
    let k = train_set.groups;
    let points = grid.points();
    let fitted: Vec<(SweepRow, RtoModel)> = points
        .par_iter()
        .enumerate()
        .map(|(i, &(gamma, rho))| {
            let spec = compile_constraint(
                Criterion::StatisticalParity { rho, epsilon: grid.epsilon },
                &train_set.examples,
                k,
            )?;
            let config = config_for(train_set.len(), point_seed(master_seed, i));
            let run = train(&train_set.examples, &spec, gamma, &config)?;
            let h = run.model.predict_all(&validation.examples)?;
            let report = evaluate(&validation.examples, &h, k)?;
            let val_accuracy = report
                .expected_accuracy
                .ok_or_else(|| RtoError::MissingField("validation labels".into()))?;
            let row = SweepRow {
                gamma,
                rho,
                val_parity_gap: report.parity_gap,
                val_accuracy,
                feasible: report.parity_gap <= target_epsilon,
            };
            Ok((row, run.model))
        })
        .collect::<Result<_>>()?;
    let (rows, models): (Vec<_>, Vec<_>) = fitted.into_iter().unzip();

    let best_feasible = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.feasible)
        .fold(None::<(usize, f64)>, |best, (i, r)| match best {
            Some((_, acc)) if acc >= r.val_accuracy => best,
            _ => Some((i, r.val_accuracy)),
        });
    let (selected, no_feasible_point) = match best_feasible {
        Some((i, _)) => (i, false),
        None => {
            let i = rows
                .iter()
                .enumerate()
                .fold(0, |b, (i, r)| if r.val_parity_gap < rows[b].val_parity_gap { i } else { b });
            (i, true)
        }
    };
    Ok(SweepResult { rows, models, selected, no_feasible_point })
}
