//! Command bodies. Each returns the process exit code on success; errors
//! are mapped to codes by [`crate::exit::for_error`].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rto_core::baselines::{roc_fit, LogisticConfig};
use rto_core::data::{
    check_disjoint, generate_example1, ingest_scores, load_model, save_model, write_scores,
    Dataset, ScoreColumn,
};
use rto_core::metrics::{evaluate, expected_accuracy, parity_gap};
use rto_core::{compile_constraint, train, RtoError, RtoModel, TrainConfig, TrainRun};

use crate::checks::{self, bound_audit, impossibility_trials, oracle_agreement, precise_config};
use crate::config::{parse_list, ConfigFile, CriterionKind, ScheduleSpec};
use crate::exit::{CHECK_FAILED, SUCCESS};
use crate::sweep::{run_sweep, SweepGrid, DEFAULT_GAMMAS};

pub const DEFAULT_GAMMA: f64 = 0.05;
pub const DEFAULT_TARGET_EPSILON: f64 = 0.02;

fn load_scores(path: &Path) -> Result<Dataset> {
    ingest_scores(path, ScoreColumn::Auto).with_context(|| format!("reading {}", path.display()))
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.with_context(|| format!("--{flag} is required (flag or config key)"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path)
        .map_err(RtoError::Io)
        .with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Training knobs shared by `train`, `sweep` and `tradeoff`.
#[derive(Debug, Clone)]
struct Training {
    epochs: usize,
    schedule: ScheduleSpec,
}

impl Training {
    fn resolve(cfg: &ConfigFile, epochs: Option<usize>, schedule: Option<ScheduleSpec>) -> Result<Self> {
        Ok(Self {
            epochs: cfg.pick_or(epochs, "epochs", TrainConfig::DEFAULT_EPOCHS)?,
            schedule: cfg.pick_or(schedule, "schedule", ScheduleSpec::DefaultFixed)?,
        })
    }

    fn config(&self, groups: usize, examples: usize, seed: u64) -> TrainConfig {
        let schedule = self.schedule.resolve(groups, examples, self.epochs);
        TrainConfig::with_schedule(schedule, self.epochs, seed)
    }
}

fn default_rho(dataset: &Dataset) -> Result<f64> {
    dataset.label_mean().ok_or_else(|| {
        RtoError::MissingField("labels (needed for the default rho; pass --rho instead)".into()).into()
    })
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// parity | covariance
    #[arg(long)]
    pub criterion: Option<CriterionKind>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Target group mean; defaults to the label mean of the input.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// fixed | fixed:a | inverse-sqrt:c | robbins-monro:c
    #[arg(long)]
    pub schedule: Option<ScheduleSpec>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_model: Option<PathBuf>,
    /// CSV of per-epoch multipliers and dual objective.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_train(args: TrainArgs, out: &mut dyn Write) -> Result<u8> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let input: PathBuf = required(cfg.pick(args.input, "input")?, "input")?;
    let out_model: PathBuf = required(cfg.pick(args.out_model, "out-model")?, "out-model")?;
    let trace: Option<PathBuf> = cfg.pick(args.trace, "trace")?;
    let kind = cfg.pick_or(args.criterion, "criterion", CriterionKind::Parity)?;
    let gamma = cfg.pick_or(args.gamma, "gamma", DEFAULT_GAMMA)?;
    let epsilon = cfg.pick_or(args.epsilon, "epsilon", 0.0)?;
    let seed = cfg.pick_or(args.seed, "seed", 0)?;
    let training = Training::resolve(&cfg, args.epochs, args.schedule)?;

    let data = load_scores(&input)?;
    let rho = match (kind, cfg.pick(args.rho, "rho")?) {
        (CriterionKind::Parity, None) => Some(default_rho(&data)?),
        (_, rho) => rho,
    };
    let spec = compile_constraint(kind.build(rho, epsilon)?, &data.examples, data.groups)?;
    let mut config = training.config(data.groups, data.len(), seed);
    config.record_trace = trace.is_some();
    let run = train(&data.examples, &spec, gamma, &config)?;
    save_model(&out_model, &run.model)?;
    if let Some(path) = trace {
        write_trace(&path, &run)?;
    }

    writeln!(out, "dual objective: {}", run.model.metadata.dual_objective)?;
    for (k, nu) in run.model.multipliers.nus().iter().enumerate() {
        writeln!(out, "group {}: nu = {nu}", k + 1)?;
    }
    writeln!(
        out,
        "epochs run: {}{}",
        run.epochs_run,
        if run.converged { " (converged)" } else { "" }
    )?;
    writeln!(out, "model written to {}", out_model.display())?;
    Ok(SUCCESS)
}

fn write_trace(path: &Path, run: &TrainRun) -> Result<()> {
    let mut w = create(path)?;
    let k = run.model.groups();
    let nus: Vec<String> = (1..=k).map(|g| format!("nu_{g}")).collect();
    writeln!(w, "epoch,dual_objective,{}", nus.join(","))?;
    for r in &run.trace {
        let vals: Vec<String> = r.nu.iter().map(f64::to_string).collect();
        writeln!(w, "{},{},{}", r.epoch, r.dual_objective, vals.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn load_compatible(model: &Path, input: &Path) -> Result<(RtoModel, Dataset)> {
    let model = load_model(model).with_context(|| format!("reading model {}", model.display()))?;
    let data = load_scores(input)?;
    model.check_groups(data.groups)?;
    Ok((model, data))
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// CSV with columns id,probability,prediction.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the randomized hard predictions.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_predict(args: PredictArgs, out: &mut dyn Write) -> Result<u8> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let model_path: PathBuf = required(cfg.pick(args.model, "model")?, "model")?;
    let input: PathBuf = required(cfg.pick(args.input, "input")?, "input")?;
    let dest: PathBuf = required(cfg.pick(args.out, "out")?, "out")?;
    let seed = cfg.pick_or(args.seed, "seed", 0)?;
    let (model, data) = load_compatible(&model_path, &input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = create(&dest)?;
    writeln!(w, "id,probability,prediction")?;
    let mut positives = 0usize;
    for e in &data.examples {
        let h = model.predict_probability(e)?;
        let label = model.sample_prediction(e, &mut rng)?;
        positives += usize::from(label);
        writeln!(w, "{},{h},{}", e.id, u8::from(label))?;
    }
    w.flush()?;
    writeln!(out, "{} predictions ({positives} positive) written to {}", data.len(), dest.display())?;
    Ok(SUCCESS)
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON-lines report destination.
    #[arg(long)]
    pub out_report: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_evaluate(args: EvaluateArgs, out: &mut dyn Write) -> Result<u8> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let model_path: PathBuf = required(cfg.pick(args.model, "model")?, "model")?;
    let input: PathBuf = required(cfg.pick(args.input, "input")?, "input")?;
    let report_path: Option<PathBuf> = cfg.pick(args.out_report, "out-report")?;
    let (model, data) = load_compatible(&model_path, &input)?;
    let h = model.predict_all(&data.examples)?;
    let report = evaluate(&data.examples, &h, data.groups)?;
    for (k, (m, n)) in report.per_group_mean_h.iter().zip(&report.sample_sizes).enumerate() {
        writeln!(out, "group {}: mean h = {m:.6} (n = {n})", k + 1)?;
    }
    writeln!(out, "parity gap: {:.6}", report.parity_gap)?;
    if let Some(cov) = &report.conditional_covariances {
        let max = cov.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        writeln!(out, "max |conditional covariance|: {max:.6}")?;
    }
    if let Some(acc) = report.expected_accuracy {
        writeln!(out, "expected accuracy: {acc:.6}")?;
    }
    if let Some(path) = report_path {
        let mut w = create(&path)?;
        writeln!(w, "{}", report.to_json_line())?;
        w.flush()?;
    }
    Ok(SUCCESS)
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub input_train: Option<PathBuf>,
    #[arg(long)]
    pub input_val: Option<PathBuf>,
    /// Comma-separated γ values.
    #[arg(long)]
    pub gamma_grid: Option<String>,
    /// Comma-separated ρ values; defaults to the train label mean ± {0, 0.05, 0.1}.
    #[arg(long)]
    pub rho_grid: Option<String>,
    /// Training slack, fixed for the whole sweep.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Largest validation parity gap a selectable point may have.
    #[arg(long)]
    pub target_epsilon: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub schedule: Option<ScheduleSpec>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV table, one row per grid point.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also save the selected model.
    #[arg(long)]
    pub out_model: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_sweep(args: SweepArgs, out: &mut dyn Write) -> Result<u8> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let train_path: PathBuf = required(cfg.pick(args.input_train, "input-train")?, "input-train")?;
    let val_path: PathBuf = required(cfg.pick(args.input_val, "input-val")?, "input-val")?;
    let dest: PathBuf = required(cfg.pick(args.out, "out")?, "out")?;
    let out_model: Option<PathBuf> = cfg.pick(args.out_model, "out-model")?;
    let epsilon = cfg.pick_or(args.epsilon, "epsilon", 0.0)?;
    let target = cfg.pick_or(args.target_epsilon, "target-epsilon", DEFAULT_TARGET_EPSILON)?;
    let seed = cfg.pick_or(args.seed, "seed", 0)?;
    let training = Training::resolve(&cfg, args.epochs, args.schedule)?;
    let gamma_grid: Option<String> = cfg.pick(args.gamma_grid, "gamma-grid")?;
    let rho_grid: Option<String> = cfg.pick(args.rho_grid, "rho-grid")?;

    let train_set = load_scores(&train_path)?;
    let val_set = load_scores(&val_path)?;
    let gammas = match gamma_grid {
        Some(s) => parse_list(&s)?,
        None => DEFAULT_GAMMAS.to_vec(),
    };
    let rhos = match rho_grid {
        Some(s) => parse_list(&s)?,
        None => SweepGrid::default_rhos(default_rho(&train_set)?),
    };
    let (grid, warnings) = SweepGrid::new(gammas, rhos, epsilon)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let groups = train_set.groups;
    let result = run_sweep(&train_set, &val_set, &grid, target, seed, |n, s| {
        training.config(groups, n, s)
    })?;
    let mut w = create(&dest)?;
    result.write_csv(&mut w)?;
    w.flush()?;

    let sel = &result.rows[result.selected];
    writeln!(out, "{} grid points written to {}", result.rows.len(), dest.display())?;
    if result.no_feasible_point {
        writeln!(out, "no feasible point: every validation gap exceeds {target}; reporting the smallest gap")?;
    }
    writeln!(
        out,
        "selected: gamma = {}, rho = {}, validation gap = {:.6}, validation accuracy = {:.6}",
        sel.gamma, sel.rho, sel.val_parity_gap, sel.val_accuracy
    )?;
    if let Some(path) = out_model {
        save_model(&path, result.selected_model())?;
        writeln!(out, "selected model written to {}", path.display())?;
    }
    Ok(SUCCESS)
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    #[arg(long)]
    pub input_train: Option<PathBuf>,
    #[arg(long)]
    pub input_test: Option<PathBuf>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Defaults to the train label mean.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Comma-separated training slacks traced out for the randomized rule.
    #[arg(long)]
    pub epsilon_grid: Option<String>,
    /// Comma-separated band widths for the reject option classifier.
    #[arg(long)]
    pub theta_grid: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub schedule: Option<ScheduleSpec>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV with columns method,parameter,parity_gap,accuracy.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

const DEFAULT_EPSILON_GRID: &str = "0,0.01,0.02,0.05,0.1,0.2";
const DEFAULT_THETA_GRID: &str = "0.05,0.1,0.15,0.2,0.25,0.3,0.4,0.5";

/// Bias/accuracy pairs on the test split: the randomized rule across
/// training slacks, and the reject option classifier across band widths.
pub fn cmd_tradeoff(args: TradeoffArgs, out: &mut dyn Write) -> Result<u8> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let train_path: PathBuf = required(cfg.pick(args.input_train, "input-train")?, "input-train")?;
    let test_path: PathBuf = required(cfg.pick(args.input_test, "input-test")?, "input-test")?;
    let dest: PathBuf = required(cfg.pick(args.out, "out")?, "out")?;
    let gamma = cfg.pick_or(args.gamma, "gamma", DEFAULT_GAMMA)?;
    let seed = cfg.pick_or(args.seed, "seed", 0)?;
    let training = Training::resolve(&cfg, args.epochs, args.schedule)?;
    let eps_grid = parse_list(&cfg.pick_or(args.epsilon_grid, "epsilon-grid", DEFAULT_EPSILON_GRID.into())?)?;
    let theta_grid = parse_list(&cfg.pick_or(args.theta_grid, "theta-grid", DEFAULT_THETA_GRID.into())?)?;

    let train_set = load_scores(&train_path)?;
    let test_set = load_scores(&test_path)?;
    check_disjoint(&train_set, &test_set)?;
    let rho = match cfg.pick(args.rho, "rho")? {
        Some(r) => r,
        None => default_rho(&train_set)?,
    };
    let k = train_set.groups;
    let ids = test_set.group_ids();
    let labels: Vec<Option<bool>> = test_set.examples.iter().map(|e| e.label).collect();
    let mut rows: Vec<(&str, f64, f64, f64)> = Vec::new();
    for &eps in &eps_grid {
        let spec = compile_constraint(
            rto_core::Criterion::StatisticalParity { rho, epsilon: eps },
            &train_set.examples,
            k,
        )?;
        let run = train(&train_set.examples, &spec, gamma, &training.config(k, train_set.len(), seed))?;
        let h = run.model.predict_all(&test_set.examples)?;
        rows.push(("rto", eps, parity_gap(&h, &ids, k)?, expected_accuracy(&h, &labels)?));
    }
    if k == 2 {
        for &theta in &theta_grid {
            // A single-θ grid with an unreachable target just fixes the band.
            let fit = roc_fit(&train_set.examples, &[theta], f64::INFINITY, &train_set.examples, 2)?;
            let h = fit.rule.predict_all(&test_set.examples);
            rows.push(("roc", theta, parity_gap(&h, &ids, k)?, expected_accuracy(&h, &labels)?));
        }
    } else {
        eprintln!("warning: the reject option classifier needs K = 2; emitting the randomized rule only");
    }
    rows.sort_by(|a, b| a.0.cmp(b.0).then(a.1.total_cmp(&b.1)));
    let mut w = create(&dest)?;
    writeln!(w, "method,parameter,parity_gap,accuracy")?;
    for (m, p, g, a) in &rows {
        writeln!(w, "{m},{p},{g},{a}")?;
    }
    w.flush()?;
    writeln!(out, "{} tradeoff points written to {}", rows.len(), dest.display())?;
    Ok(SUCCESS)
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub criterion: Option<CriterionKind>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Number of training seeds (0, 1, …, n−1).
    #[arg(long)]
    pub seeds: Option<u64>,
    /// Overrides the epoch count derived from the step budget.
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub const MAX_ORACLE_EXAMPLES: usize = 100_000;

pub fn cmd_oracle_check(args: OracleCheckArgs, out: &mut dyn Write) -> Result<u8> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let input: PathBuf = required(cfg.pick(args.input, "input")?, "input")?;
    let kind = cfg.pick_or(args.criterion, "criterion", CriterionKind::Parity)?;
    let gamma = cfg.pick_or(args.gamma, "gamma", DEFAULT_GAMMA)?;
    let epsilon = cfg.pick_or(args.epsilon, "epsilon", 0.0)?;
    let seeds = cfg.pick_or(args.seeds, "seeds", 5)?;
    let epochs: Option<usize> = cfg.pick(args.epochs, "epochs")?;
    if seeds == 0 {
        return Err(RtoError::InvalidParameter("--seeds must be at least 1".into()).into());
    }
    let data = load_scores(&input)?;
    if data.len() > MAX_ORACLE_EXAMPLES {
        return Err(RtoError::InvalidParameter(format!(
            "the oracle check is limited to {MAX_ORACLE_EXAMPLES} examples, got {}",
            data.len()
        ))
        .into());
    }
    let rho = match (kind, cfg.pick(args.rho, "rho")?) {
        (CriterionKind::Parity, None) => Some(default_rho(&data)?),
        (_, rho) => rho,
    };
    let spec = compile_constraint(kind.build(rho, epsilon)?, &data.examples, data.groups)?;
    let (mut worst_obj, mut worst_h) = (0.0f64, 0.0f64);
    for seed in 0..seeds {
        let mut config = precise_config(data.len(), seed);
        if let Some(e) = epochs {
            config.max_epochs = e;
        }
        let a = oracle_agreement(&data.examples, &spec, gamma, &config)?;
        writeln!(
            out,
            "seed {seed}: |objective gap| = {:.3e}, max |h diff| = {:.3e}",
            a.objective_gap, a.max_h_diff
        )?;
        worst_obj = worst_obj.max(a.objective_gap);
        worst_h = worst_h.max(a.max_h_diff);
    }
    let pass = worst_obj <= checks::OBJECTIVE_TOLERANCE && worst_h <= checks::PREDICTION_TOLERANCE;
    writeln!(
        out,
        "{}: max |objective gap| = {worst_obj:.3e} (limit {:.0e}), max |h diff| = {worst_h:.3e} (limit {:.0e})",
        if pass { "PASS" } else { "FAIL" },
        checks::OBJECTIVE_TOLERANCE,
        checks::PREDICTION_TOLERANCE
    )?;
    Ok(if pass { SUCCESS } else { CHECK_FAILED })
}

#[derive(Debug, Args)]
pub struct TheoryCheckArgs {
    /// Random instances for the impossibility inequality.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Train/test trials for the held-out parity bound.
    #[arg(long)]
    pub audit_trials: Option<usize>,
    /// Examples per train and per test sample in the audit.
    #[arg(long)]
    pub audit_n: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_theory_check(args: TheoryCheckArgs, out: &mut dyn Write) -> Result<u8> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let trials = cfg.pick_or(args.trials, "trials", 1000)?;
    let audit_trials = cfg.pick_or(args.audit_trials, "audit-trials", 50)?;
    let audit_n = cfg.pick_or(args.audit_n, "audit-n", 5000)?;
    let delta = cfg.pick_or(args.delta, "delta", 0.1)?;
    let seed = cfg.pick_or(args.seed, "seed", 0)?;
    if trials == 0 {
        eprintln!("warning: 0 impossibility trials; the check passes vacuously");
    }
    if audit_trials == 0 {
        eprintln!("warning: 0 audit trials; the bound audit passes vacuously");
    }
    let passes = impossibility_trials(trials, seed)?;
    writeln!(out, "impossibility: {passes}/{trials} instances satisfy the inequality")?;
    let mut ok = passes == trials;
    if audit_trials > 0 {
        let audit = bound_audit(audit_trials, audit_n, delta, 0.0, seed)?;
        let needed = ((1.0 - delta) * audit_trials as f64).ceil() as usize;
        writeln!(
            out,
            "bound audit: {}/{} held-out gaps within {:.4} (need {needed}; worst gap {:.4})",
            audit.within, audit.trials, audit.bound, audit.worst_gap
        )?;
        ok &= audit.within >= needed;
    }
    writeln!(out, "{}", if ok { "PASS" } else { "FAIL" })?;
    Ok(if ok { SUCCESS } else { CHECK_FAILED })
}

#[derive(Debug, Args)]
pub struct GenerateExample1Args {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_generate_example1(args: GenerateExample1Args, out: &mut dyn Write) -> Result<u8> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let n = cfg.pick_or(args.n, "n", 60_000)?;
    let seed = cfg.pick_or(args.seed, "seed", 0)?;
    let dest: PathBuf = required(cfg.pick(args.out, "out")?, "out")?;
    let data = generate_example1(n, seed)?;
    write_scores(&dest, &data)?;
    writeln!(out, "{n} examples written to {}", dest.display())?;
    Ok(SUCCESS)
}

#[derive(Debug, Args)]
pub struct AdultScoresArgs {
    /// Directory holding adult.data and adult.test.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Inverse regularization strength of the logistic scorer.
    #[arg(long)]
    pub c: Option<f64>,
    /// Receives train.csv, val.csv and test.csv.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_adult_scores(args: AdultScoresArgs, out: &mut dyn Write) -> Result<u8> {
    let cfg = ConfigFile::load(args.config.as_deref())?;
    let dir: PathBuf = required(cfg.pick(args.data_dir, "data-dir")?, "data-dir")?;
    let out_dir: PathBuf = required(cfg.pick(args.out_dir, "out-dir")?, "out-dir")?;
    let seed = cfg.pick_or(args.seed, "seed", 7)?;
    let logistic = LogisticConfig { c: cfg.pick_or(args.c, "c", 1.0)?, ..Default::default() };
    let splits = crate::adult::prepare(&dir, seed, &logistic)?;
    std::fs::create_dir_all(&out_dir).map_err(RtoError::Io)?;
    for (name, d) in [("train", &splits.train), ("val", &splits.validation), ("test", &splits.test)] {
        if d.is_empty() {
            bail!("{name} split is empty");
        }
        write_scores(out_dir.join(format!("{name}.csv")), d)?;
    }
    writeln!(out, "scorer accuracy on post-processing records: {:.4}", splits.scorer_accuracy)?;
    writeln!(
        out,
        "train/val/test sizes: {}/{}/{} written to {}",
        splits.train.len(),
        splits.validation.len(),
        splits.test.len(),
        out_dir.display()
    )?;
    Ok(SUCCESS)
}
