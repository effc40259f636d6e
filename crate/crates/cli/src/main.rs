use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rto_cli::commands::*;
use rto_cli::exit;

/// Fair post-processing of classifier scores by randomized thresholds.
#[derive(Debug, Parser)]
#[command(name = "rto", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit group thresholds on a score file and save the model.
    Train(TrainArgs),
    /// Write per-example probabilities and sampled labels.
    Predict(PredictArgs),
    /// Group means, parity gap and accuracy of a model on a score file.
    Evaluate(EvaluateArgs),
    /// Train over a (γ, ρ) grid and select on validation data.
    Sweep(SweepArgs),
    /// Bias/accuracy curve data on a test file.
    Tradeoff(TradeoffArgs),
    /// Compare SGD against the exact per-group solver.
    OracleCheck(OracleCheckArgs),
    /// Impossibility inequality and held-out bound audit.
    TheoryCheck(TheoryCheckArgs),
    /// Write a sample from the three-point synthetic distribution.
    GenerateExample1(GenerateExample1Args),
    /// Fit the logistic scorer on Adult and write scored splits.
    AdultScores(AdultScoresArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Train(a) => cmd_train(a, &mut out),
        Command::Predict(a) => cmd_predict(a, &mut out),
        Command::Evaluate(a) => cmd_evaluate(a, &mut out),
        Command::Sweep(a) => cmd_sweep(a, &mut out),
        Command::Tradeoff(a) => cmd_tradeoff(a, &mut out),
        Command::OracleCheck(a) => cmd_oracle_check(a, &mut out),
        Command::TheoryCheck(a) => cmd_theory_check(a, &mut out),
        Command::GenerateExample1(a) => cmd_generate_example1(a, &mut out),
        Command::AdultScores(a) => cmd_adult_scores(a, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::for_error(&e))
        }
    }
}
