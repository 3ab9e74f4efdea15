use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use cbg_core::harness::run::{run_audit, run_enumerate, run_simulate};
use cbg_core::harness::train::{learning_curve, train, BLOCK};
use cbg_core::harness::{HarnessError, Settings};

/// Coalitional bargaining simulator and Markov-property audit.
#[derive(Parser)]
#[command(name = "cbg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play random-policy episodes and write a trajectory log.
    Simulate(Settings),
    /// Test whether the next state depends on history beyond the current state.
    Audit(Settings),
    /// Train Q-learning agents and write learning curves and Q-tables.
    Train(Settings),
    /// Expand the exact game tree of a small game (at most 3 agents).
    Enumerate {
        #[command(flatten)]
        settings: Settings,
        /// Include every leaf history in the output.
        #[arg(long)]
        leaves: bool,
    },
}

fn run(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Simulate(s) => {
            let c = s.resolve()?.simulate_config()?;
            let summary = run_simulate(&c)?;
            eprint!("{}", summary.to_text());
        }
        Command::Audit(s) => {
            let c = s.resolve()?.audit_config()?;
            let run = run_audit(&c)?;
            let m = &run.report.summary;
            eprintln!(
                "{} states, {} tested, {} rejected ({} after correction)",
                m.states_total, m.states_tested, m.rejected_raw, m.rejected_corrected
            );
        }
        Command::Train(s) => {
            let c = s.resolve()?.train_config()?;
            let r = train(&c)?;
            if let Some(last) = learning_curve(&r.learned.stats, BLOCK).last() {
                eprintln!(
                    "{} episodes, final block: mean reward {:.4}, mean rounds {:.3}, repeat rate {:.4}",
                    last.episode,
                    last.mean_reward,
                    last.mean_rounds,
                    last.repeat_rate()
                );
            }
            for f in &r.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::Enumerate { settings, leaves } => {
            let c = settings.resolve()?.enumerate_config()?;
            let m = run_enumerate(&c, leaves)?;
            eprintln!(
                "{} leaves, total probability {:.15}, truncated {:.3e}",
                m.leaves.len(),
                m.total_probability(),
                m.truncated_probability()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cbg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
