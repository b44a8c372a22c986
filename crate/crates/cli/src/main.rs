use std::io::IsTerminal;
use std::process::ExitCode;

use clap::Parser;
use hitr_cli::{cmd_demo, cmd_eval, cmd_rank, cmd_simulate, ranking_table, Cli, Command};
use hitr_core::io::format_sig6;

fn color() -> bool {
    std::env::var_os("HITR_NO_COLOR").is_none() && std::io::stderr().is_terminal()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Eval(args) => {
            let evaluation = cmd_eval(&args)?;
            let report = &evaluation.report;
            for w in &report.warnings {
                eprintln!("warning: {}", describe(w));
            }
            println!(
                "median inter-rater distance {} mm, MAD {} mm",
                format_sig6(report.distances.stats.median),
                format_sig6(report.distances.stats.mad)
            );
            print!("{}", ranking_table(&report.ranking.entries));
            println!("wrote {}", args.out.display());
        }
        Command::Simulate(args) => {
            let out = cmd_simulate(&args)?;
            println!(
                "wrote {} annotations by {} virtual annotators to {}",
                out.rows,
                out.annotators.len(),
                out.annotations.display()
            );
        }
        Command::Rank(args) => {
            let ranking = cmd_rank(&args)?;
            print!("{}", ranking_table(&ranking));
        }
        Command::Demo(args) => {
            for path in cmd_demo(&args)? {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn describe(w: &hitr_core::io::Warning) -> String {
    match w {
        hitr_core::io::Warning::MissingPrediction {
            algorithm_id,
            image_id,
            landmark_id,
        } => format!(
            "no prediction by `{algorithm_id}` for {image_id}/{landmark_id}, counted as miss"
        ),
        hitr_core::io::Warning::UndefinedCorrelation { reason } => {
            format!("hit/TRE correlation undefined: {reason}")
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let prefix = if color() {
                "\x1b[31merror\x1b[0m"
            } else {
                "error"
            };
            eprintln!("{prefix}: {e:#}");
            ExitCode::from(1)
        }
    }
}
