//! Subcommands of the `hitr` tool. Each `cmd_*` is a pure function of its
//! input files and flags; `main` only parses arguments and maps errors to exit codes.

pub mod args;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hitr_core::analysis::{threshold_ranking, RankingEntry};
use hitr_core::evaluate::{evaluate, Evaluation, EvaluationConfig};
use hitr_core::io::{self, RunConfig};
use hitr_core::metrics::{build_consensus, pool_distances, PoolScope};
use hitr_core::simulate::{fit_empirical, simulate_cohort, SimulationOptions, VirtualAnnotator};
use hitr_core::synth::{demo_dataset, DemoConfig};

pub use args::{Cli, Command, DemoArgs, EvalArgs, RankArgs, SimulateArgs};

pub const REPORT_FILE: &str = "report.json";
pub const CURVES_FILE: &str = "curves.csv";
pub const CURVES_SVG: &str = "hitrate_curves.svg";
pub const TRE_SVG: &str = "tre_boxplot.svg";
pub const ANNOTATOR_SVG: &str = "hitrate_boxplot.svg";
pub const SIMULATED_FILE: &str = "simulated_annotations.csv";
pub const ANNOTATORS_FILE: &str = "virtual_annotators.csv";
pub const RANKING_FILE: &str = "ranking.csv";
pub const DEMO_ANNOTATIONS: &str = "annotations.csv";
pub const DEMO_PREDICTIONS: &str = "predictions.csv";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

pub fn eval_config(args: &EvalArgs) -> RunConfig {
    let mut inputs = std::collections::BTreeMap::new();
    inputs.insert("annotations".to_owned(), display(&args.annotations));
    inputs.insert("predictions".to_owned(), display(&args.predictions));
    if let Some(w) = &args.weights {
        inputs.insert("weights".to_owned(), display(w));
    }
    if let Some(r) = &args.runtimes {
        inputs.insert("runtimes".to_owned(), display(r));
    }
    RunConfig {
        subcommand: "eval".to_owned(),
        inputs,
        evaluation: EvaluationConfig {
            mu_grid: args.grid.mu_grid(),
            scope: args.scope.into(),
            missing_policy: args.missing_policy.into(),
            aggregation: args.aggregation.into(),
            correlation_radius: args.correlation_radius(),
        },
        seed: None,
        annotators: None,
        threshold: None,
        out: Some(display(&args.out)),
    }
}

/// Evaluates predictions against annotations and writes the report, the
/// curves table and three charts into `args.out`.
pub fn cmd_eval(args: &EvalArgs) -> Result<Evaluation> {
    let mut store = io::parse_annotations(&args.annotations)?;
    if let Some(path) = &args.weights {
        store.set_weights(Some(io::parse_weights(path)?));
    }
    let mut predictions = io::parse_predictions(&args.predictions)?;
    if let Some(path) = &args.runtimes {
        predictions.set_runtimes(Some(io::parse_runtimes(path)?));
    }
    let config = eval_config(args);
    let evaluation = evaluate(&store, &predictions, &config)?;

    create_dir(&args.out)?;
    evaluation.report.write(args.out.join(REPORT_FILE))?;
    io::write_curves_csv(&evaluation.curves, args.out.join(CURVES_FILE))?;
    io::write_line_chart(
        &evaluation.curves,
        "Hit rate by radius",
        args.out.join(CURVES_SVG),
    )?;
    io::write_box_chart(
        &evaluation.tre_summaries,
        "TRE to every annotation",
        "TRE (mm)",
        args.out.join(TRE_SVG),
    )?;
    io::write_box_chart(
        &evaluation.annotator_spreads,
        "Hit rate per annotator",
        "hit rate",
        args.out.join(ANNOTATOR_SVG),
    )?;
    Ok(evaluation)
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub annotations: PathBuf,
    pub rows: usize,
    pub annotators: Vec<VirtualAnnotator>,
}

/// Simulates a virtual-annotator cohort around the consensus of `--reference`,
/// resampling inter-rater distances from `--distances` (or from the reference
/// itself).
pub fn cmd_simulate(args: &SimulateArgs) -> Result<SimulationOutput> {
    let reference_store = io::parse_annotations(&args.reference)?;
    let reference = build_consensus(&reference_store)?;
    let distance_store = match &args.distances {
        Some(path) => io::parse_annotations(path)?,
        None => reference_store,
    };
    let distance_consensus = build_consensus(&distance_store)?;
    let d = pool_distances(&distance_store, &distance_consensus, &PoolScope::Global)?;
    let dist = fit_empirical(&d)?;
    let options = SimulationOptions {
        normalize_sqrt3: args.normalize_sqrt3,
    };
    let (cohort, annotators) =
        simulate_cohort(&reference, &dist, args.annotators, args.seed, options)?;

    create_dir(&args.out)?;
    let path = args.out.join(SIMULATED_FILE);
    io::write_annotations(&cohort, &path)?;
    let mut table = String::from("annotator_id,beta,stream_seed\n");
    for a in &annotators {
        table.push_str(&format!(
            "{},{},{}\n",
            a.annotator_id, a.beta, a.stream_seed
        ));
    }
    let annotators_path = args.out.join(ANNOTATORS_FILE);
    fs::write(&annotators_path, table)
        .with_context(|| format!("cannot write {}", annotators_path.display()))?;
    Ok(SimulationOutput {
        annotations: path,
        rows: cohort.annotation_count(),
        annotators,
    })
}

pub fn ranking_table(ranking: &[RankingEntry]) -> String {
    let mut out = String::from("rank,algorithm_id,hit_rate,runtime_s\n");
    for (i, e) in ranking.iter().enumerate() {
        let runtime = e.runtime.map(io::format_sig6).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            e.algorithm_id,
            io::format_sig6(e.hit_rate),
            runtime
        ));
    }
    out
}

/// Ranks the algorithms of a curves table at `--threshold`.
pub fn cmd_rank(args: &RankArgs) -> Result<Vec<RankingEntry>> {
    let curves = io::parse_curves(&args.curves)?;
    let runtimes = args.runtimes.as_ref().map(io::parse_runtimes).transpose()?;
    let ranking = threshold_ranking(&curves, args.threshold, runtimes.as_ref())?;
    if let Some(out) = &args.out {
        create_dir(out)?;
        let path = out.join(RANKING_FILE);
        fs::write(&path, ranking_table(&ranking))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(ranking)
}

/// Writes the synthetic demo study (annotations, predictions, runtimes).
pub fn cmd_demo(args: &DemoArgs) -> Result<Vec<PathBuf>> {
    let data = demo_dataset(&DemoConfig {
        seed: args.seed,
        ..DemoConfig::default()
    });
    create_dir(&args.out)?;
    let annotations = args.out.join(DEMO_ANNOTATIONS);
    let predictions = args.out.join(DEMO_PREDICTIONS);
    io::write_annotations(&data.annotations, &annotations)?;
    io::write_predictions(&data.predictions, &predictions)?;
    Ok(vec![
        annotations,
        predictions,
        args.out.join(io::RUNTIMES_SIDECAR),
    ])
}
