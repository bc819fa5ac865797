//! Command-line entry point: dataset workflows, GP runs (MGGP/SGGP),
//! classical baselines, Pareto export, multi-run statistics, model
//! persistence and prediction, and solar geometry queries.

mod artifacts;
mod config_file;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mggp::baselines::{self, BaselineKind};
use mggp::dataio::{self, Dataset, SplitSpec};
use mggp::engine::{self, GpConfig};
use mggp::exprtree::ExprTree;
use mggp::fitting;
use mggp::solar;

use artifacts::{BestModelFile, RunManifest};

#[derive(Parser)]
#[command(
    name = "mggp",
    version,
    about = "Multi-gene genetic programming for symbolic regression, \
             with solar clearness-index tooling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Mggp,
    Sggp,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Mggp => "mggp",
            Mode::Sggp => "sggp",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Split, scale, and fit a GP model; writes trace, Pareto dump, and
    /// the best-model JSON
    Fit {
        /// Dataset CSV (solar schema)
        dataset: PathBuf,
        /// key=value run configuration; defaults used when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Engine variant: multi-gene or single-gene
        #[arg(long, value_enum, default_value_t = Mode::Mggp)]
        mode: Mode,
        /// Master seed (overrides rng_seed from the config file)
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluation threads (results are identical for any count)
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Output directory for run artifacts
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Apply a saved model to a dataset; prints per-row predictions and,
    /// when targets are present, RMSE and R2
    Predict {
        /// best_model.json from a fit run
        model: PathBuf,
        /// Dataset CSV (clearness_index column optional)
        dataset: PathBuf,
    },
    /// Repeated seeded runs of both GP variants with summary statistics
    Bench {
        dataset: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Independent runs per variant
        #[arg(long, default_value_t = 30)]
        runs: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Optional CSV output path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the four classical regression families on the whole dataset
    Baseline {
        dataset: PathBuf,
        /// Optional CSV output path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-column min/max/mean/std summary
    Stats { dataset: PathBuf },
    /// Generate a statistics-matched synthetic dataset
    Synth {
        /// Number of rows
        #[arg(long, default_value_t = 192)]
        n: usize,
        /// Gaussian noise added to the ground-truth clearness index
        #[arg(long, default_value_t = 0.01)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Solar geometry: declination, sunset hour angle, day length, H0
    Solar {
        /// Latitude in degrees north
        latitude: f64,
        /// Day of the year (1..365)
        day: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Fit {
            dataset,
            config,
            mode,
            seed,
            threads,
            out,
        } => cmd_fit(&dataset, config.as_deref(), mode, seed, threads, &out),
        Command::Predict { model, dataset } => cmd_predict(&model, &dataset),
        Command::Bench {
            dataset,
            config,
            runs,
            seed,
            threads,
            out,
        } => cmd_bench(&dataset, config.as_deref(), runs, seed, threads, out.as_deref()),
        Command::Baseline { dataset, out } => cmd_baseline(&dataset, out.as_deref()),
        Command::Stats { dataset } => cmd_stats(&dataset),
        Command::Synth { n, noise, seed, out } => cmd_synth(n, noise, seed, &out),
        Command::Solar { latitude, day } => cmd_solar(latitude, day),
    }
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    let load = dataio::load_csv(path)
        .with_context(|| format!("loading dataset {}", path.display()))?;
    for warning in &load.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(load.dataset)
}

fn effective_config(
    config_path: Option<&Path>,
    mode: Mode,
    seed: Option<u64>,
) -> Result<GpConfig> {
    let mut config = match config_path {
        Some(path) => config_file::load_config(path)?,
        None => GpConfig::default(),
    };
    if mode == Mode::Sggp {
        config.max_trees = 1;
    }
    if let Some(seed) = seed {
        config.rng_seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn cmd_fit(
    dataset_path: &Path,
    config_path: Option<&Path>,
    mode: Mode,
    seed: Option<u64>,
    threads: usize,
    out_dir: &Path,
) -> Result<()> {
    if threads == 0 {
        bail!("--threads must be at least 1");
    }
    let dataset = load_dataset(dataset_path)?;
    if dataset.n_rows() < 10 {
        bail!(
            "dataset has {} rows; at least 10 are needed for a 70/30 split",
            dataset.n_rows()
        );
    }
    let config = effective_config(config_path, mode, seed)?;
    let manifest = RunManifest::new(mode.as_str(), &config, &dataset);

    let (train, test) = dataio::split(&dataset, &SplitSpec::new(0.70, config.rng_seed));
    let trace = engine::run(&config, &train, Some(&test), threads)?;

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let split_comment = vec![
        manifest.comment_line(),
        format!("split: train_fraction=0.7 seed={}", config.rng_seed),
    ];
    dataio::write_csv(&train, &out_dir.join("train.csv"), &split_comment)?;
    dataio::write_csv(&test, &out_dir.join("test.csv"), &split_comment)?;
    artifacts::write_trace_csv(&trace, &manifest, &out_dir.join("trace.csv"))?;
    artifacts::write_pareto_csv(
        &engine::pareto_points(&trace.final_population),
        &manifest,
        &out_dir.join("pareto.csv"),
    )?;
    let model = BestModelFile::from_trace(manifest, &trace, dataset.input_names());
    model.write(&out_dir.join("best_model.json"))?;

    println!(
        "dataset: {} rows (train {} / test {})",
        dataset.n_rows(),
        train.n_rows(),
        test.n_rows()
    );
    println!(
        "mode: {}, seed: {}, threads: {}",
        mode.as_str(),
        config.rng_seed,
        threads
    );
    println!(
        "generations run: {} of {} (stopped {})",
        trace.generations_run,
        config.generations,
        if trace.generations_run < config.generations {
            "early on fitness target"
        } else {
            "at the generation budget"
        }
    );
    println!(
        "best model: {} genes, complexity {}",
        trace.best.genes.len(),
        trace.best.complexity
    );
    let weights = &model.weights;
    println!("  y_scaled = {}", weights.w0);
    for ((gene, w), infix) in trace.best.genes.iter().zip(&weights.w).zip(&model.infix) {
        let _ = gene;
        println!("           + {w} * {infix}");
    }
    print_metric_line("train", model.metrics.train_rmse.0, model.metrics.train_r2.map(|v| v.0));
    if let (Some(rmse), r2) = (model.metrics.test_rmse, model.metrics.test_r2) {
        print_metric_line("test", rmse.0, r2.map(|v| v.0));
    }
    println!("artifacts: {}", out_dir.display());
    Ok(())
}

fn print_metric_line(label: &str, rmse: f64, r2: Option<f64>) {
    match r2 {
        Some(r2) => println!(
            "{label}: RMSE {rmse:.6}, R2 {r2:.4} (percentage fit {:.1}%)",
            100.0 * r2
        ),
        None => println!("{label}: RMSE {rmse:.6}"),
    }
}

fn cmd_predict(model_path: &Path, dataset_path: &Path) -> Result<()> {
    let model = BestModelFile::read(model_path)?;
    let genes: Vec<ExprTree> = model
        .genes
        .iter()
        .enumerate()
        .map(|(i, text)| {
            ExprTree::deserialize(text).map_err(|e| anyhow!("gene {}: {e}", i + 1))
        })
        .collect::<Result<_>>()?;
    let load = dataio::load_prediction_csv(dataset_path)
        .with_context(|| format!("loading dataset {}", dataset_path.display()))?;
    for warning in &load.warnings {
        eprintln!("warning: {warning}");
    }
    let predictions =
        engine::predict_with_weights(&genes, &model.weights, &load.columns, &model.scaling);
    println!("row,prediction");
    for (i, p) in predictions.iter().enumerate() {
        println!("{},{}", i + 1, p);
    }
    if let Some(target) = &load.target {
        let metrics = fitting::fit_metrics(target, &predictions)
            .map_err(|e| anyhow!("scoring predictions: {e}"))?;
        println!("rmse,{}", metrics.rmse);
        println!("r2,{}", metrics.r2);
    }
    Ok(())
}

fn cmd_bench(
    dataset_path: &Path,
    config_path: Option<&Path>,
    runs: usize,
    seed: Option<u64>,
    threads: usize,
    out: Option<&Path>,
) -> Result<()> {
    if runs < 2 {
        bail!("--runs must be at least 2");
    }
    if threads == 0 {
        bail!("--threads must be at least 1");
    }
    let dataset = load_dataset(dataset_path)?;
    let base = effective_config(config_path, Mode::Mggp, seed)?;
    let sggp = GpConfig {
        max_trees: 1,
        ..base.clone()
    };

    let mggp_stats = engine::multi_run_stats(&base, &dataset, runs, threads)?;
    let sggp_stats = engine::multi_run_stats(&sggp, &dataset, runs, threads)?;

    println!("{runs} independent runs per variant, master seed {}", base.rng_seed);
    println!(
        "{:<10} {:>12} {:>14} {:>12} {:>12}",
        "algorithm", "mean", "std", "max", "min"
    );
    for (name, stats) in [("MGGP", &mggp_stats), ("SGGP", &sggp_stats)] {
        println!(
            "{:<10} {:>12.6} {:>14.9} {:>12.6} {:>12.6}",
            name, stats.mean, stats.std, stats.max, stats.min
        );
    }

    if let Some(path) = out {
        let manifest = RunManifest::new("bench", &base, &dataset);
        artifacts::write_bench_csv(
            &[("MGGP", &mggp_stats), ("SGGP", &sggp_stats)],
            &manifest,
            path,
        )?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_baseline(dataset_path: &Path, out: Option<&Path>) -> Result<()> {
    let dataset = load_dataset(dataset_path)?;
    let mut rows = Vec::new();
    for kind in BaselineKind::ALL {
        if dataset.n_rows() <= kind.term_count(dataset.n_inputs()) {
            bail!(
                "dataset has {} rows but the {} model needs more than {} for a fit",
                dataset.n_rows(),
                kind.name(),
                kind.term_count(dataset.n_inputs())
            );
        }
        let (_, metrics) = baselines::fit_baseline(&dataset, kind)
            .map_err(|e| anyhow!("fitting {}: {e}", kind.name()))?;
        rows.push((
            kind.name().to_string(),
            kind.characteristics().to_string(),
            metrics.rmse,
            metrics.r2,
        ));
    }

    println!(
        "{:<16} {:<70} {:>8} {:>8}",
        "model", "characteristics", "rmse", "r2"
    );
    for (model, characteristics, rmse, r2) in &rows {
        println!("{model:<16} {characteristics:<70} {rmse:>8.4} {r2:>8.3}");
    }

    if let Some(path) = out {
        let comment = format!(
            "baseline report, tool {} dataset rows {}",
            env!("CARGO_PKG_VERSION"),
            dataset.n_rows()
        );
        artifacts::write_baseline_csv(&rows, &comment, path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_stats(dataset_path: &Path) -> Result<()> {
    let dataset = load_dataset(dataset_path)?;
    if dataset.n_rows() < 2 {
        bail!("need at least 2 rows for summary statistics");
    }
    let stats = dataio::summary_stats(&dataset);
    print!("{:<20}", "statistic");
    for s in &stats {
        print!(" {:>15}", s.name);
    }
    println!();
    let rows: [(&str, fn(&dataio::ColumnStats) -> f64); 4] = [
        ("minimum", |s| s.min),
        ("maximum", |s| s.max),
        ("mean", |s| s.mean),
        ("standard deviation", |s| s.std),
    ];
    for (label, pick) in rows {
        print!("{label:<20}");
        for s in &stats {
            print!(" {:>15.3}", pick(s));
        }
        println!();
    }
    Ok(())
}

fn cmd_synth(n: usize, noise: f64, seed: u64, out: &Path) -> Result<()> {
    if n == 0 {
        bail!("--n must be at least 1");
    }
    if noise < 0.0 {
        bail!("--noise must be non-negative");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dataset = dataio::synth_generate(&mut rng, n, noise);
    let comments = vec![
        format!(
            "synthetic clearness-index dataset, tool {}",
            env!("CARGO_PKG_VERSION")
        ),
        format!("generator: seed={seed} n={n} noise={noise}"),
    ];
    dataio::write_csv(&dataset, out, &comments)?;
    println!("wrote {} rows to {}", n, out.display());
    Ok(())
}

/// Three-decimal rendering that never prints a negative zero.
fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        String::from("0.000")
    } else {
        s
    }
}

fn cmd_solar(latitude: f64, day: u32) -> Result<()> {
    if !(1..=365).contains(&day) {
        bail!("day of year must be in 1..365");
    }
    let delta = solar::declination(day);
    let omega = solar::sunset_hour_angle(latitude, delta)?;
    let s0 = solar::day_length_s0(omega);
    let h0 = solar::extraterrestrial_h0(latitude, day)?;
    println!("declination: {} deg", fmt3(delta));
    println!("sunset hour angle: {} deg", fmt3(omega));
    println!("day length S0: {} h", fmt3(s0));
    println!(
        "extraterrestrial H0: {h0:.6e} J/m^2/day ({:.3} MJ/m^2/day)",
        h0 / 1.0e6
    );
    Ok(())
}
