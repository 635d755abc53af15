//! Experiment CLI: augment datasets, fit closed-form models, run benchmark
//! experiments, sweep hyperparameters and emit plot-ready CSV.
//!
//! Exit codes: 0 success, 1 config error, 2 data error, 3 training diverged
//! for every seed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use anchor_aug::bench::{
    emit_plot_points, run_experiment, sweep, sweep_csv, ExperimentConfig, ExperimentResult,
    MethodSpec, PlotKind, SweepParameter,
};
use anchor_aug::error::{Error, ErrorCategory};
use anchor_aug::solver::{fit_anchor_regression, fit_ols, fit_ridge, LinearModel};

#[derive(Parser)]
#[command(
    name = "anchor-aug",
    about = "Anchor data augmentation and regression benchmarks",
    version
)]
struct Cli {
    /// Max seeds to run in parallel (each seed stays single threaded).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Offline-augment a dataset and write the augmented points as CSV
    /// (columns: source_index,group,gamma,x,y,x_aug,y_aug).
    Augment(AugmentArgs),
    /// Fit a closed-form model (ols, ridge or anchor regression) and print
    /// coefficients plus test metrics.
    Fit(FitArgs),
    /// Run a full experiment from a config file and persist the results.
    Bench(BenchArgs),
    /// Re-run an experiment for each value of one ada parameter.
    Sweep(SweepArgs),
    /// Convert persisted results into plot-ready CSV.
    PlotData(PlotDataArgs),
}

#[derive(Args)]
struct AugmentArgs {
    /// Experiment config (dataset + method.ada with n_aug set).
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path (defaults to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override (defaults to the first configured seed).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    config: PathBuf,
    /// Anchor-regression gamma; with it, the fit uses the anchor solver on
    /// the configured ada partition instead of plain ols/ridge.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the fitted model and metrics as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Results file (defaults to "<config stem>_result.json").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the configured seed list with a single seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Parameter to sweep: alpha, q or n_aug.
    #[arg(long)]
    param: String,
    /// Comma-separated values, e.g. "1.5,2,5,10".
    #[arg(long)]
    values: String,
    /// Sweep CSV path (defaults to "<config stem>_sweep.csv"); per-value
    /// result files are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PlotDataArgs {
    /// Result files produced by `bench` or `sweep`.
    #[arg(long, required = true, num_args = 1..)]
    results: Vec<PathBuf>,
    /// fit-curve, augmented-scatter or sweep-lines.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err.category() {
                ErrorCategory::Config => ExitCode::from(1),
                ErrorCategory::Data => ExitCode::from(2),
                ErrorCategory::Training => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Augment(args) => cmd_augment(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Bench(args) => cmd_bench(args, cli.threads),
        Command::Sweep(args) => cmd_sweep(args, cli.threads),
        Command::PlotData(args) => cmd_plot_data(args),
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.seeds = vec![seed];
    }
    Ok(cfg)
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn default_out(config: &Path, suffix: &str) -> PathBuf {
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".into());
    PathBuf::from(format!("{stem}{suffix}"))
}

fn cmd_augment(args: AugmentArgs) -> Result<ExitCode, Error> {
    let cfg = load_config(&args.config, args.seed)?;
    let MethodSpec::Ada(ada) = &cfg.method else {
        return Err(Error::InvalidConfig(
            "augment needs method.ada in the config".into(),
        ));
    };
    if ada.n_aug.is_none() {
        return Err(Error::InvalidConfig(
            "augment needs method.ada.n_aug (the offline grid size)".into(),
        ));
    }
    // run the data/partition/augment pipeline without training by reusing the
    // experiment runner with a trivial model on a single seed
    let mut cfg = cfg;
    cfg.model = anchor_aug::bench::ModelSpec::Ols;
    cfg.seeds.truncate(1);
    let result = run_experiment(&cfg, 1)?;
    let Some(scatter) = &result.scatter else {
        return Err(Error::InvalidConfig(
            "augment emits scatter CSV for 1-D datasets only".into(),
        ));
    };
    let mut out = String::from("source_index,group,gamma,x,y,x_aug,y_aug\n");
    for s in scatter {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.source_index, s.group, s.gamma, s.x, s.y, s.x_aug, s.y_aug
        ));
    }
    write_or_print(args.out.as_deref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(serde::Serialize)]
struct FitOutput {
    coef: Vec<f64>,
    intercept: f64,
    test_mse: f64,
    test_rmse: f64,
    test_mape: Option<f64>,
}

fn cmd_fit(args: FitArgs) -> Result<ExitCode, Error> {
    let cfg = load_config(&args.config, args.seed)?;
    let seed = cfg.seeds[0];
    let (train_x, train_y, test_x, test_y) =
        anchor_aug::bench::materialize_for_fit(&cfg, seed)?;

    let model: LinearModel = if let Some(gamma) = args.gamma {
        let MethodSpec::Ada(ada) = &cfg.method else {
            return Err(Error::InvalidConfig(
                "--gamma performs anchor regression and needs method.ada for the partition"
                    .into(),
            ));
        };
        let assignment =
            anchor_aug::bench::partition_for_fit(ada, &train_x, &train_y, seed)?;
        fit_anchor_regression(&train_x, &train_y, &assignment, gamma)?
    } else {
        match &cfg.model {
            anchor_aug::bench::ModelSpec::Ridge { lambda } => {
                fit_ridge(&train_x, &train_y, *lambda)?
            }
            anchor_aug::bench::ModelSpec::Ols => fit_ols(&train_x, &train_y)?,
            anchor_aug::bench::ModelSpec::Mlp { .. } => {
                return Err(Error::InvalidConfig(
                    "fit handles closed-form models; use bench for mlp training".into(),
                ))
            }
        }
    };
    let pred = model.predict(&test_x)?;
    let m = anchor_aug::metrics(&pred, &test_y)?;
    let output = FitOutput {
        coef: model.coef.to_vec(),
        intercept: model.intercept,
        test_mse: m.mse,
        test_rmse: m.rmse,
        test_mape: m.mape,
    };
    let json = serde_json::to_string_pretty(&output).map_err(Error::Json)?;
    write_or_print(args.out.as_deref(), &format!("{json}\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs, threads: usize) -> Result<ExitCode, Error> {
    let cfg = load_config(&args.config, args.seed)?;
    let result = run_experiment(&cfg, threads)?;
    let out = args
        .out
        .unwrap_or_else(|| default_out(&args.config, "_result.json"));
    result.save(&out)?;
    print_summary(&result);
    println!("results written to {}", out.display());
    if result.all_diverged() {
        eprintln!("error: training diverged for every seed");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn print_summary(result: &ExperimentResult) {
    for s in &result.per_seed {
        match (&s.metrics, s.diverged) {
            (Some(m), _) => println!(
                "seed {}: mse {:.6} rmse {:.6}{}",
                s.seed,
                m.mse,
                m.rmse,
                match m.mape {
                    Some(p) => format!(" mape {p:.4}"),
                    None => String::new(),
                }
            ),
            (None, true) => println!("seed {}: diverged (excluded from aggregate)", s.seed),
            (None, false) => println!("seed {}: no metrics", s.seed),
        }
    }
    if let Some(a) = &result.aggregate {
        println!(
            "aggregate over {} seeds: mse {:.6} +- {:.6}, rmse {:.6} +- {:.6}",
            a.seeds_used, a.mse_mean, a.mse_sd, a.rmse_mean, a.rmse_sd
        );
    }
}

fn cmd_sweep(args: SweepArgs, threads: usize) -> Result<ExitCode, Error> {
    let cfg = load_config(&args.config, args.seed)?;
    let param = SweepParameter::parse(&args.param)?;
    let values: Vec<f64> = args
        .values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("bad sweep value {v:?}")))
        })
        .collect::<Result<_, _>>()?;
    let results = sweep(&cfg, param, &values, threads)?;

    let out = args
        .out
        .unwrap_or_else(|| default_out(&args.config, "_sweep.csv"));
    write_or_print(Some(&out), &sweep_csv(&results))?;
    let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    for (i, result) in results.iter().enumerate() {
        let path = dir.join(format!("{stem}_{}_{i}.json", param.name()));
        result.save(&path)?;
    }
    println!("sweep written to {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_plot_data(args: PlotDataArgs) -> Result<ExitCode, Error> {
    let kind = PlotKind::parse(&args.kind)?;
    let csv = emit_plot_points(&args.results, kind)?;
    write_or_print(args.out.as_deref(), &csv)?;
    Ok(ExitCode::SUCCESS)
}
