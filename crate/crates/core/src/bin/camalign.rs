use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use camalign::bundle::{read_bundle, write_bundle};
use camalign::cam::CamMethod;
use camalign::dataset::Dataset;
use camalign::error::{Error, ErrorKind, Result};
use camalign::experiment::{
    explanation_table, run_experiment, train_all, ExperimentConfig, Mode, TargetClass,
};
use camalign::manifest::load_manifest;
use camalign::minicnn::{MiniCnnModel, TrainConfig};
use camalign::report::{self, write_explanation, write_overlays, write_ratios, write_report};
use camalign::splits::make_splits;
use camalign::stats::{ThresholdCriterion, DEFAULT_RESAMPLES};
use camalign::synth::{self, SynthConfig};

#[derive(Parser)]
#[command(name = "camalign", version, about = "Saliency and anatomy alignment statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the six train/val/test scenarios as CSV.
    Splits {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Train one mini-CNN per scenario and save checkpoints.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        training: TrainArgs,
    },
    /// Compute saliency maps and per-sample overlap ratios.
    Explain {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Recompute the explanation table from a per-sample ratio file.
    Stats {
        /// Defaults to per_sample_ratios.csv inside --out.
        #[arg(long)]
        ratios: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the full experiment and write every table.
    Report {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Generate the synthetic lesion dataset as bundles plus a manifest.
    Synth {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 56)]
        size: usize,
        #[arg(long, default_value_t = 0.6)]
        contrast: f32,
        #[arg(long, default_value_t = 0.15)]
        noise: f32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    training: TrainArgs,
    #[arg(long, default_value = "mini")]
    mode: String,
    /// A method name or `all`; repeatable.
    #[arg(long, default_value = "all")]
    method: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    fraction: f64,
    #[arg(long, default_value = "predicted")]
    target_class: String,
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    bootstrap: usize,
    /// Threshold criterion: youden or accuracy.
    #[arg(long, default_value = "youden")]
    criterion: String,
    /// Second manifest evaluated on a 50:50 validation/test split.
    #[arg(long)]
    external: Option<PathBuf>,
    /// Directory of scenario-N.camb checkpoints written by `train`.
    #[arg(long)]
    models: Option<PathBuf>,
    /// Number of overlay images to render from scenario 1.
    #[arg(long, default_value_t = 8)]
    overlays: usize,
}

fn train_config(t: &TrainArgs) -> TrainConfig {
    let mut cfg = TrainConfig::default();
    if let Some(e) = t.epochs {
        cfg.epochs = e;
    }
    cfg
}

fn parse_methods(names: &[String]) -> Result<Vec<CamMethod>> {
    let mut out = Vec::new();
    for n in names.iter().flat_map(|s| s.split(',')) {
        if n == "all" {
            out.extend(CamMethod::ALL);
        } else {
            out.push(n.parse()?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn checkpoint_path(dir: &Path, scenario: usize) -> PathBuf {
    dir.join(format!("scenario-{scenario}.camb"))
}

fn load_models(dir: &Path) -> Result<Vec<MiniCnnModel>> {
    (1..=6)
        .map(|k| {
            let p = checkpoint_path(dir, k);
            let b = read_bundle(&p).map_err(|e| Error::from(e).context(p.display().to_string()))?;
            MiniCnnModel::from_bundle(&b).map_err(|e| e.context(p.display().to_string()))
        })
        .collect()
}

fn load(path: &Path) -> Result<Dataset> {
    let ds = load_manifest(path)?;
    log::info!("{}: {}", path.display(), ds.summary());
    Ok(ds)
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn experiment(run: &RunArgs) -> Result<(camalign::experiment::ExperimentReport, f64)> {
    let mode: Mode = run.mode.parse()?;
    let cfg = ExperimentConfig {
        mode,
        methods: parse_methods(&run.method)?,
        fraction: run.fraction,
        target_class: run.target_class.parse::<TargetClass>()?,
        bootstrap: run.bootstrap,
        criterion: run.criterion.parse::<ThresholdCriterion>()?,
        seed: run.data.seed,
        train: train_config(&run.training),
        models: run.models.as_deref().map(load_models).transpose()?,
        keep_maps: run.overlays,
    };
    cfg.validate()?;
    let ds = load(&run.data.manifest)?;
    let external = run.external.as_deref().map(load).transpose()?;
    Ok((run_experiment(&ds, external.as_ref(), &cfg)?, cfg.fraction))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Splits { data } => {
            let ds = load(&data.manifest)?;
            let labels: Vec<bool> = ds.records.iter().map(|r| r.label).collect();
            let splits = make_splits(&labels, data.seed)?;
            create_out(&data.out)?;
            let p = data.out.join("splits.csv");
            report::write_splits(&p, &ds, &splits)?;
            println!("{}", p.display());
        }
        Command::Train { data, training } => {
            let ds = load(&data.manifest)?;
            let outcomes = train_all(&ds, &train_config(&training), data.seed)?;
            create_out(&data.out)?;
            for (i, o) in outcomes.iter().enumerate() {
                let p = checkpoint_path(&data.out, i + 1);
                write_bundle(&p, &o.model.to_bundle()?)?;
                let last = o.history.last().map_or(f64::NAN, |h| h.train_loss);
                println!(
                    "{}: loss {:.4} -> {:.4}, best epoch {}",
                    p.display(),
                    o.initial_train_loss,
                    last,
                    o.best_epoch
                );
            }
        }
        Command::Explain { run } => {
            let (rep, fraction) = experiment(&run)?;
            create_out(&run.data.out)?;
            let p = run.data.out.join(report::RATIOS_CSV);
            write_ratios(&p, &rep.ratios)?;
            println!("{}", p.display());
            for p in write_overlays(&run.data.out, &rep, fraction)? {
                println!("{}", p.display());
            }
        }
        Command::Stats { ratios, out } => {
            let src = ratios.unwrap_or_else(|| out.join(report::RATIOS_CSV));
            let rows = explanation_table(&report::read_ratios(&src)?)?;
            create_out(&out)?;
            let p = out.join(report::EXPLANATION_CSV);
            write_explanation(&p, &rows)?;
            println!("{}", p.display());
        }
        Command::Report { run } => {
            let (rep, fraction) = experiment(&run)?;
            for p in write_report(&run.data.out, &rep, fraction)? {
                println!("{}", p.display());
            }
        }
        Command::Synth {
            samples,
            size,
            contrast,
            noise,
            seed,
            out,
        } => {
            let cfg = SynthConfig {
                samples,
                size,
                contrast,
                noise,
                seed,
                ..SynthConfig::default()
            };
            let ds = synth::generate(&cfg)?;
            let p = synth::write_dataset(&ds, &out)?;
            println!("{}", p.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.kind() {
                ErrorKind::Config => ExitCode::from(2),
                ErrorKind::Data => ExitCode::from(3),
            }
        }
    }
}
