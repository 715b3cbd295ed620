//! The `gridsplit` command line.

use crate::annotation::load_annotation;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::harness::{self, InferenceInput, PipelineInput, PipelineOptions, PredictionFile, SynthSpec};
use crate::labelgen;
use crate::metrics::{csv_row, write_csv, EvalOptions, MetricSet, CSV_HEADER};
use crate::numerics::{io, Tensor};
use crate::params::ModelParams;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "gridsplit", version, about = "Split-embed-merge table structure recognition")]
pub struct Cli {
    #[command(flatten)]
    pub settings: Settings,
    #[command(subcommand)]
    pub command: Command,
}

/// Run configuration: a `key=value` file overridden by flags.
#[derive(Debug, Args)]
pub struct Settings {
    /// Configuration file with `threshold`, `alpha`, `gamma`, `R`, `C`, `D`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threshold: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// RoIAlign output size.
    #[arg(long = "roi", global = true)]
    pub roi: Option<usize>,
    /// Feature channels of randomly initialized models.
    #[arg(long, global = true)]
    pub channels: Option<usize>,
    /// Grid embedding size of randomly initialized models.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
}

impl Settings {
    pub fn resolve(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let flags = [
            ("threshold", self.threshold.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("R", self.roi.map(|v| v.to_string())),
            ("C", self.channels.map(|v| v.to_string())),
            ("D", self.dim.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic tables with oracle outputs.
    Synth {
        /// JSON `SynthSpec`; without it every sample draws a random spec.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write separator masks, start-point vectors and merge targets.
    Labelgen {
        #[arg(long)]
        ann: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recognize table structure from features or oracle outputs.
    Infer {
        /// `Hf×Wf×C` feature map in SEM2 format.
        #[arg(long, conflicts_with = "oracle", required_unless_present = "oracle")]
        features: Option<PathBuf>,
        /// One `.oracle` directory, or a `synth` output holding several.
        #[arg(long)]
        oracle: Option<PathBuf>,
        /// Model parameter bundle; random weights when absent.
        #[arg(long, requires = "features")]
        params: Option<PathBuf>,
        /// `input.json` with image size and text lines for `--features`.
        #[arg(long, requires = "features")]
        text: Option<PathBuf>,
        /// Seed of random model weights.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Prediction file, or directory for a batch of oracle samples.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value = "teds,f1,wavgf1,grits")]
        metrics: String,
        /// Threshold of the IoU-mapped adjacency F1.
        #[arg(long, default_value_t = 0.6)]
        iou: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Finite-difference checks of every loss gradient.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds to check.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
    },
    /// Render an `eval` report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Md)]
        format: ReportFormat,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Md,
    Csv,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: format!("{}: {}", path.display(), e.path()),
        message: e.inner().to_string(),
    })
}

fn write_json<T: serde::Serialize>(path: &Path, v: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(v)? + "\n")?;
    Ok(())
}

fn bools(v: &[bool]) -> Tensor {
    Tensor::new(vec![v.len()], v.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()).expect("rank-1 shape matches")
}

fn labelgen(ann: &Path, out: &Path) -> Result<()> {
    let a = load_annotation(ann)?;
    let masks = labelgen::gen_separator_masks(&a)?;
    let inst = labelgen::gen_instance_vectors(&masks)?;
    std::fs::create_dir_all(out)?;
    io::save(&out.join("masks_row.sem2"), &masks.row)?;
    io::save(&out.join("masks_col.sem2"), &masks.col)?;
    io::save(&out.join("p_row.sem2"), &bools(&inst.p_row))?;
    io::save(&out.join("p_col.sem2"), &bools(&inst.p_col))?;
    io::save(&out.join("merge.sem2"), &labelgen::gen_merge_labels(&a)?.to_tensor())?;
    write_json(&out.join("channels.json"), &labelgen::channel_map(&masks)?)
}

fn log_warnings(name: &str, warnings: &[String]) {
    for w in warnings {
        log::warn!("{name}: {w}");
    }
}

fn infer_features(features: &Path, params: Option<&Path>, text: Option<&Path>, seed: u64, cfg: &Config) -> Result<PredictionFile> {
    let f = io::load(features)?;
    let (hf, wf, c) = f.dims3()?;
    let params = match params {
        Some(p) => ModelParams::load(p)?,
        None => ModelParams::random(
            crate::params::ModelConfig {
                channels: c,
                ..cfg.model()
            },
            seed,
        ),
    };
    if params.config().channels != c {
        return Err(Error::shape(format!(
            "model expects {} channels, features have {c}",
            params.config().channels
        )));
    }
    let input = match text {
        Some(p) => read_json::<InferenceInput>(p)?,
        None => InferenceInput {
            image: crate::annotation::ImageSize {
                width: (wf * crate::FEATURE_STRIDE) as u32,
                height: (hf * crate::FEATURE_STRIDE) as u32,
            },
            textlines: Vec::new(),
        },
    };
    let opts = PipelineOptions {
        threshold: cfg.threshold,
        ..Default::default()
    };
    let p = harness::run_pipeline(
        &PipelineInput::Model {
            features: &f,
            params: &params,
        },
        &input.textlines,
        &opts,
    )?;
    Ok(PredictionFile::new(&p, &input))
}

fn markdown(rows: &[Vec<String>]) -> String {
    let mut s = format!("| {} |\n|{}\n", CSV_HEADER.join(" | "), "---|".repeat(CSV_HEADER.len()));
    for r in rows {
        s += &format!(
            "| {} |\n",
            r.iter().map(|v| if v.is_empty() { "-" } else { v }).collect::<Vec<_>>().join(" | ")
        );
    }
    s
}

/// Runs one parsed command; `Ok(false)` means the command ran but its check
/// failed.
pub fn run(cli: Cli) -> Result<bool> {
    let cfg = cli.settings.resolve()?;
    let opts = PipelineOptions {
        threshold: cfg.threshold,
        ..Default::default()
    };
    match cli.command {
        Command::Synth { spec, out, count, seed } => {
            let spec = spec.map(|p| read_json::<SynthSpec>(&p)).transpose()?;
            let names = harness::synth_dir(&out, spec.as_ref(), count, seed)?;
            log::info!("wrote {} samples to {}", names.len(), out.display());
        }
        Command::Labelgen { ann, out } => labelgen(&ann, &out)?,
        Command::Infer {
            features,
            oracle,
            params,
            text,
            seed,
            out,
        } => match (features, oracle) {
            (Some(f), _) => {
                let file = infer_features(&f, params.as_deref(), text.as_deref(), seed, &cfg)?;
                log_warnings(&f.display().to_string(), &file.warnings);
                file.save(&out)?;
            }
            (None, Some(dir)) if dir.join("input.json").is_file() => {
                let file = harness::infer_oracle(&dir, &opts)?;
                log_warnings(&dir.display().to_string(), &file.warnings);
                file.save(&out)?;
            }
            (None, Some(dir)) => {
                let names = harness::infer_oracle_dir(&dir, &out, &opts)?;
                log::info!("wrote {} predictions to {}", names.len(), out.display());
            }
            (None, None) => return Err(Error::Missing("--features or --oracle".into())),
        },
        Command::Eval {
            pred,
            gt,
            metrics,
            iou,
            out,
            csv,
        } => {
            if !(iou > 0.0 && iou <= 1.0) {
                return Err(Error::Range(format!("IoU threshold {iou} outside (0, 1]")));
            }
            let eopts = EvalOptions {
                metrics: MetricSet::parse(&metrics)?,
                iou,
            };
            let report = harness::eval_dirs(&pred, &gt, &eopts)?;
            write_json(&out, &report)?;
            if let Some(path) = csv {
                write_csv(&report.samples, std::fs::File::create(path)?)?;
            }
        }
        Command::Gradcheck { seed, seeds } => {
            let mut ok = true;
            for s in seed..seed.saturating_add(seeds.max(1)) {
                for c in harness::loss_gradient_checks(s)? {
                    println!(
                        "seed {s} {:<13} max rel err {:.3e} {}",
                        c.name,
                        c.max_rel_err,
                        if c.passed() { "ok" } else { "FAIL" }
                    );
                    ok &= c.passed();
                }
            }
            return Ok(ok);
        }
        Command::Report { input, format } => {
            let report: harness::EvalReport = read_json(&input)?;
            let mut all = report.samples.clone();
            all.push(report.aggregate.clone());
            match format {
                ReportFormat::Csv => write_csv(&all, std::io::stdout().lock())?,
                ReportFormat::Md => print!("{}", markdown(&all.iter().map(csv_row).collect::<Vec<_>>())),
            }
        }
    }
    Ok(true)
}

/// Worker count from `GRIDSPLIT_THREADS`, if set.
fn thread_cap() -> Result<Option<usize>> {
    match std::env::var("GRIDSPLIT_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::Validation(format!("GRIDSPLIT_THREADS=`{v}` is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

fn report_error(e: &Error) {
    eprintln!("error: {e}");
    let mut src = std::error::Error::source(e);
    while let Some(s) = src {
        eprintln!("  caused by: {s}");
        src = s.source();
    }
}

/// Entry point of the `gridsplit` binary. Exit code 0 on success, 1 when a
/// check fails, 2 on error.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = thread_cap().and_then(|cap| match cap {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Validation(format!("worker pool: {e}")))?
            .install(|| run(cli)),
        None => run(cli),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            report_error(&e);
            ExitCode::from(2)
        }
    }
}
