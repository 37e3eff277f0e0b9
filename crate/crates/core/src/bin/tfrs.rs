use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tfrs::harness::{
    emit_results, preprocess_all, preprocess_file, recognition_rate, run_experiment, scan_dataset, synth_dataset,
    ClassifierKind, ExperimentConfig, FailureMode, FeatureKind, OutputFormat, Pipeline,
};
use tfrs::image::{save_pnm, Image};
use tfrs::Error;

#[derive(Parser)]
#[command(name = "tfrs", version, about = "Thermal face recognition experiments")]
struct Cli {
    /// Worker threads for preprocessing and experiment cells (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic thermal dataset.
    Synth {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        subjects: usize,
        #[arg(long, default_value_t = 12)]
        per_subject: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Normalize every image of a dataset to a 112x92 face crop.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        failures: FailureFlags,
        #[arg(long)]
        per_subject: Option<usize>,
    },
    /// Run an experiment and write its results table.
    Run {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value = "csv")]
        format: OutputFormat,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a pipeline on the odd rows of a dataset and save it.
    Train {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify every image of a dataset with a saved pipeline.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        failures: FailureFlags,
    },
}

#[derive(Args)]
struct FailureFlags {
    /// Abort on the first image that fails preprocessing (default).
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Drop failing images together with their train/test partner.
    #[arg(long)]
    lenient: bool,
}

impl FailureFlags {
    fn mode(&self) -> FailureMode {
        if self.lenient {
            FailureMode::Lenient
        } else {
            FailureMode::Strict
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON file with experiment settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    feature: Option<FeatureKind>,
    #[arg(long)]
    classifier: Option<ClassifierKind>,
    /// Comma-separated eigenvector counts.
    #[arg(long, value_delimiter = ',')]
    eigen: Option<Vec<usize>>,
    /// Sweep all eleven alpha/beta pairs.
    #[arg(long)]
    alpha_beta_sweep: bool,
    /// Detail weight when not sweeping.
    #[arg(long)]
    beta: Option<f64>,
    /// Eigenvector count for the minimum-distance classifier.
    #[arg(long)]
    min_dist_eigen: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    per_subject: Option<usize>,
    #[command(flatten)]
    failures: FailureFlags,
}

enum Failure {
    Usage(String),
    Data(Error),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Size(_) | Error::OddLength(_) => Failure::Internal(e.to_string()),
            e => Failure::Data(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(f) = self.feature {
            cfg.feature = f;
        }
        if let Some(c) = self.classifier {
            cfg.classifier = c;
        }
        if let Some(e) = &self.eigen {
            cfg.eigen_counts = e.clone();
        }
        if self.alpha_beta_sweep {
            cfg.sweep = true;
        }
        if let Some(b) = self.beta {
            cfg.beta = b;
        }
        if let Some(k) = self.min_dist_eigen {
            cfg.min_dist_eigen = k;
        }
        if let Some(n) = self.epochs {
            cfg.mlp.epochs = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.per_subject {
            cfg.per_subject = Some(n);
        }
        if self.failures.lenient {
            cfg.lenient = true;
        } else if self.failures.strict {
            cfg.lenient = false;
        }
        cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Synth {
            seed,
            subjects,
            per_subject,
            out,
        } => {
            let m = synth_dataset(seed, subjects, per_subject, &out)?;
            eprintln!("wrote {} images to {}", m.len(), out.display());
        }
        Command::Preprocess {
            input,
            out,
            failures,
            per_subject,
        } => {
            let mut manifest = scan_dataset(&input)?;
            if let Some(n) = per_subject {
                manifest = manifest.truncated(n)?;
            }
            let set = preprocess_all(&manifest, failures.mode())?;
            for (face, path) in set.faces.into_iter().zip(&set.paths) {
                let rel = path.strip_prefix(&input).unwrap_or(path);
                let dest = out.join(rel).with_extension("pgm");
                if let Some(dir) = dest.parent() {
                    fs::create_dir_all(dir)?;
                }
                fs::write(dest, save_pnm(&Image::Gray(face), true)?)?;
            }
            for f in &set.failures {
                eprintln!("dropped {}: {}", f.path.display(), f.reason);
            }
        }
        Command::Run {
            input,
            exp,
            format,
            out,
        } => {
            let cfg = exp.resolve()?;
            let table = run_experiment(&scan_dataset(&input)?, &cfg)?;
            write_output(out.as_deref(), &emit_results(&table, format))?;
        }
        Command::Train { input, exp, out } => {
            let cfg = exp.resolve()?;
            let mut manifest = scan_dataset(&input)?;
            if let Some(n) = cfg.per_subject {
                manifest = manifest.truncated(n)?;
            }
            let mode = if cfg.lenient {
                FailureMode::Lenient
            } else {
                FailureMode::Strict
            };
            let set = preprocess_all(&manifest, mode)?;
            let pipeline = Pipeline::train(&set, manifest.subject_names(), &cfg)?;
            fs::write(out, pipeline.to_bytes())?;
        }
        Command::Eval { model, input, failures } => {
            let pipeline = Pipeline::from_bytes(&fs::read(&model)?)?;
            let manifest = scan_dataset(&input)?;
            let mut out = String::from("image,actual,predicted\n");
            let (mut predicted, mut actual) = (Vec::new(), Vec::new());
            for subject in &manifest.subjects {
                let truth = pipeline.subjects.iter().position(|s| *s == subject.name);
                for path in &subject.images {
                    let face = match preprocess_file(path) {
                        Ok(face) => face,
                        Err(e) if failures.mode() == FailureMode::Lenient => {
                            eprintln!("skipping {e}");
                            continue;
                        }
                        Err(e) => return Err(e.into()),
                    };
                    let label = pipeline.predict(&face)?;
                    let name = pipeline.subject_name(label).unwrap_or("?");
                    out.push_str(&format!("{},{},{}\n", path.display(), subject.name, name));
                    predicted.push(label);
                    actual.push(truth.map_or(u32::MAX, |t| t as u32));
                }
            }
            write_output(None, out.as_bytes())?;
            if !actual.is_empty() {
                eprintln!("recognition rate {}%", recognition_rate(&predicted, &actual)?);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("tfrs: {e}");
            return ExitCode::from(3);
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("tfrs: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("tfrs: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("tfrs: internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
