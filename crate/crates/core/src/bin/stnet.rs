use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stnet::cli::{run, Command, Options};

#[derive(Parser)]
#[command(name = "stnet", version, about = "Sound speed profile forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seasonal synthetic dataset.
    Synth(Flags),
    /// Stratify raw casts (or validate a wide CSV) onto a depth grid.
    Ingest(Flags),
    /// Train on the first part of a dataset and save a checkpoint.
    Train(Flags),
    /// Forecast the months after a dataset with a checkpoint or baseline.
    Predict(Flags),
    /// Score a forecast, or compare the network against all baselines.
    Evaluate(Flags),
    /// Window-length (--windows) and training-length (--years) studies.
    Study(Flags),
}

/// Every flag is optional; unset flags fall back to the config file and
/// then to built-in defaults.
#[derive(Args)]
struct Flags {
    /// key=value settings file, overridden by flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<String>,
    #[arg(long)]
    checkpoint: Option<String>,
    #[arg(long)]
    prediction: Option<String>,
    #[arg(long)]
    truth: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// argo58, uniform36 or custom.
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated depths in meters for --grid custom.
    #[arg(long)]
    depths: Option<String>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    batch: Option<String>,
    #[arg(long)]
    lr: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    repeats: Option<String>,
    /// Also write the forecast interpolated at this depth spacing (m).
    #[arg(long)]
    interp: Option<String>,
    /// pf, mlp or persistence.
    #[arg(long)]
    baseline: Option<String>,
    #[arg(long)]
    train_fraction: Option<String>,
    /// Comma-separated window lengths.
    #[arg(long)]
    windows: Option<String>,
    /// Comma-separated training spans in years.
    #[arg(long)]
    years: Option<String>,
    #[arg(long)]
    dropout: Option<String>,
    #[arg(long)]
    pf_degree: Option<String>,
    /// Synthetic surface amplitude, m/s.
    #[arg(long)]
    amplitude: Option<String>,
    /// Synthetic noise standard deviation, m/s.
    #[arg(long)]
    noise: Option<String>,
    /// Synthetic trend, m/s per month.
    #[arg(long)]
    trend: Option<String>,
    /// Synthetic series length in months.
    #[arg(long)]
    months: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("data", &self.data),
            ("checkpoint", &self.checkpoint),
            ("prediction", &self.prediction),
            ("truth", &self.truth),
            ("out", &self.out),
            ("grid", &self.grid),
            ("depths", &self.depths),
            ("window", &self.window),
            ("horizon", &self.horizon),
            ("epochs", &self.epochs),
            ("batch", &self.batch),
            ("lr", &self.lr),
            ("seed", &self.seed),
            ("repeats", &self.repeats),
            ("interp", &self.interp),
            ("baseline", &self.baseline),
            ("train_fraction", &self.train_fraction),
            ("windows", &self.windows),
            ("years", &self.years),
            ("dropout", &self.dropout),
            ("pf_degree", &self.pf_degree),
            ("amplitude", &self.amplitude),
            ("noise", &self.noise),
            ("trend", &self.trend),
            ("months", &self.months),
        ]
    }

    fn resolve(&self) -> stnet::Result<Options> {
        let mut opts = Options::default();
        if let Some(path) = &self.config {
            opts.apply_file(path)?;
        }
        for (key, value) in self.pairs() {
            if let Some(v) = value {
                opts.set(key, v)?;
            }
        }
        Ok(opts)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (command, flags) = match &cli.command {
        Cmd::Synth(f) => (Command::Synth, f),
        Cmd::Ingest(f) => (Command::Ingest, f),
        Cmd::Train(f) => (Command::Train, f),
        Cmd::Predict(f) => (Command::Predict, f),
        Cmd::Evaluate(f) => (Command::Evaluate, f),
        Cmd::Study(f) => (Command::Study, f),
    };
    let result = flags.resolve().and_then(|opts| run(command, &opts));
    match result {
        Ok(manifest) => {
            for a in &manifest.artifacts {
                println!("{}", a.path);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("stnet {command}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
