//! Resolved settings for every command: defaults, then a `key=value`
//! config file, then command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::{read_key_values, DepthGrid, GridScheme, SynthSpec};
use crate::error::{Result, StnetError};
use crate::model::StnetConfig;
use crate::train::{MlpConfig, StudyOptions, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Baseline {
    Pf,
    Mlp,
    Persistence,
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Baseline::Pf => "pf",
            Baseline::Mlp => "mlp",
            Baseline::Persistence => "persistence",
        })
    }
}

impl FromStr for Baseline {
    type Err = StnetError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pf" => Ok(Baseline::Pf),
            "mlp" => Ok(Baseline::Mlp),
            "persistence" => Ok(Baseline::Persistence),
            other => Err(StnetError::Config(format!(
                "unknown baseline '{other}' (expected pf, mlp or persistence)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    pub data: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub prediction: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub out: PathBuf,
    pub grid: GridScheme,
    /// Depths for `grid = custom`.
    pub depths: Option<Vec<f64>>,
    pub window: usize,
    pub horizon: usize,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub lr_decay_factor: f64,
    pub lr_decay_interval: usize,
    pub seed: u64,
    pub repeats: usize,
    pub interp: Option<f64>,
    pub baseline: Option<Baseline>,
    pub train_fraction: f64,
    pub windows: Option<Vec<usize>>,
    pub years: Option<Vec<usize>>,
    pub model_width: usize,
    pub heads: usize,
    pub channels: usize,
    pub ffn_width: usize,
    pub dropout: f64,
    pub time_encoding: bool,
    pub pf_degree: usize,
    pub mlp_hidden: usize,
    pub synth: SynthSpec,
}

impl Default for Options {
    fn default() -> Self {
        let model = StnetConfig::new(1);
        let train = TrainConfig::default();
        Options {
            data: None,
            checkpoint: None,
            prediction: None,
            truth: None,
            out: PathBuf::from("out"),
            grid: GridScheme::Argo58,
            depths: None,
            window: model.window,
            horizon: 12,
            epochs: train.epochs,
            batch: train.batch_size,
            lr: train.learning_rate,
            lr_decay_factor: train.lr_decay_factor,
            lr_decay_interval: train.lr_decay_interval,
            seed: 0,
            repeats: 5,
            interp: None,
            baseline: None,
            train_fraction: 0.8,
            windows: None,
            years: None,
            model_width: model.model_width,
            heads: model.heads,
            channels: model.channels,
            ffn_width: model.ffn_width,
            dropout: model.dropout,
            time_encoding: model.use_time_encoding,
            pf_degree: 3,
            mlp_hidden: 128,
            synth: SynthSpec::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| StnetError::Config(format!("cannot parse {key}={value}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(StnetError::Config(format!("{key} needs at least one value")));
    }
    Ok(items)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn path_string(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl Options {
    /// Every recognized key, in the order `to_map` reports them.
    pub const KEYS: &'static [&'static str] = &[
        "data", "checkpoint", "prediction", "truth", "out", "grid", "depths", "window", "horizon",
        "epochs", "batch", "lr", "lr_decay_factor", "lr_decay_interval", "seed", "repeats",
        "interp", "baseline", "train_fraction", "windows", "years", "model_width", "heads",
        "channels", "ffn_width", "dropout", "time_encoding", "pf_degree", "mlp_hidden",
        "amplitude", "amplitude_decay_m", "phase_lag_per_km", "period_months", "trend", "noise",
        "months", "start",
    ];

    /// Sets one setting from its textual form; empty values clear optional
    /// settings.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let opt_path = |v: &str| (!v.is_empty()).then(|| PathBuf::from(v));
        match key.trim().replace('-', "_").as_str() {
            "data" => self.data = opt_path(v),
            "checkpoint" => self.checkpoint = opt_path(v),
            "prediction" => self.prediction = opt_path(v),
            "truth" => self.truth = opt_path(v),
            "out" => self.out = PathBuf::from(v),
            "grid" => self.grid = v.parse()?,
            "depths" => self.depths = if v.is_empty() { None } else { Some(parse_list(key, v)?) },
            "window" => self.window = parse(key, v)?,
            "horizon" => self.horizon = parse(key, v)?,
            "epochs" => self.epochs = parse(key, v)?,
            "batch" => self.batch = parse(key, v)?,
            "lr" => self.lr = parse(key, v)?,
            "lr_decay_factor" => self.lr_decay_factor = parse(key, v)?,
            "lr_decay_interval" => self.lr_decay_interval = parse(key, v)?,
            "seed" => {
                self.seed = parse(key, v)?;
                self.synth.seed = self.seed;
            }
            "repeats" => self.repeats = parse(key, v)?,
            "interp" => self.interp = if v.is_empty() { None } else { Some(parse(key, v)?) },
            "baseline" => self.baseline = if v.is_empty() { None } else { Some(v.parse()?) },
            "train_fraction" => self.train_fraction = parse(key, v)?,
            "windows" => self.windows = if v.is_empty() { None } else { Some(parse_list(key, v)?) },
            "years" => self.years = if v.is_empty() { None } else { Some(parse_list(key, v)?) },
            "model_width" => self.model_width = parse(key, v)?,
            "heads" => self.heads = parse(key, v)?,
            "channels" => self.channels = parse(key, v)?,
            "ffn_width" => self.ffn_width = parse(key, v)?,
            "dropout" => self.dropout = parse(key, v)?,
            "time_encoding" => self.time_encoding = parse(key, v)?,
            "pf_degree" => self.pf_degree = parse(key, v)?,
            "mlp_hidden" => self.mlp_hidden = parse(key, v)?,
            "amplitude" => self.synth.amplitude = parse(key, v)?,
            "amplitude_decay_m" => self.synth.amplitude_decay_m = parse(key, v)?,
            "phase_lag_per_km" => self.synth.phase_lag_per_km = parse(key, v)?,
            "period_months" => self.synth.period_months = parse(key, v)?,
            "trend" => self.synth.trend = parse(key, v)?,
            "noise" => self.synth.noise_std = parse(key, v)?,
            "months" => self.synth.months = parse(key, v)?,
            "start" => {
                let (y, m) = v
                    .split_once('-')
                    .ok_or_else(|| StnetError::Config(format!("start must be YYYY-MM, got '{v}'")))?;
                self.synth.start_year = parse(key, y)?;
                self.synth.start_month = parse(key, m)?;
            }
            other => return Err(StnetError::Config(format!("unknown setting '{other}'"))),
        }
        Ok(())
    }

    /// Applies every entry of a `key=value` file.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        for (k, v) in read_key_values(path)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    /// All settings with defaults materialized, for the run manifest.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let s = &self.synth;
        let opt = |v: Option<String>| v.unwrap_or_default();
        let entries: Vec<(&str, String)> = vec![
            ("data", path_string(&self.data)),
            ("checkpoint", path_string(&self.checkpoint)),
            ("prediction", path_string(&self.prediction)),
            ("truth", path_string(&self.truth)),
            ("out", self.out.display().to_string()),
            ("grid", self.grid.to_string()),
            ("depths", opt(self.depths.as_deref().map(join))),
            ("window", self.window.to_string()),
            ("horizon", self.horizon.to_string()),
            ("epochs", self.epochs.to_string()),
            ("batch", self.batch.to_string()),
            ("lr", self.lr.to_string()),
            ("lr_decay_factor", self.lr_decay_factor.to_string()),
            ("lr_decay_interval", self.lr_decay_interval.to_string()),
            ("seed", self.seed.to_string()),
            ("repeats", self.repeats.to_string()),
            ("interp", opt(self.interp.map(|v| v.to_string()))),
            ("baseline", opt(self.baseline.map(|b| b.to_string()))),
            ("train_fraction", self.train_fraction.to_string()),
            ("windows", opt(self.windows.as_deref().map(join))),
            ("years", opt(self.years.as_deref().map(join))),
            ("model_width", self.model_width.to_string()),
            ("heads", self.heads.to_string()),
            ("channels", self.channels.to_string()),
            ("ffn_width", self.ffn_width.to_string()),
            ("dropout", self.dropout.to_string()),
            ("time_encoding", self.time_encoding.to_string()),
            ("pf_degree", self.pf_degree.to_string()),
            ("mlp_hidden", self.mlp_hidden.to_string()),
            ("amplitude", s.amplitude.to_string()),
            ("amplitude_decay_m", s.amplitude_decay_m.to_string()),
            ("phase_lag_per_km", s.phase_lag_per_km.to_string()),
            ("period_months", s.period_months.to_string()),
            ("trend", s.trend.to_string()),
            ("noise", s.noise_std.to_string()),
            ("months", s.months.to_string()),
            ("start", format!("{:04}-{:02}", s.start_year, s.start_month)),
        ];
        entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn depth_grid(&self) -> Result<DepthGrid> {
        match (self.grid, &self.depths) {
            (GridScheme::Custom, Some(d)) => DepthGrid::detect(d.clone()),
            (GridScheme::Custom, None) => Err(StnetError::Config(
                "grid=custom needs an explicit depth list".into(),
            )),
            (scheme, _) => DepthGrid::from_scheme(scheme),
        }
    }

    pub fn model_config(&self, depth_count: usize) -> StnetConfig {
        StnetConfig {
            model_width: self.model_width,
            heads: self.heads,
            channels: self.channels,
            ffn_width: self.ffn_width,
            dropout: self.dropout,
            window: self.window,
            use_time_encoding: self.time_encoding,
            ..StnetConfig::new(depth_count)
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch,
            learning_rate: self.lr,
            lr_decay_factor: self.lr_decay_factor,
            lr_decay_interval: self.lr_decay_interval,
            seed: self.seed,
        }
    }

    pub fn mlp_config(&self) -> MlpConfig {
        MlpConfig {
            hidden: self.mlp_hidden,
            epochs: self.epochs,
            batch_size: self.batch,
            learning_rate: self.lr,
            seed: self.seed,
        }
    }

    pub fn study_options(&self, depth_count: usize) -> StudyOptions {
        StudyOptions {
            model: self.model_config(depth_count),
            train: self.train_config(),
            horizon: self.horizon,
            repeats: self.repeats,
        }
    }

    /// Synthetic generator settings; the grid follows `grid`.
    pub fn synth_spec(&self) -> SynthSpec {
        SynthSpec {
            grid: self.grid,
            seed: self.seed,
            ..self.synth.clone()
        }
    }
}
