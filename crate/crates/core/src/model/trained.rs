//! A fitted model bundle, its text checkpoint format and the
//! autoregressive rollout.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::data::{DepthGrid, GridScheme, NormStats, SspDataset, SspProfile};
use crate::encoding::encode_window;
use crate::error::{Result, StnetError};
use crate::model::{forward_tokens, Mode, StnetConfig, StnetParams};
use crate::numeric::{Matrix, Rng};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "stnet-checkpoint";

/// Configuration, parameters and the normalization that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub config: StnetConfig,
    pub params: StnetParams,
    pub norm: NormStats,
    pub grid: DepthGrid,
}

impl TrainedModel {
    pub fn new(config: StnetConfig, params: StnetParams, norm: NormStats, grid: DepthGrid) -> Result<Self> {
        config.validate()?;
        params.check_config(&config)?;
        if norm.depth_count() != config.input_width || grid.len() != config.input_width {
            return Err(StnetError::Config(format!(
                "model input width {} vs {} norm layers and {} grid depths",
                config.input_width,
                norm.depth_count(),
                grid.len()
            )));
        }
        Ok(TrainedModel {
            config,
            params,
            norm,
            grid,
        })
    }

    /// One-step prediction from normalized rows; returns normalized values.
    pub fn predict_normalized(&self, rows: &[&[f64]], time_indices: &[u64]) -> Result<Vec<f64>> {
        let tokens = encode_window(rows, time_indices, self.config.use_time_encoding);
        let (y, _) = forward_tokens(&tokens, &self.params, &self.config, Mode::Infer, &mut Rng::new(0))?;
        Ok(y)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_checkpoint_string()).map_err(|e| StnetError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| StnetError::io(path, e))?;
        Self::from_checkpoint_str(&text)
    }

    pub fn to_checkpoint_string(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "format_version={CHECKPOINT_VERSION}");
        let _ = writeln!(s, "input_width={}", c.input_width);
        let _ = writeln!(s, "model_width={}", c.model_width);
        let _ = writeln!(s, "heads={}", c.heads);
        let _ = writeln!(s, "channels={}", c.channels);
        let _ = writeln!(s, "ffn_width={}", c.ffn_width);
        let _ = writeln!(s, "dropout={:?}", c.dropout);
        let _ = writeln!(s, "window={}", c.window);
        let _ = writeln!(s, "use_time_encoding={}", c.use_time_encoding);
        let _ = writeln!(s, "layer_norm_eps={:?}", c.layer_norm_eps);
        let _ = writeln!(s, "grid_scheme={}", self.grid.scheme());
        let _ = writeln!(s, "grid_depths={}", join(self.grid.depths()));
        let _ = writeln!(s, "norm_mean={}", join(&self.norm.mean));
        let _ = writeln!(s, "norm_std={}", join(&self.norm.std));
        for (name, t) in self.params.named_tensors() {
            let _ = writeln!(s, "tensor {name} {} {}", t.rows(), t.cols());
            for r in 0..t.rows() {
                let _ = writeln!(s, "{}", join(t.row(r)));
            }
        }
        s.push_str("end\n");
        s
    }

    pub fn from_checkpoint_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| StnetError::Checkpoint(format!("truncated before {what}")))
        };
        if next("header")? != MAGIC {
            return Err(StnetError::Checkpoint("missing header".into()));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = next(key)?;
            match line.split_once('=') {
                Some((k, v)) if k == key => Ok(v.to_string()),
                _ => Err(StnetError::Checkpoint(format!("expected '{key}=', found '{line}'"))),
            }
        };
        let version: u32 = num(&field("format_version")?)?;
        if version != CHECKPOINT_VERSION {
            return Err(StnetError::Checkpoint(format!(
                "unsupported format version {version}"
            )));
        }
        let config = StnetConfig {
            input_width: num(&field("input_width")?)?,
            model_width: num(&field("model_width")?)?,
            heads: num(&field("heads")?)?,
            channels: num(&field("channels")?)?,
            ffn_width: num(&field("ffn_width")?)?,
            dropout: num(&field("dropout")?)?,
            window: num(&field("window")?)?,
            use_time_encoding: num(&field("use_time_encoding")?)?,
            layer_norm_eps: num(&field("layer_norm_eps")?)?,
        };
        config.validate()?;
        let scheme: GridScheme = field("grid_scheme")?.parse()?;
        let depths = floats(&field("grid_depths")?)?;
        let grid = DepthGrid::detect(depths)?;
        if grid.scheme() != scheme && scheme != GridScheme::Custom {
            return Err(StnetError::Checkpoint(format!(
                "grid declared {scheme} but depths match {}",
                grid.scheme()
            )));
        }
        let norm = NormStats {
            mean: floats(&field("norm_mean")?)?,
            std: floats(&field("norm_std")?)?,
        };

        let mut params = StnetParams::init(&config, &mut Rng::new(0))?;
        let names: Vec<String> = params.named_tensors().into_iter().map(|(n, _)| n).collect();
        for (name, tensor) in names.iter().zip(params.tensors_mut()) {
            let header = next("tensor header")?;
            let parts: Vec<&str> = header.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "tensor" || parts[1] != name {
                return Err(StnetError::Checkpoint(format!(
                    "expected tensor {name}, found '{header}'"
                )));
            }
            let (rows, cols): (usize, usize) = (num(parts[2])?, num(parts[3])?);
            if (rows, cols) != tensor.shape() {
                return Err(StnetError::Checkpoint(format!(
                    "tensor {name} is {rows}x{cols}, configuration implies {}x{}",
                    tensor.rows(),
                    tensor.cols()
                )));
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let row = floats(next(name)?)?;
                if row.len() != cols {
                    return Err(StnetError::Checkpoint(format!("ragged row in tensor {name}")));
                }
                data.extend(row);
            }
            *tensor = Matrix::from_vec(rows, cols, data)?;
        }
        if next("end")? != "end" {
            return Err(StnetError::Checkpoint("trailing content after tensors".into()));
        }
        TrainedModel::new(config, params, norm, grid)
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| StnetError::Checkpoint(format!("cannot parse '{s}'")))
}

fn floats(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace().map(num).collect()
}

/// Autoregressive forecast of `horizon` profiles after `history` (m/s).
///
/// Each predicted profile is appended to the input window, with the time
/// code of its own step, before predicting the next one.
pub fn rollout(history: &SspDataset, model: &TrainedModel, horizon: usize) -> Result<SspDataset> {
    let w = model.config.window;
    if history.len() < w {
        return Err(StnetError::Size(format!(
            "rollout needs at least {w} history profiles, got {}",
            history.len()
        )));
    }
    if horizon == 0 {
        return Err(StnetError::Config("horizon must be >= 1".into()));
    }
    if history.grid().depths() != model.grid.depths() {
        return Err(StnetError::Config(
            "history grid differs from the model's grid".into(),
        ));
    }
    let start = history.len() - w;
    let mut rows: Vec<Vec<f64>> = history.profiles()[start..]
        .iter()
        .map(|p| model.norm.normalize(&p.speeds))
        .collect();
    let mut times: Vec<u64> = (start..history.len()).map(|k| history.time_index(k)).collect();

    let mut profiles = Vec::with_capacity(horizon);
    for step in 1..=horizon {
        let n = rows.len();
        let window: Vec<&[f64]> = rows[n - w..].iter().map(Vec::as_slice).collect();
        let pred = model.predict_normalized(&window, &times[n - w..])?;
        profiles.push(SspProfile {
            timestamp: history.next_timestamp(step),
            speeds: model.norm.denormalize(&pred),
        });
        rows.push(pred);
        times.push(history.next_time_index(step));
    }
    let mut out = SspDataset::new(history.grid().clone(), profiles, history.region.clone())?;
    out.provenance = "stnet rollout".into();
    Ok(out)
}
