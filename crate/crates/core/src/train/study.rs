//! Window-length and training-length studies.
//!
//! Both hold out the final `horizon` profiles as the forecast target, train
//! on what precedes them, roll out autoregressively and average the
//! per-month RMSE over `repeats` seeds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SspDataset;
use crate::error::{Result, StnetError};
use crate::model::{rollout, StnetConfig};
use crate::train::report::{evaluate, RmseTable, TableRow};
use crate::train::trainer::{train, TrainConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    pub model: StnetConfig,
    pub train: TrainConfig,
    pub horizon: usize,
    /// Run `r` uses seed `train.seed + r`.
    pub repeats: usize,
}

impl StudyOptions {
    pub fn new(depth_count: usize) -> Self {
        StudyOptions {
            model: StnetConfig::new(depth_count),
            train: TrainConfig::default(),
            horizon: 12,
            repeats: 5,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 || self.repeats == 0 {
            return Err(StnetError::Config("horizon and repeats must be >= 1".into()));
        }
        Ok(())
    }
}

/// Trains `repeats` models on `history` and scores their rollouts against
/// `target`. Runs may execute concurrently; results are merged in seed order.
pub fn repeated_forecast(
    history: &SspDataset,
    target: &SspDataset,
    model: &StnetConfig,
    options: &StudyOptions,
    label: &str,
) -> Result<TableRow> {
    let runs = (0..options.repeats as u64)
        .into_par_iter()
        .map(|r| -> Result<(Vec<f64>, f64)> {
            let config = TrainConfig {
                seed: options.train.seed.wrapping_add(r),
                ..options.train.clone()
            };
            let outcome = train(history, None, model, &config)?;
            let forecast = rollout(history, &outcome.model, options.horizon)?;
            let report = evaluate(&forecast, target)?;
            log::info!("{label} seed {}: average rmse {:.4} m/s", config.seed, report.average_rmse);
            Ok((report.rmse_per_step(), outcome.seconds))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = runs.len() as f64;
    let mut mean = vec![0.0; options.horizon];
    let mut seconds = 0.0;
    for (rmse, s) in &runs {
        for (m, v) in mean.iter_mut().zip(rmse) {
            *m += v / n;
        }
        seconds += s / n;
    }
    Ok(TableRow::new(label, mean, seconds))
}

fn forecast_split(ds: &SspDataset, horizon: usize) -> Result<(usize, SspDataset)> {
    if ds.len() <= horizon {
        return Err(StnetError::Size(format!(
            "{} profiles cannot hold out a {horizon}-step forecast",
            ds.len()
        )));
    }
    let cut = ds.len() - horizon;
    Ok((cut, ds.slice(cut..ds.len())?))
}

/// One row per window length, trained on everything before the held-out year.
pub fn study_window_length(ds: &SspDataset, windows: &[usize], options: &StudyOptions) -> Result<RmseTable> {
    options.validate()?;
    let (cut, target) = forecast_split(ds, options.horizon)?;
    let history = ds.slice(0..cut)?;
    let mut table = RmseTable::default();
    for &w in windows {
        if w + 1 > history.len() {
            return Err(StnetError::Size(format!(
                "window {w} needs more than {} history profiles",
                history.len()
            )));
        }
        let model = StnetConfig {
            window: w,
            ..options.model.clone()
        };
        table.push(repeated_forecast(&history, &target, &model, options, &format!("window={w}"))?);
    }
    Ok(table)
}

/// One row per training span: the `12·years` profiles directly before the
/// held-out year.
pub fn study_train_length(ds: &SspDataset, years: &[usize], options: &StudyOptions) -> Result<RmseTable> {
    options.validate()?;
    let (cut, target) = forecast_split(ds, options.horizon)?;
    let mut table = RmseTable::default();
    for &y in years {
        let span = 12 * y;
        if y == 0 || span > cut {
            return Err(StnetError::Size(format!(
                "{y} years of training data requested, {cut} profiles available"
            )));
        }
        let history = ds.slice(cut - span..cut)?;
        table.push(repeated_forecast(&history, &target, &options.model, options, &format!("years={y}"))?);
    }
    Ok(table)
}
