//! Mini-batch Adam training of the network with a step-decay learning rate.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{NormStats, SspDataset};
use crate::encoding::{build_sequences, EncodedSequence};
use crate::error::{Result, StnetError};
use crate::model::{stnet_backward_into, stnet_forward, Mode, StnetConfig, StnetParams, TrainedModel};
use crate::numeric::{adam_step, AdamState, Matrix, Rng};
use crate::train::metrics::{rmse, rmse_with_grad};

/// Samples summed per parallel work unit. Fixed so that the summation
/// order, and hence every bit of the result, does not depend on thread count.
const GRAD_CHUNK: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// The learning rate is multiplied by `lr_decay_factor` every
    /// `lr_decay_interval` epochs.
    pub lr_decay_factor: f64,
    pub lr_decay_interval: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 300,
            batch_size: 32,
            learning_rate: 0.001,
            lr_decay_factor: 0.5,
            lr_decay_interval: 100,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.lr_decay_interval == 0 {
            return Err(StnetError::Config(
                "epochs, batch size and decay interval must be >= 1".into(),
            ));
        }
        if !(self.learning_rate > 0.0) || !(self.lr_decay_factor > 0.0) {
            return Err(StnetError::Config(
                "learning rate and decay factor must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// Learning rate in effect during `epoch` (0-based).
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        self.learning_rate * self.lr_decay_factor.powi((epoch / self.lr_decay_interval) as i32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub learning_rate: f64,
    /// Mean mini-batch RMSE in normalized units.
    pub train_rmse: f64,
    /// One-step RMSE on the validation profiles, m/s.
    pub val_rmse_ms: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    pub losses: Vec<EpochLoss>,
    pub seconds: f64,
}

/// One Adam state per tensor of a parameter list.
#[derive(Clone, Debug)]
pub struct Adam {
    states: Vec<AdamState>,
}

impl Adam {
    pub fn for_tensors(tensors: &[&Matrix]) -> Self {
        Adam {
            states: tensors.iter().map(|t| AdamState::new(t.rows(), t.cols())).collect(),
        }
    }

    pub fn step(&mut self, params: Vec<&mut Matrix>, grads: Vec<&Matrix>, lr: f64) -> Result<()> {
        if params.len() != self.states.len() || grads.len() != self.states.len() {
            return Err(StnetError::State("optimizer tracks a different tensor list".into()));
        }
        for ((p, g), s) in params.into_iter().zip(grads).zip(&mut self.states) {
            adam_step(p, g, s, lr)?;
        }
        Ok(())
    }
}

/// Trains on `train_ds` (m/s); normalization is fitted on `train_ds` alone.
///
/// When `val_ds` is given it must directly follow `train_ds`; its one-step
/// RMSE is recorded after each epoch.
pub fn train(
    train_ds: &SspDataset,
    val_ds: Option<&SspDataset>,
    model_config: &StnetConfig,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    let started = Instant::now();
    config.validate()?;
    model_config.validate()?;
    if train_ds.depth_count() != model_config.input_width {
        return Err(StnetError::Config(format!(
            "dataset has {} depth layers, model expects {}",
            train_ds.depth_count(),
            model_config.input_width
        )));
    }
    let norm = NormStats::fit(train_ds);
    let normalized = norm.apply(train_ds)?;
    let sequences = build_sequences(&normalized, model_config.window, model_config.use_time_encoding)
        .map_err(|e| match e {
            StnetError::Size(m) => StnetError::Size(format!("no training sequences: {m}")),
            other => other,
        })?;

    let val_sequences = match val_ds {
        Some(v) => Some(validation_sequences(train_ds, v, &norm, model_config)?),
        None => None,
    };

    let mut params = StnetParams::init(model_config, &mut Rng::new(config.seed))?;
    let mut adam = Adam::for_tensors(&params.tensors());
    let mut order: Vec<usize> = (0..sequences.len()).collect();
    let mut losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let lr = config.learning_rate_at(epoch);
        Rng::derive(config.seed, &[epoch as u64, u64::MAX]).shuffle(&mut order);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let (loss, grads) =
                batch_gradient(&sequences, batch, &params, model_config, config.seed, epoch)?;
            loss_sum += loss * batch.len() as f64;
            adam.step(params.tensors_mut(), grads.tensors(), lr)?;
        }
        let val_rmse_ms = match &val_sequences {
            Some(vs) => Some(validation_rmse(vs, &params, model_config, &norm)?),
            None => None,
        };
        losses.push(EpochLoss {
            epoch,
            learning_rate: lr,
            train_rmse: loss_sum / sequences.len() as f64,
            val_rmse_ms,
        });
    }

    if !params.is_finite() {
        return Err(StnetError::State("training diverged to non-finite parameters".into()));
    }
    let model = TrainedModel::new(model_config.clone(), params, norm, train_ds.grid().clone())?;
    Ok(TrainOutcome {
        model,
        losses,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Mean RMSE loss and mean gradient over the samples in `batch`.
fn batch_gradient(
    sequences: &[EncodedSequence],
    batch: &[usize],
    params: &StnetParams,
    model_config: &StnetConfig,
    seed: u64,
    epoch: usize,
) -> Result<(f64, StnetParams)> {
    let partials = batch
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| -> Result<(f64, StnetParams)> {
            let mut grads = params.zeros_like();
            let mut loss = 0.0;
            for &i in chunk {
                let mut rng = Rng::derive(seed, &[epoch as u64, i as u64]);
                let seq = &sequences[i];
                let (pred, trace) = stnet_forward(seq, params, model_config, Mode::Train, &mut rng)?;
                let (l, dl) = rmse_with_grad(&pred, &seq.target)?;
                loss += l;
                stnet_backward_into(&trace, params, model_config, &dl, &mut grads)?;
            }
            Ok((loss, grads))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = batch.len() as f64;
    let mut total = params.zeros_like();
    let mut loss = 0.0;
    for (l, g) in &partials {
        loss += l;
        total.add_scaled(g, 1.0 / n)?;
    }
    Ok((loss / n, total))
}

/// Windows whose targets are the validation profiles, with context drawn
/// from the tail of the training data.
fn validation_sequences(
    train_ds: &SspDataset,
    val_ds: &SspDataset,
    norm: &NormStats,
    model_config: &StnetConfig,
) -> Result<Vec<EncodedSequence>> {
    let w = model_config.window;
    if train_ds.len() < w {
        return Err(StnetError::Size("training set shorter than window".into()));
    }
    let context = train_ds.slice(train_ds.len() - w..train_ds.len())?;
    let joined = norm.apply(&context.concat(val_ds)?)?;
    build_sequences(&joined, w, model_config.use_time_encoding)
}

fn validation_rmse(
    sequences: &[EncodedSequence],
    params: &StnetParams,
    model_config: &StnetConfig,
    norm: &NormStats,
) -> Result<f64> {
    let mut total = 0.0;
    let mut rng = Rng::new(0);
    for seq in sequences {
        let (pred, _) = stnet_forward(seq, params, model_config, Mode::Infer, &mut rng)?;
        total += rmse(&norm.denormalize(&pred), &norm.denormalize(&seq.target))?;
    }
    Ok(total / sequences.len() as f64)
}
