//! Reference forecasters: persistence, per-layer polynomial extrapolation
//! and a one-hidden-layer perceptron.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{NormStats, SspDataset, SspProfile};
use crate::error::{Result, StnetError};
use crate::numeric::{affine, affine_backward, relu, relu_backward, xavier_uniform, Matrix, Rng};
use crate::train::metrics::rmse_with_grad;
use crate::train::trainer::Adam;

fn forecast_dataset(history: &SspDataset, rows: Vec<Vec<f64>>, tag: &str) -> Result<SspDataset> {
    let profiles = rows
        .into_iter()
        .enumerate()
        .map(|(h, speeds)| SspProfile {
            timestamp: history.next_timestamp(h + 1),
            speeds,
        })
        .collect();
    let mut out = SspDataset::new(history.grid().clone(), profiles, history.region.clone())?;
    out.provenance = tag.to_string();
    Ok(out)
}

/// Repeats the last observed profile `horizon` times.
pub fn baseline_persistence(history: &SspDataset, horizon: usize) -> Result<SspDataset> {
    if horizon == 0 {
        return Err(StnetError::Config("horizon must be >= 1".into()));
    }
    let last = history.profiles()[history.len() - 1].speeds.clone();
    forecast_dataset(history, vec![last; horizon], "persistence")
}

/// Least-squares polynomial of `degree` through `(t, y)`, evaluated at `at`.
///
/// Time is centered and scaled to about `[−1, 1]` before building the
/// Vandermonde system, which is then solved by SVD.
pub fn polyfit_extrapolate(ts: &[f64], ys: &[f64], degree: usize, at: &[f64]) -> Result<Vec<f64>> {
    let n = ts.len();
    if n != ys.len() {
        return Err(StnetError::dim("polyfit", (n, 1), (ys.len(), 1)));
    }
    if n < degree + 1 {
        return Err(StnetError::Size(format!(
            "degree {degree} fit needs at least {} points, have {n}",
            degree + 1
        )));
    }
    let lo = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let center = 0.5 * (lo + hi);
    let half = (0.5 * (hi - lo)).max(1.0);
    let u = |t: f64| (t - center) / half;

    let a = DMatrix::from_fn(n, degree + 1, |i, k| u(ts[i]).powi(k as i32));
    let b = DVector::from_column_slice(ys);
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| StnetError::State(format!("least squares failed: {e}")))?;
    Ok(at
        .iter()
        .map(|&t| {
            let x = u(t);
            coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
        })
        .collect())
}

/// Per-depth polynomial in the time index, extrapolated `horizon` steps.
pub fn baseline_pf(history: &SspDataset, degree: usize, horizon: usize) -> Result<SspDataset> {
    if horizon == 0 {
        return Err(StnetError::Config("horizon must be >= 1".into()));
    }
    let m = history.len();
    let ts: Vec<f64> = (0..m).map(|t| t as f64).collect();
    let at: Vec<f64> = (m..m + horizon).map(|t| t as f64).collect();
    let mut rows = vec![vec![0.0; history.depth_count()]; horizon];
    for d in 0..history.depth_count() {
        let pred = polyfit_extrapolate(&ts, &history.layer_series(d), degree, &at)?;
        for (row, v) in rows.iter_mut().zip(pred) {
            row[d] = v;
        }
    }
    forecast_dataset(history, rows, &format!("pf degree {degree}"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: 128,
            epochs: 300,
            batch_size: 32,
            learning_rate: 0.001,
            seed: 0,
        }
    }
}

/// `Z → hidden (ReLU) → Z` map from one normalized profile to the next.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    w1: Matrix,
    b1: Matrix,
    w2: Matrix,
    b2: Matrix,
    pub norm: NormStats,
}

impl Mlp {
    fn tensors(&self) -> Vec<&Matrix> {
        vec![&self.w1, &self.b1, &self.w2, &self.b2]
    }

    fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        vec![&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    fn forward(&self, x: &Matrix) -> Result<(Matrix, Matrix, Matrix)> {
        let pre = affine(x, &self.w1, &self.b1)?;
        let hidden = relu(&pre);
        let out = affine(&hidden, &self.w2, &self.b2)?;
        Ok((pre, hidden, out))
    }

    /// Next profile (m/s) from the current one (m/s).
    pub fn predict(&self, speeds: &[f64]) -> Result<Vec<f64>> {
        let x = Matrix::row_vector(&self.norm.normalize(speeds));
        let (_, _, y) = self.forward(&x)?;
        Ok(self.norm.denormalize(y.as_slice()))
    }
}

#[derive(Clone, Debug)]
pub struct MlpOutcome {
    pub model: Mlp,
    /// Mean training RMSE per epoch, normalized units.
    pub losses: Vec<f64>,
    pub seconds: f64,
}

/// Fits the perceptron on consecutive profile pairs of `history` (m/s).
pub fn train_mlp(history: &SspDataset, config: &MlpConfig) -> Result<MlpOutcome> {
    let started = Instant::now();
    if history.len() < 2 {
        return Err(StnetError::Size("MLP needs at least one (profile, next) pair".into()));
    }
    if config.hidden == 0 || config.epochs == 0 || config.batch_size == 0 || !(config.learning_rate > 0.0) {
        return Err(StnetError::Config(format!("invalid MLP configuration {config:?}")));
    }
    let z = history.depth_count();
    let norm = NormStats::fit(history);
    let rows: Vec<Vec<f64>> = history.profiles().iter().map(|p| norm.normalize(&p.speeds)).collect();

    let mut rng = Rng::new(config.seed);
    let mut model = Mlp {
        w1: xavier_uniform(z, config.hidden, &mut rng),
        b1: Matrix::zeros(1, config.hidden),
        w2: xavier_uniform(config.hidden, z, &mut rng),
        b2: Matrix::zeros(1, z),
        norm,
    };
    let mut adam = Adam::for_tensors(&model.tensors());
    let mut order: Vec<usize> = (0..rows.len() - 1).collect();
    let mut losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        Rng::derive(config.seed, &[epoch as u64, u64::MAX]).shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grads: Vec<Matrix> = model
                .tensors()
                .iter()
                .map(|t| Matrix::zeros(t.rows(), t.cols()))
                .collect();
            for &i in batch {
                let x = Matrix::row_vector(&rows[i]);
                let (pre, hidden, out) = model.forward(&x)?;
                let (loss, dl) = rmse_with_grad(out.as_slice(), &rows[i + 1])?;
                epoch_loss += loss;
                let (dh, dw2, db2) = affine_backward(&hidden, &model.w2, &Matrix::row_vector(&dl))?;
                let dpre = relu_backward(&pre, &dh);
                let (_, dw1, db1) = affine_backward(&x, &model.w1, &dpre)?;
                for (g, d) in grads.iter_mut().zip([dw1, db1, dw2, db2]) {
                    g.add_assign(&d.scale(1.0 / batch.len() as f64))?;
                }
            }
            adam.step(model.tensors_mut(), grads.iter().collect(), config.learning_rate)?;
        }
        losses.push(epoch_loss / order.len() as f64);
    }
    Ok(MlpOutcome {
        model,
        losses,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Autoregressive forecast with a trained perceptron.
pub fn mlp_rollout(model: &Mlp, history: &SspDataset, horizon: usize) -> Result<SspDataset> {
    if horizon == 0 {
        return Err(StnetError::Config("horizon must be >= 1".into()));
    }
    let mut current = history.profiles()[history.len() - 1].speeds.clone();
    let mut rows = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        current = model.predict(&current)?;
        rows.push(current.clone());
    }
    forecast_dataset(history, rows, "mlp")
}

/// Trains on `history` and forecasts `horizon` steps.
pub fn baseline_mlp(history: &SspDataset, config: &MlpConfig, horizon: usize) -> Result<(SspDataset, MlpOutcome)> {
    let outcome = train_mlp(history, config)?;
    let forecast = mlp_rollout(&outcome.model, history, horizon)?;
    Ok((forecast, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DepthGrid, Timestamp};

    fn series(values: &[Vec<f64>]) -> SspDataset {
        let z = values[0].len();
        let grid = DepthGrid::custom((0..z).map(|d| d as f64 * 10.0).collect()).unwrap();
        let profiles = values
            .iter()
            .enumerate()
            .map(|(t, v)| SspProfile {
                timestamp: Timestamp::from_month_ordinal(24_000 + t as i64),
                speeds: v.clone(),
            })
            .collect();
        SspDataset::new(grid, profiles, "").unwrap()
    }

    #[test]
    fn persistence_repeats_last() {
        let ds = series(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let f = baseline_persistence(&ds, 12).unwrap();
        assert_eq!(f.len(), 12);
        assert!(f.profiles().iter().all(|p| p.speeds == vec![3.0, 4.0]));
        assert_eq!(f.profiles()[0].timestamp, ds.next_timestamp(1));
    }

    #[test]
    fn pf_constant_series() {
        let ds = series(&vec![vec![1500.0, 1480.0]; 10]);
        for degree in 0..4 {
            let f = baseline_pf(&ds, degree, 3).unwrap();
            for p in f.profiles() {
                assert!((p.speeds[0] - 1500.0).abs() < 1e-9);
                assert!((p.speeds[1] - 1480.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pf_reproduces_linear() {
        let ds = series(&(0..8).map(|t| vec![2.0 * t as f64 + 1.0]).collect::<Vec<_>>());
        let f = baseline_pf(&ds, 1, 2).unwrap();
        assert!((f.profiles()[0].speeds[0] - 17.0).abs() < 1e-9);
        assert!((f.profiles()[1].speeds[0] - 19.0).abs() < 1e-9);
    }

    #[test]
    fn pf_quadratic_extrapolation() {
        let ts: Vec<f64> = (0..10).map(|t| t as f64).collect();
        let ys: Vec<f64> = ts.iter().map(|t| t * t).collect();
        let p = polyfit_extrapolate(&ts, &ys, 2, &[10.0]).unwrap();
        assert!((p[0] - 100.0).abs() < 1e-6, "{}", p[0]);
    }

    #[test]
    fn pf_underdetermined() {
        let ds = series(&[vec![1.0], vec![2.0], vec![3.0]]);
        assert!(matches!(baseline_pf(&ds, 3, 1), Err(StnetError::Size(_))));
    }

    #[test]
    fn mlp_is_seeded() {
        let ds = series(
            &(0..20)
                .map(|t| vec![(t as f64).sin(), (t as f64 * 0.5).cos()])
                .collect::<Vec<_>>(),
        );
        let cfg = MlpConfig {
            hidden: 8,
            epochs: 20,
            ..MlpConfig::default()
        };
        let (a, oa) = baseline_mlp(&ds, &cfg, 3).unwrap();
        let (b, ob) = baseline_mlp(&ds, &cfg, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(oa.losses, ob.losses);
    }

    #[test]
    fn mlp_needs_a_pair() {
        let ds = series(&[vec![1.0]]);
        assert!(matches!(
            train_mlp(&ds, &MlpConfig::default()),
            Err(StnetError::Size(_))
        ));
    }
}
