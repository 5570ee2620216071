use serde::{Deserialize, Serialize};

use crate::data::SspDataset;
use crate::error::{Result, StnetError};

/// Smallest per-depth standard deviation used for scaling.
pub const STD_FLOOR: f64 = 1e-6;

/// Per-depth z-score statistics fitted on training profiles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    pub fn fit(ds: &SspDataset) -> NormStats {
        let z = ds.depth_count();
        let m = ds.len() as f64;
        let mut mean = vec![0.0; z];
        for p in ds.profiles() {
            for (acc, v) in mean.iter_mut().zip(&p.speeds) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m);
        let mut var = vec![0.0; z];
        for p in ds.profiles() {
            for d in 0..z {
                var[d] += (p.speeds[d] - mean[d]).powi(2);
            }
        }
        let mut floored = 0;
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / m).sqrt();
                if s < STD_FLOOR {
                    floored += 1;
                    STD_FLOOR
                } else {
                    s
                }
            })
            .collect();
        if floored > 0 {
            log::warn!("{floored} depth layers have ~zero variance; std floored at {STD_FLOOR}");
        }
        NormStats { mean, std }
    }

    pub fn depth_count(&self) -> usize {
        self.mean.len()
    }

    pub fn normalize(&self, speeds: &[f64]) -> Vec<f64> {
        speeds
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn denormalize(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }

    pub fn apply(&self, ds: &SspDataset) -> Result<SspDataset> {
        self.check(ds)?;
        ds.with_speeds(ds.profiles().iter().map(|p| self.normalize(&p.speeds)).collect())
    }

    pub fn invert(&self, ds: &SspDataset) -> Result<SspDataset> {
        self.check(ds)?;
        ds.with_speeds(ds.profiles().iter().map(|p| self.denormalize(&p.speeds)).collect())
    }

    fn check(&self, ds: &SspDataset) -> Result<()> {
        if ds.depth_count() != self.depth_count() {
            return Err(StnetError::dim(
                "norm stats vs dataset",
                (1, self.depth_count()),
                (ds.len(), ds.depth_count()),
            ));
        }
        Ok(())
    }
}

pub fn fit_norm(ds: &SspDataset) -> NormStats {
    NormStats::fit(ds)
}

pub fn apply_norm(ds: &SspDataset, stats: &NormStats) -> Result<SspDataset> {
    stats.apply(ds)
}

pub fn invert_norm(ds: &SspDataset, stats: &NormStats) -> Result<SspDataset> {
    stats.invert(ds)
}
