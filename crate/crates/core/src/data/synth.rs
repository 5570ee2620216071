//! Seasonal synthetic profiles with a known generating law.
//!
//! `s(d, t) = base(d) + A(d)·sin(2πt/P + φ(d)) + trend·t + ε`, where
//! `A(d) = amplitude·exp(−d/amplitude_decay_m)`, `φ(d) = −phase_lag·d/1000`,
//! `base` is a canonical deep-sound-channel profile and `ε ~ N(0, σ²)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::data::{DepthGrid, GridScheme, SspDataset, SspProfile, Timestamp};
use crate::error::{Result, StnetError};
use crate::numeric::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Seasonal amplitude at the surface, m/s.
    pub amplitude: f64,
    /// e-folding depth of the seasonal amplitude, m.
    pub amplitude_decay_m: f64,
    /// Phase lag of the seasonal cycle per km of depth, radians.
    pub phase_lag_per_km: f64,
    /// Period of the seasonal cycle in months.
    pub period_months: f64,
    /// Linear drift, m/s per month.
    pub trend: f64,
    /// Standard deviation of the additive noise, m/s.
    pub noise_std: f64,
    pub months: usize,
    pub grid: GridScheme,
    pub start_year: i32,
    pub start_month: u32,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            amplitude: 5.0,
            amplitude_decay_m: 600.0,
            phase_lag_per_km: 1.0,
            period_months: 12.0,
            trend: 0.002,
            noise_std: 0.2,
            months: 120,
            grid: GridScheme::Argo58,
            start_year: 2013,
            start_month: 1,
            seed: 0,
        }
    }
}

/// Munk-type sound channel profile with its axis at 1300 m, m/s.
pub fn munk_profile(depth: f64) -> f64 {
    let eta = 2.0 * (depth - 1300.0) / 1300.0;
    1500.0 * (1.0 + 0.00737 * (eta - 1.0 + (-eta).exp()))
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.months < 24 {
            return Err(StnetError::Config(format!(
                "synthetic series needs at least 24 months, got {}",
                self.months
            )));
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(StnetError::Config(format!("noise std must be >= 0, got {}", self.noise_std)));
        }
        if !(self.period_months > 0.0) || !(self.amplitude_decay_m > 0.0) {
            return Err(StnetError::Config("period and amplitude decay must be > 0".into()));
        }
        if self.grid == GridScheme::Custom {
            return Err(StnetError::Config("synthetic data needs argo58 or uniform36".into()));
        }
        if ![self.amplitude, self.phase_lag_per_km, self.trend].iter().all(|v| v.is_finite()) {
            return Err(StnetError::Config("synthetic parameters must be finite".into()));
        }
        Timestamp::month(self.start_year, self.start_month)?;
        Ok(())
    }

    /// Noise-free value at depth `d` and month index `t`.
    pub fn clean_value(&self, depth: f64, t: usize) -> f64 {
        let amp = self.amplitude * (-depth / self.amplitude_decay_m).exp();
        let phase = -self.phase_lag_per_km * depth / 1000.0;
        munk_profile(depth) + amp * (2.0 * PI * t as f64 / self.period_months + phase).sin() + self.trend * t as f64
    }

    pub fn generate(&self) -> Result<SspDataset> {
        self.validate()?;
        let grid = DepthGrid::from_scheme(self.grid)?;
        let start = Timestamp::month(self.start_year, self.start_month)?
            .month_ordinal()
            .expect("monthly timestamp");
        let mut rng = Rng::new(self.seed);
        let profiles = (0..self.months)
            .map(|t| SspProfile {
                timestamp: Timestamp::from_month_ordinal(start + t as i64),
                speeds: grid
                    .depths()
                    .iter()
                    .map(|&d| self.clean_value(d, t) + self.noise_std * rng.normal())
                    .collect(),
            })
            .collect();
        let mut ds = SspDataset::new(grid, profiles, "synthetic")?;
        ds.provenance = format!("synthetic seed {}", self.seed);
        Ok(ds)
    }
}
