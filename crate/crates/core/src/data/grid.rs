use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StnetError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScheme {
    /// 58 banded layers from 0 to 1975 m.
    Argo58,
    /// 36 layers every 100 m from 0 to 3500 m.
    Uniform36,
    Custom,
}

impl fmt::Display for GridScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridScheme::Argo58 => "argo58",
            GridScheme::Uniform36 => "uniform36",
            GridScheme::Custom => "custom",
        })
    }
}

impl FromStr for GridScheme {
    type Err = StnetError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "argo58" => Ok(GridScheme::Argo58),
            "uniform36" => Ok(GridScheme::Uniform36),
            "custom" => Ok(GridScheme::Custom),
            other => Err(StnetError::Config(format!(
                "unknown grid scheme '{other}' (expected argo58|uniform36|custom)"
            ))),
        }
    }
}

/// Strictly increasing, non-negative depths in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthGrid {
    depths: Vec<f64>,
    scheme: GridScheme,
}

impl DepthGrid {
    pub fn custom(depths: Vec<f64>) -> Result<Self> {
        validate_depths(&depths)?;
        Ok(DepthGrid {
            depths,
            scheme: GridScheme::Custom,
        })
    }

    /// Builds a grid from depths, tagging it with a standard scheme when
    /// the depths match one exactly.
    pub fn detect(depths: Vec<f64>) -> Result<Self> {
        validate_depths(&depths)?;
        let scheme = if depths == argo_grid().depths {
            GridScheme::Argo58
        } else if depths == uniform_grid().depths {
            GridScheme::Uniform36
        } else {
            GridScheme::Custom
        };
        Ok(DepthGrid { depths, scheme })
    }

    pub fn from_scheme(scheme: GridScheme) -> Result<Self> {
        match scheme {
            GridScheme::Argo58 => Ok(argo_grid()),
            GridScheme::Uniform36 => Ok(uniform_grid()),
            GridScheme::Custom => Err(StnetError::Config(
                "a custom grid needs explicit depths".into(),
            )),
        }
    }

    pub fn depths(&self) -> &[f64] {
        &self.depths
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.depths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depths.is_empty()
    }

    pub fn min_depth(&self) -> f64 {
        self.depths[0]
    }

    pub fn max_depth(&self) -> f64 {
        self.depths[self.depths.len() - 1]
    }
}

fn validate_depths(depths: &[f64]) -> Result<()> {
    if depths.is_empty() {
        return Err(StnetError::Config("depth grid is empty".into()));
    }
    if let Some(d) = depths.iter().find(|d| !d.is_finite() || **d < 0.0) {
        return Err(StnetError::Config(format!("invalid depth {d}")));
    }
    if let Some(w) = depths.windows(2).find(|w| w[1] <= w[0]) {
        return Err(StnetError::Config(format!(
            "depths not strictly increasing: {} then {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// The 58-layer banded Argo stratification:
/// 0–10 m every 5 m, to 180 m every 10 m, to 460 m every 20 m,
/// 500–1250 m every 50 m, 1300–1900 m every 100 m, and one deep layer at 1975 m.
pub fn argo_grid() -> DepthGrid {
    let bands: [(u32, u32, u32); 5] = [
        (0, 10, 5),
        (20, 180, 10),
        (200, 460, 20),
        (500, 1250, 50),
        (1300, 1900, 100),
    ];
    let mut depths: Vec<f64> = bands
        .iter()
        .flat_map(|&(start, end, step)| (start..=end).step_by(step as usize))
        .map(f64::from)
        .collect();
    depths.push(1975.0);
    DepthGrid {
        depths,
        scheme: GridScheme::Argo58,
    }
}

/// 36 layers at 0, 100, …, 3500 m.
pub fn uniform_grid() -> DepthGrid {
    DepthGrid {
        depths: (0..36).map(|k| 100.0 * k as f64).collect(),
        scheme: GridScheme::Uniform36,
    }
}
