use crate::data::{DepthGrid, SspDataset, SspProfile, Timestamp};
use crate::error::{Result, StnetError};

/// Linear interpolation of `(xs, ys)` at `x`; `None` outside `[xs₀, xsₙ]`.
/// `xs` must be strictly increasing.
pub fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let n = xs.len();
    if n == 0 || x < xs[0] || x > xs[n - 1] {
        return None;
    }
    let hi = xs.partition_point(|&v| v < x);
    if hi < n && xs[hi] == x {
        return Some(ys[hi]);
    }
    let lo = hi - 1;
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    Some(ys[lo] + t * (ys[hi] - ys[lo]))
}

/// Resamples a raw `(depth, speed)` cast onto `grid` by linear interpolation.
/// Never extrapolates: the raw cast must span the whole grid.
pub fn resample_profile(
    raw: &[(f64, f64)],
    grid: &DepthGrid,
    timestamp: Timestamp,
) -> Result<SspProfile> {
    if raw.is_empty() {
        return Err(StnetError::Coverage("raw profile is empty".into()));
    }
    if let Some(w) = raw.windows(2).find(|w| w[1].0 <= w[0].0) {
        return Err(StnetError::Config(format!(
            "raw depths not strictly increasing: {} then {}",
            w[0].0, w[1].0
        )));
    }
    let xs: Vec<f64> = raw.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = raw.iter().map(|p| p.1).collect();
    let (raw_min, raw_max) = (xs[0], xs[xs.len() - 1]);
    if raw_min > grid.min_depth() {
        return Err(StnetError::Coverage(format!(
            "raw profile starts at {raw_min} m, grid needs {} m",
            grid.min_depth()
        )));
    }
    if raw_max < grid.max_depth() {
        return Err(StnetError::Coverage(format!(
            "raw profile ends at {raw_max} m, grid needs {} m (gap {raw_max}-{} m)",
            grid.max_depth(),
            grid.max_depth()
        )));
    }
    let speeds = grid
        .depths()
        .iter()
        .map(|&d| interp_linear(&xs, &ys, d).expect("grid inside raw span"))
        .collect();
    Ok(SspProfile { timestamp, speeds })
}

/// Uniform depths `k·spacing` lying within `[min, max]`.
fn uniform_depths(min: f64, max: f64, spacing: f64) -> Vec<f64> {
    let first = (min / spacing - 1e-9).ceil() as i64;
    let last = (max / spacing + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * spacing).collect()
}

/// Interpolates one profile onto a uniform grid of `spacing` meters.
pub fn interpolate_full_depth(
    grid: &DepthGrid,
    profile: &SspProfile,
    spacing: f64,
) -> Result<(DepthGrid, SspProfile)> {
    if !(spacing > 0.0) {
        return Err(StnetError::Config(format!("spacing must be > 0, got {spacing}")));
    }
    if grid.len() < 2 {
        return Err(StnetError::Size("need at least 2 depths to interpolate".into()));
    }
    if profile.speeds.len() != grid.len() {
        return Err(StnetError::dim(
            "interpolate_full_depth",
            (1, profile.speeds.len()),
            (1, grid.len()),
        ));
    }
    let depths = uniform_depths(grid.min_depth(), grid.max_depth(), spacing);
    let speeds = depths
        .iter()
        .map(|&d| interp_linear(grid.depths(), &profile.speeds, d).expect("within span"))
        .collect();
    Ok((
        DepthGrid::custom(depths)?,
        SspProfile {
            timestamp: profile.timestamp.clone(),
            speeds,
        },
    ))
}

impl SspDataset {
    /// Every profile interpolated onto a uniform `spacing`-meter grid.
    pub fn interpolate_full_depth(&self, spacing: f64) -> Result<SspDataset> {
        let mut grid = None;
        let mut profiles = Vec::with_capacity(self.len());
        for p in self.profiles() {
            let (g, q) = interpolate_full_depth(self.grid(), p, spacing)?;
            grid.get_or_insert(g);
            profiles.push(q);
        }
        let mut out = SspDataset::new(grid.expect("non-empty"), profiles, self.region.clone())?;
        out.provenance = self.provenance.clone();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::argo_grid;

    fn t0() -> Timestamp {
        Timestamp::month(2020, 1).unwrap()
    }

    #[test]
    fn identity_resample() {
        let grid = DepthGrid::custom(vec![0.0, 10.0, 30.0]).unwrap();
        let raw = [(0.0, 1500.0), (10.0, 1498.0), (30.0, 1490.5)];
        let p = resample_profile(&raw, &grid, t0()).unwrap();
        assert_eq!(p.speeds, vec![1500.0, 1498.0, 1490.5]);
    }

    #[test]
    fn midpoint_resample() {
        let grid = DepthGrid::custom(vec![5.0]).unwrap();
        let p = resample_profile(&[(0.0, 1500.0), (10.0, 1510.0)], &grid, t0()).unwrap();
        assert_eq!(p.speeds, vec![1505.0]);
    }

    #[test]
    fn short_cast_is_coverage_error() {
        let raw: Vec<(f64, f64)> = (0..=19).map(|k| (k as f64 * 100.0, 1500.0)).collect();
        let err = resample_profile(&raw, &argo_grid(), t0()).unwrap_err();
        assert!(matches!(err, StnetError::Coverage(_)), "{err}");
        assert!(err.to_string().contains("1900"));
    }

    #[test]
    fn argo_profile_to_one_meter() {
        let grid = argo_grid();
        let p = SspProfile {
            timestamp: t0(),
            speeds: grid.depths().iter().map(|d| 1500.0 - d * 0.01).collect(),
        };
        let (g, q) = interpolate_full_depth(&grid, &p, 1.0).unwrap();
        assert_eq!(g.len(), 1976);
        assert_eq!(q.speeds.len(), 1976);
        assert!((q.speeds[7] - (1500.0 - 0.07)).abs() < 1e-9);
    }

    #[test]
    fn native_spacing_preserves_values() {
        let grid = DepthGrid::custom(vec![0.0, 100.0, 200.0]).unwrap();
        let p = SspProfile {
            timestamp: t0(),
            speeds: vec![1520.0, 1500.0, 1490.0],
        };
        let (g, q) = interpolate_full_depth(&grid, &p, 100.0).unwrap();
        assert_eq!(g.depths(), grid.depths());
        assert_eq!(q.speeds, p.speeds);
    }

    #[test]
    fn two_point_midpoint() {
        let grid = DepthGrid::custom(vec![0.0, 100.0]).unwrap();
        let p = SspProfile {
            timestamp: t0(),
            speeds: vec![1500.0, 1520.0],
        };
        let (g, q) = interpolate_full_depth(&grid, &p, 50.0).unwrap();
        assert_eq!(g.depths(), &[0.0, 50.0, 100.0]);
        assert_eq!(q.speeds[1], 1510.0);
    }

    #[test]
    fn single_depth_is_size_error() {
        let grid = DepthGrid::custom(vec![0.0]).unwrap();
        let p = SspProfile {
            timestamp: t0(),
            speeds: vec![1500.0],
        };
        assert!(matches!(
            interpolate_full_depth(&grid, &p, 1.0),
            Err(StnetError::Size(_))
        ));
    }
}
