use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, SecondsFormat};
use serde::{Deserialize, Serialize};

use crate::data::DepthGrid;
use crate::error::{Result, StnetError};

/// Either a calendar month (`YYYY-MM`) or an RFC 3339 instant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Timestamp {
    Month { year: i32, month: u32 },
    Instant(DateTime<FixedOffset>),
}

impl Timestamp {
    pub fn month(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(StnetError::Config(format!("month {month} out of range")));
        }
        Ok(Timestamp::Month { year, month })
    }

    /// Months since year 0 for monthly stamps.
    pub fn month_ordinal(&self) -> Option<i64> {
        match self {
            Timestamp::Month { year, month } => Some(*year as i64 * 12 + (*month as i64 - 1)),
            Timestamp::Instant(_) => None,
        }
    }

    pub fn from_month_ordinal(ordinal: i64) -> Self {
        Timestamp::Month {
            year: ordinal.div_euclid(12) as i32,
            month: ordinal.rem_euclid(12) as u32 + 1,
        }
    }

    pub fn is_monthly(&self) -> bool {
        matches!(self, Timestamp::Month { .. })
    }

    fn cmp_same_kind(&self, other: &Timestamp) -> Option<Ordering> {
        match (self, other) {
            (Timestamp::Month { .. }, Timestamp::Month { .. }) => {
                Some(self.month_ordinal().cmp(&other.month_ordinal()))
            }
            (Timestamp::Instant(a), Timestamp::Instant(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

impl PartialOrd for Timestamp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.cmp_same_kind(other)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Timestamp::Month { year, month } => write!(f, "{year:04}-{month:02}"),
            Timestamp::Instant(t) => f.write_str(&t.to_rfc3339_opts(SecondsFormat::AutoSi, true)),
        }
    }
}

impl FromStr for Timestamp {
    type Err = StnetError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() == 7 && s.as_bytes()[4] == b'-' {
            let year: i32 = s[..4]
                .parse()
                .map_err(|_| StnetError::Config(format!("bad year in '{s}'")))?;
            let month: u32 = s[5..]
                .parse()
                .map_err(|_| StnetError::Config(format!("bad month in '{s}'")))?;
            return Timestamp::month(year, month);
        }
        DateTime::parse_from_rfc3339(s)
            .map(Timestamp::Instant)
            .map_err(|e| StnetError::Config(format!("bad timestamp '{s}': {e}")))
    }
}

impl Serialize for Timestamp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One sound speed profile on a shared depth grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SspProfile {
    pub timestamp: Timestamp,
    /// m/s, one per grid depth.
    pub speeds: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resolution {
    Monthly,
    Irregular,
}

/// Chronologically ordered profiles sharing one depth grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SspDataset {
    grid: DepthGrid,
    profiles: Vec<SspProfile>,
    pub region: String,
    pub provenance: String,
    /// Ordinal of the first profile within the series it was cut from.
    /// Only used for the time code of irregular data.
    start_index: usize,
}

impl SspDataset {
    pub fn new(grid: DepthGrid, profiles: Vec<SspProfile>, region: impl Into<String>) -> Result<Self> {
        if profiles.is_empty() {
            return Err(StnetError::Size("dataset has no profiles".into()));
        }
        for (k, p) in profiles.iter().enumerate() {
            if p.speeds.len() != grid.len() {
                return Err(StnetError::dim(
                    "profile vs grid",
                    (k, p.speeds.len()),
                    (k, grid.len()),
                ));
            }
        }
        let monthly = profiles[0].timestamp.is_monthly();
        for w in profiles.windows(2) {
            if w[1].timestamp.is_monthly() != monthly {
                return Err(StnetError::Config(
                    "dataset mixes monthly and instant timestamps".into(),
                ));
            }
            if w[0].timestamp.partial_cmp(&w[1].timestamp) != Some(Ordering::Less) {
                return Err(StnetError::Config(format!(
                    "timestamps not strictly increasing: {} then {}",
                    w[0].timestamp, w[1].timestamp
                )));
            }
        }
        Ok(SspDataset {
            grid,
            profiles,
            region: region.into(),
            provenance: String::new(),
            start_index: 0,
        })
    }

    pub fn grid(&self) -> &DepthGrid {
        &self.grid
    }

    pub fn profiles(&self) -> &[SspProfile] {
        &self.profiles
    }

    /// Number of profiles (M).
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Number of depth layers (Z).
    pub fn depth_count(&self) -> usize {
        self.grid.len()
    }

    pub fn resolution(&self) -> Resolution {
        if self.profiles[0].timestamp.is_monthly() {
            Resolution::Monthly
        } else {
            Resolution::Irregular
        }
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    /// Index fed to the time code for profile `k`.
    ///
    /// Monthly data use the calendar month ordinal, so `index % 12` is the
    /// month of year and stays consistent across splits and truncations.
    /// Irregular data fall back to the sample ordinal.
    pub fn time_index(&self, k: usize) -> u64 {
        match self.profiles[k].timestamp.month_ordinal() {
            Some(o) => o.rem_euclid(12 * 10_000) as u64,
            None => (self.start_index + k) as u64,
        }
    }

    /// Time index one step past the last profile.
    pub fn next_time_index(&self, steps_ahead: usize) -> u64 {
        let last = self.len() - 1;
        match self.profiles[last].timestamp.month_ordinal() {
            Some(o) => (o + steps_ahead as i64).rem_euclid(12 * 10_000) as u64,
            None => (self.start_index + last + steps_ahead) as u64,
        }
    }

    /// Timestamp `steps_ahead` past the last profile: the following months
    /// for monthly data, the mean sampling interval for irregular data.
    pub fn next_timestamp(&self, steps_ahead: usize) -> Timestamp {
        let last = &self.profiles[self.len() - 1].timestamp;
        match last {
            Timestamp::Month { .. } => {
                Timestamp::from_month_ordinal(last.month_ordinal().unwrap() + steps_ahead as i64)
            }
            Timestamp::Instant(t) => {
                let step = match (&self.profiles[0].timestamp, self.len()) {
                    (Timestamp::Instant(first), n) if n >= 2 => {
                        (*t - *first) / (n as i32 - 1)
                    }
                    _ => chrono::Duration::hours(1),
                };
                Timestamp::Instant(*t + step * steps_ahead as i32)
            }
        }
    }

    /// Speeds as a `M × Z` row-per-profile table.
    pub fn speed_rows(&self) -> Vec<&[f64]> {
        self.profiles.iter().map(|p| p.speeds.as_slice()).collect()
    }

    /// Series of one depth layer over time.
    pub fn layer_series(&self, depth_idx: usize) -> Vec<f64> {
        self.profiles.iter().map(|p| p.speeds[depth_idx]).collect()
    }

    /// Profiles `range`, keeping grid and metadata.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<SspDataset> {
        if range.start >= range.end || range.end > self.len() {
            return Err(StnetError::Size(format!(
                "slice {}..{} outside dataset of {} profiles",
                range.start,
                range.end,
                self.len()
            )));
        }
        Ok(SspDataset {
            grid: self.grid.clone(),
            profiles: self.profiles[range.clone()].to_vec(),
            region: self.region.clone(),
            provenance: self.provenance.clone(),
            start_index: self.start_index + range.start,
        })
    }

    /// Same metadata and timestamps, new speeds.
    pub fn with_speeds(&self, rows: Vec<Vec<f64>>) -> Result<SspDataset> {
        if rows.len() != self.len() {
            return Err(StnetError::dim("with_speeds", (rows.len(), 0), (self.len(), 0)));
        }
        let profiles = self
            .profiles
            .iter()
            .zip(rows)
            .map(|(p, speeds)| SspProfile {
                timestamp: p.timestamp.clone(),
                speeds,
            })
            .collect();
        let mut out = SspDataset::new(self.grid.clone(), profiles, self.region.clone())?;
        out.provenance = self.provenance.clone();
        out.start_index = self.start_index;
        Ok(out)
    }

    /// Appends `other` (same grid, later timestamps).
    pub fn concat(&self, other: &SspDataset) -> Result<SspDataset> {
        if self.grid.depths() != other.grid.depths() {
            return Err(StnetError::Config("cannot concatenate datasets on different grids".into()));
        }
        let mut profiles = self.profiles.clone();
        profiles.extend(other.profiles.iter().cloned());
        let mut out = SspDataset::new(self.grid.clone(), profiles, self.region.clone())?;
        out.provenance = self.provenance.clone();
        out.start_index = self.start_index;
        Ok(out)
    }
}

/// First `⌊M·train_fraction⌋` profiles for training, the rest for testing.
pub fn split_chronological(ds: &SspDataset, train_fraction: f64) -> Result<(SspDataset, SspDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(StnetError::Config(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let m = ds.len();
    if m < 2 {
        return Err(StnetError::Size(format!("need at least 2 profiles to split, have {m}")));
    }
    // tolerate representation error, e.g. 14 · (13/14)
    let n_train = (m as f64 * train_fraction + 1e-9).floor() as usize;
    if n_train == 0 || n_train >= m {
        return Err(StnetError::Size(format!(
            "fraction {train_fraction} of {m} profiles leaves an empty split"
        )));
    }
    Ok((ds.slice(0..n_train)?, ds.slice(n_train..m)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::argo_grid;

    pub(crate) fn monthly(m: usize, z: usize) -> SspDataset {
        let grid = DepthGrid::custom((0..z).map(|k| 10.0 * k as f64).collect()).unwrap();
        let profiles = (0..m)
            .map(|t| SspProfile {
                timestamp: Timestamp::from_month_ordinal(2013 * 12 + t as i64),
                speeds: (0..z).map(|d| 1500.0 + t as f64 + d as f64 * 0.1).collect(),
            })
            .collect();
        SspDataset::new(grid, profiles, "test").unwrap()
    }

    #[test]
    fn timestamps_parse_and_print() {
        let t: Timestamp = "2013-01".parse().unwrap();
        assert_eq!(t, Timestamp::Month { year: 2013, month: 1 });
        assert_eq!(t.to_string(), "2013-01");
        let i: Timestamp = "2023-04-12T08:00:00Z".parse().unwrap();
        assert_eq!(i.to_string(), "2023-04-12T08:00:00Z");
        let o: Timestamp = "2023-04-12T08:00:00+08:00".parse().unwrap();
        assert_eq!(o.to_string(), "2023-04-12T08:00:00+08:00");
        assert!("2013-13".parse::<Timestamp>().is_err());
        assert!("yesterday".parse::<Timestamp>().is_err());
    }

    #[test]
    fn month_ordinal_round_trip() {
        for o in [0i64, 11, 12, 2013 * 12 + 5, 2022 * 12 + 11] {
            assert_eq!(Timestamp::from_month_ordinal(o).month_ordinal(), Some(o));
        }
    }

    #[test]
    fn split_120_is_96_24() {
        let ds = monthly(120, 3);
        let (tr, te) = split_chronological(&ds, 0.8).unwrap();
        assert_eq!((tr.len(), te.len()), (96, 24));
        assert!(tr.profiles().last().unwrap().timestamp < te.profiles()[0].timestamp);
    }

    #[test]
    fn split_14_leaves_one() {
        let ds = monthly(14, 3);
        let (tr, te) = split_chronological(&ds, 13.0 / 14.0).unwrap();
        assert_eq!((tr.len(), te.len()), (13, 1));
    }

    #[test]
    fn split_two() {
        let ds = monthly(2, 3);
        let (tr, te) = split_chronological(&ds, 0.5).unwrap();
        assert_eq!((tr.len(), te.len()), (1, 1));
        assert_eq!(te.start_index(), 1);
    }

    #[test]
    fn split_errors() {
        assert!(matches!(
            split_chronological(&monthly(1, 3), 0.5),
            Err(StnetError::Size(_))
        ));
        assert!(split_chronological(&monthly(10, 3), 1.0).is_err());
        assert!(split_chronological(&monthly(10, 3), 0.05).is_err());
    }

    #[test]
    fn unsorted_or_duplicate_rejected() {
        let grid = argo_grid();
        let p = |m| SspProfile {
            timestamp: Timestamp::month(2020, m).unwrap(),
            speeds: vec![1500.0; 58],
        };
        assert!(SspDataset::new(grid.clone(), vec![p(2), p(1)], "x").is_err());
        assert!(SspDataset::new(grid.clone(), vec![p(1), p(1)], "x").is_err());
        assert!(SspDataset::new(grid, vec![p(1), p(2)], "x").is_ok());
    }

    #[test]
    fn time_index_follows_calendar() {
        let ds = monthly(30, 2);
        assert_eq!(ds.time_index(0) % 12, 0);
        assert_eq!(ds.time_index(13) % 12, 1);
        assert_eq!(ds.next_time_index(1) % 12, ds.time_index(29) % 12 + 1);
        assert_eq!(ds.next_timestamp(1).to_string(), "2015-07");
    }

    #[test]
    fn irregular_next_timestamp_uses_mean_interval() {
        let grid = DepthGrid::custom(vec![0.0, 100.0]).unwrap();
        let profiles = ["2023-04-12T00:00:00Z", "2023-04-12T02:00:00Z", "2023-04-12T04:00:00Z"]
            .iter()
            .map(|s| SspProfile {
                timestamp: s.parse().unwrap(),
                speeds: vec![1500.0, 1490.0],
            })
            .collect();
        let ds = SspDataset::new(grid, profiles, "scs").unwrap();
        assert_eq!(ds.resolution(), Resolution::Irregular);
        assert_eq!(ds.next_timestamp(1).to_string(), "2023-04-12T06:00:00Z");
        assert_eq!(ds.time_index(2), 2);
        assert_eq!(ds.slice(1..3).unwrap().time_index(0), 1);
    }
}
