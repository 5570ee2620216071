//! Wide CSV format.
//!
//! ```text
//! depth_m,2013-01,2013-02,...
//! 0,1540.123,1541.2,...
//! 5,1540.1,1541.0,...
//! ```
//!
//! One row per depth, one column per profile, UTF-8 with LF endings.
//! A `<file>.meta` sidecar of `key=value` lines carries region, grid
//! scheme and provenance.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::data::{resample_profile, DepthGrid, GridScheme, SspDataset, SspProfile, Timestamp};
use crate::error::{Result, StnetError};

/// Ingestion knobs.
#[derive(Clone, Debug)]
pub struct IngestOptions {
    /// Speeds outside this band (m/s) are logged as warnings.
    pub speed_bounds: (f64, f64),
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            speed_bounds: (1300.0, 1700.0),
        }
    }
}

/// Formats a value with at most six decimals and no trailing zeros.
pub fn format_value(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn parse_csv_str(text: &str, opts: &IngestOptions) -> Result<SspDataset> {
    let mut lines = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| StnetError::parse(1, "empty file"))?;
    let mut cols = header.split(',');
    let first = cols.next().unwrap_or("").trim();
    if first != "depth_m" {
        return Err(StnetError::parse(
            hline,
            format!("header must start with 'depth_m', found '{first}'"),
        ));
    }
    let timestamps = cols
        .map(|c| c.parse::<Timestamp>().map_err(|e| StnetError::parse(hline, e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    if timestamps.is_empty() {
        return Err(StnetError::parse(hline, "no profile columns"));
    }
    for w in timestamps.windows(2) {
        match w[0].partial_cmp(&w[1]) {
            Some(std::cmp::Ordering::Less) => {}
            Some(std::cmp::Ordering::Equal) => {
                return Err(StnetError::parse(hline, format!("duplicate timestamp {}", w[1])))
            }
            Some(std::cmp::Ordering::Greater) => {
                return Err(StnetError::parse(
                    hline,
                    format!("timestamps out of order: {} then {}", w[0], w[1]),
                ))
            }
            None => return Err(StnetError::parse(hline, "mixed monthly and instant timestamps")),
        }
    }

    let m = timestamps.len();
    let mut depths = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); m];
    for (lineno, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != m + 1 {
            return Err(StnetError::parse(
                lineno,
                format!("expected {} cells, found {}", m + 1, cells.len()),
            ));
        }
        let parse_num = |s: &str| -> Result<f64> {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| StnetError::parse(lineno, format!("non-numeric cell '{s}'")))?;
            if !v.is_finite() {
                return Err(StnetError::parse(lineno, format!("non-finite cell '{s}'")));
            }
            Ok(v)
        };
        let depth = parse_num(cells[0])?;
        if let Some(&prev) = depths.last() {
            if depth <= prev {
                return Err(StnetError::parse(
                    lineno,
                    format!("depth {depth} does not increase past {prev}"),
                ));
            }
        }
        if depth < 0.0 {
            return Err(StnetError::parse(lineno, format!("negative depth {depth}")));
        }
        depths.push(depth);
        for (col, cell) in columns.iter_mut().zip(&cells[1..]) {
            col.push(parse_num(cell)?);
        }
    }
    if depths.is_empty() {
        return Err(StnetError::parse(hline + 1, "no depth rows"));
    }

    let (lo, hi) = opts.speed_bounds;
    let out_of_band = columns
        .iter()
        .flatten()
        .filter(|&&v| v < lo || v > hi)
        .count();
    if out_of_band > 0 {
        log::warn!("{out_of_band} speeds fall outside the sanity band [{lo}, {hi}] m/s");
    }

    let grid = DepthGrid::detect(depths)?;
    let profiles = timestamps
        .into_iter()
        .zip(columns)
        .map(|(timestamp, speeds)| SspProfile { timestamp, speeds })
        .collect();
    SspDataset::new(grid, profiles, "")
}

pub fn to_csv_string(ds: &SspDataset) -> String {
    let mut out = String::from("depth_m");
    for p in ds.profiles() {
        out.push(',');
        out.push_str(&p.timestamp.to_string());
    }
    out.push('\n');
    for (d, depth) in ds.grid().depths().iter().enumerate() {
        out.push_str(&format_value(*depth));
        for p in ds.profiles() {
            out.push(',');
            out.push_str(&format_value(p.speeds[d]));
        }
        out.push('\n');
    }
    out
}

/// Parses raw casts in long format, `time,depth_m,speed_m_s` with one
/// sample per line, and resamples each cast onto `grid`.
///
/// Rows may arrive in any order; casts are sorted by time and their
/// samples by depth.
pub fn parse_long_csv_str(text: &str, grid: &DepthGrid) -> Result<SspDataset> {
    let mut lines = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty());
    let (hline, header) = lines
        .next()
        .ok_or_else(|| StnetError::parse(1, "empty file"))?;
    let names: Vec<String> = header.split(',').map(|c| c.trim().to_ascii_lowercase()).collect();
    if names != ["time", "depth_m", "speed_m_s"] {
        return Err(StnetError::parse(
            hline,
            format!("long-format header must be 'time,depth_m,speed_m_s', found '{header}'"),
        ));
    }

    let mut casts: Vec<(Timestamp, Vec<(f64, f64)>)> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for (lineno, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 3 {
            return Err(StnetError::parse(lineno, format!("expected 3 cells, found {}", cells.len())));
        }
        let timestamp: Timestamp = cells[0]
            .parse()
            .map_err(|e: StnetError| StnetError::parse(lineno, e.to_string()))?;
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| StnetError::parse(lineno, format!("non-numeric cell '{s}'")))
        };
        let sample = (num(cells[1])?, num(cells[2])?);
        let key = timestamp.to_string();
        let slot = *index.entry(key).or_insert_with(|| {
            casts.push((timestamp, Vec::new()));
            casts.len() - 1
        });
        casts[slot].1.push(sample);
    }
    if casts.is_empty() {
        return Err(StnetError::parse(hline + 1, "no samples"));
    }
    if casts.iter().any(|c| c.0.is_monthly()) && casts.iter().any(|c| !c.0.is_monthly()) {
        return Err(StnetError::Config("mixed monthly and instant timestamps".into()));
    }
    casts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("same timestamp kind"));

    let mut profiles = Vec::with_capacity(casts.len());
    for (timestamp, mut samples) in casts {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = samples.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(StnetError::Config(format!(
                "cast {timestamp} has two samples at {} m",
                w[0].0
            )));
        }
        let label = timestamp.to_string();
        profiles.push(
            resample_profile(&samples, grid, timestamp)
                .map_err(|e| StnetError::Coverage(format!("cast {label}: {e}")))?,
        );
    }
    SspDataset::new(grid.clone(), profiles, "")
}

pub fn meta_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Reads a wide CSV (and its sidecar when present).
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<SspDataset> {
    ingest_csv_with(path, &IngestOptions::default())
}

pub fn ingest_csv_with(path: impl AsRef<Path>, opts: &IngestOptions) -> Result<SspDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| StnetError::io(path, e))?;
    let mut ds = parse_csv_str(&text, opts)?;
    let meta = meta_path(path);
    if meta.exists() {
        let kv = read_key_values(&meta)?;
        if let Some(r) = kv.get("region") {
            ds.region = r.clone();
        }
        if let Some(p) = kv.get("provenance") {
            ds.provenance = p.clone();
        }
        if let Some(s) = kv.get("scheme") {
            let declared: GridScheme = s.parse()?;
            if declared != GridScheme::Custom && declared != ds.grid().scheme() {
                return Err(StnetError::Config(format!(
                    "{} declares scheme {declared} but depths match {}",
                    meta.display(),
                    ds.grid().scheme()
                )));
            }
        }
    }
    Ok(ds)
}

/// Writes the wide CSV plus its `.meta` sidecar.
pub fn export_csv(ds: &SspDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_csv_string(ds)).map_err(|e| StnetError::io(path, e))?;
    let mut kv = BTreeMap::new();
    kv.insert("region".to_string(), ds.region.clone());
    kv.insert("scheme".to_string(), ds.grid().scheme().to_string());
    kv.insert("provenance".to_string(), ds.provenance.clone());
    write_key_values(&meta_path(path), &kv)
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut kv = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| StnetError::parse(i + 1, format!("expected key=value, got '{line}'")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(kv)
}

pub fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| StnetError::io(path, e))?;
    parse_key_values(&text)
}

pub fn write_key_values(path: &Path, kv: &BTreeMap<String, String>) -> Result<()> {
    let mut text = String::new();
    for (k, v) in kv {
        text.push_str(&format!("{k}={}\n", v.replace('\n', " ")));
    }
    fs::write(path, text).map_err(|e| StnetError::io(path, e))
}
