//! Sound speed profile datasets: depth grids, CSV ingestion, chronological
//! splitting, per-depth normalization, depth interpolation and a seasonal
//! synthetic generator.

mod csv;
mod dataset;
mod grid;
mod interp;
mod norm;
mod synth;

pub use csv::{
    export_csv, format_value, ingest_csv, ingest_csv_with, meta_path, parse_csv_str, parse_long_csv_str,
    parse_key_values, read_key_values, to_csv_string, write_key_values, IngestOptions,
};
pub use dataset::{split_chronological, Resolution, SspDataset, SspProfile, Timestamp};
pub use grid::{argo_grid, uniform_grid, DepthGrid, GridScheme};
pub use interp::{interp_linear, interpolate_full_depth, resample_profile};
pub use norm::{apply_norm, fit_norm, invert_norm, NormStats, STD_FLOOR};
pub use synth::{munk_profile, SynthSpec};
