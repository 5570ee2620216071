//! The command layer: `synth`, `ingest`, `train`, `predict`, `evaluate`
//! and `study`, each writing its artifacts and a JSON run manifest into
//! the output directory.

mod commands;
mod manifest;
mod options;

pub use commands::{
    cmd_evaluate, cmd_ingest, cmd_predict, cmd_study, cmd_synth, cmd_train, loss_trace_csv, run,
    Command,
};
pub use manifest::{fingerprint, fingerprint_file, FileRecord, RunManifest};
pub use options::{Baseline, Options};
