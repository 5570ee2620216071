use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::cli::manifest::RunManifest;
use crate::cli::options::{Baseline, Options};
use crate::data::{
    export_csv, format_value, ingest_csv, meta_path, parse_long_csv_str, split_chronological,
    GridScheme, SspDataset,
};
use crate::error::{Result, StnetError};
use crate::model::{rollout, TrainedModel};
use crate::train::{
    baseline_mlp, baseline_persistence, baseline_pf, evaluate, study_train_length,
    study_window_length, train, EpochLoss, ForecastReport, RmseTable, TableRow,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Synth,
    Ingest,
    Train,
    Predict,
    Evaluate,
    Study,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Synth,
        Command::Ingest,
        Command::Train,
        Command::Predict,
        Command::Evaluate,
        Command::Study,
    ];
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Synth => "synth",
            Command::Ingest => "ingest",
            Command::Train => "train",
            Command::Predict => "predict",
            Command::Evaluate => "evaluate",
            Command::Study => "study",
        })
    }
}

impl FromStr for Command {
    type Err = StnetError;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| StnetError::Config(format!("unknown command '{s}'")))
    }
}

/// Runs `command` and writes its manifest into `opts.out`, also on failure.
pub fn run(command: Command, opts: &Options) -> Result<RunManifest> {
    let started = Instant::now();
    let mut manifest = RunManifest::new(&command.to_string(), opts.to_map(), opts.seed);
    let result = fs::create_dir_all(&opts.out)
        .map_err(|e| StnetError::io(&opts.out, e))
        .and_then(|_| match command {
            Command::Synth => cmd_synth(opts, &mut manifest),
            Command::Ingest => cmd_ingest(opts, &mut manifest),
            Command::Train => cmd_train(opts, &mut manifest),
            Command::Predict => cmd_predict(opts, &mut manifest),
            Command::Evaluate => cmd_evaluate(opts, &mut manifest),
            Command::Study => cmd_study(opts, &mut manifest),
        });
    manifest
        .timings_s
        .insert("total".into(), started.elapsed().as_secs_f64());
    if let Err(e) = &result {
        manifest.error = Some(e.to_string());
    }
    let written = manifest.write(&opts.out);
    result?;
    written?;
    Ok(manifest)
}

fn require<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| StnetError::Config(format!("--{flag} is required")))
}

fn write_text(manifest: &mut RunManifest, path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| StnetError::io(path, e))?;
    manifest.record_artifact(path)
}

fn write_dataset(manifest: &mut RunManifest, ds: &SspDataset, path: &Path) -> Result<()> {
    export_csv(ds, path)?;
    manifest.record_artifact(path)?;
    manifest.record_artifact(&meta_path(path))
}

/// Reads the `--data` dataset and records its fingerprint.
fn load_data(opts: &Options, manifest: &mut RunManifest) -> Result<SspDataset> {
    let path = require(&opts.data, "data")?;
    let rec = manifest.record_input(path)?;
    manifest.dataset_fingerprint = Some(rec.sha256);
    let ds = ingest_csv(path)?;
    check_grid(opts, &ds)?;
    Ok(ds)
}

fn check_grid(opts: &Options, ds: &SspDataset) -> Result<()> {
    if opts.grid != GridScheme::Custom && ds.grid().scheme() != opts.grid {
        return Err(StnetError::Config(format!(
            "dataset uses a {} grid but --grid is {}",
            ds.grid().scheme(),
            opts.grid
        )));
    }
    Ok(())
}

pub fn cmd_synth(opts: &Options, manifest: &mut RunManifest) -> Result<()> {
    let spec = opts.synth_spec();
    manifest.notes.insert(
        "synth_spec".into(),
        serde_json::to_string(&spec).expect("spec serializes"),
    );
    let ds = spec.generate()?;
    let path = opts.out.join("synth.csv");
    write_dataset(manifest, &ds, &path)?;
    manifest.dataset_fingerprint = manifest.artifact("synth.csv").map(|a| a.sha256.clone());
    Ok(())
}

/// Accepts a wide CSV or long-format raw casts and writes the wide,
/// grid-stratified dataset.
pub fn cmd_ingest(opts: &Options, manifest: &mut RunManifest) -> Result<()> {
    let path = require(&opts.data, "data")?;
    let rec = manifest.record_input(path)?;
    manifest.dataset_fingerprint = Some(rec.sha256);
    let text = fs::read_to_string(path).map_err(|e| StnetError::io(path, e))?;
    let first = text.split(',').next().unwrap_or("").trim();
    let mut ds = if first == "depth_m" {
        let ds = ingest_csv(path)?;
        check_grid(opts, &ds)?;
        ds
    } else {
        parse_long_csv_str(&text, &opts.depth_grid()?)?
    };
    if ds.region.is_empty() {
        ds.region = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    if ds.provenance.is_empty() {
        ds.provenance = format!("ingested from {}", path.display());
    }
    manifest
        .notes
        .insert("profiles".into(), ds.len().to_string());
    write_dataset(manifest, &ds, &opts.out.join("dataset.csv"))
}

/// `epoch,learning_rate,train_rmse_normalized,val_rmse_m_s`
pub fn loss_trace_csv(losses: &[EpochLoss]) -> String {
    let mut s = String::from("epoch,learning_rate,train_rmse_normalized,val_rmse_m_s\n");
    for l in losses {
        s.push_str(&format!(
            "{},{:?},{:?},{}\n",
            l.epoch,
            l.learning_rate,
            l.train_rmse,
            l.val_rmse_ms.map(|v| format!("{v:?}")).unwrap_or_default()
        ));
    }
    s
}

pub fn cmd_train(opts: &Options, manifest: &mut RunManifest) -> Result<()> {
    let ds = load_data(opts, manifest)?;
    let (train_ds, val_ds) = split_chronological(&ds, opts.train_fraction)?;
    let config = opts.model_config(ds.depth_count());
    manifest
        .notes
        .insert("parameter_count".into(), config.parameter_count().to_string());
    manifest.notes.insert(
        "split".into(),
        format!("{} train / {} validation profiles", train_ds.len(), val_ds.len()),
    );
    let outcome = train(&train_ds, Some(&val_ds), &config, &opts.train_config())?;
    manifest.timings_s.insert("train".into(), outcome.seconds);
    if let Some(last) = outcome.losses.last() {
        manifest
            .notes
            .insert("final_train_rmse_normalized".into(), format!("{:?}", last.train_rmse));
        if let Some(v) = last.val_rmse_ms {
            manifest.notes.insert("final_val_rmse_m_s".into(), format!("{v:?}"));
        }
    }
    let ckpt = opts.out.join("model.ckpt");
    outcome.model.save(&ckpt)?;
    manifest.record_artifact(&ckpt)?;
    write_text(manifest, &opts.out.join("loss_trace.csv"), &loss_trace_csv(&outcome.losses))
}

/// Forecast of `horizon` profiles after `history` by the chosen method.
fn forecast_with(
    history: &SspDataset,
    opts: &Options,
    baseline: Option<Baseline>,
    model: Option<&TrainedModel>,
) -> Result<(SspDataset, f64)> {
    let started = Instant::now();
    let forecast = match (baseline, model) {
        (Some(Baseline::Persistence), _) => baseline_persistence(history, opts.horizon)?,
        (Some(Baseline::Pf), _) => baseline_pf(history, opts.pf_degree, opts.horizon)?,
        (Some(Baseline::Mlp), _) => baseline_mlp(history, &opts.mlp_config(), opts.horizon)?.0,
        (None, Some(m)) => rollout(history, m, opts.horizon)?,
        (None, None) => {
            return Err(StnetError::Config(
                "predict needs --checkpoint or --baseline".into(),
            ))
        }
    };
    Ok((forecast, started.elapsed().as_secs_f64()))
}

pub fn cmd_predict(opts: &Options, manifest: &mut RunManifest) -> Result<()> {
    let history = load_data(opts, manifest)?;
    let model = match (opts.baseline, &opts.checkpoint) {
        (None, Some(path)) => {
            manifest.record_input(path)?;
            let model = TrainedModel::load(path)?;
            if model.grid.depths() != history.grid().depths() {
                return Err(StnetError::Config(format!(
                    "checkpoint expects a {}-depth {} grid, data has {} depths",
                    model.grid.len(),
                    model.grid.scheme(),
                    history.depth_count()
                )));
            }
            Some(model)
        }
        _ => None,
    };
    let (forecast, seconds) = forecast_with(&history, opts, opts.baseline, model.as_ref())?;
    manifest.timings_s.insert("forecast".into(), seconds);
    let stem = match opts.baseline {
        Some(b) => format!("forecast_{b}"),
        None => "forecast".to_string(),
    };
    write_dataset(manifest, &forecast, &opts.out.join(format!("{stem}.csv")))?;
    if let Some(spacing) = opts.interp {
        let fine = forecast.interpolate_full_depth(spacing)?;
        write_dataset(manifest, &fine, &opts.out.join(format!("{stem}_interp.csv")))?;
    }
    Ok(())
}

fn write_report(manifest: &mut RunManifest, out: &Path, report: &ForecastReport, suffix: &str) -> Result<()> {
    write_text(manifest, &out.join(format!("metrics{suffix}.csv")), &report.metrics_csv())?;
    write_text(
        manifest,
        &out.join(format!("depth_abs_error{suffix}.csv")),
        &report.depth_error_csv(),
    )
}

/// Profiles of `truth` at the timestamps of `pred`, which must be contiguous.
fn align_truth(pred: &SspDataset, truth: &SspDataset) -> Result<SspDataset> {
    let first = &pred.profiles()[0].timestamp;
    let start = truth
        .profiles()
        .iter()
        .position(|p| &p.timestamp == first)
        .ok_or_else(|| StnetError::Coverage(format!("truth has no profile at {first}")))?;
    if start + pred.len() > truth.len() {
        return Err(StnetError::Coverage(format!(
            "truth ends before the last forecast step ({} profiles needed from {first})",
            pred.len()
        )));
    }
    let aligned = truth.slice(start..start + pred.len())?;
    for (p, t) in pred.profiles().iter().zip(aligned.profiles()) {
        if p.timestamp != t.timestamp {
            return Err(StnetError::Coverage(format!(
                "forecast step {} has no matching truth profile",
                p.timestamp
            )));
        }
    }
    Ok(aligned)
}

/// With `--prediction` and `--truth`, scores that forecast. With only
/// `--data`, holds out the final `horizon` profiles and compares the
/// network against every baseline.
pub fn cmd_evaluate(opts: &Options, manifest: &mut RunManifest) -> Result<()> {
    if let Some(pred_path) = &opts.prediction {
        let truth_path = require(&opts.truth, "truth")?;
        manifest.record_input(pred_path)?;
        let rec = manifest.record_input(truth_path)?;
        manifest.dataset_fingerprint = Some(rec.sha256);
        let pred = ingest_csv(pred_path)?;
        let truth = align_truth(&pred, &ingest_csv(truth_path)?)?;
        let report = evaluate(&pred, &truth)?;
        write_report(manifest, &opts.out, &report, "")?;
        let label = pred_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "prediction".into());
        let mut table = RmseTable::default();
        table.push(TableRow::new(label, report.rmse_per_step(), 0.0));
        manifest
            .notes
            .insert("average_rmse_m_s".into(), format!("{:?}", report.average_rmse));
        return write_text(manifest, &opts.out.join("rmse_table.csv"), &table.to_csv());
    }

    let ds = load_data(opts, manifest)?;
    if ds.len() <= opts.horizon {
        return Err(StnetError::Size(format!(
            "{} profiles cannot hold out a {}-step forecast",
            ds.len(),
            opts.horizon
        )));
    }
    let cut = ds.len() - opts.horizon;
    let history = ds.slice(0..cut)?;
    let truth = ds.slice(cut..ds.len())?;

    let mut table = RmseTable::default();
    let outcome = train(
        &history,
        None,
        &opts.model_config(ds.depth_count()),
        &opts.train_config(),
    )?;
    let (forecast, _) = forecast_with(&history, opts, None, Some(&outcome.model))?;
    let report = evaluate(&forecast, &truth)?;
    write_report(manifest, &opts.out, &report, "_stnet")?;
    table.push(TableRow::new("stnet", report.rmse_per_step(), outcome.seconds));

    for baseline in [Baseline::Mlp, Baseline::Pf, Baseline::Persistence] {
        let (forecast, seconds) = forecast_with(&history, opts, Some(baseline), None)?;
        let report = evaluate(&forecast, &truth)?;
        write_report(manifest, &opts.out, &report, &format!("_{baseline}"))?;
        table.push(TableRow::new(baseline.to_string(), report.rmse_per_step(), seconds));
    }
    for row in &table.rows {
        manifest.timings_s.insert(row.label.clone(), row.seconds);
        manifest
            .notes
            .insert(format!("{}_average_rmse_m_s", row.label), format!("{:?}", row.average));
    }
    write_text(manifest, &opts.out.join("comparison.csv"), &table.to_csv())?;
    write_text(manifest, &opts.out.join("timing.csv"), &table.timing_csv())
}

fn write_study(manifest: &mut RunManifest, out: &Path, name: &str, table: &RmseTable) -> Result<()> {
    for row in &table.rows {
        manifest
            .notes
            .insert(format!("{name}:{}", row.label), format_value(row.average));
    }
    write_text(manifest, &out.join(format!("study_{name}.csv")), &table.to_csv())?;
    write_text(manifest, &out.join(format!("study_{name}_timing.csv")), &table.timing_csv())
}

pub fn cmd_study(opts: &Options, manifest: &mut RunManifest) -> Result<()> {
    if opts.windows.is_none() && opts.years.is_none() {
        return Err(StnetError::Config("study needs --windows and/or --years".into()));
    }
    let ds = load_data(opts, manifest)?;
    let study = opts.study_options(ds.depth_count());
    if let Some(windows) = &opts.windows {
        let started = Instant::now();
        let table = study_window_length(&ds, windows, &study)?;
        write_study(manifest, &opts.out, "windows", &table)?;
        manifest
            .timings_s
            .insert("study_windows".into(), started.elapsed().as_secs_f64());
    }
    if let Some(years) = &opts.years {
        let started = Instant::now();
        let table = study_train_length(&ds, years, &study)?;
        write_study(manifest, &opts.out, "years", &table)?;
        manifest
            .timings_s
            .insert("study_years".into(), started.elapsed().as_secs_f64());
    }
    Ok(())
}
