//! Forecast scoring and the plot-ready CSV tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::{format_value, SspDataset};
use crate::error::{Result, StnetError};
use crate::train::metrics::{mae, mse, rmse};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    /// 1-based forecast step.
    pub step: usize,
    pub timestamp: String,
    pub rmse: f64,
    pub mse: f64,
    pub mae: f64,
}

/// Scores of one multi-step forecast against held-out truth, all in m/s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub steps: Vec<StepMetrics>,
    pub depths: Vec<f64>,
    /// `abs_error[z][h]` is `|pred − truth|` at depth `z`, step `h`.
    pub abs_error: Vec<Vec<f64>>,
    pub average_rmse: f64,
    pub training_seconds: Option<f64>,
}

/// Compares `pred` with `truth` profile by profile.
pub fn evaluate(pred: &SspDataset, truth: &SspDataset) -> Result<ForecastReport> {
    if pred.len() != truth.len() || pred.depth_count() != truth.depth_count() {
        return Err(StnetError::dim(
            "evaluate",
            (pred.depth_count(), pred.len()),
            (truth.depth_count(), truth.len()),
        ));
    }
    if pred.grid().depths() != truth.grid().depths() {
        return Err(StnetError::Config("prediction and truth use different depth grids".into()));
    }
    let mut steps = Vec::with_capacity(pred.len());
    let mut abs_error = vec![Vec::with_capacity(pred.len()); pred.depth_count()];
    for (h, (p, t)) in pred.profiles().iter().zip(truth.profiles()).enumerate() {
        steps.push(StepMetrics {
            step: h + 1,
            timestamp: t.timestamp.to_string(),
            rmse: rmse(&p.speeds, &t.speeds)?,
            mse: mse(&p.speeds, &t.speeds)?,
            mae: mae(&p.speeds, &t.speeds)?,
        });
        for (z, (a, b)) in p.speeds.iter().zip(&t.speeds).enumerate() {
            abs_error[z].push((a - b).abs());
        }
    }
    let average_rmse = steps.iter().map(|s| s.rmse).sum::<f64>() / steps.len() as f64;
    Ok(ForecastReport {
        steps,
        depths: truth.grid().depths().to_vec(),
        abs_error,
        average_rmse,
        training_seconds: None,
    })
}

impl ForecastReport {
    pub fn rmse_per_step(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.rmse).collect()
    }

    /// `step,timestamp,rmse_m_s,mse_m2_s2,mae_m_s`
    pub fn metrics_csv(&self) -> String {
        let mut s = String::from("step,timestamp,rmse_m_s,mse_m2_s2,mae_m_s\n");
        for m in &self.steps {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                m.step,
                m.timestamp,
                format_value(m.rmse),
                format_value(m.mse),
                format_value(m.mae)
            );
        }
        s
    }

    /// One row per depth, one absolute-error column per forecast step.
    pub fn depth_error_csv(&self) -> String {
        let mut s = String::from("depth_m");
        for m in &self.steps {
            let _ = write!(s, ",step_{}_abs_error_m_s", m.step);
        }
        s.push('\n');
        for (d, errs) in self.depths.iter().zip(&self.abs_error) {
            s.push_str(&format_value(*d));
            for e in errs {
                s.push(',');
                s.push_str(&format_value(*e));
            }
            s.push('\n');
        }
        s
    }
}

/// One configuration or method with its per-month RMSE.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    pub rmse: Vec<f64>,
    pub average: f64,
    /// Mean training wall-clock per run, seconds.
    pub seconds: f64,
}

impl TableRow {
    pub fn new(label: impl Into<String>, rmse: Vec<f64>, seconds: f64) -> Self {
        let average = rmse.iter().sum::<f64>() / rmse.len().max(1) as f64;
        TableRow {
            label: label.into(),
            rmse,
            average,
            seconds,
        }
    }
}

/// Rows are configurations (or methods), columns are forecast months and
/// their average.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RmseTable {
    pub rows: Vec<TableRow>,
}

impl RmseTable {
    pub fn push(&mut self, row: TableRow) {
        self.rows.push(row);
    }

    pub fn row(&self, label: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// `config,month_1_rmse_m_s,…,month_H_rmse_m_s,average_rmse_m_s`
    pub fn to_csv(&self) -> String {
        let horizon = self.rows.iter().map(|r| r.rmse.len()).max().unwrap_or(0);
        let mut s = String::from("config");
        for h in 1..=horizon {
            let _ = write!(s, ",month_{h}_rmse_m_s");
        }
        s.push_str(",average_rmse_m_s\n");
        for r in &self.rows {
            s.push_str(&r.label);
            for h in 0..horizon {
                s.push(',');
                if let Some(v) = r.rmse.get(h) {
                    s.push_str(&format_value(*v));
                }
            }
            let _ = writeln!(s, ",{}", format_value(r.average));
        }
        s
    }

    /// `method,training_time_s`
    pub fn timing_csv(&self) -> String {
        let mut s = String::from("method,training_time_s\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{:.3}", r.label, r.seconds);
        }
        s
    }
}
