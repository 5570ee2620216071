//! Training, reference baselines, forecast metrics and the window/training
//! length studies.

mod baselines;
mod metrics;
mod report;
mod study;
mod trainer;

pub use baselines::{
    baseline_mlp, baseline_pf, baseline_persistence, mlp_rollout, polyfit_extrapolate, train_mlp,
    Mlp, MlpConfig, MlpOutcome,
};
pub use metrics::{mae, mse, rmse, rmse_with_grad};
pub use report::{evaluate, ForecastReport, RmseTable, StepMetrics, TableRow};
pub use study::{repeated_forecast, study_train_length, study_window_length, StudyOptions};
pub use trainer::{train, Adam, EpochLoss, TrainConfig, TrainOutcome};
