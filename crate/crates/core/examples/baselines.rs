//! Compares the network with persistence, polynomial fitting and an MLP.
//!
//! Run with `cargo run --release --example baselines [epochs]`.

use std::time::Instant;

use stnet::data::SynthSpec;
use stnet::model::{rollout, StnetConfig};
use stnet::train::{
    baseline_mlp, baseline_persistence, baseline_pf, evaluate, train, MlpConfig, RmseTable, TableRow,
    TrainConfig,
};

fn main() -> stnet::Result<()> {
    let epochs = std::env::args().nth(1).map_or(Ok(100), |a| a.parse()).expect("epochs is a number");
    let horizon = 12;
    let ds = SynthSpec::default().generate()?;
    let history = ds.slice(0..ds.len() - horizon)?;
    let truth = ds.slice(ds.len() - horizon..ds.len())?;
    let mut table = RmseTable::default();

    let net = train(&history, None, &StnetConfig::new(ds.depth_count()), &TrainConfig { epochs, ..TrainConfig::default() })?;
    let report = evaluate(&rollout(&history, &net.model, horizon)?, &truth)?;
    table.push(TableRow::new("stnet", report.rmse_per_step(), net.seconds));

    let (forecast, mlp) = baseline_mlp(&history, &MlpConfig { epochs, ..MlpConfig::default() }, horizon)?;
    table.push(TableRow::new("mlp", evaluate(&forecast, &truth)?.rmse_per_step(), mlp.seconds));

    let started = Instant::now();
    let forecast = baseline_pf(&history, 3, horizon)?;
    let seconds = started.elapsed().as_secs_f64();
    table.push(TableRow::new("pf", evaluate(&forecast, &truth)?.rmse_per_step(), seconds));

    let forecast = baseline_persistence(&history, horizon)?;
    table.push(TableRow::new("persistence", evaluate(&forecast, &truth)?.rmse_per_step(), 0.0));

    for row in &table.rows {
        println!("{:<12} average RMSE {:.3} m/s, {:.2} s", row.label, row.average, row.seconds);
    }
    println!("\n{}", table.to_csv());
    Ok(())
}
