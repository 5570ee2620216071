//! Trains the network on synthetic seasonal data and forecasts a year ahead.
//!
//! Run with `cargo run --release --example train_forecast [epochs]`.

use stnet::data::SynthSpec;
use stnet::model::{rollout, StnetConfig};
use stnet::train::{evaluate, train, TrainConfig};

fn main() -> stnet::Result<()> {
    let epochs = std::env::args().nth(1).map_or(Ok(100), |a| a.parse()).expect("epochs is a number");
    let horizon = 12;
    let ds = SynthSpec::default().generate()?;
    let history = ds.slice(0..ds.len() - horizon)?;
    let truth = ds.slice(ds.len() - horizon..ds.len())?;

    let cfg = StnetConfig::new(ds.depth_count());
    let train_cfg = TrainConfig { epochs, ..TrainConfig::default() };
    println!("{} parameters, {} training months, {epochs} epochs", cfg.parameter_count(), history.len());
    let out = train(&history, None, &cfg, &train_cfg)?;
    for l in out.losses.iter().step_by((epochs / 5).max(1)) {
        println!("epoch {:>4}  lr {:.5}  train RMSE {:.4} (normalized)", l.epoch, l.learning_rate, l.train_rmse);
    }
    println!("trained in {:.1} s", out.seconds);

    let forecast = rollout(&history, &out.model, horizon)?;
    let report = evaluate(&forecast, &truth)?;
    println!("\nmonth  RMSE (m/s)");
    for s in &report.steps {
        println!("{:>5}  {:.3}", s.step, s.rmse);
    }
    println!("average {:.3} m/s", report.average_rmse);
    Ok(())
}
