//! Saves a trained model, reloads it, and checks the round trip is exact.
//!
//! Run with `cargo run --release --example checkpoint`.

use stnet::data::SynthSpec;
use stnet::model::{rollout, StnetConfig, TrainedModel};
use stnet::train::{train, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ds = SynthSpec { months: 36, ..SynthSpec::default() }.generate()?;
    let mut cfg = StnetConfig::new(ds.depth_count());
    cfg.model_width = 16;
    cfg.ffn_width = 16;
    cfg.channels = 1;
    let model = train(&ds, None, &cfg, &TrainConfig { epochs: 20, ..TrainConfig::default() })?.model;

    let dir = std::env::temp_dir().join("stnet-checkpoint-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("model.ckpt");
    model.save(&path)?;
    let reloaded = TrainedModel::load(&path)?;

    println!("checkpoint: {}", path.display());
    println!("text identical after reload: {}", reloaded.to_checkpoint_string() == model.to_checkpoint_string());
    let a = rollout(&ds, &model, 3)?;
    let b = rollout(&ds, &reloaded, 3)?;
    println!("forecasts identical: {}", a.profiles() == b.profiles());
    for line in model.to_checkpoint_string().lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
