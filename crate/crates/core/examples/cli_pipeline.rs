//! Drives the command layer behind the `stnet` binary: synth, train,
//! predict and evaluate, each leaving a manifest beside its artifacts.
//!
//! Run with `cargo run --release --example cli_pipeline`.

use stnet::cli::{run, Command, Options};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("stnet-cli-example");
    let mut opts = Options::default();
    for (k, v) in [("out", out.to_str().unwrap()), ("months", "48"), ("epochs", "20"), ("model_width", "16"), ("ffn_width", "16")] {
        opts.set(k, v)?;
    }

    let synth = run(Command::Synth, &opts)?;
    opts.set("data", out.join("synth.csv").to_str().unwrap())?;
    let train = run(Command::Train, &opts)?;
    opts.set("checkpoint", out.join("model.ckpt").to_str().unwrap())?;
    let predict = run(Command::Predict, &opts)?;
    let evaluate = run(Command::Evaluate, &opts)?;

    for m in [&synth, &train, &predict, &evaluate] {
        println!("{}:", m.command);
        for a in &m.artifacts {
            println!("  {}  {}", &a.sha256[..12], a.path);
        }
    }
    println!("\ntrain saw dataset {}", train.dataset_fingerprint.as_deref().unwrap_or("-"));
    println!("{}", std::fs::read_to_string(out.join("comparison.csv"))?);
    Ok(())
}
