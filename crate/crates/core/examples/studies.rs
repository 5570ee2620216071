//! Window-length and training-length studies, averaged over repeated seeds.
//!
//! Uses a reduced network so both studies finish in well under a minute.
//! Run with `cargo run --release --example studies`.

use stnet::data::SynthSpec;
use stnet::train::{study_train_length, study_window_length, StudyOptions};

fn main() -> stnet::Result<()> {
    let ds = SynthSpec { months: 72, ..SynthSpec::default() }.generate()?;
    let mut opts = StudyOptions::new(ds.depth_count());
    opts.model.model_width = 32;
    opts.model.ffn_width = 32;
    opts.model.channels = 2;
    opts.train.epochs = 40;
    opts.repeats = 3;

    let windows = study_window_length(&ds, &[1, 2, 4], &opts)?;
    println!("{}", windows.to_csv());
    let years = study_train_length(&ds, &[1, 2, 3], &opts)?;
    println!("{}", years.to_csv());
    println!("{}", years.timing_csv());
    Ok(())
}
