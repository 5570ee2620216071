//! Monthly time codes, positional encodings and windowed training sequences.
//!
//! Run with `cargo run --example encodings`.

use stnet::data::{fit_norm, SynthSpec};
use stnet::encoding::{build_sequences, positional_encoding, time_encode};

fn main() -> stnet::Result<()> {
    println!("time code per calendar month:");
    for j in 0..12 {
        print!("{:+.3} ", time_encode(j));
    }
    println!("\n(index 12 wraps back to {:+.3})", time_encode(12));

    let pe = positional_encoding(4, 8)?;
    println!("\npositional encoding, 4 positions x 8 features:");
    for p in 0..pe.rows() {
        let row: Vec<String> = pe.row(p).iter().map(|v| format!("{v:+.3}")).collect();
        println!("  {}", row.join(" "));
    }

    let ds = SynthSpec { months: 24, ..SynthSpec::default() }.generate()?;
    let normalized = fit_norm(&ds).apply(&ds)?;
    let seqs = build_sequences(&normalized, 3, true)?;
    let first = &seqs[0];
    println!(
        "\n{} months, window 3 -> {} sequences; each token has {} values ({} depths + time code)",
        ds.len(),
        seqs.len(),
        first.tokens.cols(),
        ds.depth_count()
    );
    let months: Vec<u64> = first.time_indices.iter().map(|j| j % 12 + 1).collect();
    println!("first window holds calendar months {months:?}; its target is profile {}", first.start + 3);
    Ok(())
}
