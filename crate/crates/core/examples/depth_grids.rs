//! Depth grids, resampling a raw cast, and full-depth interpolation.
//!
//! Run with `cargo run --example depth_grids`.

use stnet::data::{
    argo_grid, interpolate_full_depth, munk_profile, parse_csv_str, resample_profile, to_csv_string,
    uniform_grid, IngestOptions, SspDataset, Timestamp,
};

fn main() -> stnet::Result<()> {
    for grid in [argo_grid(), uniform_grid()] {
        let d = grid.depths();
        println!(
            "{:<10} {} layers, {} m to {} m, first steps {:?}",
            grid.scheme().to_string(),
            grid.len(),
            grid.min_depth(),
            grid.max_depth(),
            &d[..4]
        );
    }

    // A raw cast sampled every 25 m, stratified onto the Argo grid.
    let raw: Vec<(f64, f64)> = (0..=80).map(|k| (25.0 * k as f64, munk_profile(25.0 * k as f64))).collect();
    let grid = argo_grid();
    let profile = resample_profile(&raw, &grid, Timestamp::month(2021, 6)?)?;
    println!("\nresampled cast at 1000 m: {:.3} m/s", profile.speeds[grid.depths().iter().position(|&d| d == 1000.0).unwrap()]);

    // Linear interpolation to 1 m spacing reproduces every grid knot exactly.
    let (fine_grid, fine) = interpolate_full_depth(&grid, &profile, 1.0)?;
    println!("full-depth profile: {} levels, speed at 1333 m {:.3} m/s", fine_grid.len(), fine.speeds[1333]);

    // Wide CSV is the interchange format; exporting a parsed file is a fixed point.
    let ds = SspDataset::new(grid, vec![profile], "demo")?;
    let text = to_csv_string(&ds);
    let back = parse_csv_str(&text, &IngestOptions::default())?;
    println!("CSV round trip is a fixed point: {}", to_csv_string(&back) == text);
    println!("\nfirst CSV lines:");
    for line in text.lines().take(3) {
        println!("  {line}");
    }
    Ok(())
}
