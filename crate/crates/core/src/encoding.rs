//! Time code, sinusoidal positions and sliding-window token sequences.

use crate::data::SspDataset;
use crate::error::{Result, StnetError};
use crate::numeric::Matrix;

/// Month-of-cycle code: `((j mod 12)·2)/11 − 1`, in `[−1, 1]` with period 12.
pub fn time_encode(j: u64) -> f64 {
    ((j % 12) as f64 * 2.0) / 11.0 - 1.0
}

/// `W × F` table with `PE[p, 2i] = sin(p / 10000^(2i/F))` and
/// `PE[p, 2i+1] = cos(p / 10000^(2i/F))`.
pub fn positional_encoding(length: usize, width: usize) -> Result<Matrix> {
    if !width.is_multiple_of(2) {
        return Err(StnetError::Config(format!(
            "positional encoding width must be even, got {width}"
        )));
    }
    if length == 0 {
        return Err(StnetError::Config("sequence length must be >= 1".into()));
    }
    let mut pe = Matrix::zeros(length, width);
    for p in 0..length {
        for i in 0..width / 2 {
            let angle = p as f64 / 10000f64.powf(2.0 * i as f64 / width as f64);
            pe[(p, 2 * i)] = angle.sin();
            pe[(p, 2 * i + 1)] = angle.cos();
        }
    }
    Ok(pe)
}

/// One supervised window: `W` tokens of `Z + 1` features and the next profile.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedSequence {
    /// `W × (Z+1)`: normalized speeds followed by the time code.
    pub tokens: Matrix,
    /// Time index of each token.
    pub time_indices: Vec<u64>,
    /// Normalized profile following the window (length Z).
    pub target: Vec<f64>,
    /// Position of the first token within the source dataset.
    pub start: usize,
}

impl EncodedSequence {
    pub fn window(&self) -> usize {
        self.tokens.rows()
    }

    pub fn depth_count(&self) -> usize {
        self.tokens.cols() - 1
    }
}

/// Token row for one profile.
pub fn encode_token(speeds: &[f64], time_index: u64, use_time_encoding: bool) -> Vec<f64> {
    let mut row = Vec::with_capacity(speeds.len() + 1);
    row.extend_from_slice(speeds);
    row.push(if use_time_encoding {
        time_encode(time_index)
    } else {
        0.0
    });
    row
}

/// Builds the token matrix for profiles `rows` with their time indices.
pub fn encode_window(rows: &[&[f64]], time_indices: &[u64], use_time_encoding: bool) -> Matrix {
    let encoded: Vec<Vec<f64>> = rows
        .iter()
        .zip(time_indices)
        .map(|(r, &j)| encode_token(r, j, use_time_encoding))
        .collect();
    Matrix::from_rows(&encoded)
}

/// Sliding windows (stride 1) over a normalized dataset; yields `M − W` sequences.
pub fn build_sequences(
    ds: &SspDataset,
    window: usize,
    use_time_encoding: bool,
) -> Result<Vec<EncodedSequence>> {
    if window == 0 {
        return Err(StnetError::Config("window must be >= 1".into()));
    }
    if ds.len() < window + 1 {
        return Err(StnetError::Size(format!(
            "window {window} needs at least {} profiles, dataset has {}",
            window + 1,
            ds.len()
        )));
    }
    let rows = ds.speed_rows();
    let times: Vec<u64> = (0..ds.len()).map(|k| ds.time_index(k)).collect();
    Ok((0..ds.len() - window)
        .map(|start| EncodedSequence {
            tokens: encode_window(
                &rows[start..start + window],
                &times[start..start + window],
                use_time_encoding,
            ),
            time_indices: times[start..start + window].to_vec(),
            target: rows[start + window].to_vec(),
            start,
        })
        .collect())
}
