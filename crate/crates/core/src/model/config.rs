use serde::{Deserialize, Serialize};

use crate::error::{Result, StnetError};

/// Shape and regularization settings of the network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StnetConfig {
    /// Depth layers per profile (Z).
    pub input_width: usize,
    /// Embedding width (F).
    pub model_width: usize,
    /// Attention heads per block (U).
    pub heads: usize,
    /// Stacked attention + feed-forward blocks (C).
    pub channels: usize,
    pub ffn_width: usize,
    pub dropout: f64,
    /// Tokens per input window (W).
    pub window: usize,
    pub use_time_encoding: bool,
    pub layer_norm_eps: f64,
}

impl StnetConfig {
    /// Defaults: 8 heads, 4 blocks, 128 FFN units, dropout 0.15, width 128, window 1.
    pub fn new(input_width: usize) -> Self {
        StnetConfig {
            input_width,
            model_width: 128,
            heads: 8,
            channels: 4,
            ffn_width: 128,
            dropout: 0.15,
            window: 1,
            use_time_encoding: true,
            layer_norm_eps: 1e-5,
        }
    }

    pub fn head_width(&self) -> usize {
        self.model_width / self.heads
    }

    /// Width of a token before embedding (Z speeds + time code).
    pub fn token_width(&self) -> usize {
        self.input_width + 1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(StnetError::Config(m));
        if self.input_width == 0 {
            return bad("input width must be >= 1".into());
        }
        if self.heads == 0 || self.channels == 0 || self.window == 0 || self.ffn_width == 0 {
            return bad(format!(
                "heads ({}), channels ({}), window ({}) and ffn width ({}) must all be >= 1",
                self.heads, self.channels, self.window, self.ffn_width
            ));
        }
        if self.model_width == 0 || !self.model_width.is_multiple_of(self.heads) {
            return bad(format!(
                "model width {} must be a positive multiple of heads {}",
                self.model_width, self.heads
            ));
        }
        if !self.model_width.is_multiple_of(2) {
            return bad(format!("model width {} must be even", self.model_width));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if !(self.layer_norm_eps > 0.0) {
            return bad("layer norm eps must be > 0".into());
        }
        Ok(())
    }

    /// Closed-form count of learnable scalars.
    pub fn parameter_count(&self) -> usize {
        let (z, f, h) = (self.input_width, self.model_width, self.ffn_width);
        let embed = (z + 1) * f + f;
        let attention = 4 * f * f;
        let ffn = f * h + h + h * f + f;
        let norms = 4 * f;
        let head = f * z + z;
        embed + self.channels * (attention + ffn + norms) + head
    }
}
