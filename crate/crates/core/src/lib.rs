//! Sound speed profile forecasting with a semi-transformer.
//!
//! The crate covers the whole pipeline: depth stratification and CSV
//! ingestion ([`data`]), time and positional encodings ([`encoding`]), the
//! masked-attention network with hand-written backward pass ([`model`]),
//! training, baselines and evaluation studies ([`train`]), and the
//! command layer behind the `stnet` binary ([`cli`]).
//!
//! Runnable walkthroughs live in `examples/`.

pub mod cli;
pub mod data;
pub mod encoding;
pub mod error;
pub mod model;
pub mod numeric;
pub mod train;

pub use error::{Result, StnetError};
