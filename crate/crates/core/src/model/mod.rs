//! The semi-transformer: a decoder-only stack of causally masked
//! multi-head attention blocks with a linear output head.

mod attention;
mod config;
mod network;
mod params;
mod trained;

pub use attention::{attention_head, causal_mask, multi_head, HeadWeights};
pub use config::StnetConfig;
pub use network::{forward_tokens, stnet_backward, stnet_backward_into, stnet_forward, BlockTrace, ForwardTrace, Mode};
pub use params::{BlockParams, StnetParams};
pub use trained::{rollout, TrainedModel, CHECKPOINT_VERSION};
