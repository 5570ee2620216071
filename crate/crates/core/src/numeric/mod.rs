//! Dense matrix numerics, differentiable primitives, Adam and a
//! finite-difference gradient oracle.

mod adam;
mod gradcheck;
mod matrix;
pub mod ops;
mod rng;

pub use adam::{adam_step, AdamState};
pub use gradcheck::finite_diff_grad;
pub use matrix::{relative_error, Matrix};
pub use ops::{
    affine, affine_backward, dropout_mask, layer_norm, layer_norm_backward, masked_softmax_rows,
    relu, relu_backward, softmax_rows, softmax_rows_backward, xavier_uniform, LayerNormCache,
};
pub use rng::Rng;
