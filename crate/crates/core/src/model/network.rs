//! Forward and backward passes of the stacked masked-attention network.
//!
//! ```text
//! tokens (W × Z+1) ─ embed ─ + PE ─┐
//!   repeat C times:                 │
//!     masked multi-head attention → dropout → + residual → layer norm
//!     ReLU feed-forward           → dropout → + residual → layer norm
//! last token (1 × F) ─ head ─ prediction (Z)
//! ```

use crate::encoding::positional_encoding;
use crate::error::{Result, StnetError};
use crate::model::attention::{attend, attend_backward, causal_mask};
use crate::model::{StnetConfig, StnetParams};
use crate::numeric::{
    affine, dropout_mask, layer_norm, layer_norm_backward, relu, relu_backward,
    LayerNormCache, Matrix, Rng,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Activations of one block kept for the backward pass.
#[derive(Clone, Debug)]
pub struct BlockTrace {
    pub input: Matrix,
    pub query: Matrix,
    pub key: Matrix,
    pub value: Matrix,
    /// Attention weights per head, each `W × W`.
    pub attention: Vec<Matrix>,
    pub concat: Matrix,
    pub attn_dropout: Matrix,
    pub norm1: LayerNormCache,
    pub norm1_out: Matrix,
    pub ffn_pre: Matrix,
    pub ffn_hidden: Matrix,
    pub ffn_dropout: Matrix,
    pub norm2: LayerNormCache,
    pub output: Matrix,
}

#[derive(Clone, Debug)]
pub struct ForwardTrace {
    pub tokens: Matrix,
    /// Embedded tokens plus positional encoding.
    pub embedded: Matrix,
    pub blocks: Vec<BlockTrace>,
    pub mode: Mode,
}

impl ForwardTrace {
    /// Output of each block, `W × F`.
    pub fn block_outputs(&self) -> Vec<&Matrix> {
        self.blocks.iter().map(|b| &b.output).collect()
    }

    fn last_features(&self) -> &[f64] {
        let out = &self.blocks.last().expect("at least one block").output;
        out.row(out.rows() - 1)
    }
}

/// Runs the network on a `W × (Z+1)` token matrix.
///
/// In `Infer` mode dropout masks are all ones and `rng` is not touched.
pub fn forward_tokens(
    tokens: &Matrix,
    params: &StnetParams,
    config: &StnetConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Vec<f64>, ForwardTrace)> {
    if tokens.cols() != config.token_width() {
        return Err(StnetError::dim(
            "stnet_forward tokens",
            tokens.shape(),
            (config.window, config.token_width()),
        ));
    }
    if tokens.rows() == 0 {
        return Err(StnetError::Size("empty token window".into()));
    }
    if params.blocks.len() != config.channels {
        return Err(StnetError::Config(format!(
            "{} blocks in parameters, {} in configuration",
            params.blocks.len(),
            config.channels
        )));
    }
    let w = tokens.rows();
    let f = config.model_width;
    let dk = config.head_width();
    let training = mode == Mode::Train;
    let mask = causal_mask(w);

    let mut h = affine(tokens, &params.embed_weight, &params.embed_bias)?;
    h.add_assign(&positional_encoding(w, f)?)?;
    let embedded = h.clone();

    let mut blocks = Vec::with_capacity(config.channels);
    for bp in &params.blocks {
        let input = h;
        let query = input.matmul(&bp.query)?;
        let key = input.matmul(&bp.key)?;
        let value = input.matmul(&bp.value)?;
        let mut concat = Matrix::zeros(w, f);
        let mut attention = Vec::with_capacity(config.heads);
        for u in 0..config.heads {
            let (out, weights) = attend(
                &query.column_block(u * dk, dk),
                &key.column_block(u * dk, dk),
                &value.column_block(u * dk, dk),
                &mask,
            )?;
            concat.set_column_block(u * dk, &out);
            attention.push(weights);
        }
        let mixed = concat.matmul(&bp.output)?;
        let attn_dropout = dropout_mask(w, f, config.dropout, rng, training)?;
        let residual1 = input.add(&mixed.hadamard(&attn_dropout)?)?;
        let (norm1_out, norm1) = layer_norm(
            &residual1,
            &bp.norm1_gain,
            &bp.norm1_bias,
            config.layer_norm_eps,
        )?;

        let ffn_pre = affine(&norm1_out, &bp.ffn_w1, &bp.ffn_b1)?;
        let ffn_hidden = relu(&ffn_pre);
        let ffn_out = affine(&ffn_hidden, &bp.ffn_w2, &bp.ffn_b2)?;
        let ffn_dropout = dropout_mask(w, f, config.dropout, rng, training)?;
        let residual2 = norm1_out.add(&ffn_out.hadamard(&ffn_dropout)?)?;
        let (output, norm2) = layer_norm(
            &residual2,
            &bp.norm2_gain,
            &bp.norm2_bias,
            config.layer_norm_eps,
        )?;

        h = output.clone();
        blocks.push(BlockTrace {
            input,
            query,
            key,
            value,
            attention,
            concat,
            attn_dropout,
            norm1,
            norm1_out,
            ffn_pre,
            ffn_hidden,
            ffn_dropout,
            norm2,
            output,
        });
    }

    let trace = ForwardTrace {
        tokens: tokens.clone(),
        embedded,
        blocks,
        mode,
    };
    let last = Matrix::row_vector(trace.last_features());
    let prediction = affine(&last, &params.head_weight, &params.head_bias)?.into_vec();
    Ok((prediction, trace))
}

/// Forward pass on an encoded window.
pub fn stnet_forward(
    seq: &crate::encoding::EncodedSequence,
    params: &StnetParams,
    config: &StnetConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<(Vec<f64>, ForwardTrace)> {
    if seq.window() != config.window {
        return Err(StnetError::dim(
            "stnet_forward window",
            seq.tokens.shape(),
            (config.window, config.token_width()),
        ));
    }
    forward_tokens(&seq.tokens, params, config, mode, rng)
}

/// Reverse-mode gradients of a scalar loss given `∂loss/∂prediction`.
pub fn stnet_backward(
    trace: &ForwardTrace,
    params: &StnetParams,
    config: &StnetConfig,
    loss_grad: &[f64],
) -> Result<StnetParams> {
    let mut grads = params.zeros_like();
    stnet_backward_into(trace, params, config, loss_grad, &mut grads)?;
    Ok(grads)
}

/// Like [`stnet_backward`], but adds the gradients into `grads`.
///
/// Summing a mini-batch this way avoids materializing one full gradient
/// set per sample.
pub fn stnet_backward_into(
    trace: &ForwardTrace,
    params: &StnetParams,
    config: &StnetConfig,
    loss_grad: &[f64],
    grads: &mut StnetParams,
) -> Result<()> {
    if trace.blocks.len() != params.blocks.len() || grads.blocks.len() != params.blocks.len() {
        return Err(StnetError::State(format!(
            "trace has {} blocks, parameters have {}",
            trace.blocks.len(),
            params.blocks.len()
        )));
    }
    if trace.embedded.cols() != params.embed_weight.cols()
        || trace.tokens.cols() != params.embed_weight.rows()
    {
        return Err(StnetError::State(
            "trace was produced with differently shaped parameters".into(),
        ));
    }
    if loss_grad.len() != params.head_bias.cols() {
        return Err(StnetError::dim(
            "stnet_backward loss_grad",
            (1, loss_grad.len()),
            params.head_bias.shape(),
        ));
    }

    let w = trace.tokens.rows();
    let f = config.model_width;
    let dk = config.head_width();

    let dy = Matrix::row_vector(loss_grad);
    let last = Matrix::row_vector(trace.last_features());
    last.t_matmul_acc(&dy, &mut grads.head_weight)?;
    grads.head_bias.add_assign(&dy)?;
    let d_last = dy.matmul_t(&params.head_weight)?;

    let mut dh = Matrix::zeros(w, f);
    dh.row_mut(w - 1).copy_from_slice(d_last.as_slice());

    for (c, (bt, bp)) in trace.blocks.iter().zip(&params.blocks).enumerate().rev() {
        let g = &mut grads.blocks[c];

        let (d_res2, d_g2, d_b2) = layer_norm_backward(&dh, &bp.norm2_gain, &bt.norm2);
        g.norm2_gain.add_assign(&d_g2)?;
        g.norm2_bias.add_assign(&d_b2)?;

        let d_ffn_out = d_res2.hadamard(&bt.ffn_dropout)?;
        bt.ffn_hidden.t_matmul_acc(&d_ffn_out, &mut g.ffn_w2)?;
        g.ffn_b2.add_assign(&d_ffn_out.sum_rows())?;
        let d_hidden = d_ffn_out.matmul_t(&bp.ffn_w2)?;
        let d_pre = relu_backward(&bt.ffn_pre, &d_hidden);
        bt.norm1_out.t_matmul_acc(&d_pre, &mut g.ffn_w1)?;
        g.ffn_b1.add_assign(&d_pre.sum_rows())?;
        let mut d_norm1_out = d_pre.matmul_t(&bp.ffn_w1)?;
        d_norm1_out.add_assign(&d_res2)?;

        let (d_res1, d_g1, d_b1) = layer_norm_backward(&d_norm1_out, &bp.norm1_gain, &bt.norm1);
        g.norm1_gain.add_assign(&d_g1)?;
        g.norm1_bias.add_assign(&d_b1)?;

        let d_mixed = d_res1.hadamard(&bt.attn_dropout)?;
        bt.concat.t_matmul_acc(&d_mixed, &mut g.output)?;
        let d_concat = d_mixed.matmul_t(&bp.output)?;

        let mut dq = Matrix::zeros(w, f);
        let mut dk_all = Matrix::zeros(w, f);
        let mut dv = Matrix::zeros(w, f);
        for u in 0..config.heads {
            let (dqu, dku, dvu) = attend_backward(
                &bt.query.column_block(u * dk, dk),
                &bt.key.column_block(u * dk, dk),
                &bt.value.column_block(u * dk, dk),
                &bt.attention[u],
                &d_concat.column_block(u * dk, dk),
            )?;
            dq.set_column_block(u * dk, &dqu);
            dk_all.set_column_block(u * dk, &dku);
            dv.set_column_block(u * dk, &dvu);
        }
        bt.input.t_matmul_acc(&dq, &mut g.query)?;
        bt.input.t_matmul_acc(&dk_all, &mut g.key)?;
        bt.input.t_matmul_acc(&dv, &mut g.value)?;

        let mut d_input = d_res1;
        d_input.add_assign(&dq.matmul_t(&bp.query)?)?;
        d_input.add_assign(&dk_all.matmul_t(&bp.key)?)?;
        d_input.add_assign(&dv.matmul_t(&bp.value)?)?;
        dh = d_input;
    }

    trace.tokens.t_matmul_acc(&dh, &mut grads.embed_weight)?;
    grads.embed_bias.add_assign(&dh.sum_rows())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{finite_diff_grad, relative_error};

    fn desk_config() -> StnetConfig {
        let mut c = StnetConfig::new(5);
        c.model_width = 8;
        c.heads = 2;
        c.channels = 2;
        c.ffn_width = 16;
        c.window = 3;
        c.dropout = 0.0;
        c
    }

    fn random_tokens(w: usize, width: usize, rng: &mut Rng) -> Matrix {
        let mut m = Matrix::zeros(w, width);
        for v in m.as_mut_slice() {
            *v = rng.uniform_range(-1.5, 1.5);
        }
        m
    }

    #[test]
    fn inference_is_repeatable() {
        let mut cfg = desk_config();
        cfg.dropout = 0.15;
        let mut rng = Rng::new(1);
        let params = StnetParams::init(&cfg, &mut rng).unwrap();
        let tokens = random_tokens(3, 6, &mut rng);
        let (a, _) = forward_tokens(&tokens, &params, &cfg, Mode::Infer, &mut Rng::new(5)).unwrap();
        let (b, _) = forward_tokens(&tokens, &params, &cfg, Mode::Infer, &mut Rng::new(6)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_params_predict_head_bias() {
        let cfg = desk_config();
        let mut params = StnetParams::init(&cfg, &mut Rng::new(2)).unwrap().zeros_like();
        params.head_bias = Matrix::row_vector(&[1.0, -2.0, 3.5, 0.0, 7.0]);
        let tokens = random_tokens(3, 6, &mut Rng::new(3));
        let (y, _) = forward_tokens(&tokens, &params, &cfg, Mode::Train, &mut Rng::new(4)).unwrap();
        assert_eq!(y, vec![1.0, -2.0, 3.5, 0.0, 7.0]);
    }

    #[test]
    fn zero_loss_grad_gives_zero_gradients() {
        let cfg = desk_config();
        let params = StnetParams::init(&cfg, &mut Rng::new(2)).unwrap();
        let tokens = random_tokens(3, 6, &mut Rng::new(3));
        let (_, trace) = forward_tokens(&tokens, &params, &cfg, Mode::Train, &mut Rng::new(4)).unwrap();
        let grads = stnet_backward(&trace, &params, &cfg, &[0.0; 5]).unwrap();
        assert!(grads.tensors().iter().all(|t| t.as_slice().iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn mismatched_trace_is_state_error() {
        let cfg = desk_config();
        let params = StnetParams::init(&cfg, &mut Rng::new(2)).unwrap();
        let tokens = random_tokens(3, 6, &mut Rng::new(3));
        let (_, trace) = forward_tokens(&tokens, &params, &cfg, Mode::Train, &mut Rng::new(4)).unwrap();
        let mut other_cfg = cfg.clone();
        other_cfg.channels = 1;
        let other = StnetParams::init(&other_cfg, &mut Rng::new(2)).unwrap();
        assert!(matches!(
            stnet_backward(&trace, &other, &other_cfg, &[1.0; 5]),
            Err(StnetError::State(_))
        ));
    }

    #[test]
    fn wrong_token_width_is_dimension_error() {
        let cfg = desk_config();
        let params = StnetParams::init(&cfg, &mut Rng::new(2)).unwrap();
        let tokens = random_tokens(3, 4, &mut Rng::new(3));
        assert!(matches!(
            forward_tokens(&tokens, &params, &cfg, Mode::Infer, &mut Rng::new(0)),
            Err(StnetError::Dimension { .. })
        ));
    }

    #[test]
    fn head_bias_gradient_matches_finite_difference() {
        let cfg = desk_config();
        let params = StnetParams::init(&cfg, &mut Rng::new(8)).unwrap();
        let tokens = random_tokens(3, 6, &mut Rng::new(9));
        let c = [0.3, -1.0, 0.7, 2.0, -0.5];
        let loss = |p: &StnetParams| {
            let (y, _) = forward_tokens(&tokens, p, &cfg, Mode::Infer, &mut Rng::new(0)).unwrap();
            y.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>()
        };
        let (_, trace) = forward_tokens(&tokens, &params, &cfg, Mode::Train, &mut Rng::new(0)).unwrap();
        let grads = stnet_backward(&trace, &params, &cfg, &c).unwrap();
        let fd = finite_diff_grad(
            |m| {
                let mut p = params.clone();
                p.blocks[0].query = m.clone();
                loss(&p)
            },
            &params.blocks[0].query,
            1e-5,
        );
        assert!(relative_error(&grads.blocks[0].query, &fd) < 1e-6);
    }
}
