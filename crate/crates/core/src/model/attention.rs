//! Scaled dot-product attention with a causal mask.

use crate::error::{Result, StnetError};
use crate::numeric::{masked_softmax_rows, softmax_rows_backward, Matrix};

/// Lower-triangular permit matrix: entry `(i, j)` is 1 when position `i`
/// may attend to position `j` (`j ≤ i`), 0 otherwise. Forbidden entries
/// act as −∞ scores.
pub fn causal_mask(length: usize) -> Matrix {
    let mut m = Matrix::zeros(length, length);
    for i in 0..length {
        for j in 0..=i {
            m[(i, j)] = 1.0;
        }
    }
    m
}

/// `softmax(q·kᵀ/√d_k)·v` over permitted positions; returns output and weights.
pub(crate) fn attend(q: &Matrix, k: &Matrix, v: &Matrix, mask: &Matrix) -> Result<(Matrix, Matrix)> {
    let w = q.rows();
    if k.rows() != w || v.rows() != w || mask.shape() != (w, w) {
        return Err(StnetError::dim("attention", q.shape(), mask.shape()));
    }
    let scale = 1.0 / (q.cols() as f64).sqrt();
    let mut scores = Matrix::zeros(w, w);
    for i in 0..w {
        let qi = q.row(i);
        for j in 0..w {
            if mask[(i, j)] != 0.0 {
                scores[(i, j)] = scale * qi.iter().zip(k.row(j)).map(|(a, b)| a * b).sum::<f64>();
            }
        }
    }
    let weights = masked_softmax_rows(&scores, mask)?;
    let out = weights.matmul(v)?;
    Ok((out, weights))
}

/// Gradients of [`attend`] with respect to `(q, k, v)`.
pub(crate) fn attend_backward(
    q: &Matrix,
    k: &Matrix,
    v: &Matrix,
    weights: &Matrix,
    d_out: &Matrix,
) -> Result<(Matrix, Matrix, Matrix)> {
    let scale = 1.0 / (q.cols() as f64).sqrt();
    let d_weights = d_out.matmul_t(v)?;
    let dv = weights.t_matmul(d_out)?;
    // masked entries have zero weight, hence zero score gradient
    let d_scores = softmax_rows_backward(weights, &d_weights).scale(scale);
    let dq = d_scores.matmul(k)?;
    let dk = d_scores.t_matmul(q)?;
    Ok((dq, dk, dv))
}

/// One attention head on `tokens` (`W × F`) with `F × d_k` projections.
pub fn attention_head(
    tokens: &Matrix,
    query: &Matrix,
    key: &Matrix,
    value: &Matrix,
    mask: &Matrix,
) -> Result<Matrix> {
    let q = tokens.matmul(query)?;
    let k = tokens.matmul(key)?;
    let v = tokens.matmul(value)?;
    if q.cols() != k.cols() {
        return Err(StnetError::dim("attention_head q/k", q.shape(), k.shape()));
    }
    Ok(attend(&q, &k, &v, mask)?.0)
}

/// Projections of one head.
#[derive(Clone, Debug)]
pub struct HeadWeights {
    pub query: Matrix,
    pub key: Matrix,
    pub value: Matrix,
}

/// `Concat(head₁ … head_U) · W₀`.
pub fn multi_head(
    tokens: &Matrix,
    heads: &[HeadWeights],
    output: &Matrix,
    mask: &Matrix,
) -> Result<Matrix> {
    if heads.is_empty() {
        return Err(StnetError::Config("multi-head attention needs at least one head".into()));
    }
    let outs = heads
        .iter()
        .map(|h| attention_head(tokens, &h.query, &h.key, &h.value, mask))
        .collect::<Result<Vec<_>>>()?;
    let width: usize = outs.iter().map(Matrix::cols).sum();
    if width != output.rows() {
        return Err(StnetError::Config(format!(
            "concatenated head width {width} does not match output projection {}x{}",
            output.rows(),
            output.cols()
        )));
    }
    let mut concat = Matrix::zeros(tokens.rows(), width);
    let mut col = 0;
    for o in &outs {
        concat.set_column_block(col, o);
        col += o.cols();
    }
    concat.matmul(output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Rng;

    fn random(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for v in m.as_mut_slice() {
            *v = rng.uniform_range(-1.0, 1.0);
        }
        m
    }

    #[test]
    fn mask_shapes() {
        assert_eq!(causal_mask(1), Matrix::filled(1, 1, 1.0));
        let m = causal_mask(3);
        assert_eq!(m.row(0), &[1.0, 0.0, 0.0]);
        assert_eq!(m.sum(), 6.0);
    }

    #[test]
    fn single_position_returns_value_row() {
        let mut rng = Rng::new(1);
        let s = random(1, 4, &mut rng);
        let (wq, wk, wv) = (random(4, 2, &mut rng), random(4, 2, &mut rng), random(4, 2, &mut rng));
        let out = attention_head(&s, &wq, &wk, &wv, &causal_mask(1)).unwrap();
        assert_eq!(out, s.matmul(&wv).unwrap());
    }

    #[test]
    fn identical_keys_give_uniform_weights() {
        let q = Matrix::from_rows(&[vec![0.3], vec![-2.0], vec![1.0]]);
        let k = Matrix::filled(3, 1, 0.7);
        let v = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![6.0]]);
        let full = Matrix::filled(3, 3, 1.0);
        let (out, w) = attend(&q, &k, &v, &full).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert!((w[(r, c)] - 1.0 / 3.0).abs() < 1e-15);
            }
            assert!((out[(r, 0)] - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_token_hand_computation() {
        // width 1: q = [1, 2], k = [0.5, 1], v = [10, 20]
        let q = Matrix::from_rows(&[vec![1.0], vec![2.0]]);
        let k = Matrix::from_rows(&[vec![0.5], vec![1.0]]);
        let v = Matrix::from_rows(&[vec![10.0], vec![20.0]]);
        let (out, _) = attend(&q, &k, &v, &causal_mask(2)).unwrap();
        // row 0 sees only itself
        assert_eq!(out[(0, 0)], 10.0);
        // row 1 scores: 2·0.5 = 1, 2·1 = 2
        let (e1, e2) = (1f64.exp(), 2f64.exp());
        let expected = (10.0 * e1 + 20.0 * e2) / (e1 + e2);
        assert!((out[(1, 0)] - expected).abs() < 1e-12);
    }

    #[test]
    fn single_head_identity_mix_equals_head() {
        let mut rng = Rng::new(5);
        let s = random(3, 4, &mut rng);
        let h = HeadWeights {
            query: random(4, 4, &mut rng),
            key: random(4, 4, &mut rng),
            value: random(4, 4, &mut rng),
        };
        let mask = causal_mask(3);
        let mh = multi_head(&s, std::slice::from_ref(&h), &Matrix::identity(4), &mask).unwrap();
        let single = attention_head(&s, &h.query, &h.key, &h.value, &mask).unwrap();
        for (a, b) in mh.as_slice().iter().zip(single.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn width_mismatch_is_config_error() {
        let mut rng = Rng::new(6);
        let s = random(2, 4, &mut rng);
        let h = HeadWeights {
            query: random(4, 2, &mut rng),
            key: random(4, 2, &mut rng),
            value: random(4, 2, &mut rng),
        };
        let err = multi_head(&s, &[h], &Matrix::identity(4), &causal_mask(2)).unwrap_err();
        assert!(matches!(err, StnetError::Config(_)));
    }
}
