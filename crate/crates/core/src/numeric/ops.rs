//! Differentiable primitives with hand-derived backward passes.

use crate::error::{Result, StnetError};
use crate::numeric::{Matrix, Rng};

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(x: &Matrix) -> Matrix {
    let mut out = x.clone();
    for r in 0..out.rows() {
        softmax_in_place(out.row_mut(r), None);
    }
    out
}

/// Row-wise softmax where entries with `permit == 0` are treated as −∞.
///
/// Forbidden entries get exactly zero mass and are never read, so their
/// values cannot influence the result. Every row must permit at least one
/// entry.
pub fn masked_softmax_rows(x: &Matrix, permit: &Matrix) -> Result<Matrix> {
    if x.shape() != permit.shape() {
        return Err(StnetError::dim("masked_softmax_rows", x.shape(), permit.shape()));
    }
    let mut out = x.clone();
    for r in 0..out.rows() {
        let allowed: Vec<bool> = permit.row(r).iter().map(|&p| p != 0.0).collect();
        if !allowed.iter().any(|&a| a) {
            return Err(StnetError::Config(format!("mask row {r} permits no entries")));
        }
        softmax_in_place(out.row_mut(r), Some(&allowed));
    }
    Ok(out)
}

fn softmax_in_place(row: &mut [f64], allowed: Option<&[bool]>) {
    let ok = |j: usize| allowed.is_none_or(|a| a[j]);
    let max = row
        .iter()
        .enumerate()
        .filter(|(j, _)| ok(*j))
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (j, v) in row.iter_mut().enumerate() {
        if ok(j) {
            *v = (*v - max).exp();
            total += *v;
        } else {
            *v = 0.0;
        }
    }
    for v in row.iter_mut() {
        *v /= total;
    }
}

/// Backward of row-wise softmax given its output `y` and upstream `dy`.
pub fn softmax_rows_backward(y: &Matrix, dy: &Matrix) -> Matrix {
    let mut dx = Matrix::zeros(y.rows(), y.cols());
    for r in 0..y.rows() {
        let yr = y.row(r);
        let dyr = dy.row(r);
        let inner: f64 = yr.iter().zip(dyr).map(|(a, b)| a * b).sum();
        for (j, d) in dx.row_mut(r).iter_mut().enumerate() {
            *d = yr[j] * (dyr[j] - inner);
        }
    }
    dx
}

/// Values cached by [`layer_norm`] for its backward pass.
#[derive(Clone, Debug)]
pub struct LayerNormCache {
    pub normalized: Matrix,
    pub inv_std: Vec<f64>,
}

/// Per-row normalization to zero mean / unit variance, then `gain ⊙ x̂ + bias`.
pub fn layer_norm(
    x: &Matrix,
    gain: &Matrix,
    bias: &Matrix,
    eps: f64,
) -> Result<(Matrix, LayerNormCache)> {
    let f = x.cols();
    if gain.shape() != (1, f) {
        return Err(StnetError::dim("layer_norm gain", x.shape(), gain.shape()));
    }
    if bias.shape() != (1, f) {
        return Err(StnetError::dim("layer_norm bias", x.shape(), bias.shape()));
    }
    if !(eps > 0.0) {
        return Err(StnetError::Config(format!("layer_norm eps must be > 0, got {eps}")));
    }
    let mut normalized = Matrix::zeros(x.rows(), f);
    let mut out = Matrix::zeros(x.rows(), f);
    let mut inv_std = Vec::with_capacity(x.rows());
    for r in 0..x.rows() {
        let row = x.row(r);
        let mean = row.iter().sum::<f64>() / f as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / f as f64;
        let is = 1.0 / (var + eps).sqrt();
        inv_std.push(is);
        for j in 0..f {
            let n = (row[j] - mean) * is;
            normalized[(r, j)] = n;
            out[(r, j)] = gain.as_slice()[j] * n + bias.as_slice()[j];
        }
    }
    Ok((out, LayerNormCache { normalized, inv_std }))
}

/// Gradients of [`layer_norm`]: `(dx, dgain, dbias)`.
pub fn layer_norm_backward(
    dy: &Matrix,
    gain: &Matrix,
    cache: &LayerNormCache,
) -> (Matrix, Matrix, Matrix) {
    let (rows, f) = dy.shape();
    let mut dx = Matrix::zeros(rows, f);
    let mut dgain = Matrix::zeros(1, f);
    let mut dbias = Matrix::zeros(1, f);
    let g = gain.as_slice();
    for r in 0..rows {
        let dyr = dy.row(r);
        let nr = cache.normalized.row(r);
        let mut mean_dn = 0.0;
        let mut mean_dn_n = 0.0;
        for j in 0..f {
            let dn = dyr[j] * g[j];
            mean_dn += dn;
            mean_dn_n += dn * nr[j];
            dgain.as_mut_slice()[j] += dyr[j] * nr[j];
            dbias.as_mut_slice()[j] += dyr[j];
        }
        mean_dn /= f as f64;
        mean_dn_n /= f as f64;
        let is = cache.inv_std[r];
        for (j, d) in dx.row_mut(r).iter_mut().enumerate() {
            *d = is * (dyr[j] * g[j] - mean_dn - nr[j] * mean_dn_n);
        }
    }
    (dx, dgain, dbias)
}

pub fn relu(x: &Matrix) -> Matrix {
    x.map(|v| v.max(0.0))
}

/// Passes `dy` where the forward input was strictly positive (subgradient 0 at 0).
pub fn relu_backward(pre: &Matrix, dy: &Matrix) -> Matrix {
    let mut dx = dy.clone();
    for (d, &p) in dx.as_mut_slice().iter_mut().zip(pre.as_slice()) {
        if p <= 0.0 {
            *d = 0.0;
        }
    }
    dx
}

/// Inverted-dropout mask: kept entries hold `1/(1−rate)`, dropped hold 0.
/// Outside training the mask is all ones.
pub fn dropout_mask(
    rows: usize,
    cols: usize,
    rate: f64,
    rng: &mut Rng,
    training: bool,
) -> Result<Matrix> {
    if !(0.0..1.0).contains(&rate) {
        return Err(StnetError::Config(format!(
            "dropout rate must lie in [0, 1), got {rate}"
        )));
    }
    if !training || rate == 0.0 {
        return Ok(Matrix::filled(rows, cols, 1.0));
    }
    let keep = 1.0 - rate;
    let scale = 1.0 / keep;
    let mut m = Matrix::zeros(rows, cols);
    for v in m.as_mut_slice() {
        *v = if rng.uniform() < keep { scale } else { 0.0 };
    }
    Ok(m)
}

/// `x · w + b` with `b` broadcast over rows.
pub fn affine(x: &Matrix, w: &Matrix, b: &Matrix) -> Result<Matrix> {
    let mut y = x.matmul(w)?;
    y.add_row_broadcast(b)?;
    Ok(y)
}

/// Gradients of [`affine`]: `(dx, dw, db)`.
pub fn affine_backward(x: &Matrix, w: &Matrix, dy: &Matrix) -> Result<(Matrix, Matrix, Matrix)> {
    let dx = dy.matmul_t(w)?;
    let dw = x.t_matmul(dy)?;
    Ok((dx, dw, dy.sum_rows()))
}

/// Glorot/Xavier uniform initialization for a `fan_in × fan_out` weight.
pub fn xavier_uniform(fan_in: usize, fan_out: usize, rng: &mut Rng) -> Matrix {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let mut m = Matrix::zeros(fan_in, fan_out);
    for v in m.as_mut_slice() {
        *v = rng.uniform_range(-limit, limit);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn softmax_equal_values_is_uniform() {
        let y = softmax_rows(&Matrix::row_vector(&[2.5, 2.5, 2.5]));
        for &v in y.as_slice() {
            assert!(close(v, 1.0 / 3.0, 1e-15));
        }
    }

    #[test]
    fn softmax_zero_ln2() {
        let y = softmax_rows(&Matrix::row_vector(&[0.0, 2f64.ln()]));
        assert!(close(y[(0, 0)], 1.0 / 3.0, 1e-15));
        assert!(close(y[(0, 1)], 2.0 / 3.0, 1e-15));
    }

    #[test]
    fn softmax_large_inputs_do_not_overflow() {
        let y = softmax_rows(&Matrix::row_vector(&[1000.0, 0.0]));
        assert!(y.is_finite());
        assert!(close(y[(0, 0)], 1.0, 1e-300_f64.max(1e-15)));
        assert!(y[(0, 1)] < 1e-300);
    }

    #[test]
    fn masked_softmax_gives_zero_mass_to_forbidden() {
        let x = Matrix::from_rows(&[vec![1.0, 5.0, -2.0]]);
        let permit = Matrix::from_rows(&[vec![1.0, 0.0, 1.0]]);
        let y = masked_softmax_rows(&x, &permit).unwrap();
        assert_eq!(y[(0, 1)], 0.0);
        assert!(close(y.sum(), 1.0, 1e-15));
        let empty = Matrix::zeros(1, 3);
        assert!(masked_softmax_rows(&x, &empty).is_err());
    }

    #[test]
    fn layer_norm_constant_row_is_zero() {
        let x = Matrix::row_vector(&[4.0, 4.0, 4.0, 4.0]);
        let (y, _) = layer_norm(&x, &Matrix::filled(1, 4, 1.0), &Matrix::zeros(1, 4), 1e-5)
            .unwrap();
        assert!(y.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn layer_norm_two_values() {
        let x = Matrix::row_vector(&[1.0, 3.0]);
        let (y, _) = layer_norm(&x, &Matrix::filled(1, 2, 1.0), &Matrix::zeros(1, 2), 1e-12)
            .unwrap();
        assert!(close(y[(0, 0)], -1.0, 1e-9));
        assert!(close(y[(0, 1)], 1.0, 1e-9));
    }

    #[test]
    fn layer_norm_zero_gain_yields_bias() {
        let x = Matrix::from_rows(&[vec![0.3, -7.0, 2.0], vec![1.0, 1.5, 9.0]]);
        let bias = Matrix::row_vector(&[0.5, -1.0, 2.0]);
        let (y, _) = layer_norm(&x, &Matrix::zeros(1, 3), &bias, 1e-5).unwrap();
        for r in 0..2 {
            assert_eq!(y.row(r), bias.as_slice());
        }
    }

    #[test]
    fn layer_norm_rejects_bad_eps() {
        let x = Matrix::row_vector(&[1.0, 2.0]);
        assert!(layer_norm(&x, &Matrix::filled(1, 2, 1.0), &Matrix::zeros(1, 2), 0.0).is_err());
    }

    #[test]
    fn relu_cases() {
        let y = relu(&Matrix::row_vector(&[-1.0, 0.0, 2.0]));
        assert_eq!(y.as_slice(), &[0.0, 0.0, 2.0]);
        let neg = Matrix::row_vector(&[-3.0, -0.1]);
        assert!(relu(&neg).as_slice().iter().all(|&v| v == 0.0));
        let x = Matrix::row_vector(&[-2.0, 0.5, 3.0, -0.25]);
        assert_eq!(relu(&relu(&x)), relu(&x));
    }

    #[test]
    fn dropout_contracts() {
        let mut rng = Rng::new(1);
        let m = dropout_mask(3, 4, 0.0, &mut rng, true).unwrap();
        assert!(m.as_slice().iter().all(|&v| v == 1.0));
        let m = dropout_mask(3, 4, 0.15, &mut rng, false).unwrap();
        assert!(m.as_slice().iter().all(|&v| v == 1.0));
        assert!(dropout_mask(1, 1, 1.0, &mut rng, true).is_err());
        assert!(dropout_mask(1, 1, -0.1, &mut rng, true).is_err());
    }

    #[test]
    fn dropout_keep_fraction_and_expectation() {
        let mut rng = Rng::new(2024);
        let n = 100_000;
        let m = dropout_mask(1, n, 0.15, &mut rng, true).unwrap();
        let kept = m.as_slice().iter().filter(|&&v| v != 0.0).count() as f64 / n as f64;
        assert!((kept - 0.85).abs() <= 0.01, "keep fraction {kept}");
        let mean = m.sum() / n as f64;
        assert!((mean - 1.0).abs() <= 0.01, "mask mean {mean}");
    }
}
