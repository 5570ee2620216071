use crate::error::{Result, StnetError};
use crate::numeric::Matrix;

/// Moment buffers and step counter for one parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    first_moment: Matrix,
    second_moment: Matrix,
    step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    /// Zeroed state with the usual defaults (β1 = 0.9, β2 = 0.999, ε = 1e-8).
    pub fn new(rows: usize, cols: usize) -> Self {
        Self::with_constants(rows, cols, 0.9, 0.999, 1e-8)
    }

    pub fn with_constants(rows: usize, cols: usize, beta1: f64, beta2: f64, eps: f64) -> Self {
        AdamState {
            first_moment: Matrix::zeros(rows, cols),
            second_moment: Matrix::zeros(rows, cols),
            step: 0,
            beta1,
            beta2,
            eps,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &Matrix {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &Matrix {
        &self.second_moment
    }
}

/// Bias-corrected Adam update applied to `param` in place.
pub fn adam_step(param: &mut Matrix, grad: &Matrix, state: &mut AdamState, lr: f64) -> Result<()> {
    if param.shape() != grad.shape() {
        return Err(StnetError::dim("adam_step", param.shape(), grad.shape()));
    }
    if param.shape() != state.first_moment.shape() {
        return Err(StnetError::dim(
            "adam_step state",
            param.shape(),
            state.first_moment.shape(),
        ));
    }
    if !(lr > 0.0) {
        return Err(StnetError::Config(format!("learning rate must be > 0, got {lr}")));
    }
    state.step += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(state.step as i32);
    let c2 = 1.0 - b2.powi(state.step as i32);
    let m = state.first_moment.as_mut_slice();
    let v = state.second_moment.as_mut_slice();
    for (i, (p, &g)) in param
        .as_mut_slice()
        .iter_mut()
        .zip(grad.as_slice())
        .enumerate()
    {
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_param() {
        let mut p = Matrix::row_vector(&[0.5, -1.0]);
        let mut s = AdamState::new(1, 2);
        adam_step(&mut p, &Matrix::zeros(1, 2), &mut s, 0.001).unwrap();
        assert_eq!(p.as_slice(), &[0.5, -1.0]);
        assert_eq!(s.step(), 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // m̂ = 1, v̂ = 1 after bias correction, so Δ = −lr / (1 + ε).
        let mut p = Matrix::row_vector(&[0.0]);
        let mut s = AdamState::new(1, 1);
        adam_step(&mut p, &Matrix::row_vector(&[1.0]), &mut s, 0.001).unwrap();
        let expected = -0.001 / (1.0 + 1e-8);
        assert!((p[(0, 0)] - expected).abs() < 1e-15);
    }

    #[test]
    fn step_counter_increments() {
        let mut p = Matrix::zeros(2, 2);
        let mut s = AdamState::new(2, 2);
        for k in 1..=5 {
            adam_step(&mut p, &Matrix::filled(2, 2, 0.3), &mut s, 0.01).unwrap();
            assert_eq!(s.step(), k);
        }
    }

    #[test]
    fn deterministic_runs_are_bit_identical() {
        let run = || {
            let mut p = Matrix::row_vector(&[0.1, 0.2, 0.3]);
            let mut s = AdamState::new(1, 3);
            for k in 0..50 {
                let g = p.map(|x| 2.0 * x + k as f64 * 0.01);
                adam_step(&mut p, &g, &mut s, 0.01).unwrap();
            }
            p
        };
        let a = run();
        let b = run();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn mismatched_shapes_rejected() {
        let mut p = Matrix::zeros(2, 2);
        let mut s = AdamState::new(2, 2);
        assert!(adam_step(&mut p, &Matrix::zeros(2, 3), &mut s, 0.01).is_err());
        let mut s_bad = AdamState::new(3, 3);
        assert!(adam_step(&mut p, &Matrix::zeros(2, 2), &mut s_bad, 0.01).is_err());
    }
}
