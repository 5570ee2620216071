use crate::numeric::Matrix;

/// Central-difference gradient of a scalar function at `x`.
///
/// Entry `(i, j)` is `(f(x + h·eᵢⱼ) − f(x − h·eᵢⱼ)) / 2h`.
pub fn finite_diff_grad<F>(mut f: F, x: &Matrix, h: f64) -> Matrix
where
    F: FnMut(&Matrix) -> f64,
{
    assert!(h > 0.0, "finite-difference step must be positive");
    let mut probe = x.clone();
    let mut grad = Matrix::zeros(x.rows(), x.cols());
    for k in 0..x.len() {
        let orig = probe.as_slice()[k];
        probe.as_mut_slice()[k] = orig + h;
        let plus = f(&probe);
        probe.as_mut_slice()[k] = orig - h;
        let minus = f(&probe);
        probe.as_mut_slice()[k] = orig;
        grad.as_mut_slice()[k] = (plus - minus) / (2.0 * h);
    }
    grad
}
