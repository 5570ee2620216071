use crate::error::{Result, StnetError};

fn check(pred: &[f64], truth: &[f64]) -> Result<()> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(StnetError::dim("metric", (1, pred.len()), (1, truth.len())));
    }
    Ok(())
}

/// Mean squared error over depth layers.
pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    Ok(pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / pred.len() as f64)
}

/// Root mean squared error over depth layers; also the training loss.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    Ok(mse(pred, truth)?.sqrt())
}

/// Mean absolute error over depth layers.
pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check(pred, truth)?;
    Ok(pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / pred.len() as f64)
}

/// RMSE loss and its gradient with respect to `pred`.
///
/// At zero error the gradient is taken as zero.
pub fn rmse_with_grad(pred: &[f64], truth: &[f64]) -> Result<(f64, Vec<f64>)> {
    let loss = rmse(pred, truth)?;
    let z = pred.len() as f64;
    let grad = if loss > 0.0 {
        pred.iter()
            .zip(truth)
            .map(|(p, t)| (p - t) / (z * loss))
            .collect()
    } else {
        vec![0.0; pred.len()]
    };
    Ok((loss, grad))
}
