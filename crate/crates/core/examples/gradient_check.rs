//! Compares the hand-written backward pass with central finite differences.
//!
//! Run with `cargo run --release --example gradient_check`.

use stnet::model::{forward_tokens, stnet_backward, Mode, StnetConfig, StnetParams};
use stnet::numeric::{finite_diff_grad, relative_error, Matrix, Rng};
use stnet::train::{rmse, rmse_with_grad};

fn main() -> stnet::Result<()> {
    let mut cfg = StnetConfig::new(4);
    cfg.model_width = 8;
    cfg.heads = 2;
    cfg.channels = 2;
    cfg.ffn_width = 12;
    cfg.window = 3;
    cfg.dropout = 0.0;

    let mut rng = Rng::new(11);
    let params = StnetParams::init(&cfg, &mut rng)?;
    let mut tokens = Matrix::zeros(cfg.window, cfg.token_width());
    for v in tokens.as_mut_slice() {
        *v = rng.uniform_range(-1.0, 1.0);
    }
    let target = [0.3, -0.2, 0.5, 0.0];

    let (y, trace) = forward_tokens(&tokens, &params, &cfg, Mode::Infer, &mut Rng::new(0))?;
    let (loss, dl) = rmse_with_grad(&y, &target)?;
    let analytic = stnet_backward(&trace, &params, &cfg, &dl)?;
    println!("loss {loss:.6}, {} parameters\n", params.parameter_count());

    for (i, (name, tensor)) in params.named_tensors().into_iter().enumerate() {
        let numeric = finite_diff_grad(
            |m| {
                let mut p = params.clone();
                *p.tensors_mut()[i] = m.clone();
                let (y, _) = forward_tokens(&tokens, &p, &cfg, Mode::Infer, &mut Rng::new(0)).unwrap();
                rmse(&y, &target).unwrap()
            },
            tensor,
            1e-5,
        );
        println!("{name:<28} relative error {:.2e}", relative_error(analytic.tensors()[i], &numeric));
    }
    Ok(())
}
