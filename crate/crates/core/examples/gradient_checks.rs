//! Analytic loss gradients against central differences.

use gridsplit::harness::{loss_gradient_checks, GRAD_TOLERANCE};
use gridsplit::numerics::{sigmoid_focal_grad, sigmoid_focal_loss, LossConfig};

fn main() -> gridsplit::Result<()> {
    let cfg = LossConfig::default();
    for x in [-4.0, -1.0, 0.0, 1.0, 4.0] {
        let h = 1e-6;
        let fd = (sigmoid_focal_loss(x + h, true, &cfg) - sigmoid_focal_loss(x - h, true, &cfg)) / (2.0 * h);
        println!(
            "focal(y=1) at {x:>4}: loss {:.6}  grad {:+.6}  fd {:+.6}",
            sigmoid_focal_loss(x, true, &cfg),
            sigmoid_focal_grad(x, true, &cfg),
            fd
        );
    }
    println!("tolerance {GRAD_TOLERANCE:e}");
    for seed in 0..5 {
        let line: Vec<String> = loss_gradient_checks(seed)?
            .iter()
            .map(|c| format!("{} {:.1e}", c.name, c.max_rel_err))
            .collect();
        println!("seed {seed}: {}", line.join(", "));
    }
    Ok(())
}
