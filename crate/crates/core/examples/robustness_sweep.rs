//! Mean TEDS-Struct of the oracle pipeline as its outputs get noisier.

use gridsplit::harness::{robustness_sweep, PerturbKind};

fn main() -> gridsplit::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8u64);
    for kind in PerturbKind::ALL {
        let levels = kind.sweep_levels();
        let fine: Vec<f64> = (0..=4).map(|k| levels[2] * k as f64 / 4.0).collect();
        for p in robustness_sweep(0..n, kind, &fine)? {
            println!(
                "{:<12} {:>6.2}  TEDS-Struct {:.3}  failures {}/{}",
                p.kind.to_string(),
                p.magnitude,
                p.mean_teds_struct,
                p.failures,
                p.samples
            );
        }
    }
    Ok(())
}
