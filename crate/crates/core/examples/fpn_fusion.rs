//! Builds the stride-4 feature map from a four-level pyramid, then runs a
//! 3×3 convolution and RoIAlign over one grid box.

use gridsplit::numerics::{conv2d, fuse_fpn, relu, roi_align};
use gridsplit::Tensor;

fn level(h: usize, w: usize, c: usize, scale: f64) -> Tensor {
    Tensor::from_fn(&[h, w, c], |ix| scale * ((ix[0] + 2 * ix[1] + ix[2]) % 5) as f64)
}

fn main() -> gridsplit::Result<()> {
    let c = 4;
    // P2..P5 at strides 4, 8, 16, 32 of a 128×256 image
    let p2 = level(32, 64, c, 1.0);
    let p3 = level(16, 32, c, 0.5);
    let p4 = level(8, 16, c, 0.25);
    let p5 = level(4, 8, c, 0.125);
    let f = fuse_fpn(&p2, &p3, &p4, &p5)?;
    println!("fused feature map {:?}", f.shape());

    // averaging kernel from every input channel to two outputs
    let w = Tensor::full(&[3, 3, c, 2], 1.0 / (9 * c) as f64);
    let g = relu(&conv2d(&f, &w, &[0.0, -1.0])?);
    println!("conv output {:?}, first value {:.4}", g.shape(), g.at3(10, 10, 0));

    let pooled = roi_align(&f, [4.0, 2.0, 20.0, 10.0], 3)?;
    println!("RoIAlign of [4, 2, 20, 10] -> {:?}", pooled.shape());
    for r in 0..3 {
        let row: Vec<String> = (0..3).map(|s| format!("{:.3}", pooled.at3(r, s, 0))).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
