//! Writes tensors to a SEM2 stream and reads them back.
//!
//! Values are stored as little-endian f32, so a round trip is exact only for
//! values representable in single precision.

use gridsplit::numerics::io;
use gridsplit::Tensor;

fn main() -> gridsplit::Result<()> {
    let a = Tensor::from_fn(&[2, 3, 4], |ix| (ix[0] * 12 + ix[1] * 4 + ix[2]) as f64 * 0.25);
    let b = Tensor::full(&[5], 0.1);

    let mut buf = Vec::new();
    io::write_tensor(&mut buf, &a)?;
    io::write_tensor(&mut buf, &b)?;
    println!("two tensors in {} bytes", buf.len());

    let back = io::read_all(&mut buf.as_slice())?;
    println!("a: shape {:?}, max diff {}", back[0].shape(), back[0].max_abs_diff(&a)?);
    // 0.1 is not an f32, so it comes back rounded
    println!("b: shape {:?}, max diff {:.2e}", back[1].shape(), back[1].max_abs_diff(&b)?);

    let dir = std::env::temp_dir().join("gridsplit_tensor_io");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("a.sem2");
    io::save(&path, &a)?;
    assert_eq!(io::load(&path)?, a);
    println!("saved and reloaded {}", path.display());
    Ok(())
}
