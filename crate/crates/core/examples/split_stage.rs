//! The split stage on a synthetic table: start-point NMS, mask-to-line
//! conversion and the grid lattice. A randomly initialized Gather module
//! shows the shapes a trained model would produce.

use gridsplit::harness::{generate, SynthSpec};
use gridsplit::params::random_gather;
use gridsplit::splitter::{gather_forward, instance_nms, lines_to_grid, masks_to_lines, DEFAULT_THRESHOLD};
use gridsplit::Axis;
use rand::SeedableRng;

fn main() -> gridsplit::Result<()> {
    let spec = SynthSpec {
        channels: 8,
        curvature: 12.0,
        ..SynthSpec::new(3, 4, 7)
    };
    let (a, o) = generate(&spec)?;
    println!("table {}×{} px, features {:?}", a.image.width, a.image.height, o.features.shape());

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    for axis in [Axis::Row, Axis::Col] {
        let g = gather_forward(&o.features, axis, &random_gather(axis, 8, &mut rng))?;
        println!(
            "gather {axis}: context {:?}, kernels {:?}, {} scores",
            g.context.shape(),
            g.kernels.shape(),
            g.scores.len()
        );
    }

    let mut lines = Vec::new();
    for axis in [Axis::Row, Axis::Col] {
        let picks = instance_nms(o.scores(axis), DEFAULT_THRESHOLD);
        println!("{axis} start points {picks:?}, oracle {:?}", o.starts(axis));
        lines.push(masks_to_lines(o.masks(axis), axis)?);
    }
    let col_lines = lines.pop().unwrap();
    let row_lines = lines.pop().unwrap();
    for l in &row_lines {
        let ys = l.points().iter().map(|p| p.1);
        println!(
            "row line y range {:.0}..{:.0}",
            ys.clone().fold(f64::MAX, f64::min),
            ys.fold(f64::MIN, f64::max)
        );
    }

    let grid = lines_to_grid(row_lines, col_lines)?;
    println!("lattice {}×{}", grid.m, grid.n);
    for i in 0..grid.m {
        let row: Vec<String> = (0..grid.n).map(|j| format!("{:?}", grid.box_at(i, j).map(|v| v.round()))).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
