//! Merge stage with random weights on a 2×3 lattice, then decoding votes into
//! cells. Hand-made votes show the rectangle guard.

use gridsplit::merger::{decode_cells, embed_grids, merger_forward, EmbedOptions, MergedMaps};
use gridsplit::params::{ModelConfig, ModelParams};
use gridsplit::splitter::{lines_to_grid, GridStructure, Line};
use gridsplit::{Axis, Tensor};

fn lattice(m: usize, n: usize) -> gridsplit::Result<GridStructure> {
    let rows = (0..=m).map(|i| Line::straight(Axis::Row, 6.0 * i as f64, 10 * n + 1)).collect();
    let cols = (0..=n).map(|j| Line::straight(Axis::Col, 10.0 * j as f64, 6 * m + 1)).collect();
    lines_to_grid(rows, cols)
}

fn show(label: &str, maps: &MergedMaps, grid: &GridStructure) -> gridsplit::Result<()> {
    let d = decode_cells(maps, grid, 4.0)?;
    println!("{label}:");
    for c in &d.cells.cells {
        println!("  rows {}..={} cols {}..={}", c.row_start, c.row_end, c.col_start, c.col_end);
    }
    for w in d.warnings {
        println!("  warning: {w}");
    }
    Ok(())
}

fn main() -> gridsplit::Result<()> {
    let grid = lattice(2, 3)?;
    let features = Tensor::from_fn(&[13, 31, 4], |ix| ((ix[0] * 3 + ix[1] + ix[2]) % 7) as f64 / 7.0);
    let params = ModelParams::random(
        ModelConfig {
            channels: 4,
            dim: 16,
            roi: 3,
        },
        1,
    );
    let e = embed_grids(&features, &grid, &params.embed, EmbedOptions::default())?;
    println!("grid embeddings {:?}", e.e.shape());
    let maps = merger_forward(&e, &params.merge)?;
    println!("merged maps {:?}", maps.logits().shape());
    show("random weights", &maps, &grid)?;

    // (0,0)+(0,1) merge; (1,0),(1,1),(0,0) form an L and must not
    let g = 6;
    let vote = |pairs: &[(usize, usize)]| {
        let mut t = vec![-8.0; g * g];
        for &(a, b) in pairs {
            t[a * g + b] = 8.0;
            t[b * g + a] = 8.0;
        }
        Tensor::new(vec![2, 3, 2, 3], t)
    };
    show("rectangular votes", &MergedMaps::from_logits(vote(&[(0, 1)])?, 0.5)?, &grid)?;
    show("L-shaped votes", &MergedMaps::from_logits(vote(&[(0, 3), (3, 4)])?, 0.5)?, &grid)?;
    Ok(())
}
