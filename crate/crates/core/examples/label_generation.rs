//! Training targets for a hand-written 2×3 table whose header spans two
//! columns.

use gridsplit::annotation::parse_annotation;
use gridsplit::labelgen::{channel_map, gen_instance_vectors, gen_merge_labels, gen_separator_masks};

const TABLE: &str = r#"{
  "image": {"width": 192, "height": 96},
  "cells": [
    {"quad": [8, 8, 120, 8, 120, 48, 8, 48], "row_start": 0, "row_end": 0, "col_start": 0, "col_end": 1, "textline_ids": ["h0"]},
    {"quad": [120, 8, 184, 8, 184, 48, 120, 48], "row_start": 0, "row_end": 0, "col_start": 2, "col_end": 2, "textline_ids": ["h1"]},
    {"quad": [8, 48, 64, 48, 64, 88, 8, 88], "row_start": 1, "row_end": 1, "col_start": 0, "col_end": 0, "textline_ids": ["a"]},
    {"quad": [64, 48, 120, 48, 120, 88, 64, 88], "row_start": 1, "row_end": 1, "col_start": 1, "col_end": 1, "textline_ids": ["b"]},
    {"quad": [120, 48, 184, 48, 184, 88, 120, 88], "row_start": 1, "row_end": 1, "col_start": 2, "col_end": 2, "textline_ids": ["y"]}
  ],
  "textlines": [
    {"id": "h0", "content": "Header", "quad": [20, 20, 108, 20, 108, 36, 20, 36]},
    {"id": "h1", "content": "Year", "quad": [132, 20, 172, 20, 172, 36, 132, 36]},
    {"id": "a", "content": "a", "quad": [20, 60, 52, 60, 52, 76, 20, 76]},
    {"id": "b", "content": "b", "quad": [76, 60, 108, 60, 108, 76, 76, 76]},
    {"id": "y", "content": "2024", "quad": [132, 60, 172, 60, 172, 76, 132, 76]}
  ]
}"#;

fn main() -> gridsplit::Result<()> {
    let a = parse_annotation(TABLE)?;
    let masks = gen_separator_masks(&a)?;
    println!("row masks {:?}, col masks {:?}", masks.row.shape(), masks.col.shape());

    let inst = gen_instance_vectors(&masks)?;
    let on = |v: &[bool]| v.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect::<Vec<_>>();
    println!("row start points at y = {:?}", on(&inst.p_row));
    println!("col start points at x = {:?}", on(&inst.p_col));

    // bands fill the gaps between text; under the spanning header the
    // boundary between columns 0 and 1 keeps the width of the gap below it
    let (hf, wf, _) = masks.col.dims3()?;
    for y in [6, 16] {
        let xs: Vec<usize> = (0..wf).filter(|&x| masks.col.at3(y, x, 1) > 0.5).collect();
        println!("column boundary 1 at feature row {y}/{hf}: x {:?}..={:?}", xs.first(), xs.last());
    }

    let merge = gen_merge_labels(&a)?;
    for i in 0..merge.rows() {
        for j in 0..merge.cols() {
            let map: Vec<u8> = merge.map(i, j).into_iter().map(u8::from).collect();
            println!("grid ({i}, {j}) merges with {map:?}");
        }
    }
    println!("{}", serde_json::to_string(&channel_map(&masks)?)?);
    Ok(())
}
