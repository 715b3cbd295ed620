//! The end-to-end driver: split, embed, merge, decode, align content.

use super::synth::{OracleOutputs, SATURATION};
use crate::annotation::TextLine;
use crate::error::{Error, Result, StageExt};
use crate::merger::{assign_content, decode_cells, embed_grids, merger_forward, CellSet, EmbedOptions, MergedMaps};
use crate::numerics::Tensor;
use crate::params::{Dense, ModelParams};
use crate::splitter::{
    gather_forward, instance_nms, line_mask_logits, lines_to_grid, mask_to_line, masks_to_lines, GridStructure, Line, DEFAULT_THRESHOLD,
};
use crate::{Axis, FEATURE_STRIDE};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineOptions {
    /// Binarization threshold for start scores and merge votes.
    pub threshold: f64,
    pub embed: EmbedOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            embed: EmbedOptions::default(),
        }
    }
}

pub enum PipelineInput<'a> {
    /// Idealized scores, masks and merge maps; the feature map is unused.
    Oracle(&'a OracleOutputs),
    /// A feature map run through the model.
    Model { features: &'a Tensor, params: &'a ModelParams },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    /// Lattice in feature-map coordinates.
    pub grid: GridStructure,
    /// Cells with quads in image pixels.
    pub cells: CellSet,
    pub warnings: Vec<String>,
    /// Ids of text lines that overlap no cell.
    pub unassigned: Vec<String>,
}

fn oracle_lines(o: &OracleOutputs, axis: Axis, threshold: f64, warnings: &mut Vec<String>) -> Result<Vec<Line>> {
    let starts = o.starts(axis);
    let masks = o.masks(axis);
    let mut lines = Vec::new();
    for p in instance_nms(o.scores(axis), threshold) {
        match starts.iter().position(|&s| s == p) {
            Some(ch) => lines.push(mask_to_line(&masks.channel(ch)?, axis)?),
            None => warnings.push(format!("{axis}: no line instance starts at {p}; pick skipped")),
        }
    }
    Ok(lines)
}

/// `1×1` convolution producing a mask feature branch.
fn branch(f: &Tensor, d: &Dense) -> Result<Tensor> {
    let (h, w, c) = f.dims3()?;
    let out = d.outputs();
    let mut data = Vec::with_capacity(h * w * out);
    for px in f.data().chunks_exact(c) {
        data.extend(d.apply(px)?);
    }
    Tensor::new(vec![h, w, out], data)
}

fn model_lines(f: &Tensor, p: &ModelParams, axis: Axis, threshold: f64) -> Result<Vec<Line>> {
    let (gp, bp) = match axis {
        Axis::Row => (&p.gather_row, &p.branch_row),
        Axis::Col => (&p.gather_col, &p.branch_col),
    };
    let g = gather_forward(f, axis, gp).stage("gather")?;
    let picks = instance_nms(&g.scores, threshold);
    let logits = branch(f, bp)
        .and_then(|b| line_mask_logits(&b, &g.kernels, &picks))
        .stage("masks")?;
    if picks.is_empty() {
        return Ok(Vec::new());
    }
    masks_to_lines(&logits, axis)
}

/// Adds straight border lines until an axis has two.
fn border_fallback(lines: &mut Vec<Line>, axis: Axis, hf: usize, wf: usize, warnings: &mut Vec<String>) {
    let (along, across) = match axis {
        Axis::Row => (wf, hf),
        Axis::Col => (hf, wf),
    };
    let last = across.saturating_sub(1) as f64;
    while lines.len() < 2 {
        let offset = match lines.first() {
            None => 0.0,
            Some(l) if l.mean() > last / 2.0 => 0.0,
            Some(_) => last,
        };
        warnings.push(format!("{axis}: {} line(s) detected; added border line at {offset}", lines.len()));
        lines.push(Line::straight(axis, offset, along));
    }
}

/// Runs the full chain on one table.
///
/// Stage errors are wrapped with the stage name. Recoverable problems
/// (spurious picks, missing borders, merge maps that do not fit the grid,
/// non-rectangular merges, unplaced text) become warnings.
pub fn run_pipeline(input: &PipelineInput, textlines: &[TextLine], opts: &PipelineOptions) -> Result<Prediction> {
    let mut warnings = Vec::new();
    let (hf, wf, _) = match input {
        PipelineInput::Oracle(o) => o.masks_row.dims3(),
        PipelineInput::Model { features, .. } => features.dims3(),
    }
    .stage("input")?;
    let mut lines = Vec::with_capacity(2);
    for axis in [Axis::Row, Axis::Col] {
        let mut l = match input {
            PipelineInput::Oracle(o) => oracle_lines(o, axis, opts.threshold, &mut warnings),
            PipelineInput::Model { features, params } => model_lines(features, params, axis, opts.threshold),
        }
        .stage("lines")?;
        border_fallback(&mut l, axis, hf, wf, &mut warnings);
        lines.push(l);
    }
    let col_lines = lines.pop().expect("two axes");
    let row_lines = lines.pop().expect("two axes");
    let grid = lines_to_grid(row_lines, col_lines).stage("grid")?;
    let (m, n) = grid.shape();

    let maps = match input {
        PipelineInput::Oracle(o) if o.merge.shape() == [m, n, m, n] => {
            MergedMaps::from_logits(o.merge.clone(), opts.threshold).stage("merge")?
        }
        PipelineInput::Oracle(o) => {
            warnings.push(format!(
                "merge maps {:?} do not fit the {m}×{n} grid; keeping every grid as its own cell",
                o.merge.shape()
            ));
            MergedMaps::from_logits(Tensor::full(&[m, n, m, n], -SATURATION), opts.threshold).stage("merge")?
        }
        PipelineInput::Model { features, params } => {
            let e = embed_grids(features, &grid, &params.embed, opts.embed).stage("embed")?;
            let raw = merger_forward(&e, &params.merge).stage("merge")?;
            MergedMaps::from_logits(raw.logits().clone(), opts.threshold).stage("merge")?
        }
    };
    let decoded = decode_cells(&maps, &grid, FEATURE_STRIDE as f64).stage("decode")?;
    warnings.extend(decoded.warnings);
    let mut cells = decoded.cells;
    let unassigned = assign_content(&mut cells, textlines);
    if !unassigned.is_empty() {
        warnings.push(format!("{} text line(s) overlap no cell", unassigned.len()));
    }
    Ok(Prediction {
        grid,
        cells,
        warnings,
        unassigned,
    })
}

/// The five loss terms of one batch.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossTerms {
    pub seg_row: Option<f64>,
    pub seg_col: Option<f64>,
    pub inst_row: Option<f64>,
    pub inst_col: Option<f64>,
    pub merge: Option<f64>,
}

/// Unweighted sum of the segmentation, instance and merge losses.
pub fn total_objective(t: &LossTerms) -> Result<f64> {
    let terms = [
        ("seg_row", t.seg_row),
        ("seg_col", t.seg_col),
        ("inst_row", t.inst_row),
        ("inst_col", t.inst_col),
        ("merge", t.merge),
    ];
    let mut sum = 0.0;
    for (name, v) in terms {
        let v = v.ok_or_else(|| Error::Missing(format!("loss term `{name}`")))?;
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("loss term `{name}` = {v}")));
        }
        sum += v;
    }
    Ok(sum)
}

/// Loss terms of oracle outputs against the labels of their annotation.
pub fn oracle_losses(a: &crate::annotation::TableAnnotation, o: &OracleOutputs, cfg: &crate::numerics::LossConfig) -> Result<LossTerms> {
    use crate::labelgen::{gen_instance_vectors, gen_merge_labels, gen_separator_masks};
    use crate::merger::loss_merge;
    use crate::splitter::{loss_instance, loss_segmentation};
    let masks = gen_separator_masks(a)?;
    let inst = gen_instance_vectors(&masks)?;
    Ok(LossTerms {
        seg_row: Some(loss_segmentation(&o.masks_row, &masks.row, cfg)?),
        seg_col: Some(loss_segmentation(&o.masks_col, &masks.col, cfg)?),
        inst_row: Some(loss_instance(&o.scores_row, &inst.p_row)?),
        inst_col: Some(loss_instance(&o.scores_col, &inst.p_col)?),
        merge: Some(loss_merge(&o.merge, &gen_merge_labels(a)?, cfg)?),
    })
}
