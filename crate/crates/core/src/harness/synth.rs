//! Synthetic tables and the outputs a perfect model would produce on them.
//!
//! Tables are laid out on a pixel lattice with an 8 px margin and cell edges
//! on multiples of 4. Interior separators may bend by up to `curvature` px
//! along a half sine shared by every line of the table, so neighbouring lines
//! never cross. Each non-blank cell holds one text line placed clear of both
//! the curved separators and the straight cell-quad edges.

use crate::annotation::{CellAnn, ImageSize, Quad, TableAnnotation, TextLine};
use crate::error::{Error, Result};
use crate::labelgen::{self, ChannelMap};
use crate::merger::MergedMaps;
use crate::numerics::Tensor;
use crate::Axis;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Magnitude of the oracle's saturated logits.
pub const SATURATION: f64 = 12.0;

/// Logit decrease per feature pixel away from a band's centre line. The
/// per-row (per-column) argmax lands on the centre, and stays near it under
/// moderate noise where a separator is hidden by a spanning cell.
pub const MASK_SLOPE: f64 = 1.0;

const MARGIN: f64 = 8.0;
/// Clearance between text and the cell edges.
const PAD: f64 = 6.0;
const MIN_TEXT: f64 = 4.0;
const MAX_ATTEMPTS: usize = 256;

/// Inclusive pixel ranges for cell width and height.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellPx {
    pub w: [u32; 2],
    pub h: [u32; 2],
}

impl Default for CellPx {
    fn default() -> Self {
        Self { w: [48, 120], h: [28, 48] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub span_prob: f64,
    #[serde(default = "default_max_span")]
    pub max_span: usize,
    #[serde(default)]
    pub cell_px: CellPx,
    #[serde(default)]
    pub wireless: bool,
    /// Largest separator bend in pixels.
    #[serde(default)]
    pub curvature: f64,
    #[serde(default)]
    pub seed: u64,
    /// Probability that a cell has no text.
    #[serde(default = "default_blank_prob")]
    pub blank_prob: f64,
    /// Channels of the random feature map.
    #[serde(default = "default_channels")]
    pub channels: usize,
}

fn default_max_span() -> usize {
    1
}

fn default_blank_prob() -> f64 {
    0.1
}

fn default_channels() -> usize {
    256
}

impl SynthSpec {
    pub fn new(rows: usize, cols: usize, seed: u64) -> Self {
        Self {
            rows,
            cols,
            span_prob: 0.0,
            max_span: 1,
            cell_px: CellPx::default(),
            wireless: false,
            curvature: 0.0,
            seed,
            blank_prob: default_blank_prob(),
            channels: default_channels(),
        }
    }

    /// A spec drawn from the mix used by the closure and robustness runs:
    /// 1 to 6 rows and columns, spans, wired and wireless, curvature 0, 2
    /// or 5 px.
    pub fn randomized(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        Self {
            rows: rng.gen_range(1..=6),
            cols: rng.gen_range(1..=6),
            span_prob: *[0.0, 0.2, 0.4].choose(&mut rng).expect("non-empty"),
            max_span: rng.gen_range(1..=3),
            cell_px: CellPx::default(),
            wireless: rng.gen_bool(0.5),
            curvature: *[0.0, 2.0, 5.0].choose(&mut rng).expect("non-empty"),
            seed,
            blank_prob: default_blank_prob(),
            channels: default_channels(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.rows == 0 || self.cols == 0 {
            return bad(format!("{}×{} table", self.rows, self.cols));
        }
        if !(0.0..1.0).contains(&self.span_prob) || !(0.0..1.0).contains(&self.blank_prob) {
            return bad("span_prob and blank_prob must lie in [0, 1)".into());
        }
        if self.max_span == 0 || self.channels == 0 {
            return bad("max_span and channels must be positive".into());
        }
        if !(self.curvature >= 0.0 && self.curvature.is_finite()) {
            return bad(format!("curvature {}", self.curvature));
        }
        for [lo, hi] in [self.cell_px.w, self.cell_px.h] {
            if lo > hi || lo == 0 {
                return bad(format!("cell size range [{lo}, {hi}]"));
            }
            if (lo as f64) - self.curvature - 2.0 * PAD < MIN_TEXT {
                return Err(Error::Generation(format!(
                    "cells of {lo} px leave no room for text with {} px curvature",
                    self.curvature
                )));
            }
        }
        Ok(())
    }
}

/// What an ideal model emits for one table.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleOutputs {
    /// Random `Hf×Wf×C` feature map; oracle decoding never reads it.
    pub features: Tensor,
    /// Start-point logits: `+SATURATION` at each line start.
    pub scores_row: Vec<f64>,
    pub scores_col: Vec<f64>,
    /// `Hf×Wf×K` mask logits, one channel per separator.
    pub masks_row: Tensor,
    pub masks_col: Tensor,
    /// `M×N×M×N` merge logits.
    pub merge: Tensor,
    /// Start index of every mask channel: the instance a picked score
    /// position selects.
    pub channels: ChannelMap,
}

impl OracleOutputs {
    pub fn scores(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::Row => &self.scores_row,
            Axis::Col => &self.scores_col,
        }
    }

    pub fn masks(&self, axis: Axis) -> &Tensor {
        match axis {
            Axis::Row => &self.masks_row,
            Axis::Col => &self.masks_col,
        }
    }

    /// Channel start positions in channel order.
    pub fn starts(&self, axis: Axis) -> Vec<usize> {
        let entries = match axis {
            Axis::Row => &self.channels.row_channels,
            Axis::Col => &self.channels.col_channels,
        };
        entries.iter().map(|e| e.start).collect()
    }
}

struct Layout {
    /// `(r0, r1, c0, c1, blank)`.
    cells: Vec<(usize, usize, usize, usize, bool)>,
}

fn layout(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Option<Layout> {
    let (m, n) = (spec.rows, spec.cols);
    let mut owned = vec![false; m * n];
    let mut cells = Vec::new();
    for r in 0..m {
        for c in 0..n {
            if owned[r * n + c] {
                continue;
            }
            let (mut rs, mut cs) = (1, 1);
            if spec.max_span > 1 && rng.gen_bool(spec.span_prob) {
                rs = rng.gen_range(1..=spec.max_span);
                cs = rng.gen_range(1..=spec.max_span);
            }
            cs = (0..cs.min(n - c)).take_while(|&k| !owned[r * n + c + k]).count();
            rs = (0..rs.min(m - r))
                .take_while(|&i| (0..cs).all(|k| !owned[(r + i) * n + c + k]))
                .count();
            for i in 0..rs {
                for k in 0..cs {
                    owned[(r + i) * n + c + k] = true;
                }
            }
            let blank = rng.gen_bool(spec.blank_prob);
            cells.push((r, r + rs - 1, c, c + cs - 1, blank));
        }
    }
    // every separator needs text from unit-span cells on both sides
    let rows_ok = (0..m).all(|r| cells.iter().any(|&(r0, r1, _, _, b)| r0 == r && r1 == r && !b));
    let cols_ok = (0..n).all(|c| cells.iter().any(|&(_, _, c0, c1, b)| c0 == c && c1 == c && !b));
    (rows_ok && cols_ok).then_some(Layout { cells })
}

fn edges<R: Rng>(count: usize, range: [u32; 2], rng: &mut R) -> Vec<f64> {
    let mut out = vec![MARGIN];
    for _ in 0..count {
        let size = rng.gen_range(range[0]..=range[1]).div_ceil(4) * 4;
        out.push(out.last().expect("non-empty") + size as f64);
    }
    out
}

/// Separator geometry: straight borders, sine-bent interior lines.
struct Lattice {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Signed bend amplitude.
    bend: f64,
}

impl Lattice {
    fn row_y(&self, r: usize, x: f64) -> f64 {
        let interior = r > 0 && r + 1 < self.ys.len();
        let (x0, x1) = (self.xs[0], *self.xs.last().expect("non-empty"));
        let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        self.ys[r]
            + if interior {
                self.bend * (std::f64::consts::PI * t).sin()
            } else {
                0.0
            }
    }

    fn col_x(&self, c: usize, y: f64) -> f64 {
        let interior = c > 0 && c + 1 < self.xs.len();
        let (y0, y1) = (self.ys[0], *self.ys.last().expect("non-empty"));
        let t = ((y - y0) / (y1 - y0)).clamp(0.0, 1.0);
        self.xs[c]
            + if interior {
                self.bend * (std::f64::consts::PI * t).sin()
            } else {
                0.0
            }
    }

    fn corner(&self, r: usize, c: usize) -> (f64, f64) {
        let (mut x, mut y) = (self.xs[c], self.ys[r]);
        for _ in 0..32 {
            y = self.row_y(r, x);
            x = self.col_x(c, y);
        }
        (quarter(x), quarter(y))
    }

    /// Region clear of every separator and of the cell quad's chords.
    fn safe_rect(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> [f64; 4] {
        let (lo, hi) = (self.bend.max(0.0), self.bend.min(0.0));
        [self.xs[c0] + lo, self.ys[r0] + lo, self.xs[c1 + 1] + hi, self.ys[r1 + 1] + hi]
    }
}

/// Rounds to a quarter pixel, which keeps coordinates short and exact in
/// JSON.
fn quarter(v: f64) -> f64 {
    (v * 4.0).round() / 4.0
}

fn word<R: Rng>(rng: &mut R) -> String {
    if rng.gen_bool(0.3) {
        return format!("{}", rng.gen_range(0..10_000));
    }
    let len = rng.gen_range(2..=7);
    (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect()
}

fn annotation(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<TableAnnotation> {
    let plan = (0..MAX_ATTEMPTS)
        .find_map(|_| layout(spec, rng))
        .ok_or_else(|| Error::Generation(format!("no layout with text on every row and column after {MAX_ATTEMPTS} attempts")))?;
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let lat = Lattice {
        xs: edges(spec.cols, spec.cell_px.w, rng),
        ys: edges(spec.rows, spec.cell_px.h, rng),
        bend: sign * spec.curvature,
    };
    let mut cells = Vec::with_capacity(plan.cells.len());
    let mut textlines = Vec::new();
    for &(r0, r1, c0, c1, blank) in &plan.cells {
        let quad = Quad::from_points([
            lat.corner(r0, c0),
            lat.corner(r0, c1 + 1),
            lat.corner(r1 + 1, c1 + 1),
            lat.corner(r1 + 1, c0),
        ]);
        let mut cell = CellAnn {
            quad,
            row_start: r0,
            row_end: r1,
            col_start: c0,
            col_end: c1,
            content: None,
            textline_ids: Some(Vec::new()),
        };
        if !blank {
            let s = lat.safe_rect(r0, r1, c0, c1);
            let (aw, ah) = (s[2] - s[0] - 2.0 * PAD, s[3] - s[1] - 2.0 * PAD);
            if aw < MIN_TEXT || ah < MIN_TEXT {
                return Err(Error::Generation(format!("cell ({r0}, {c0}) leaves {aw:.1}×{ah:.1} px for text")));
            }
            let tw = aw * rng.gen_range(if spec.wireless { 0.3..1.0 } else { 0.5..1.0 });
            let th = ah * rng.gen_range(0.6..1.0);
            // wired tables centre text; wireless tables left-align it
            let x0 = s[0] + PAD + if spec.wireless { 0.0 } else { (aw - tw) / 2.0 };
            let y0 = s[1] + PAD + (ah - th) * if spec.wireless { rng.gen_range(0.0..=1.0) } else { 0.5 };
            let words = rng.gen_range(1..=2);
            let text = (0..words).map(|_| word(rng)).collect::<Vec<_>>().join(" ");
            let id = format!("t{}", textlines.len());
            textlines.push(TextLine {
                quad: Quad::from_rect(quarter(x0), quarter(y0), quarter(x0 + tw), quarter(y0 + th)),
                content: Some(text.clone()),
                id: id.clone(),
            });
            cell.content = Some(text);
            cell.textline_ids = Some(vec![id]);
        }
        cells.push(cell);
    }
    let a = TableAnnotation {
        image: ImageSize {
            width: (lat.xs.last().expect("non-empty") + MARGIN) as u32,
            height: (lat.ys.last().expect("non-empty") + MARGIN) as u32,
        },
        cells,
        textlines,
        row_groups: None,
        col_groups: None,
    };
    a.validate()?;
    Ok(a)
}

/// Mask logits peaking on the centre line of each band.
///
/// Along positions where a channel has no band (outside the table hull)
/// reuse the centre of the nearest position that has one.
pub fn oracle_mask_logits(bands: &Tensor, axis: Axis) -> Result<Tensor> {
    let (hf, wf, k) = bands.dims3()?;
    let (along_len, across_len) = match axis {
        Axis::Row => (wf, hf),
        Axis::Col => (hf, wf),
    };
    let yx = |along: usize, across: usize| match axis {
        Axis::Row => (across, along),
        Axis::Col => (along, across),
    };
    let mut out = vec![0.0; hf * wf * k];
    for ch in 0..k {
        let centres: Vec<Option<f64>> = (0..along_len)
            .map(|along| {
                let set: Vec<usize> = (0..across_len)
                    .filter(|&c| {
                        let (y, x) = yx(along, c);
                        bands.at3(y, x, ch) > 0.5
                    })
                    .collect();
                (!set.is_empty()).then(|| set.iter().sum::<usize>() as f64 / set.len() as f64)
            })
            .collect();
        let known: Vec<(usize, f64)> = centres.iter().enumerate().filter_map(|(i, c)| c.map(|c| (i, c))).collect();
        if known.is_empty() {
            return Err(Error::Degenerate(format!("{axis} band {ch} is empty")));
        }
        for along in 0..along_len {
            let centre = centres[along].unwrap_or_else(|| known.iter().min_by_key(|(i, _)| i.abs_diff(along)).expect("non-empty").1);
            for across in 0..across_len {
                let (y, x) = yx(along, across);
                let base = if bands.at3(y, x, ch) > 0.5 { SATURATION } else { -SATURATION };
                out[(y * wf + x) * k + ch] = base - MASK_SLOPE * (across as f64 - centre).abs();
            }
        }
    }
    Tensor::new(vec![hf, wf, k], out)
}

fn oracle(a: &TableAnnotation, spec: &SynthSpec) -> Result<OracleOutputs> {
    let bands = labelgen::gen_separator_masks(a).map_err(|e| Error::Generation(format!("separator labels: {e}")))?;
    let channels = labelgen::channel_map(&bands)?;
    let (hf, wf) = labelgen::feature_dims(a);
    let scores = |len: usize, entries: &[labelgen::ChannelEntry]| {
        let mut s = vec![-SATURATION; len];
        for e in entries {
            s[e.start] = SATURATION;
        }
        s
    };
    let merge = MergedMaps::from_labels(&labelgen::gen_merge_labels(a)?, SATURATION);
    let mut frng = ChaCha8Rng::seed_from_u64(spec.seed);
    frng.set_stream(2);
    let features = Tensor::from_fn(&[hf, wf, spec.channels], |_| frng.sample(StandardNormal));
    Ok(OracleOutputs {
        features,
        scores_row: scores(hf, &channels.row_channels),
        scores_col: scores(wf, &channels.col_channels),
        masks_row: oracle_mask_logits(&bands.row, Axis::Row)?,
        masks_col: oracle_mask_logits(&bands.col, Axis::Col)?,
        merge: merge.logits().clone(),
        channels,
    })
}

/// A random table and its oracle outputs; deterministic per spec.
pub fn generate(spec: &SynthSpec) -> Result<(TableAnnotation, OracleOutputs)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let a = annotation(spec, &mut rng)?;
    let o = oracle(&a, spec)?;
    Ok((a, o))
}
