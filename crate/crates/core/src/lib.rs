//! Split-embed-merge table structure recognition.
//!
//! A table image is split into a lattice of grids by detecting every row and
//! column separation line as its own instance (a start-point score vector,
//! per-instance dynamic convolution kernels and a per-instance mask), the grids
//! are embedded with RoIAlign and a self-attention block, and a parallel
//! conditional-convolution decoder votes which grids merge into one cell.
//!
//! The crate has no trained backbone. Feature maps come from the caller or
//! from the synthetic harness in [`harness`], whose oracle outputs let the
//! whole post-processing chain be checked end to end against the generated
//! ground truth.
//!
//! Module map:
//!
//! - [`numerics`]: dense tensors, convolutions, RoIAlign, losses with
//!   analytic gradients, the `SEM2` tensor file format.
//! - [`annotation`]: table annotation model and JSON ingestion.
//! - [`labelgen`]: separator masks, start-point vectors, merge targets.
//! - [`splitter`]: Gather forward pass, instance NMS, dynamic masks,
//!   mask-to-line, grid construction, split losses.
//! - [`merger`]: grid embedding, merged-map prediction, merge loss, cell
//!   decoding and content alignment.
//! - [`structure`]: HTML trees, adjacency relations, grid matrices.
//! - [`metrics`]: polygon IoU, adjacency F1, TEDS, WAvg.F1, GriTS.
//! - [`harness`]: synthetic tables, perturbations, the pipeline driver.

pub mod annotation;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod labelgen;
pub mod merger;
pub mod metrics;
pub mod numerics;
pub mod params;
pub mod splitter;
pub mod structure;

pub use error::{Error, Result};
pub use numerics::Tensor;

use std::fmt;

/// Orientation of a separation line or of a stage operating on one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Horizontal separators between table rows.
    Row,
    /// Vertical separators between table columns.
    Col,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Row => "row",
            Axis::Col => "col",
        })
    }
}

/// Scale between image pixels and the stride-4 feature map.
pub const FEATURE_STRIDE: usize = 4;
