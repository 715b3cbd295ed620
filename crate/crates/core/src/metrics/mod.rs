//! Evaluation: polygon IoU, adjacency F1, TEDS, WAvg.F1 and GriTS.

pub mod f1;
pub mod grits;
pub mod report;
pub mod ted;

pub use f1::{f1_adjacency, quad_iou, wavg_f1, F1Score, Matching, WAVG_THRESHOLDS};
pub use grits::{grits, GritsMode};
pub use report::{aggregate, csv_row, score_sample, write_csv, EvalOptions, MetricReport, MetricSet, CSV_HEADER};
pub use ted::{teds, tree_edit_distance};
