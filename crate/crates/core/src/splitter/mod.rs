//! The split stage: Gather, instance NMS, dynamic line masks, line tracing,
//! grid construction and the split losses.

pub mod gather;
pub mod grid;
pub mod loss;
pub mod post;

pub use gather::{gather_forward, GatherOutput, GatherParams};
pub use grid::{intersect, lines_to_grid, GridStructure, Line};
pub use loss::{loss_instance, loss_instance_grad, loss_segmentation, loss_segmentation_grad};
pub use post::{instance_nms, line_mask_logits, mask_to_line, masks_to_lines, predict_line_masks, DEFAULT_THRESHOLD};
