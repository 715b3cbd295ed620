//! The embed and merge stages: grid embeddings, merged-map prediction, the
//! merge loss, cell decoding and content alignment.

pub mod cells;
pub mod decode;
pub mod embed;
pub mod merge;

pub use cells::{assign_content, Cell, CellSet, TextItem};
pub use decode::{decode_cells, Decoded};
pub use embed::{embed_grids, EmbedOptions, EmbedParams, GridEmbedding};
pub use merge::{loss_merge, loss_merge_grad, merger_forward, MergeParams, MergedMaps};
