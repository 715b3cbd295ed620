//! Table structure views used by the metrics: HTML trees, adjacency
//! relations and grid matrices.

pub mod adjacency;
pub mod html;
pub mod matrix;

pub use adjacency::{adjacency_relations, AdjacencyRelation, Direction};
pub use html::{cells_from_html, parse_html, to_html_tree, HtmlNode, HtmlTree, Tag};
pub use matrix::{grid_matrix_view, GridEntry, GridMatrixView};
