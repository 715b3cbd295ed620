//! On-disk layout of synthetic samples and predictions.
//!
//! ```text
//! out/
//!   sample_0000.json            ground-truth annotation
//!   sample_0000.oracle/
//!     input.json                image size and text lines
//!     features.sem2             Hf×Wf×C
//!     scores_row.sem2           Hf
//!     scores_col.sem2           Wf
//!     masks_row.sem2            Hf×Wf×(M+1)
//!     masks_col.sem2            Hf×Wf×(N+1)
//!     merge.sem2                M×N×M×N
//!     channels.json             start index of every mask channel
//! ```
//!
//! Tensors are stored as `f32`, so values read back are the `f32` roundings
//! of what was generated.

use super::pipeline::Prediction;
use super::synth::OracleOutputs;
use crate::annotation::{CellAnn, ImageSize, TableAnnotation, TextLine};
use crate::error::{Error, Result};
use crate::labelgen::ChannelMap;
use crate::merger::CellSet;
use crate::numerics::{io, Tensor};
use crate::splitter::GridStructure;
use crate::FEATURE_STRIDE;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const ORACLE_EXT: &str = "oracle";

/// What inference sees besides the tensors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceInput {
    pub image: ImageSize,
    pub textlines: Vec<TextLine>,
}

impl InferenceInput {
    pub fn of(a: &TableAnnotation) -> Self {
        Self {
            image: a.image,
            textlines: a.textlines.clone(),
        }
    }
}

pub fn sample_name(index: usize) -> String {
    format!("sample_{index:04}")
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: format!("{}: {}", path.display(), e.path()),
        message: e.inner().to_string(),
    })
}

fn vector(v: &[f64]) -> Tensor {
    Tensor::new(vec![v.len()], v.to_vec()).expect("rank-1 shape matches")
}

pub fn write_oracle(dir: &Path, input: &InferenceInput, o: &OracleOutputs) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("input.json"), input)?;
    io::save(&dir.join("features.sem2"), &o.features)?;
    io::save(&dir.join("scores_row.sem2"), &vector(&o.scores_row))?;
    io::save(&dir.join("scores_col.sem2"), &vector(&o.scores_col))?;
    io::save(&dir.join("masks_row.sem2"), &o.masks_row)?;
    io::save(&dir.join("masks_col.sem2"), &o.masks_col)?;
    io::save(&dir.join("merge.sem2"), &o.merge)?;
    write_json(&dir.join("channels.json"), &o.channels)
}

pub fn read_oracle(dir: &Path) -> Result<(OracleOutputs, InferenceInput)> {
    let input: InferenceInput = read_json(&dir.join("input.json"))?;
    let scores = |name: &str| -> Result<Vec<f64>> {
        let t = io::load(&dir.join(name))?;
        if t.rank() != 1 {
            return Err(Error::shape(format!("{name} must be rank 1, got {:?}", t.shape())));
        }
        Ok(t.into_data())
    };
    let o = OracleOutputs {
        features: io::load(&dir.join("features.sem2"))?,
        scores_row: scores("scores_row.sem2")?,
        scores_col: scores("scores_col.sem2")?,
        masks_row: io::load(&dir.join("masks_row.sem2"))?,
        masks_col: io::load(&dir.join("masks_col.sem2"))?,
        merge: io::load(&dir.join("merge.sem2"))?,
        channels: read_json::<ChannelMap>(&dir.join("channels.json"))?,
    };
    let (hf, wf, _) = o.masks_row.dims3()?;
    if o.masks_col.dims3()?.0 != hf || o.masks_col.dims3()?.1 != wf || o.scores_row.len() != hf || o.scores_col.len() != wf {
        return Err(Error::shape(format!(
            "oracle tensors in {} disagree on the feature size",
            dir.display()
        )));
    }
    Ok((o, input))
}

/// Writes `name.json` and `name.oracle/` into `dir`.
pub fn write_sample(dir: &Path, name: &str, a: &TableAnnotation, o: &OracleOutputs) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("{name}.json")), a.to_json()? + "\n")?;
    write_oracle(&dir.join(format!("{name}.{ORACLE_EXT}")), &InferenceInput::of(a), o)
}

/// The `infer` output for one table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionFile {
    pub image: ImageSize,
    /// Lattice in image pixels.
    pub grid: GridStructure,
    /// Cells with image-pixel quads and the ids of the text lines they hold.
    pub cells: Vec<CellAnn>,
    pub textlines: Vec<TextLine>,
    pub warnings: Vec<String>,
}

impl PredictionFile {
    pub fn new(p: &Prediction, input: &InferenceInput) -> Self {
        Self {
            image: input.image,
            grid: p.grid.scaled(FEATURE_STRIDE as f64),
            cells: p.cells.clone().sorted().to_cell_anns(),
            textlines: input.textlines.clone(),
            warnings: p.warnings.clone(),
        }
    }

    pub fn cell_set(&self) -> Result<CellSet> {
        CellSet::from_annotation(&TableAnnotation {
            image: self.image,
            cells: self.cells.clone(),
            textlines: self.textlines.clone(),
            row_groups: None,
            col_groups: None,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }
}
