//! Directory-level drivers behind the CLI, and the robustness sweep.
//!
//! Per-sample work runs on the current rayon pool; results are collected in
//! sample order, so outputs do not depend on the worker count.

use super::perturb::{perturb, PerturbKind};
use super::pipeline::{run_pipeline, PipelineInput, PipelineOptions};
use super::store::{self, InferenceInput, PredictionFile, ORACLE_EXT};
use super::synth::{generate, SynthSpec};
use crate::annotation::load_annotation;
use crate::error::{Error, Result};
use crate::merger::CellSet;
use crate::metrics::{aggregate, score_sample, teds, EvalOptions, MetricReport};
use crate::structure::to_html_tree;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Writes `count` samples; sample `k` uses seed `seed + k`. Without a spec
/// every sample draws its own from [`SynthSpec::randomized`].
pub fn synth_dir(out: &Path, spec: Option<&SynthSpec>, count: usize, seed: u64) -> Result<Vec<String>> {
    std::fs::create_dir_all(out)?;
    (0..count)
        .into_par_iter()
        .map(|k| {
            let s = seed.wrapping_add(k as u64);
            let spec = match spec {
                Some(sp) => SynthSpec { seed: s, ..sp.clone() },
                None => SynthSpec::randomized(s),
            };
            let name = store::sample_name(k);
            let (a, o) = generate(&spec).map_err(|e| Error::Generation(format!("{name} (seed {s}): {e}")))?;
            store::write_sample(out, &name, &a, &o)?;
            Ok(name)
        })
        .collect()
}

/// Sorted `(stem, path)` pairs of directory entries matching `keep`.
fn entries(dir: &Path, keep: impl Fn(&Path) -> Option<String>) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir)? {
        let path = e?.path();
        if let Some(stem) = keep(&path) {
            out.push((stem, path));
        }
    }
    out.sort();
    Ok(out)
}

/// Runs the oracle pipeline on one `.oracle` directory.
pub fn infer_oracle(dir: &Path, opts: &PipelineOptions) -> Result<PredictionFile> {
    let (o, input) = store::read_oracle(dir)?;
    let p = run_pipeline(&PipelineInput::Oracle(&o), &input.textlines, opts)?;
    Ok(PredictionFile::new(&p, &input))
}

/// Infers every `name.oracle/` under `root` into `out/name.json`.
pub fn infer_oracle_dir(root: &Path, out: &Path, opts: &PipelineOptions) -> Result<Vec<String>> {
    let dirs = entries(root, |p| {
        (p.is_dir() && p.extension().is_some_and(|e| e == ORACLE_EXT))
            .then(|| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
            .flatten()
    })?;
    if dirs.is_empty() {
        return Err(Error::Missing(format!("`*.{ORACLE_EXT}` directories in {}", root.display())));
    }
    std::fs::create_dir_all(out)?;
    dirs.par_iter()
        .map(|(name, dir)| {
            let file = infer_oracle(dir, opts).map_err(|e| e.in_stage("infer"))?;
            file.save(&out.join(format!("{name}.json")))?;
            Ok(name.clone())
        })
        .collect()
}

/// Everything `eval` writes to its JSON report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub iou: f64,
    pub samples: Vec<MetricReport>,
    pub aggregate: MetricReport,
}

/// Scores `pred/name.json` against `gt/name.json` for every ground-truth
/// file.
pub fn eval_dirs(pred: &Path, gt: &Path, opts: &EvalOptions) -> Result<EvalReport> {
    let files = entries(gt, |p| {
        (p.is_file() && p.extension().is_some_and(|e| e == "json"))
            .then(|| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
            .flatten()
    })?;
    if files.is_empty() {
        return Err(Error::Missing(format!("ground-truth JSON files in {}", gt.display())));
    }
    let samples = files
        .par_iter()
        .map(|(name, path)| {
            let truth = CellSet::from_annotation(&load_annotation(path)?)?;
            let pred_path = pred.join(format!("{name}.json"));
            if !pred_path.exists() {
                return Err(Error::Missing(format!("prediction {}", pred_path.display())));
            }
            let guess = PredictionFile::load(&pred_path)?.cell_set()?;
            score_sample(name, &guess, &truth, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        iou: opts.iou,
        aggregate: aggregate(&samples)?,
        samples,
    })
}

/// Mean TEDS-Struct of one perturbation level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub kind: PerturbKind,
    pub magnitude: f64,
    pub mean_teds_struct: f64,
    /// Samples whose pipeline failed; each scores 0.
    pub failures: usize,
    pub samples: usize,
}

/// TEDS-Struct of an oracle run under perturbation; a failed run scores 0.
fn perturbed_score(
    a: &crate::annotation::TableAnnotation,
    o: &super::OracleOutputs,
    kind: PerturbKind,
    magnitude: f64,
    seed: u64,
) -> Result<Option<f64>> {
    let truth = to_html_tree(&CellSet::from_annotation(a)?)?;
    let noisy = perturb(o, kind, magnitude, seed)?;
    let input = InferenceInput::of(a);
    run_pipeline(&PipelineInput::Oracle(&noisy), &input.textlines, &PipelineOptions::default())
        .ok()
        .map(|p| to_html_tree(&p.cells).map(|t| teds(&t, &truth, true)))
        .transpose()
}

/// Mean TEDS-Struct over randomized tables at every magnitude.
pub fn robustness_sweep(seeds: std::ops::Range<u64>, kind: PerturbKind, levels: &[f64]) -> Result<Vec<SweepPoint>> {
    let tables = seeds
        .clone()
        .into_par_iter()
        .map(|s| {
            generate(&SynthSpec {
                channels: 1,
                ..SynthSpec::randomized(s)
            })
            .map(|t| (s, t))
        })
        .collect::<Result<Vec<_>>>()?;
    levels
        .iter()
        .map(|&magnitude| {
            let scores = tables
                .par_iter()
                .map(|(s, (a, o))| perturbed_score(a, o, kind, magnitude, *s))
                .collect::<Result<Vec<_>>>()?;
            let failures = scores.iter().filter(|s| s.is_none()).count();
            let total: f64 = scores.iter().map(|s| s.unwrap_or(0.0)).sum();
            Ok(SweepPoint {
                kind,
                magnitude,
                mean_teds_struct: total / scores.len().max(1) as f64,
                failures,
                samples: scores.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synth_infer_eval_round_trip() {
        let root = tempfile::tempdir().unwrap();
        let (data, pred) = (root.path().join("data"), root.path().join("pred"));
        let spec = SynthSpec {
            channels: 2,
            span_prob: 0.3,
            max_span: 2,
            ..SynthSpec::new(3, 3, 0)
        };
        assert_eq!(synth_dir(&data, Some(&spec), 3, 10).unwrap().len(), 3);
        assert_eq!(infer_oracle_dir(&data, &pred, &PipelineOptions::default()).unwrap().len(), 3);
        let report = eval_dirs(&pred, &data, &EvalOptions::default()).unwrap();
        assert_eq!(report.samples.len(), 3);
        assert_eq!(report.aggregate.teds_struct, Some(1.0));
        assert_eq!(report.aggregate.adjacency.unwrap().f1, 1.0);
        assert_eq!(report.aggregate.grits_top, Some(1.0));
    }

    #[test]
    fn missing_prediction_is_an_error() {
        let root = tempfile::tempdir().unwrap();
        let data = root.path().join("data");
        synth_dir(
            &data,
            Some(&SynthSpec {
                channels: 1,
                ..SynthSpec::new(1, 2, 0)
            }),
            1,
            0,
        )
        .unwrap();
        let empty = root.path().join("none");
        std::fs::create_dir_all(&empty).unwrap();
        assert!(matches!(eval_dirs(&empty, &data, &EvalOptions::default()), Err(Error::Missing(_))));
    }

    #[test]
    fn sweep_is_perfect_without_noise() {
        let pts = robustness_sweep(0..6, PerturbKind::ScoreNoise, &[0.0, 16.0]).unwrap();
        assert_eq!(pts[0].mean_teds_struct, 1.0);
        assert_eq!(pts[0].failures, 0);
        assert!(pts[1].mean_teds_struct <= 1.0);
    }
}
