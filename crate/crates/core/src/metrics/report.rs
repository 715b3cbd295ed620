//! Per-sample metric reports, aggregation and CSV output.

use super::f1::{f1_adjacency, wavg_f1, F1Score, Matching, WAVG_THRESHOLDS};
use super::grits::{grits, GritsMode};
use super::ted::teds;
use crate::error::{Error, Result};
use crate::merger::CellSet;
use crate::structure::{grid_matrix_view, to_html_tree};
use serde::{Deserialize, Serialize};

/// Which metric groups to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MetricSet {
    /// TEDS and TEDS-Struct.
    pub teds: bool,
    /// Adjacency F1, exact and IoU-mapped.
    pub f1: bool,
    pub wavg_f1: bool,
    /// GriTS content and topology.
    pub grits: bool,
}

impl MetricSet {
    pub const ALL: Self = Self {
        teds: true,
        f1: true,
        wavg_f1: true,
        grits: true,
    };

    /// Parses a comma-separated list of `teds`, `f1`, `wavgf1`, `grits`.
    pub fn parse(list: &str) -> Result<Self> {
        let mut s = Self {
            teds: false,
            f1: false,
            wavg_f1: false,
            grits: false,
        };
        for name in list.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            match name {
                "teds" => s.teds = true,
                "f1" => s.f1 = true,
                "wavgf1" => s.wavg_f1 = true,
                "grits" => s.grits = true,
                _ => return Err(Error::Validation(format!("unknown metric `{name}`"))),
            }
        }
        if s == (Self {
            teds: false,
            f1: false,
            wavg_f1: false,
            grits: false,
        }) {
            return Err(Error::Validation("no metrics selected".into()));
        }
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalOptions {
    pub metrics: MetricSet,
    /// Threshold of the IoU-mapped adjacency F1.
    pub iou: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            metrics: MetricSet::ALL,
            iou: 0.6,
        }
    }
}

/// Scores of one sample or an aggregate. Metrics that were not selected are
/// `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub id: String,
    pub samples: usize,
    /// Adjacency relations with cells matched by text-line ids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<F1Score>,
    /// Adjacency relations with cells matched by quad IoU.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency_iou: Option<F1Score>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teds_struct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavg_f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grits_con: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grits_top: Option<f64>,
    /// Fraction of samples whose topology GriTS is exactly 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_match: Option<f64>,
}

/// Scores one prediction against its ground truth.
pub fn score_sample(id: &str, pred: &CellSet, gt: &CellSet, opts: &EvalOptions) -> Result<MetricReport> {
    let sel = opts.metrics;
    let mut r = MetricReport {
        id: id.to_string(),
        samples: 1,
        adjacency: None,
        adjacency_iou: None,
        teds: None,
        teds_struct: None,
        wavg_f1: None,
        grits_con: None,
        grits_top: None,
        exact_match: None,
    };
    if sel.f1 {
        r.adjacency = Some(f1_adjacency(pred, gt, Matching::Exact)?);
        r.adjacency_iou = Some(f1_adjacency(pred, gt, Matching::Iou(opts.iou))?);
    }
    if sel.wavg_f1 {
        let at = WAVG_THRESHOLDS
            .iter()
            .map(|&t| Ok((t, f1_adjacency(pred, gt, Matching::Iou(t))?.f1)))
            .collect::<Result<Vec<_>>>()?;
        r.wavg_f1 = Some(wavg_f1(&at)?);
    }
    if sel.teds {
        let (tp, tg) = (to_html_tree(pred)?, to_html_tree(gt)?);
        r.teds = Some(teds(&tp, &tg, false));
        r.teds_struct = Some(teds(&tp, &tg, true));
    }
    if sel.grits {
        let (vp, vg) = (grid_matrix_view(pred)?, grid_matrix_view(gt)?);
        let top = grits(&vp, &vg, GritsMode::Topology);
        r.grits_con = Some(grits(&vp, &vg, GritsMode::Content));
        r.grits_top = Some(top);
        r.exact_match = Some(if top == 1.0 { 1.0 } else { 0.0 });
    }
    Ok(r)
}

fn micro(reports: &[MetricReport], get: fn(&MetricReport) -> Option<F1Score>) -> Option<F1Score> {
    let all: Option<Vec<F1Score>> = reports.iter().map(get).collect();
    let all = all?;
    let sum = |g: fn(&F1Score) -> usize| all.iter().map(g).sum::<usize>();
    Some(F1Score::from_counts(sum(|f| f.correct), sum(|f| f.predicted), sum(|f| f.expected)))
}

fn macro_mean(reports: &[MetricReport], get: fn(&MetricReport) -> Option<f64>) -> Option<f64> {
    let (mut sum, mut weight) = (0.0, 0usize);
    for r in reports {
        sum += get(r)? * r.samples as f64;
        weight += r.samples;
    }
    Some(sum / weight as f64)
}

/// Micro-averaged adjacency scores from summed relation counts; every other
/// score is the mean over samples. Folds in input order.
pub fn aggregate(reports: &[MetricReport]) -> Result<MetricReport> {
    if reports.is_empty() {
        return Err(Error::Missing("reports to aggregate".into()));
    }
    if let [one] = reports {
        return Ok(one.clone());
    }
    Ok(MetricReport {
        id: "aggregate".into(),
        samples: reports.iter().map(|r| r.samples).sum(),
        adjacency: micro(reports, |r| r.adjacency),
        adjacency_iou: micro(reports, |r| r.adjacency_iou),
        teds: macro_mean(reports, |r| r.teds),
        teds_struct: macro_mean(reports, |r| r.teds_struct),
        wavg_f1: macro_mean(reports, |r| r.wavg_f1),
        grits_con: macro_mean(reports, |r| r.grits_con),
        grits_top: macro_mean(reports, |r| r.grits_top),
        exact_match: macro_mean(reports, |r| r.exact_match),
    })
}

pub const CSV_HEADER: [&str; 9] = ["id", "P", "R", "F1", "TEDS", "TEDS-Struct", "WAvgF1", "GriTS_Con", "GriTS_Top"];

/// CSV values in [`CSV_HEADER`] order; unselected metrics are empty.
pub fn csv_row(r: &MetricReport) -> Vec<String> {
    let adj = r.adjacency;
    let vals = [
        adj.map(|f| f.precision),
        adj.map(|f| f.recall),
        adj.map(|f| f.f1),
        r.teds,
        r.teds_struct,
        r.wavg_f1,
        r.grits_con,
        r.grits_top,
    ];
    let mut row = vec![r.id.clone()];
    row.extend(vals.iter().map(|v| v.map(|v| format!("{v:.6}")).unwrap_or_default()));
    row
}

pub fn write_csv<W: std::io::Write>(reports: &[MetricReport], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    out.write_record(CSV_HEADER).map_err(io)?;
    for r in reports {
        out.write_record(csv_row(r)).map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(id: &str, c: usize, p: usize, e: usize, teds: f64, top: f64) -> MetricReport {
        let f = F1Score::from_counts(c, p, e);
        MetricReport {
            id: id.into(),
            samples: 1,
            adjacency: Some(f),
            adjacency_iou: Some(f),
            teds: Some(teds),
            teds_struct: Some(teds),
            wavg_f1: Some(f.f1),
            grits_con: Some(top),
            grits_top: Some(top),
            exact_match: Some(if top == 1.0 { 1.0 } else { 0.0 }),
        }
    }

    #[test]
    fn aggregation() {
        let a = report("a", 3, 4, 6, 0.9, 1.0);
        assert_eq!(aggregate(std::slice::from_ref(&a)).unwrap(), a);
        let twice = aggregate(&[a.clone(), a.clone()]).unwrap();
        let (x, y) = (twice.adjacency.unwrap(), a.adjacency.unwrap());
        assert_eq!((x.precision, x.recall, x.f1), (y.precision, y.recall, y.f1));
        assert_eq!(x.correct, 2 * y.correct);
        assert_eq!(twice.teds, a.teds);

        // micro: (3 + 1) / (4 + 4) and (3 + 1) / (6 + 2); macro TEDS (0.9 + 0.5) / 2
        let b = report("b", 1, 4, 2, 0.5, 0.5);
        let agg = aggregate(&[a, b]).unwrap();
        let adj = agg.adjacency.unwrap();
        assert_eq!((adj.precision, adj.recall, adj.correct), (0.5, 0.5, 4));
        assert!((agg.teds.unwrap() - 0.7).abs() < 1e-12);
        assert!((agg.grits_top.unwrap() - 0.75).abs() < 1e-12);
        assert_eq!((agg.samples, agg.exact_match), (2, Some(0.5)));
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn unselected_metrics_stay_empty() {
        let mut a = report("a", 1, 1, 1, 1.0, 1.0);
        a.teds = None;
        let agg = aggregate(&[a.clone(), a]).unwrap();
        assert_eq!(agg.teds, None);
        assert_eq!(agg.teds_struct, Some(1.0));

        assert_eq!(MetricSet::parse("teds,f1,wavgf1,grits").unwrap(), MetricSet::ALL);
        assert!(MetricSet::parse("teds,bleu").is_err());
        assert!(MetricSet::parse("").is_err());
    }

    #[test]
    fn csv_layout() {
        let mut r = report("s1", 1, 1, 1, 1.0, 1.0);
        r.wavg_f1 = None;
        let mut buf = Vec::new();
        write_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("id,P,R,F1,TEDS,TEDS-Struct,WAvgF1,GriTS_Con,GriTS_Top"));
        assert_eq!(
            lines.next(),
            Some("s1,1.000000,1.000000,1.000000,1.000000,1.000000,,1.000000,1.000000")
        );
    }
}
