//! End to end on synthetic tables: generate, run the pipeline on oracle
//! outputs, score against the generated ground truth.

use gridsplit::harness::{generate, run_pipeline, InferenceInput, PipelineInput, PipelineOptions, SynthSpec};
use gridsplit::merger::CellSet;
use gridsplit::metrics::{score_sample, EvalOptions};
use gridsplit::structure::to_html_tree;

fn main() -> gridsplit::Result<()> {
    let seeds = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5u64);
    for seed in 0..seeds {
        let spec = SynthSpec {
            channels: 4,
            ..SynthSpec::randomized(seed)
        };
        let (a, o) = generate(&spec)?;
        let input = InferenceInput::of(&a);
        let p = run_pipeline(&PipelineInput::Oracle(&o), &input.textlines, &PipelineOptions::default())?;
        let truth = CellSet::from_annotation(&a)?;
        let r = score_sample(&format!("seed{seed}"), &p.cells, &truth, &EvalOptions::default())?;
        println!(
            "seed {seed}: {}×{} wireless={} curvature={:.1}  TEDS-Struct {:.3}  F1 {:.3}  GriTS-Top {:.3}",
            p.cells.m,
            p.cells.n,
            spec.wireless,
            spec.curvature,
            r.teds_struct.unwrap(),
            r.adjacency.unwrap().f1,
            r.grits_top.unwrap()
        );
        for w in &p.warnings {
            println!("  warning: {w}");
        }
    }
    let (a, o) = generate(&SynthSpec {
        channels: 1,
        span_prob: 0.4,
        max_span: 2,
        ..SynthSpec::new(3, 3, 2)
    })?;
    let p = run_pipeline(
        &PipelineInput::Oracle(&o),
        &InferenceInput::of(&a).textlines,
        &PipelineOptions::default(),
    )?;
    println!("{}", to_html_tree(&p.cells)?.to_html());
    Ok(())
}
