use gridsplit::harness::{
    self, oracle_losses, perturb, total_objective, InferenceInput, PerturbKind, PipelineInput, PipelineOptions, SynthSpec,
};
use gridsplit::labelgen::{gen_merge_labels, gen_separator_masks};
use gridsplit::merger::{decode_cells, CellSet, MergedMaps};
use gridsplit::numerics::LossConfig;
use gridsplit::splitter::{lines_to_grid, masks_to_lines};
use gridsplit::Axis;

#[test]
fn labels_decode_back_to_the_annotation() {
    for seed in 0..40 {
        let spec = SynthSpec {
            channels: 1,
            ..SynthSpec::randomized(seed)
        };
        let (a, _) = harness::generate(&spec).unwrap();
        let masks = gen_separator_masks(&a).unwrap();
        let grid = lines_to_grid(
            masks_to_lines(&masks.row, Axis::Row).unwrap(),
            masks_to_lines(&masks.col, Axis::Col).unwrap(),
        )
        .unwrap();
        let maps = MergedMaps::from_labels(&gen_merge_labels(&a).unwrap(), 8.0);
        let d = decode_cells(&maps, &grid, 4.0).unwrap();
        assert!(d.warnings.is_empty(), "seed {seed}: {:?}", d.warnings);
        assert!(d.cells.same_structure(&CellSet::from_annotation(&a).unwrap()), "seed {seed}");
    }
}

#[test]
fn oracle_outputs_minimize_the_objective() {
    let cfg = LossConfig::default();
    for seed in 0..10 {
        let (a, o) = harness::generate(&SynthSpec {
            channels: 1,
            ..SynthSpec::randomized(seed)
        })
        .unwrap();
        let clean = total_objective(&oracle_losses(&a, &o, &cfg).unwrap()).unwrap();
        let noisy = perturb(&o, PerturbKind::ScoreNoise, 16.0, seed).unwrap();
        let worse = total_objective(&oracle_losses(&a, &noisy, &cfg).unwrap()).unwrap();
        assert!(clean < 1e-3, "seed {seed}: {clean}");
        assert!(worse > clean, "seed {seed}: {worse} <= {clean}");
    }
}

#[test]
fn content_follows_the_text_lines() {
    let spec = SynthSpec {
        channels: 1,
        span_prob: 0.3,
        max_span: 2,
        ..SynthSpec::new(4, 4, 9)
    };
    let (a, o) = harness::generate(&spec).unwrap();
    let input = InferenceInput::of(&a);
    let p = harness::run_pipeline(&PipelineInput::Oracle(&o), &input.textlines, &PipelineOptions::default()).unwrap();
    assert!(p.unassigned.is_empty());
    let truth = CellSet::from_annotation(&a).unwrap().sorted();
    let got = p.cells.clone().sorted();
    for (g, t) in got.cells.iter().zip(&truth.cells) {
        assert_eq!(g.ids(), t.ids());
        assert_eq!(g.text(), t.text());
    }
}
