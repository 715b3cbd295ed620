use gridsplit::harness::{EvalReport, PredictionFile, SynthSpec};
use gridsplit::numerics::io;
use gridsplit::params::{ModelConfig, ModelParams};
use gridsplit::Tensor;
use std::path::Path;
use std::process::{Command, Output};

fn gridsplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridsplit")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = gridsplit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Two small synthetic samples under `root/data`.
fn synth(root: &Path) -> std::path::PathBuf {
    let spec = SynthSpec {
        channels: 3,
        span_prob: 0.4,
        max_span: 2,
        ..SynthSpec::new(3, 4, 0)
    };
    let spec_path = root.join("spec.json");
    std::fs::write(&spec_path, serde_json::to_string(&spec).unwrap()).unwrap();
    let data = root.join("data");
    ok(&["synth", "--spec", s(&spec_path), "--out", s(&data), "--count", "2", "--seed", "5"]);
    data
}

#[test]
fn oracle_round_trip_scores_perfectly() {
    let root = tempfile::tempdir().unwrap();
    let data = synth(root.path());
    let pred = root.path().join("pred");
    ok(&["infer", "--oracle", s(&data), "--out", s(&pred)]);
    let (report, csv) = (root.path().join("r.json"), root.path().join("r.csv"));
    ok(&["eval", "--pred", s(&pred), "--gt", s(&data), "--out", s(&report), "--csv", s(&csv)]);

    let r: EvalReport = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.samples.len(), 2);
    assert_eq!(r.aggregate.teds_struct, Some(1.0));
    assert_eq!(r.aggregate.grits_top, Some(1.0));
    let csv = std::fs::read_to_string(csv).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("id,P,R,F1,TEDS,TEDS-Struct,WAvgF1,GriTS_Con,GriTS_Top\n"));

    let md = ok(&["report", "--in", s(&report)]);
    assert_eq!(md.lines().count(), 2 + 3);
    assert!(md.contains("| sample_0001 |"));
    let flat = ok(&["report", "--in", s(&report), "--format", "csv"]);
    assert_eq!(flat.lines().count(), 4);
}

#[test]
fn single_oracle_dir_writes_one_prediction() {
    let root = tempfile::tempdir().unwrap();
    let data = synth(root.path());
    let out = root.path().join("one.json");
    ok(&["infer", "--oracle", s(&data.join("sample_0000.oracle")), "--out", s(&out)]);
    let p = PredictionFile::load(&out).unwrap();
    assert_eq!(p.grid.m, 3);
    assert!(!p.cells.is_empty());
}

#[test]
fn metric_selection_limits_the_report() {
    let root = tempfile::tempdir().unwrap();
    let data = synth(root.path());
    let pred = root.path().join("pred");
    ok(&["infer", "--oracle", s(&data), "--out", s(&pred)]);
    let report = root.path().join("r.json");
    ok(&[
        "eval",
        "--pred",
        s(&pred),
        "--gt",
        s(&data),
        "--metrics",
        "teds",
        "--out",
        s(&report),
    ]);
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("teds_struct"));
    assert!(!text.contains("grits_top"));
    let bad = gridsplit(&[
        "eval",
        "--pred",
        s(&pred),
        "--gt",
        s(&data),
        "--metrics",
        "bleu",
        "--out",
        s(&report),
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn labelgen_writes_every_target() {
    let root = tempfile::tempdir().unwrap();
    let data = synth(root.path());
    let out = root.path().join("labels");
    ok(&["labelgen", "--ann", s(&data.join("sample_0000.json")), "--out", s(&out)]);
    for f in [
        "masks_row.sem2",
        "masks_col.sem2",
        "p_row.sem2",
        "p_col.sem2",
        "merge.sem2",
        "channels.json",
    ] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let masks = io::load(&out.join("masks_row.sem2")).unwrap();
    let p = io::load(&out.join("p_row.sem2")).unwrap();
    // one mask channel per start point
    let starts = p.data().iter().filter(|&&v| v > 0.5).count();
    assert_eq!(masks.shape()[2], starts);
    assert_eq!(io::load(&out.join("merge.sem2")).unwrap().shape(), &[3, 4, 3, 4]);
}

#[test]
fn feature_inference_with_saved_params() {
    let root = tempfile::tempdir().unwrap();
    let features = Tensor::from_fn(&[24, 32, 4], |ix| {
        ((ix[0] * 131 + ix[1] * 17 + ix[2] * 7919) % 97) as f64 / 48.0 - 1.0
    });
    let (f_path, p_path) = (root.path().join("f.sem2"), root.path().join("p.sem2"));
    io::save(&f_path, &features).unwrap();
    ModelParams::random(
        ModelConfig {
            channels: 4,
            dim: 8,
            roi: 2,
        },
        3,
    )
    .save(&p_path)
    .unwrap();
    let out = root.path().join("pred.json");
    let run = gridsplit(&["infer", "--features", s(&f_path), "--params", s(&p_path), "--out", s(&out)]);
    // untrained weights may not find a valid lattice; failures must name the stage
    if run.status.success() {
        let p = PredictionFile::load(&out).unwrap();
        assert_eq!((p.image.width, p.image.height), (128, 96));
    } else {
        assert_eq!(run.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&run.stderr).contains("stage `"));
    }
    let wrong = ModelParams::random(
        ModelConfig {
            channels: 5,
            dim: 8,
            roi: 2,
        },
        3,
    );
    wrong.save(&p_path).unwrap();
    let mismatch = gridsplit(&["infer", "--features", s(&f_path), "--params", s(&p_path), "--out", s(&out)]);
    assert_eq!(mismatch.status.code(), Some(2));
}

#[test]
fn gradcheck_and_config_errors() {
    let text = ok(&["gradcheck", "--seed", "2"]);
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().all(|l| l.ends_with(" ok")));

    let root = tempfile::tempdir().unwrap();
    let cfg = root.path().join("bad.cfg");
    std::fs::write(&cfg, "threshold=0.5\nalpha=two\n").unwrap();
    let out = gridsplit(&["--config", s(&cfg), "gradcheck"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.cfg:2"));

    let threads = Command::new(env!("CARGO_BIN_EXE_gridsplit"))
        .args(["gradcheck"])
        .env("GRIDSPLIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}
