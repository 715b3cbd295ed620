//! Synthetic tables with a perfect-prediction oracle, perturbations, the
//! pipeline driver and the batch drivers used by the CLI.

pub mod batch;
pub mod checks;
pub mod perturb;
pub mod pipeline;
pub mod store;
pub mod synth;

pub use batch::{eval_dirs, infer_oracle, infer_oracle_dir, robustness_sweep, synth_dir, EvalReport, SweepPoint};
pub use checks::{loss_gradient_checks, GradCheck, GRAD_TOLERANCE};
pub use perturb::{perturb, PerturbKind};
pub use pipeline::{oracle_losses, run_pipeline, total_objective, LossTerms, PipelineInput, PipelineOptions, Prediction};
pub use store::{read_oracle, write_sample, InferenceInput, PredictionFile};
pub use synth::{generate, CellPx, OracleOutputs, SynthSpec};
