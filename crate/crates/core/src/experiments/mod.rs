//! Reproducible experiment pipelines.
//!
//! Each pipeline wires the library end to end: simulate a ground-truth
//! model, estimate pointwise drift and diffusion, learn a generator
//! surrogate, optimize trajectory objectives over a box covering, and
//! validate the resulting front against fresh simulator ensembles. Runs
//! are driven by a single [`ExperimentConfig`], derive every random
//! stream from one master seed, and write fingerprinted checkpoints so
//! interrupted runs resume instead of recomputing.

pub mod analytic;
pub mod config;
pub mod epidemic_moo;
pub mod io;
pub mod validate;
pub mod voter_moo;

pub use analytic::{run_analytic_checks, AnalyticReport, CheckRecord};
pub use config::{
    AnalyticConfig, EpidemicMooConfig, ExperimentConfig, MooPlan, Scale, ValidationPlan,
    VoterMooConfig,
};
pub use epidemic_moo::{identify_models, run_epidemic_moo, EpidemicModels, EpidemicMooArtifacts};
pub use io::{CheckpointStore, RmseRow};
pub use validate::{ci_dominates, TestPointRecord, ValidationReport};
pub use voter_moo::{identify_family, run_voter_moo, VoterMooArtifacts};
