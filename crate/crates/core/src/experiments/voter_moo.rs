//! Voter-model control pipeline.
//!
//! End-to-end run: estimate pointwise drift/diffusion of the opinion
//! share from Gillespie bursts at shared training states, learn a
//! control-affine generator family (the pairwise conversion rates are
//! affine in the two control channels), minimize the expected final
//! share against the control effort over the full decision space and a
//! refined window, and validate the refined front against fresh
//! simulator ensembles with confidence-inflated dominance.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::abm::schedule::ConstantControl;
use crate::abm::voter::VoterModel;
use crate::abm::{ensemble, ensemble_mean, km_estimate, normal_quantile};
use crate::control::{AffineFamilySpec, AffineGeneratorFamily};
use crate::dictionary::Dictionary;
use crate::error::Result;
use crate::gedmd::SamplePoint;
use crate::moo::{sampling_algorithm, SamplingConfig, SamplingOutcome};
use crate::seed::{self, stream};
use crate::surrogate::{
    evaluate_objectives, simulate_reduced, FamilyDynamics, Objective, SurrogateDynamics,
};

use super::config::VoterMooConfig;
use super::io::{self, CheckpointStore};
use super::validate::{
    ci_halfwidth, covered_by_boxes, dominated_by_front, test_points, TestPointRecord,
    ValidationReport,
};

/// Everything a voter pipeline run produces.
#[derive(Debug)]
pub struct VoterMooArtifacts {
    /// Largest relative held-out affinity defect of the learned family.
    pub family_defect: f64,
    /// Covering and front over the full decision space.
    pub full: SamplingOutcome<f64>,
    /// Covering and front over the refined window.
    pub refined: SamplingOutcome<f64>,
    /// Surrogate final-share range over the full covering's box centers.
    pub f1_range: (f64, f64),
    /// Whether the expected-share level 0.5 crosses the full covering —
    /// the majority-flip region.
    pub majority_flip: bool,
    /// Test-point validation of the refined front.
    pub validation: ValidationReport,
}

/// The deterministic `report.json` payload.
#[derive(Serialize)]
struct ReportDoc<'a> {
    config: &'a VoterMooConfig,
    family_defect: f64,
    held_out_controls: Vec<Vec<f64>>,
    full_history: &'a [crate::moo::IterationRecord<f64>],
    refined_history: &'a [crate::moo::IterationRecord<f64>],
    f1_range: (f64, f64),
    majority_flip: bool,
    validation: &'a ValidationReport,
}

/// Learns the affine family from Kramers–Moyal probes at shared states.
fn learn_family(
    config: &VoterMooConfig,
    abm: &VoterModel<f64>,
) -> Result<AffineGeneratorFamily<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed::derive(
        config.master_seed,
        stream::TRAINING_STATES,
        0,
    ));
    let states: Vec<f64> = (0..config.training_states).map(|_| rng.gen()).collect();
    let dict = Arc::new(Dictionary::monomials(1, config.dictionary_degree));
    // Sampler calls arrive in a fixed order (zero, channels, held-out), so
    // a call counter keeps probe seeds deterministic per (control, state).
    let mut call = 0u64;
    let sampler = |u: &[f64]| -> Result<Vec<SamplePoint<f64>>> {
        let this_call = call;
        call += 1;
        states
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let probe_seed = seed::derive(
                    config.master_seed,
                    stream::KRAMERS_MOYAL,
                    (this_call << 32) | j as u64,
                );
                km_estimate(
                    abm,
                    &[c],
                    u,
                    config.tau,
                    config.training_monte_carlo,
                    probe_seed,
                )?
                .into_sample()
            })
            .collect()
    };
    AffineGeneratorFamily::learn(
        &dict,
        &[1.0, 1.0],
        sampler,
        config.ridge,
        &[vec![1.0, 1.0]],
    )
}

/// The ground-truth agent-based model the config describes.
fn ground_truth(config: &VoterMooConfig) -> VoterModel<f64> {
    VoterModel {
        n_agents: config.n_agents,
        gamma_12: config.gamma_12,
        gamma_21: config.gamma_21,
        gamma_spont_12: config.gamma_spont_12,
        gamma_spont_21: config.gamma_spont_21,
    }
}

/// Runs only the model-learning phase and returns the serializable
/// family. With `out` set, resumes from (and persists to) the same
/// `training` checkpoint the full pipeline uses.
pub fn identify_family(config: &VoterMooConfig, out: Option<&Path>) -> Result<AffineFamilySpec> {
    config.check()?;
    let abm = ground_truth(config);
    let store = out.map(CheckpointStore::new).transpose()?;
    let fingerprint = io::json_string(config)?;
    io::phase(store.as_ref(), "training", &fingerprint, || {
        Ok(learn_family(config, &abm)?.spec())
    })
}

/// Runs the full pipeline; with `out` set, exports artifacts and resumes
/// finished phases from checkpoints.
pub fn run_voter_moo(config: &VoterMooConfig, out: Option<&Path>) -> Result<VoterMooArtifacts> {
    config.check()?;
    let abm = ground_truth(config);
    let store = out.map(CheckpointStore::new).transpose()?;
    let fingerprint = io::json_string(config)?;

    let family_spec: AffineFamilySpec =
        io::phase(store.as_ref(), "training", &fingerprint, || {
            Ok(learn_family(config, &abm)?.spec())
        })?;
    let family = AffineGeneratorFamily::<f64>::from_spec(&family_spec)?;
    let family_defect = family.max_relative_defect().unwrap_or(0.0);
    log::info!("held-out affinity defect: {family_defect:.3e}");

    let dynamics = FamilyDynamics { family: &family };
    let objectives = [
        Objective::Terminal {
            observable: Arc::new(|x: &[f64]| x[0]),
            time: config.horizon,
        },
        Objective::ControlCost {
            cost: Arc::new(|u: &[f64]| u[0] * u[0] + u[1] * u[1]),
        },
    ];
    let evaluate = |u: &[f64]| -> Result<Vec<f64>> {
        evaluate_objectives(
            &dynamics,
            &objectives,
            &[config.initial_share],
            u,
            &config.mean_field,
        )
    };

    let full: SamplingOutcome<f64> =
        io::phase(store.as_ref(), "covering-full", &fingerprint, || {
            Ok(sampling_algorithm(
                config.region.clone(),
                2,
                &evaluate,
                &SamplingConfig {
                    iterations: config.moo.iterations,
                    samples_per_box: config.moo.samples_per_box,
                    seed: seed::derive(config.master_seed, stream::BOX_SAMPLING, 1),
                },
            ))
        })?;
    let refined: SamplingOutcome<f64> =
        io::phase(store.as_ref(), "covering-refined", &fingerprint, || {
            Ok(sampling_algorithm(
                config.refined_region.clone(),
                2,
                &evaluate,
                &SamplingConfig {
                    iterations: config.moo.iterations,
                    samples_per_box: config.moo.samples_per_box,
                    seed: seed::derive(config.master_seed, stream::BOX_SAMPLING, 2),
                },
            ))
        })?;

    // Majority flip: does the expected final share cross 1/2 on the
    // surviving covering?
    let mut f1_range = (f64::INFINITY, f64::NEG_INFINITY);
    for b in full.tree.boxes() {
        let f = evaluate(&b.center())?;
        f1_range = (f1_range.0.min(f[0]), f1_range.1.max(f[0]));
    }
    let majority_flip = f1_range.0 < 0.5 && f1_range.1 > 0.5;

    let validation: ValidationReport =
        io::phase(store.as_ref(), "validation", &fingerprint, || {
            validate_front(config, &abm, &evaluate, &refined)
        })?;

    if let Some(dir) = out {
        io::write_covering_csv(&dir.join("covering.csv"), &full.tree)?;
        io::write_front_csv(&dir.join("front.csv"), &full.front())?;
        io::write_covering_csv(&dir.join("covering_refined.csv"), &refined.tree)?;
        io::write_front_csv(&dir.join("front_refined.csv"), &refined.front())?;
        export_trajectories(config, &dynamics, dir)?;
        io::write_json(
            &dir.join("report.json"),
            &ReportDoc {
                config,
                family_defect,
                held_out_controls: family
                    .consistency_checks()
                    .iter()
                    .map(|c| c.control.clone())
                    .collect(),
                full_history: &full.history,
                refined_history: &refined.history,
                f1_range,
                majority_flip,
                validation: &validation,
            },
        )?;
    }

    Ok(VoterMooArtifacts {
        family_defect,
        full,
        refined,
        f1_range,
        majority_flip,
        validation,
    })
}

/// Classifies fresh test points against the refined covering and front.
fn validate_front(
    config: &VoterMooConfig,
    abm: &VoterModel<f64>,
    evaluate: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    refined: &SamplingOutcome<f64>,
) -> Result<ValidationReport> {
    let boxes = refined.tree.boxes();
    let front = refined.front();
    let controls = test_points(
        &config.refined_region,
        boxes,
        config.validation.test_points,
        seed::derive(config.master_seed, stream::VALIDATION, 0),
    );
    let mut points = Vec::with_capacity(controls.len());
    for (k, u) in controls.into_iter().enumerate() {
        let surrogate = evaluate(&u)?;
        let runs = ensemble(
            abm,
            &[config.initial_share],
            &[config.horizon],
            &ConstantControl(u.clone()),
            config.validation.ensemble_runs,
            seed::derive(config.master_seed, stream::VALIDATION, 1 + k as u64),
        )?;
        let summary = ensemble_mean(&runs)?;
        let f1 = summary.mean[0][0];
        let h1 = ci_halfwidth(summary.se[0][0], config.validation.confidence);
        let f2 = u[0] * u[0] + u[1] * u[1];
        let abm_objectives = vec![f1, f2];
        let halfwidths = vec![h1, 0.0];
        points.push(TestPointRecord {
            covered: covered_by_boxes(boxes, &u),
            dominated: dominated_by_front(&front, &abm_objectives, &halfwidths),
            control: u,
            abm_objectives,
            ci_halfwidth: halfwidths,
            surrogate_objectives: surrogate,
        });
    }
    Ok(ValidationReport {
        confidence: config.validation.confidence,
        z: normal_quantile(config.validation.confidence),
        points,
    })
}

/// Exports mean-field share trajectories at representative controls.
fn export_trajectories(
    config: &VoterMooConfig,
    dynamics: &FamilyDynamics<'_, f64>,
    dir: &Path,
) -> Result<()> {
    let times: Vec<f64> = (1..=100)
        .map(|k| config.horizon * k as f64 / 100.0)
        .collect();
    let controls = [
        ("zero-control", vec![0.0, 0.0]),
        ("refined-center", config.refined_region.center()),
    ];
    for (tag, u) in controls {
        let model = dynamics.model_at(&u)?;
        let run = simulate_reduced(
            &model,
            &[config.initial_share],
            &times,
            config.mean_field.dt,
            false,
            0,
        )?;
        io::write_trajectory_csv(
            &dir.join("trajectories").join(format!("{tag}.csv")),
            &run.series,
            &["share"],
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A micro-scale config that keeps the whole pipeline under a second
    /// while leaving every phase in place.
    fn tiny_config() -> VoterMooConfig {
        VoterMooConfig {
            n_agents: 100,
            training_states: 12,
            training_monte_carlo: 60,
            moo: super::super::config::MooPlan {
                iterations: 5,
                samples_per_box: 8,
            },
            validation: super::super::config::ValidationPlan {
                test_points: 4,
                ensemble_runs: 20,
                confidence: 0.999,
            },
            master_seed: 3,
            ..VoterMooConfig::default()
        }
    }

    #[test]
    fn micro_pipeline_produces_consistent_artifacts() {
        let config = tiny_config();
        let a = run_voter_moo(&config, None).unwrap();
        assert!(!a.full.tree.is_empty());
        assert!(!a.refined.tree.is_empty());
        assert_eq!(a.validation.points.len(), 4);
        // The refined covering must stay inside the refined region.
        for b in a.refined.tree.boxes() {
            assert!(config.refined_region.contains(&b.center()));
        }
        // Objective vectors on the front are mutually nondominated and
        // sorted by the first objective.
        let front = a.refined.front();
        for w in front.windows(2) {
            assert!(w[0].objectives[0] <= w[1].objectives[0]);
            assert!(w[0].objectives[1] >= w[1].objectives[1]);
        }
    }

    #[test]
    fn reruns_reuse_checkpoints_and_reproduce_exports() {
        let config = tiny_config();
        let dir = tempfile::tempdir().unwrap();
        run_voter_moo(&config, Some(dir.path())).unwrap();
        let report = std::fs::read(dir.path().join("report.json")).unwrap();
        let covering = std::fs::read(dir.path().join("covering.csv")).unwrap();
        // Second run resumes from checkpoints and must rewrite the same
        // bytes.
        run_voter_moo(&config, Some(dir.path())).unwrap();
        assert_eq!(report, std::fs::read(dir.path().join("report.json")).unwrap());
        assert_eq!(
            covering,
            std::fs::read(dir.path().join("covering.csv")).unwrap()
        );
        for name in [
            "front.csv",
            "covering_refined.csv",
            "front_refined.csv",
            "checkpoints/training.json",
            "checkpoints/validation.json",
        ] {
            assert!(dir.path().join(name).exists(), "{name} missing");
        }
    }
}
