//! Epidemic-containment pipeline on the two-group stochastic SIR model.
//!
//! The simulator plays the role of a large epidemic ABM: one trajectory
//! per control on an equidistant control grid, Kramers–Moyal probes at
//! daily snapshots, then four reduced models learned from the same data —
//! state augmentation and generator interpolation, each over the grouped
//! compartments `(s_a, s_c, i_a, i_c)` and over the pooled `(s, i)`.
//! Augmentation pools every `(state, control)` probe into one regression;
//! interpolation fits one generator per decision-space vertex and
//! extrapolates linearly, which the quadratic contact reduction `(1−u)²`
//! breaks — the model-comparison table quantifies by how much.
//!
//! The box-subdivision optimizer then minimizes the expected infection
//! burden against the closure cost on the augmented grouped model, and
//! fresh simulator ensembles validate the front at random test points.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abm::schedule::ConstantControl;
use crate::abm::sir::SirTwoGroup;
use crate::abm::{ensemble, ensemble_mean, km_estimate, normal_quantile, Abm, TimeSeries};
use crate::control::{augmented_sample, AffineGeneratorFamily, AugmentedModel};
use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::gedmd::{SamplePoint, SdeModel};
use crate::moo::{sampling_algorithm, SamplingConfig, SamplingOutcome};
use crate::seed::{self, stream};
use crate::surrogate::{evaluate_objectives, simulate_reduced, AugmentedDynamics, Objective};

use super::config::EpidemicMooConfig;
use super::io::{self, CheckpointStore, RmseRow};
use super::validate::{
    ci_halfwidth, covered_by_boxes, dominated_by_front, test_points, TestPointRecord,
    ValidationReport,
};

/// Pointwise drift/diffusion estimate at one trajectory snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeRecord {
    /// Snapshot state `(s_a, s_c, i_a, i_c)` in population fractions.
    pub state: Vec<f64>,
    /// Estimated drift.
    pub drift: Vec<f64>,
    /// Estimated diffusion matrix, column-major 4×4.
    pub diffusion: Vec<f64>,
}

/// All probes collected along one training control's trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControlProbes {
    /// The constant control `(u_s, u_w)`.
    pub control: Vec<f64>,
    /// One probe per daily snapshot, in time order.
    pub probes: Vec<ProbeRecord>,
}

/// A recorded reference trajectory (simulator ensemble mean).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryDto {
    /// The constant control behind the ensemble.
    pub control: Vec<f64>,
    /// Recording times in hours.
    pub times: Vec<f64>,
    /// Mean states, one row per time.
    pub states: Vec<Vec<f64>>,
}

/// The four reduced models of the comparison table.
pub struct EpidemicModels {
    /// Augmented model over `(s_a, s_c, i_a, i_c, u_s, u_w)`.
    pub augmented_grouped: AugmentedModel<f64>,
    /// Augmented model over the pooled `(s, i, u_s, u_w)`.
    pub augmented_pooled: AugmentedModel<f64>,
    /// Generator interpolation over the grouped compartments.
    pub interpolated_grouped: AffineGeneratorFamily<f64>,
    /// Generator interpolation over the pooled compartments.
    pub interpolated_pooled: AffineGeneratorFamily<f64>,
}

/// Everything an epidemic pipeline run produces.
pub struct EpidemicMooArtifacts {
    /// The learned reduced models.
    pub models: EpidemicModels,
    /// Model-comparison table: RMSE against the simulator ensemble mean
    /// at the four decision-space corners.
    pub rmse: Vec<RmseRow>,
    /// The corner reference trajectories behind the table.
    pub references: Vec<TrajectoryDto>,
    /// Covering and front over the decision space.
    pub outcome: SamplingOutcome<f64>,
    /// Largest deviation of archived economic costs from their closed
    /// form across the front.
    pub front_f2_defect: f64,
    /// Test-point validation of the front.
    pub validation: ValidationReport,
}

/// The deterministic `report.json` payload.
#[derive(Serialize)]
struct ReportDoc<'a> {
    config: &'a EpidemicMooConfig,
    interpolation_defects: Vec<f64>,
    rmse: &'a [RmseRow],
    history: &'a [crate::moo::IterationRecord<f64>],
    front_size: usize,
    front_f2_defect: f64,
    validation: &'a ValidationReport,
}

/// The two-group simulator configured as the training/validation truth.
#[must_use]
pub fn stand_in(config: &EpidemicMooConfig) -> SirTwoGroup<f64> {
    let mut sir = SirTwoGroup::benchmark();
    sir.dt = config.step_hours;
    sir
}

/// Closed-form economic cost `T·(u_s² − ln(u_w^max − u_w))`.
#[must_use]
pub fn economic_cost(config: &EpidemicMooConfig, u: &[f64]) -> f64 {
    config.horizon_hours * (u[0] * u[0] - (config.u_w_max - u[1]).ln())
}

/// Pools the two groups: susceptible and infected fractions summed, and
/// the diffusion mapped to `P a Pᵀ` for `P = [[1,1,0,0],[0,0,1,1]]`.
fn pool(state: &[f64], drift: &[f64], diffusion: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>, DMatrix<f64>) {
    let sum2 = |v: &[f64]| vec![v[0] + v[1], v[2] + v[3]];
    let groups = [[0usize, 1], [2, 3]];
    let pooled = DMatrix::from_fn(2, 2, |r, c| {
        groups[r]
            .iter()
            .map(|&i| groups[c].iter().map(|&j| diffusion[(i, j)]).sum::<f64>())
            .sum()
    });
    (sum2(state), sum2(drift), pooled)
}

/// Phase A: one trajectory per grid control with Kramers–Moyal probes at
/// the daily snapshots. Resumes from the `training` checkpoint when the
/// config fingerprint matches.
pub fn training_probes(
    config: &EpidemicMooConfig,
    sir: &SirTwoGroup<f64>,
    store: Option<&CheckpointStore>,
    fingerprint: &str,
) -> Result<Vec<ControlProbes>> {
    io::phase(store, "training", fingerprint, || {
        let controls = config.control_points();
        let times = config.snapshot_times();
        let x0 = sir.initial_state(config.infected_adults, config.infected_children);
        controls
            .par_iter()
            .enumerate()
            .map(|(j, u)| {
                let path = sir.run(
                    &x0,
                    &times,
                    &ConstantControl(u.clone()),
                    seed::derive(config.master_seed, stream::TRAINING_STATES, j as u64),
                )?;
                let probes = path
                    .states()
                    .iter()
                    .enumerate()
                    .map(|(day, x)| {
                        let est = km_estimate(
                            sir,
                            x,
                            u,
                            config.step_hours,
                            config.training_monte_carlo,
                            seed::derive(
                                config.master_seed,
                                stream::KRAMERS_MOYAL,
                                ((j as u64) << 32) | day as u64,
                            ),
                        )?;
                        Ok(ProbeRecord {
                            state: est.state,
                            drift: est.drift,
                            diffusion: est.diffusion.as_slice().to_vec(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ControlProbes {
                    control: u.clone(),
                    probes,
                })
            })
            .collect()
    })
}

/// Runs only the probe and model-learning phases and returns the four
/// reduced models. With `out` set, resumes from (and persists to) the
/// same `training` checkpoint the full pipeline uses.
pub fn identify_models(config: &EpidemicMooConfig, out: Option<&Path>) -> Result<EpidemicModels> {
    config.check()?;
    let sir = stand_in(config);
    let store = out.map(CheckpointStore::new).transpose()?;
    let fingerprint = io::json_string(config)?;
    let probes = training_probes(config, &sir, store.as_ref(), &fingerprint)?;
    learn_models(config, &probes)
}

/// Phase B: learns the four reduced models from the training probes.
///
/// Augmentation pools all probes; interpolation uses only the probes of
/// the decision-space vertices `0`, `scale·e_i` and checks itself at the
/// far corner, so its training set must contain those grid points.
pub fn learn_models(
    config: &EpidemicMooConfig,
    probes: &[ControlProbes],
) -> Result<EpidemicModels> {
    let udot = [0.0, 0.0];
    let mut aug6 = Vec::new();
    let mut aug4 = Vec::new();
    for cp in probes {
        for p in &cp.probes {
            let a = DMatrix::from_column_slice(4, 4, &p.diffusion);
            aug6.push(augmented_sample(&p.state, &cp.control, &p.drift, &udot, &a)?);
            let (x, b, ap) = pool(&p.state, &p.drift, &a);
            aug4.push(augmented_sample(&x, &cp.control, &b, &udot, &ap)?);
        }
    }
    let deg = config.dictionary_degree;
    let dict6 = Arc::new(Dictionary::monomials(6, deg));
    let dict4 = Arc::new(Dictionary::monomials(4, deg));
    let mut augmented_grouped = AugmentedModel::learn(&dict6, 4, &aug6, config.ridge)?;
    augmented_grouped.zero_control_diffusion();
    let mut augmented_pooled = AugmentedModel::learn(&dict4, 2, &aug4, config.ridge)?;
    augmented_pooled.zero_control_diffusion();

    let find = |u: &[f64]| -> Result<&ControlProbes> {
        probes.iter().find(|cp| cp.control == u).ok_or_else(|| {
            Error::Config(format!(
                "control grid does not contain the interpolation vertex {u:?}"
            ))
        })
    };
    let grouped_at = |u: &[f64]| -> Result<Vec<SamplePoint<f64>>> {
        find(u)?
            .probes
            .iter()
            .map(|p| {
                SamplePoint::new(
                    p.state.clone(),
                    p.drift.clone(),
                    DMatrix::from_column_slice(4, 4, &p.diffusion),
                )
            })
            .collect()
    };
    let pooled_at = |u: &[f64]| -> Result<Vec<SamplePoint<f64>>> {
        find(u)?
            .probes
            .iter()
            .map(|p| {
                let a = DMatrix::from_column_slice(4, 4, &p.diffusion);
                let (x, b, ap) = pool(&p.state, &p.drift, &a);
                SamplePoint::new(x, b, ap)
            })
            .collect()
    };
    let scales = [config.region.upper()[0], config.region.upper()[1]];
    let far_corner = vec![scales[0], scales[1]];
    let interpolated_grouped = AffineGeneratorFamily::learn(
        &Arc::new(Dictionary::monomials(4, deg)),
        &scales,
        grouped_at,
        config.ridge,
        std::slice::from_ref(&far_corner),
    )?;
    let interpolated_pooled = AffineGeneratorFamily::learn(
        &Arc::new(Dictionary::monomials(2, deg)),
        &scales,
        pooled_at,
        config.ridge,
        std::slice::from_ref(&far_corner),
    )?;
    Ok(EpidemicModels {
        augmented_grouped,
        augmented_pooled,
        interpolated_grouped,
        interpolated_pooled,
    })
}

/// Checkpoint payload of the model-comparison phase.
#[derive(Serialize, Deserialize)]
struct RmsePhase {
    rows: Vec<RmseRow>,
    references: Vec<TrajectoryDto>,
}

/// Mean-field trajectory of a frozen model; a diverging integration
/// reports the largest representable error instead of aborting the table.
fn surrogate_rmse(
    model: Result<SdeModel<f64>>,
    x0: &[f64],
    reference: &TimeSeries<f64>,
    times: &[f64],
    dt: f64,
) -> Result<f64> {
    let run = model.and_then(|m| simulate_reduced(&m, x0, times, dt, false, 0));
    match run {
        Ok(run) => crate::surrogate::trajectory_rmse(&run.series, reference, times),
        Err(Error::Stability(msg)) => {
            log::warn!("surrogate trajectory diverged in the comparison table: {msg}");
            Ok(f64::MAX)
        }
        Err(e) => Err(e),
    }
}

/// Phase C: the model-comparison table at the decision-space corners.
fn compute_rmse(
    config: &EpidemicMooConfig,
    sir: &SirTwoGroup<f64>,
    models: &EpidemicModels,
) -> Result<RmsePhase> {
    let times = config.snapshot_times();
    let x0 = sir.initial_state(config.infected_adults, config.infected_children);
    let x0_pooled = [x0[0] + x0[1], x0[2] + x0[3]];
    let dt = config.mean_field.dt;
    let mut rows = Vec::new();
    let mut references = Vec::new();
    for (k, u) in config.corner_controls().iter().enumerate() {
        let runs = ensemble(
            sir,
            &x0,
            &times,
            &ConstantControl(u.clone()),
            config.rmse_runs,
            seed::derive(config.master_seed, stream::ENSEMBLE, k as u64),
        )?;
        let summary = ensemble_mean(&runs)?;
        let grouped_ref = TimeSeries::new(times.clone(), summary.mean.clone())?;
        let pooled_ref = TimeSeries::new(
            times.clone(),
            summary
                .mean
                .iter()
                .map(|s| vec![s[0] + s[1], s[2] + s[3]])
                .collect(),
        )?;
        let table: [(&str, usize, Result<SdeModel<f64>>, &[f64], &TimeSeries<f64>); 4] = [
            (
                "augmented",
                6,
                models.augmented_grouped.restrict(u),
                &x0,
                &grouped_ref,
            ),
            (
                "augmented",
                4,
                models.augmented_pooled.restrict(u),
                &x0_pooled,
                &pooled_ref,
            ),
            (
                "interpolated",
                6,
                models
                    .interpolated_grouped
                    .interpolate(u)
                    .and_then(|g| g.identify()),
                &x0,
                &grouped_ref,
            ),
            (
                "interpolated",
                4,
                models
                    .interpolated_pooled
                    .interpolate(u)
                    .and_then(|g| g.identify()),
                &x0_pooled,
                &pooled_ref,
            ),
        ];
        for (model, dimension, frozen, start, reference) in table {
            rows.push(RmseRow {
                model: model.into(),
                dimension,
                control: u.clone(),
                rmse: surrogate_rmse(frozen, start, reference, &times, dt)?,
            });
        }
        references.push(TrajectoryDto {
            control: u.clone(),
            times: times.clone(),
            states: summary.mean,
        });
    }
    Ok(RmsePhase { rows, references })
}

/// Runs the full pipeline; with `out` set, exports artifacts and resumes
/// finished phases from checkpoints.
pub fn run_epidemic_moo(
    config: &EpidemicMooConfig,
    out: Option<&Path>,
) -> Result<EpidemicMooArtifacts> {
    config.check()?;
    let sir = stand_in(config);
    let store = out.map(CheckpointStore::new).transpose()?;
    let fingerprint = io::json_string(config)?;

    let probes = training_probes(config, &sir, store.as_ref(), &fingerprint)?;
    let models = learn_models(config, &probes)?;
    let interpolation_defects: Vec<f64> = [&models.interpolated_grouped, &models.interpolated_pooled]
        .iter()
        .map(|f| f.max_relative_defect().unwrap_or(0.0))
        .collect();
    log::info!(
        "interpolation held-out defects (grouped, pooled): {:.3e}, {:.3e}",
        interpolation_defects[0],
        interpolation_defects[1]
    );

    let rmse_phase: RmsePhase = io::phase(store.as_ref(), "rmse", &fingerprint, || {
        compute_rmse(config, &sir, &models)
    })?;

    let x0 = sir.initial_state(config.infected_adults, config.infected_children);
    let i_max = config.i_max;
    let horizon = config.horizon_hours;
    let u_w_max = config.u_w_max;
    let objectives = [
        Objective::Integral {
            integrand: Arc::new(move |x: &[f64]| {
                let i = x[2] + x[3];
                i + (10.0 * (i - i_max)).exp()
            }),
            horizon,
        },
        Objective::ControlCost {
            cost: Arc::new(move |u: &[f64]| horizon * (u[0] * u[0] - (u_w_max - u[1]).ln())),
        },
    ];
    let dynamics = AugmentedDynamics {
        model: &models.augmented_grouped,
    };
    let evaluate = |u: &[f64]| -> Result<Vec<f64>> {
        evaluate_objectives(&dynamics, &objectives, &x0, u, &config.mean_field)
    };
    // The archive and its checkpoints must stay finite: a diverged
    // mean-field trajectory counts as a failed probe, not as +∞.
    let evaluate_finite = |u: &[f64]| -> Result<Vec<f64>> {
        let f = evaluate(u)?;
        if f.iter().all(|v| v.is_finite()) {
            Ok(f)
        } else {
            Err(Error::Stability("surrogate objective diverged".into()))
        }
    };

    let outcome: SamplingOutcome<f64> =
        io::phase(store.as_ref(), "covering", &fingerprint, || {
            Ok(sampling_algorithm(
                config.region.clone(),
                2,
                &evaluate_finite,
                &SamplingConfig {
                    iterations: config.moo.iterations,
                    samples_per_box: config.moo.samples_per_box,
                    seed: seed::derive(config.master_seed, stream::BOX_SAMPLING, 1),
                },
            ))
        })?;

    let front = outcome.front();
    let front_f2_defect = front
        .iter()
        .map(|e| (e.objectives[1] - economic_cost(config, &e.decision)).abs())
        .fold(0.0, f64::max);

    let validation: ValidationReport =
        io::phase(store.as_ref(), "validation", &fingerprint, || {
            validate_front(config, &sir, &evaluate, &outcome)
        })?;

    if let Some(dir) = out {
        io::write_covering_csv(&dir.join("covering.csv"), &outcome.tree)?;
        io::write_front_csv(&dir.join("front.csv"), &front)?;
        io::write_rmse_csv(&dir.join("rmse.csv"), &rmse_phase.rows)?;
        export_trajectories(config, &models, &rmse_phase.references, dir)?;
        io::write_json(
            &dir.join("report.json"),
            &ReportDoc {
                config,
                interpolation_defects,
                rmse: &rmse_phase.rows,
                history: &outcome.history,
                front_size: front.len(),
                front_f2_defect,
                validation: &validation,
            },
        )?;
    }

    Ok(EpidemicMooArtifacts {
        models,
        rmse: rmse_phase.rows,
        references: rmse_phase.references,
        outcome,
        front_f2_defect,
        validation,
    })
}

/// Classifies fresh simulator test points against the covering and front.
fn validate_front(
    config: &EpidemicMooConfig,
    sir: &SirTwoGroup<f64>,
    evaluate: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    outcome: &SamplingOutcome<f64>,
) -> Result<ValidationReport> {
    let boxes = outcome.tree.boxes();
    let front = outcome.front();
    let controls = test_points(
        &config.region,
        boxes,
        config.validation.test_points,
        seed::derive(config.master_seed, stream::VALIDATION, 0),
    );
    let x0 = sir.initial_state(config.infected_adults, config.infected_children);
    let n_nodes = config.mean_field.n_nodes;
    let times: Vec<f64> = (1..=n_nodes)
        .map(|k| config.horizon_hours * k as f64 / n_nodes as f64)
        .collect();
    let i_max = config.i_max;
    let integrand = |x: &[f64]| {
        let i = x[2] + x[3];
        i + (10.0 * (i - i_max)).exp()
    };
    let mut points = Vec::with_capacity(controls.len());
    for (k, u) in controls.into_iter().enumerate() {
        // A divergent surrogate stays in the record as the largest
        // representable value (the JSON exports must stay finite).
        let surrogate: Vec<f64> = match evaluate(&u) {
            Ok(f) => f.into_iter().map(|v| v.min(f64::MAX)).collect(),
            Err(Error::Stability(_)) => vec![f64::MAX; 2],
            Err(e) => return Err(e),
        };
        let runs = ensemble(
            sir,
            &x0,
            &times,
            &ConstantControl(u.clone()),
            config.validation.ensemble_runs,
            seed::derive(config.master_seed, stream::VALIDATION, 1 + k as u64),
        )?;
        // Per-run trapezoid on the uniform grid, then ensemble statistics:
        // the exponential penalty is nonlinear, so averaging must happen
        // after integration.
        let h = config.horizon_hours / n_nodes as f64;
        let f1s: Vec<f64> = runs
            .iter()
            .map(|run| {
                let states = run.states();
                let mut acc = 0.5 * (integrand(&x0) + integrand(&states[n_nodes - 1]));
                for s in &states[..n_nodes - 1] {
                    acc += integrand(s);
                }
                acc * h
            })
            .collect();
        let n = f1s.len() as f64;
        let mean = f1s.iter().sum::<f64>() / n;
        let var = f1s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let h1 = ci_halfwidth((var / n).sqrt(), config.validation.confidence);
        let abm_objectives = vec![mean, economic_cost(config, &u)];
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

/// Exports corner reference means and the matching augmented mean-field
/// trajectories.
fn export_trajectories(
    config: &EpidemicMooConfig,
    models: &EpidemicModels,
    references: &[TrajectoryDto],
    dir: &Path,
) -> Result<()> {
    let components = ["s_adults", "s_children", "i_adults", "i_children"];
    for reference in references {
        let tag = format!(
            "corner-us{:.2}-uw{:.2}",
            reference.control[0], reference.control[1]
        );
        let series = TimeSeries::new(reference.times.clone(), reference.states.clone())?;
        io::write_trajectory_csv(
            &dir.join("trajectories").join(format!("{tag}-abm.csv")),
            &series,
            &components,
        )?;
        let model = models.augmented_grouped.restrict(&reference.control)?;
        let x0 = stand_in(config)
            .initial_state(config.infected_adults, config.infected_children);
        match simulate_reduced(
            &model,
            &x0,
            &reference.times,
            config.mean_field.dt,
            false,
            0,
        ) {
            Ok(run) => io::write_trajectory_csv(
                &dir.join("trajectories").join(format!("{tag}-augmented.csv")),
                &run.series,
                &components,
            )?,
            Err(Error::Stability(msg)) => {
                log::warn!("skipping diverged surrogate export at {tag}: {msg}");
            }
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::MeanFieldPlan;

    /// A micro-scale config exercising every phase in well under a second.
    fn tiny_config() -> EpidemicMooConfig {
        EpidemicMooConfig {
            step_hours: 0.5,
            dictionary_degree: 2,
            snapshot_days: 4,
            control_grid: 3,
            training_monte_carlo: 20,
            rmse_runs: 8,
            horizon_hours: 96.0,
            moo: super::super::config::MooPlan {
                iterations: 4,
                samples_per_box: 6,
            },
            validation: super::super::config::ValidationPlan {
                test_points: 3,
                ensemble_runs: 8,
                confidence: 0.999,
            },
            mean_field: MeanFieldPlan {
                dt: 1.0,
                n_nodes: 96,
            },
            master_seed: 5,
            ..EpidemicMooConfig::default()
        }
    }

    #[test]
    fn pooling_matches_hand_algebra() {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 2.0, 3.0, 4.0, //
                5.0, 6.0, 7.0, 8.0, //
                9.0, 10.0, 11.0, 12.0, //
                13.0, 14.0, 15.0, 16.0,
            ],
        );
        let (x, b, ap) = pool(&[0.1, 0.2, 0.3, 0.4], &[-1.0, -2.0, 3.0, 4.0], &a);
        assert_eq!(x, vec![0.30000000000000004, 0.7]);
        assert_eq!(b, vec![-3.0, 7.0]);
        // P a Pᵀ with P = [[1,1,0,0],[0,0,1,1]].
        assert_eq!(ap[(0, 0)], 1.0 + 2.0 + 5.0 + 6.0);
        assert_eq!(ap[(0, 1)], 3.0 + 4.0 + 7.0 + 8.0);
        assert_eq!(ap[(1, 0)], 9.0 + 10.0 + 13.0 + 14.0);
        assert_eq!(ap[(1, 1)], 11.0 + 12.0 + 15.0 + 16.0);
    }

    #[test]
    fn economic_cost_matches_closed_form() {
        let config = EpidemicMooConfig::default();
        let u = [0.0, 0.63];
        let expected = 1176.0 * (-(0.81f64 - 0.63).ln());
        assert_eq!(economic_cost(&config, &u), expected);
        assert!((expected - 2016.6029514361058).abs() < 1e-10);
    }

    #[test]
    fn micro_pipeline_produces_consistent_artifacts() {
        let config = tiny_config();
        let a = run_epidemic_moo(&config, None).unwrap();
        // 4 models × 4 corners.
        assert_eq!(a.rmse.len(), 16);
        assert!(a.rmse.iter().all(|r| r.rmse.is_finite()));
        assert_eq!(a.references.len(), 4);
        assert!(!a.outcome.tree.is_empty());
        assert_eq!(a.validation.points.len(), 3);
        // Archived economic costs are exactly their closed form.
        assert_eq!(a.front_f2_defect, 0.0);
        // The front is mutually nondominated and sorted by burden.
        let front = a.outcome.front();
        for w in front.windows(2) {
            assert!(w[0].objectives[0] <= w[1].objectives[0]);
            assert!(w[0].objectives[1] >= w[1].objectives[1]);
        }
    }

    #[test]
    fn reruns_reuse_checkpoints_and_reproduce_exports() {
        let config = tiny_config();
        let dir = tempfile::tempdir().unwrap();
        run_epidemic_moo(&config, Some(dir.path())).unwrap();
        let report = std::fs::read(dir.path().join("report.json")).unwrap();
        let rmse = std::fs::read(dir.path().join("rmse.csv")).unwrap();
        run_epidemic_moo(&config, Some(dir.path())).unwrap();
        assert_eq!(report, std::fs::read(dir.path().join("report.json")).unwrap());
        assert_eq!(rmse, std::fs::read(dir.path().join("rmse.csv")).unwrap());
        for name in [
            "covering.csv",
            "front.csv",
            "checkpoints/training.json",
            "checkpoints/rmse.json",
            "checkpoints/covering.json",
            "checkpoints/validation.json",
            "trajectories/corner-us0.00-uw0.00-abm.csv",
        ] {
            assert!(dir.path().join(name).exists(), "{name} missing");
        }
    }
}
