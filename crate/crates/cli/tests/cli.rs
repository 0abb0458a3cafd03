//! End-to-end checks of the `pareko` binary: argument handling, artifact
//! layout, and checkpoint reuse across verbs. Physics-level assertions live
//! in the core crate; these tests run micro-scale configs and only pin the
//! plumbing (plus the voter verdict, which is deterministic under a fixed
//! seed).

use std::path::Path;
use std::process::{Command, Output};

use pareko::experiments::{
    EpidemicMooConfig, ExperimentConfig, MooPlan, ValidationPlan, VoterMooConfig,
};

fn pareko(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pareko"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// A voter pipeline that finishes in well under a second.
fn micro_voter() -> ExperimentConfig {
    ExperimentConfig::VoterMoo(VoterMooConfig {
        n_agents: 100,
        training_states: 12,
        training_monte_carlo: 60,
        moo: MooPlan {
            iterations: 5,
            samples_per_box: 8,
        },
        validation: ValidationPlan {
            test_points: 4,
            ensemble_runs: 20,
            confidence: 0.999,
        },
        master_seed: 3,
        ..VoterMooConfig::default()
    })
}

/// An epidemic pipeline small enough for a smoke test. At this scale the
/// model-comparison verdict is not expected to pass; only the artifacts are.
fn micro_epidemic() -> ExperimentConfig {
    ExperimentConfig::EpidemicMoo(EpidemicMooConfig {
        dictionary_degree: 3,
        snapshot_days: 14,
        control_grid: 4,
        training_monte_carlo: 20,
        rmse_runs: 10,
        horizon_hours: 336.0,
        moo: MooPlan {
            iterations: 4,
            samples_per_box: 6,
        },
        validation: ValidationPlan {
            test_points: 3,
            ensemble_runs: 10,
            confidence: 0.999,
        },
        mean_field: pareko::surrogate::MeanFieldPlan {
            dt: 1.0,
            n_nodes: 336,
        },
        master_seed: 1,
        ..EpidemicMooConfig::default()
    })
}

fn write_config(dir: &Path, config: &ExperimentConfig) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn help_lists_every_verb() {
    let output = pareko(&["--help"]);
    assert!(output.status.success());
    let text = stdout(&output);
    for verb in [
        "analytic-checks",
        "voter-moo",
        "epidemic-moo",
        "identify",
        "validate",
        "export-front",
    ] {
        assert!(text.contains(verb), "--help does not mention `{verb}`");
    }
}

#[test]
fn voter_micro_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &micro_voter());
    let run = dir.path().join("run");
    let run_str = run.to_string_lossy().into_owned();

    let output = pareko(&["--config", &config, "--out", &run_str, "voter-moo"]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(
        text.contains("verdict: PASS"),
        "unexpected voter verdict:\n{text}"
    );
    for artifact in [
        "report.json",
        "covering.csv",
        "front.csv",
        "covering_refined.csv",
        "front_refined.csv",
    ] {
        assert!(run.join(artifact).is_file(), "missing {artifact}");
    }

    // `identify` reuses the training checkpoint and writes the generator
    // family document.
    let output = pareko(&["--config", &config, "--out", &run_str, "identify"]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let family: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.join("family.json")).unwrap()).unwrap();
    assert!(family.get("base").is_some(), "family.json lacks a base term");
    assert!(
        family.get("channels").is_some(),
        "family.json lacks control channels"
    );

    // `validate` replays the classification from checkpoints.
    let output = pareko(&["--config", &config, "--out", &run_str, "validate"]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let text = stdout(&output);
    assert!(text.contains("validation:"), "no validation summary:\n{text}");
    assert!(text.contains("verdict:"), "no verdict line:\n{text}");

    // `export-front` rewrites the covering/front tables.
    let output = pareko(&["--config", &config, "--out", &run_str, "export-front"]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    assert!(stdout(&output).contains("refreshed"));
}

#[test]
fn epidemic_micro_run_writes_model_documents() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &micro_epidemic());
    let run = dir.path().join("run");
    let run_str = run.to_string_lossy().into_owned();

    // The RMSE ordering between models is a physics claim that needs the
    // full desk budgets, so the exit status is not asserted here.
    let output = pareko(&["--config", &config, "--out", &run_str, "epidemic-moo"]);
    let text = stdout(&output);
    assert!(
        text.contains("model comparison"),
        "no comparison table:\n{text}\nstderr: {}",
        stderr(&output)
    );
    assert!(text.contains("verdict:"), "no verdict line:\n{text}");
    for artifact in ["report.json", "covering.csv", "front.csv", "rmse.csv"] {
        assert!(run.join(artifact).is_file(), "missing {artifact}");
    }

    let output = pareko(&["--config", &config, "--out", &run_str, "identify"]);
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    for (artifact, state, augmented) in [
        ("augmented-grouped.json", 4, 6),
        ("augmented-pooled.json", 2, 4),
    ] {
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(run.join(artifact)).unwrap()).unwrap();
        assert_eq!(
            doc["state_dimension"], state,
            "{artifact} has the wrong state dimension"
        );
        assert_eq!(
            doc["model"]["dictionary"]["dimension"], augmented,
            "{artifact} has the wrong augmented dimension"
        );
    }
    for artifact in ["interpolated-grouped.json", "interpolated-pooled.json"] {
        assert!(run.join(artifact).is_file(), "missing {artifact}");
    }
}

#[test]
fn identify_requires_config_and_out() {
    let output = pareko(&["identify"]);
    assert!(!output.status.success());
    assert!(
        stderr(&output).contains("--config"),
        "error does not point at --config: {}",
        stderr(&output)
    );

    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &micro_voter());
    let output = pareko(&["--config", &config, "identify"]);
    assert!(!output.status.success());
    assert!(
        stderr(&output).contains("--out"),
        "error does not point at --out: {}",
        stderr(&output)
    );
}

#[test]
fn config_experiment_must_match_verb() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &micro_voter());
    let output = pareko(&["--config", &config, "epidemic-moo"]);
    assert!(!output.status.success());
    assert!(
        stderr(&output).contains("different experiment"),
        "unexpected error: {}",
        stderr(&output)
    );
}
