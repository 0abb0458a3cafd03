//! Command-line front end for the pareko toolkit.
//!
//! Verbs map one-to-one onto the library pipelines: `analytic-checks`
//! runs the closed-form self-check battery, `voter-moo` and
//! `epidemic-moo` run the two full experiment pipelines, `identify`
//! stops after model learning and exports the fitted models as JSON,
//! `validate` re-checks the test-point classification of a run, and
//! `export-front` rewrites the covering/front CSV files. All verbs that
//! touch a run directory share its checkpoints: finished phases are
//! reused whenever the effective configuration matches, so `identify`
//! followed by `epidemic-moo` simulates the training data only once.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pareko::experiments::{
    self, AnalyticConfig, CheckRecord, EpidemicMooConfig, ExperimentConfig, Scale,
    ValidationReport, VoterMooConfig,
};

#[derive(Parser)]
#[command(
    name = "pareko",
    version,
    about = "Koopman-generator surrogates and set-oriented multi-objective optimization for controlled agent-based models"
)]
struct Cli {
    /// JSON experiment configuration (tagged with an "experiment" field).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override the configuration's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo budget preset applied on top of the configuration.
    #[arg(long, global = true, value_enum)]
    scale: Option<ScaleArg>,

    /// Run directory for artifacts and resumable checkpoints.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the closed-form self-check battery and report each check.
    AnalyticChecks,
    /// Run the two-opinion voter pipeline: learn an affine generator
    /// family, optimize expected share vs. control cost, validate.
    VoterMoo,
    /// Run the two-group epidemic pipeline: learn augmented and
    /// interpolated models, compare them, optimize, validate.
    EpidemicMoo,
    /// Learn the surrogate models only and export them as JSON.
    Identify,
    /// Re-check the test-point validation of a finished run.
    Validate,
    /// Re-export covering.csv and front.csv from a run directory.
    ExportFront,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    /// Reduced Monte Carlo budgets that preserve the tested properties.
    Desk,
    /// The full published sampling plans.
    Paper,
}

impl From<ScaleArg> for Scale {
    fn from(value: ScaleArg) -> Self {
        match value {
            ScaleArg::Desk => Scale::Desk,
            ScaleArg::Paper => Scale::Paper,
        }
    }
}

fn main() -> anyhow::Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::AnalyticChecks => analytic_checks(&cli),
        Command::VoterMoo => voter_moo(&cli),
        Command::EpidemicMoo => epidemic_moo(&cli),
        Command::Identify => identify(&cli),
        Command::Validate => validate(&cli),
        Command::ExportFront => export_front(&cli),
    }
}

/// Loads `--config` (or falls back to `default`), then applies the
/// `--scale` and `--seed` overrides and validates the result.
fn load_config(
    cli: &Cli,
    default: impl FnOnce() -> ExperimentConfig,
) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => default(),
    };
    if let Some(scale) = cli.scale {
        config = config.at_scale(scale.into());
    }
    if let Some(seed) = cli.seed {
        config.set_master_seed(seed);
    }
    config.check().context("invalid configuration")?;
    Ok(config)
}

/// As [`load_config`] but without a default: the experiment type comes
/// from the file's tag.
fn require_config(cli: &Cli, verb: &str) -> anyhow::Result<ExperimentConfig> {
    if cli.config.is_none() {
        bail!("`{verb}` needs --config to know which experiment the run belongs to");
    }
    load_config(cli, || unreachable!())
}

fn require_out<'a>(cli: &'a Cli, verb: &str) -> anyhow::Result<&'a Path> {
    cli.out
        .as_deref()
        .ok_or_else(|| anyhow::anyhow!("`{verb}` needs --out (the run directory)"))
}

fn print_check(check: &CheckRecord) {
    println!(
        "{}: {} (measured {:.3e}, threshold {:.3e})",
        check.name,
        if check.passed { "PASS" } else { "FAIL" },
        check.measure,
        check.threshold,
    );
}

fn analytic_checks(cli: &Cli) -> anyhow::Result<ExitCode> {
    let config = load_config(cli, || {
        ExperimentConfig::AnalyticChecks(AnalyticConfig::default())
    })?;
    let ExperimentConfig::AnalyticChecks(config) = config else {
        bail!("--config selects a different experiment; run it with its own verb");
    };
    let report = experiments::run_analytic_checks(config.master_seed)?;
    for check in &report.checks {
        print_check(check);
    }
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("report.json");
        std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
        println!("report written to {}", path.display());
    }
    if report.all_passed() {
        println!("all {} checks passed", report.checks.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("failing checks: {}", report.failures().join(", "));
        Ok(ExitCode::FAILURE)
    }
}

fn expect_voter(config: ExperimentConfig) -> anyhow::Result<VoterMooConfig> {
    match config {
        ExperimentConfig::VoterMoo(c) => Ok(c),
        _ => bail!("--config selects a different experiment; run it with its own verb"),
    }
}

fn expect_epidemic(config: ExperimentConfig) -> anyhow::Result<EpidemicMooConfig> {
    match config {
        ExperimentConfig::EpidemicMoo(c) => Ok(c),
        _ => bail!("--config selects a different experiment; run it with its own verb"),
    }
}

fn print_validation(validation: &ValidationReport) {
    let covered = validation.covered().len();
    let uncovered = validation.uncovered().len();
    println!(
        "validation: {covered} test points inside the covering ({} dominated), {uncovered} outside",
        validation.covered_but_dominated(),
    );
    if let Some(fraction) = validation.uncovered_dominated_fraction() {
        println!(
            "validation: {:.0}% of outside points dominated by the front",
            100.0 * fraction
        );
    }
}

/// The classification the voter pipeline promises: covered test points
/// are not dominated beyond their confidence intervals, and at least
/// 90% of uncovered test points are.
fn voter_verdict(validation: &ValidationReport) -> ExitCode {
    let covered_ok = validation.covered_but_dominated() == 0;
    let uncovered_ok = validation
        .uncovered_dominated_fraction()
        .is_none_or(|f| f >= 0.9);
    if covered_ok && uncovered_ok {
        println!("verdict: PASS (front consistent with the simulator test points)");
        ExitCode::SUCCESS
    } else {
        println!("verdict: FAIL (front inconsistent with the simulator test points)");
        ExitCode::FAILURE
    }
}

/// What the epidemic pipeline promises: the augmented grouped model
/// beats generator interpolation at every decision-space corner, and
/// the archived economic costs match their closed form. The test-point
/// classification is reported as information only — the expectation of
/// the convex exposure penalty genuinely exceeds its mean-field value,
/// so simulator estimates sit slightly above the surrogate front.
fn epidemic_verdict(artifacts: &experiments::EpidemicMooArtifacts) -> ExitCode {
    let key = |control: &[f64]| {
        control
            .iter()
            .map(|v| format!("{v:.6}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    let corners: std::collections::BTreeSet<String> =
        artifacts.rmse.iter().map(|r| key(&r.control)).collect();
    let mut ordering_ok = true;
    for u in corners {
        let at = |model: &str, dim: usize| {
            artifacts
                .rmse
                .iter()
                .find(|r| r.model == model && r.dimension == dim && key(&r.control) == u)
                .map(|r| r.rmse)
        };
        if let (Some(aug), Some(interp)) = (at("augmented", 6), at("interpolated", 6)) {
            ordering_ok &= aug < interp;
        }
    }
    let cost_ok = artifacts.front_f2_defect <= 1e-9;
    if ordering_ok && cost_ok {
        println!("verdict: PASS (augmented model beats interpolation at every corner; archived costs exact)");
        ExitCode::SUCCESS
    } else {
        println!(
            "verdict: FAIL (corner ordering {}, cost defect {:.3e})",
            if ordering_ok { "holds" } else { "violated" },
            artifacts.front_f2_defect,
        );
        ExitCode::FAILURE
    }
}

fn voter_moo(cli: &Cli) -> anyhow::Result<ExitCode> {
    let config = expect_voter(load_config(cli, || {
        ExperimentConfig::VoterMoo(VoterMooConfig::default())
    })?)?;
    if cli.out.is_none() {
        log::warn!("no --out given: results are printed but not persisted");
    }
    let artifacts = experiments::run_voter_moo(&config, cli.out.as_deref())?;
    println!(
        "family learned: held-out affinity defect {:.3e}",
        artifacts.family_defect
    );
    println!(
        "full covering: {} boxes, front {} points; refined covering: {} boxes, front {} points",
        artifacts.full.tree.boxes().len(),
        artifacts.full.archive.len(),
        artifacts.refined.tree.boxes().len(),
        artifacts.refined.archive.len(),
    );
    println!(
        "expected final share over the covering: [{:.4}, {:.4}]{}",
        artifacts.f1_range.0,
        artifacts.f1_range.1,
        if artifacts.majority_flip {
            " (crosses 1/2: majority flip reachable)"
        } else {
            ""
        },
    );
    print_validation(&artifacts.validation);
    if let Some(dir) = &cli.out {
        println!("artifacts written to {}", dir.display());
    }
    Ok(voter_verdict(&artifacts.validation))
}

fn epidemic_moo(cli: &Cli) -> anyhow::Result<ExitCode> {
    let config = expect_epidemic(load_config(cli, || {
        ExperimentConfig::EpidemicMoo(EpidemicMooConfig::default())
    })?)?;
    if cli.out.is_none() {
        log::warn!("no --out given: results are printed but not persisted");
    }
    let artifacts = experiments::run_epidemic_moo(&config, cli.out.as_deref())?;
    println!("model comparison (RMSE against the simulator ensemble mean):");
    for row in &artifacts.rmse {
        println!(
            "  {:>12} dim {}  u = ({:.2}, {:.2})  rmse {:.4}",
            row.model, row.dimension, row.control[0], row.control[1], row.rmse,
        );
    }
    println!(
        "covering: {} boxes, front {} points, closed-form cost defect {:.3e}",
        artifacts.outcome.tree.boxes().len(),
        artifacts.outcome.archive.len(),
        artifacts.front_f2_defect,
    );
    print_validation(&artifacts.validation);
    if let Some(dir) = &cli.out {
        println!("artifacts written to {}", dir.display());
    }
    Ok(epidemic_verdict(&artifacts))
}

/// Serialized augmented model: the coefficient model plus the index
/// splitting physical state from appended control coordinates.
#[derive(Serialize)]
struct AugmentedModelDoc {
    state_dimension: usize,
    model: pareko::gedmd::SdeModelSpec,
}

fn write_json<S: Serialize>(dir: &Path, name: &str, value: &S) -> anyhow::Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn identify(cli: &Cli) -> anyhow::Result<ExitCode> {
    let config = require_config(cli, "identify")?;
    let out = require_out(cli, "identify")?;
    std::fs::create_dir_all(out)?;
    match config {
        ExperimentConfig::VoterMoo(config) => {
            let spec = experiments::identify_family(&config, Some(out))?;
            let worst = spec
                .checks
                .iter()
                .map(|(_, defect, scale)| defect / scale.max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            println!("held-out affinity defect: {worst:.3e}");
            write_json(out, "family.json", &spec)?;
        }
        ExperimentConfig::EpidemicMoo(config) => {
            let models = experiments::identify_models(&config, Some(out))?;
            write_json(
                out,
                "augmented-grouped.json",
                &AugmentedModelDoc {
                    state_dimension: models.augmented_grouped.state_dim(),
                    model: models.augmented_grouped.model().spec(),
                },
            )?;
            write_json(
                out,
                "augmented-pooled.json",
                &AugmentedModelDoc {
                    state_dimension: models.augmented_pooled.state_dim(),
                    model: models.augmented_pooled.model().spec(),
                },
            )?;
            write_json(
                out,
                "interpolated-grouped.json",
                &models.interpolated_grouped.spec(),
            )?;
            write_json(
                out,
                "interpolated-pooled.json",
                &models.interpolated_pooled.spec(),
            )?;
        }
        ExperimentConfig::AnalyticChecks(_) => {
            bail!("the analytic checks learn no exportable model; use a pipeline config")
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_validation_points(validation: &ValidationReport) {
    for point in &validation.points {
        println!(
            "  u = ({:.4}, {:.4})  {}  {}  objectives ({:.4} ± {:.4}, {:.4} ± {:.4})",
            point.control[0],
            point.control[1],
            if point.covered { "covered  " } else { "uncovered" },
            if point.dominated {
                "dominated    "
            } else {
                "non-dominated"
            },
            point.abm_objectives[0],
            point.ci_halfwidth[0],
            point.abm_objectives[1],
            point.ci_halfwidth[1],
        );
    }
}

fn validate(cli: &Cli) -> anyhow::Result<ExitCode> {
    let config = require_config(cli, "validate")?;
    let out = require_out(cli, "validate")?;
    match config {
        ExperimentConfig::VoterMoo(config) => {
            let artifacts = experiments::run_voter_moo(&config, Some(out))?;
            print_validation_points(&artifacts.validation);
            print_validation(&artifacts.validation);
            Ok(voter_verdict(&artifacts.validation))
        }
        ExperimentConfig::EpidemicMoo(config) => {
            let artifacts = experiments::run_epidemic_moo(&config, Some(out))?;
            print_validation_points(&artifacts.validation);
            print_validation(&artifacts.validation);
            Ok(epidemic_verdict(&artifacts))
        }
        ExperimentConfig::AnalyticChecks(_) => {
            bail!("the analytic checks have no front to validate; use a pipeline config")
        }
    }
}

fn export_front(cli: &Cli) -> anyhow::Result<ExitCode> {
    let config = require_config(cli, "export-front")?;
    let out = require_out(cli, "export-front")?;
    let fronts = match config {
        ExperimentConfig::VoterMoo(config) => {
            let artifacts = experiments::run_voter_moo(&config, Some(out))?;
            vec![
                ("covering.csv", artifacts.full.archive.len()),
                (
                    "covering_refined.csv",
                    artifacts.refined.archive.len(),
                ),
            ]
        }
        ExperimentConfig::EpidemicMoo(config) => {
            let artifacts = experiments::run_epidemic_moo(&config, Some(out))?;
            vec![("covering.csv", artifacts.outcome.archive.len())]
        }
        ExperimentConfig::AnalyticChecks(_) => {
            bail!("the analytic checks produce no front; use a pipeline config")
        }
    };
    for (covering, front_len) in fronts {
        println!(
            "{} and its front counterpart refreshed ({} front points)",
            out.join(covering).display(),
            front_len,
        );
    }
    Ok(ExitCode::SUCCESS)
}
