//! File artifacts: full-precision JSON, CSV exports, and checkpoints.
//!
//! All floating-point output is printed with 17 significant digits
//! (`{:.16e}`), which round-trips IEEE-754 doubles exactly and keeps
//! reruns byte-identical. Checkpoints pair a payload with a fingerprint
//! of the producing configuration; a phase is resumed from its checkpoint
//! only when the fingerprint still matches.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::abm::TimeSeries;
use crate::error::Result;
use crate::moo::{ArchiveEntry, BoxTree};

/// `serde_json` formatter printing every float with 17 significant
/// digits.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.8e}")
    }
}

/// Serializes to JSON with full-precision floats.
pub fn json_string<S: Serialize>(value: &S) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FullPrecision);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// Writes full-precision JSON to a file, creating parent directories.
pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, json_string(value)?)?;
    Ok(())
}

/// Reads a JSON file.
pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a box covering: one row per box with center and radius
/// components and the generation that produced it.
pub fn write_covering_csv(path: &Path, tree: &BoxTree<f64>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    let d = tree.boxes().first().map_or(0, |b| b.dim());
    let mut header: Vec<String> = (0..d).map(|i| format!("center_{i}")).collect();
    header.extend((0..d).map(|i| format!("radius_{i}")));
    header.push("generation".into());
    w.write_record(&header)?;
    for b in tree.boxes() {
        let mut row: Vec<String> = b.center().iter().copied().map(fmt).collect();
        row.extend((0..d).map(|i| fmt(0.5 * b.width(i))));
        row.push(tree.generation().to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a Pareto front: one row per archive entry with decision and
/// objective components.
pub fn write_front_csv(path: &Path, front: &[ArchiveEntry<f64>]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    let (dn, kn) = front
        .first()
        .map_or((0, 0), |e| (e.decision.len(), e.objectives.len()));
    let mut header: Vec<String> = (0..dn).map(|i| format!("decision_{i}")).collect();
    header.extend((0..kn).map(|i| format!("objective_{i}")));
    w.write_record(&header)?;
    for e in front {
        let mut row: Vec<String> = e.decision.iter().copied().map(fmt).collect();
        row.extend(e.objectives.iter().copied().map(fmt));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a trajectory: `time` followed by named state components.
pub fn write_trajectory_csv(
    path: &Path,
    series: &TimeSeries<f64>,
    components: &[&str],
) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    assert_eq!(components.len(), series.dim(), "component names vs state");
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["time".to_string()];
    header.extend(components.iter().map(|c| (*c).to_string()));
    w.write_record(&header)?;
    for (k, &t) in series.times().iter().enumerate() {
        let mut row = vec![fmt(t)];
        row.extend(series.state(k).iter().copied().map(fmt));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One row of the model-comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    /// Surrogate construction (`augmented` or `interpolated`).
    pub model: String,
    /// Dimension of the surrogate's own state space.
    pub dimension: usize,
    /// The control at which trajectories were compared.
    pub control: Vec<f64>,
    /// Pooled trajectory RMSE against the simulator ensemble mean.
    pub rmse: f64,
}

/// Writes the model-comparison table.
pub fn write_rmse_csv(path: &Path, rows: &[RmseRow]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    let cn = rows.first().map_or(0, |r| r.control.len());
    let mut header = vec!["model".to_string(), "dimension".to_string()];
    header.extend((0..cn).map(|i| format!("control_{i}")));
    header.push("rmse".into());
    w.write_record(&header)?;
    for r in rows {
        let mut row = vec![r.model.clone(), r.dimension.to_string()];
        row.extend(r.control.iter().copied().map(fmt));
        row.push(fmt(r.rmse));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile<P> {
    fingerprint: String,
    payload: P,
}

/// Phase checkpoints under `<out>/checkpoints/`.
pub struct CheckpointStore {
    dir: PathBuf,
}

impl CheckpointStore {
    /// Opens (and creates) the checkpoint directory of an output tree.
    pub fn new(out_dir: &Path) -> Result<Self> {
        let dir = out_dir.join("checkpoints");
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.json"))
    }

    /// Loads the named payload if its fingerprint matches.
    pub fn load<P: DeserializeOwned>(&self, name: &str, fingerprint: &str) -> Option<P> {
        let file: CheckpointFile<P> = read_json(&self.path(name)).ok()?;
        (file.fingerprint == fingerprint).then_some(file.payload)
    }

    /// Saves the named payload.
    pub fn save<P: Serialize>(&self, name: &str, fingerprint: &str, payload: &P) -> Result<()> {
        write_json(
            &self.path(name),
            &CheckpointFile {
                fingerprint: fingerprint.to_string(),
                payload,
            },
        )
    }
}

/// Resumes a phase from its checkpoint or computes and records it. With
/// no store the phase always computes.
pub fn phase<P: Serialize + DeserializeOwned>(
    store: Option<&CheckpointStore>,
    name: &str,
    fingerprint: &str,
    compute: impl FnOnce() -> Result<P>,
) -> Result<P> {
    if let Some(s) = store {
        if let Some(payload) = s.load(name, fingerprint) {
            log::info!("phase {name}: resumed from checkpoint");
            return Ok(payload);
        }
        let payload = compute()?;
        s.save(name, fingerprint, &payload)?;
        Ok(payload)
    } else {
        compute()
    }
}
