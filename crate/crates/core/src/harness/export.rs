//! Writing trajectories and reports to an output directory.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::StudyConfig;
use crate::error::Result;
use crate::grid::Trajectory;

/// Index of an exported trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: StudyConfig,
    pub config_hash: String,
    pub times: Vec<f64>,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

/// Writes `snapshot_KKKK.csv` per snapshot and `manifest.json` under `dir`.
pub fn export_trajectory(traj: &Trajectory, config: &StudyConfig, dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(traj.len());
    for (k, field) in traj.fields().iter().enumerate() {
        let name = format!("snapshot_{k:04}.csv");
        field.save_csv(&dir.join(&name))?;
        files.push(name);
    }
    let manifest = Manifest {
        config: config.clone(),
        config_hash: config.hash()?,
        times: traj.times().to_vec(),
        files,
        warnings: traj.warnings().to_vec(),
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
