//! Fixture suite, benchmark runner, oracle cross-checks and rendering.

pub mod bench;
pub mod fixtures;
pub mod render;
pub mod verify;

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mmp::{load_scenario, LoadedScenario};

/// One scenario directory of a suite.
#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub id: String,
    pub scenario_path: PathBuf,
}

/// Lists the subdirectories of `dir` that contain a scenario file, sorted
/// by name. A missing directory is an error; an empty one is an empty suite.
pub fn list_suite(dir: &Path) -> Result<Vec<SuiteEntry>> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in rd {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let scenario_path = path.join(fixtures::SCENARIO_FILE);
        if path.is_dir() && scenario_path.is_file() {
            out.push(SuiteEntry {
                id: entry.file_name().to_string_lossy().into_owned(),
                scenario_path,
            });
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

impl SuiteEntry {
    pub fn load(&self) -> Result<LoadedScenario> {
        load_scenario(&self.scenario_path)
    }
}
