use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use hyperbolization::tolerance as tol;

/// Record of one run, written next to its artifacts.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub seeds: BTreeMap<String, u64>,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub inputs: BTreeMap<String, String>,
    pub artifacts: Vec<String>,
    pub version: &'static str,
    pub threads: usize,
    pub started_unix: u64,
    pub timings: BTreeMap<String, f64>,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(skip)]
    clock: Option<Instant>,
}

pub fn tolerances() -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("metric_axiom", tol::METRIC_AXIOM),
        ("delta_bound", tol::DELTA_BOUND),
        ("sandwich", tol::SANDWICH),
        ("closed_form", tol::CLOSED_FORM),
        ("unit_square", tol::UNIT_SQUARE),
        ("qh_half_plane_unit", tol::QH_HALF_PLANE_UNIT),
        ("qh_lower_sigma_factor", tol::QH_LOWER_SIGMA_FACTOR),
        ("qh_upper_sigma_factor", tol::QH_UPPER_SIGMA_FACTOR),
        ("sequence", tol::SEQUENCE),
        ("busemann_identity", tol::BUSEMANN_IDENTITY),
        ("busemann_half_plane", tol::BUSEMANN_HALF_PLANE),
        ("busemann_stabilization", tol::BUSEMANN_STABILIZATION),
        ("exponent", tol::EXPONENT),
        ("exponent_unit", tol::EXPONENT_UNIT),
        ("large_branch", tol::LARGE_BRANCH),
        ("fit_quality", tol::FIT_QUALITY),
        ("envelope_quantile", tol::ENVELOPE_QUANTILE),
        ("uniformity_divergence", tol::UNIFORMITY_DIVERGENCE),
        ("divergence_step", tol::DIVERGENCE_STEP),
        ("divergence_min_tail", tol::DIVERGENCE_MIN_TAIL as f64),
        ("dedup_relative", tol::DEDUP_RELATIVE),
    ])
}

impl RunManifest {
    pub fn new(command: &str, parameters: Value, threads: usize) -> Self {
        Self {
            command: command.to_string(),
            parameters,
            seeds: BTreeMap::new(),
            tolerances: tolerances(),
            inputs: BTreeMap::new(),
            artifacts: Vec::new(),
            version: env!("CARGO_PKG_VERSION"),
            threads,
            started_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            timings: BTreeMap::new(),
            exit_code: 0,
            failure: None,
            clock: Some(Instant::now()),
        }
    }

    pub fn seed(&mut self, name: &str, seed: u64) {
        self.seeds.insert(name.to_string(), seed);
    }

    /// Records the SHA-256 of an input file.
    pub fn input(&mut self, path: &Path) -> std::io::Result<()> {
        let bytes = fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.insert(path.display().to_string(), hex);
        Ok(())
    }

    pub fn artifact(&mut self, path: &Path) {
        self.artifacts.push(path.file_name().map_or_else(
            || path.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        ));
    }

    pub fn time(&mut self, step: &str, seconds: f64) {
        self.timings.insert(step.to_string(), seconds);
    }

    pub fn write(mut self, dir: &Path) -> std::io::Result<PathBuf> {
        if let Some(c) = self.clock.take() {
            self.timings.insert("total".into(), c.elapsed().as_secs_f64());
        }
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self).unwrap_or_else(|e| json!({ "error": e.to_string() }).to_string());
        fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
