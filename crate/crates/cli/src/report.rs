use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::run::Outcome;

pub const REPORT_FILE: &str = "report.json";
pub const TIMING_FILE: &str = "timing.txt";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the config in canonical form (parsed and re-serialized with
/// sorted keys), so whitespace and key order do not matter.
pub fn config_hash(text: &str) -> Result<String, serde_json::Error> {
    let v: Value = serde_json::from_str(text)?;
    Ok(sha256_hex(&serde_json::to_vec(&v)?))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub experiment: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: Value,
    pub artifacts: Vec<ArtifactEntry>,
    pub summary: Value,
}

/// Writes every artifact and the report. Wall time goes to a separate file
/// so that reruns reproduce the report byte for byte.
pub fn write(dir: &Path, report_base: Report, outcome: Outcome, seconds: f64) -> std::io::Result<Report> {
    fs::create_dir_all(dir)?;
    let mut report = report_base;
    for a in &outcome.artifacts {
        fs::write(dir.join(&a.name), &a.bytes)?;
        report.artifacts.push(ArtifactEntry { path: a.name.clone(), sha256: sha256_hex(&a.bytes) });
    }
    report.summary = outcome.summary;
    let mut s = serde_json::to_string_pretty(&report).expect("plain data");
    s.push('\n');
    fs::write(dir.join(REPORT_FILE), s)?;
    fs::write(
        dir.join(TIMING_FILE),
        format!("seed {}\nconfig_hash {}\nwall_seconds {seconds:.3}\n", report.seed, report.config_hash),
    )?;
    Ok(report)
}

/// Re-opens a report and lists every inconsistency: artifacts whose bytes
/// changed, JSON or SVG artifacts stamped with another config hash, and a
/// config (when given) whose hash differs from the recorded one.
pub fn verify(dir: &Path, config_text: Option<&str>) -> Result<Vec<String>, String> {
    let text = fs::read_to_string(dir.join(REPORT_FILE)).map_err(|e| format!("cannot read report: {e}"))?;
    let report: Report = serde_json::from_str(&text).map_err(|e| format!("malformed report: {e}"))?;
    let mut problems = Vec::new();
    let echo = sha256_hex(&serde_json::to_vec(&report.config).expect("plain data"));
    if echo != report.config_hash {
        problems.push(format!("config echo hashes to {echo}, report records {}", report.config_hash));
    }
    if let Some(t) = config_text {
        match config_hash(t) {
            Ok(h) if h != report.config_hash => {
                problems.push(format!("config hash mismatch: file {h}, report {}", report.config_hash))
            }
            Ok(_) => {}
            Err(e) => problems.push(format!("config does not parse: {e}")),
        }
    }
    for a in &report.artifacts {
        let Ok(bytes) = fs::read(dir.join(&a.path)) else {
            problems.push(format!("{}: missing", a.path));
            continue;
        };
        if sha256_hex(&bytes) != a.sha256 {
            problems.push(format!("{}: content hash mismatch", a.path));
        }
        let stamped = if a.path.ends_with(".json") {
            serde_json::from_slice::<Value>(&bytes)
                .ok()
                .and_then(|v| v.get("config_hash").and_then(Value::as_str).map(str::to_string))
        } else if a.path.ends_with(".svg") {
            String::from_utf8_lossy(&bytes)
                .lines()
                .find_map(|l| l.strip_prefix("<!-- config_hash ").and_then(|r| r.strip_suffix(" -->")).map(str::to_string))
        } else {
            None
        };
        if let Some(h) = stamped {
            if h != report.config_hash {
                problems.push(format!("{}: stamped with config hash {h}", a.path));
            }
        }
    }
    Ok(problems)
}
