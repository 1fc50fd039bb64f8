//! Run directories: config, metrics, message log and manifest; replay.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::config::ScenarioConfig;
use super::trial::{messages_jsonl, metrics_csv, parse_messages_jsonl, run_trial_with, DropSource, TrialOptions, TrialOutput};

pub const CONFIG_FILE: &str = "config.toml";
pub const METRICS_FILE: &str = "metrics.csv";
pub const MESSAGES_FILE: &str = "messages.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub ticks: u64,
    pub aborted: Option<String>,
    /// SHA-256 of each written artifact.
    pub files: BTreeMap<String, String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs a trial with the message log enabled.
pub fn run_logged(cfg: &ScenarioConfig, seed: u64) -> Result<TrialOutput> {
    run_trial_with(
        cfg,
        seed,
        TrialOptions {
            record_messages: true,
            drops: DropSource::Seeded,
        },
    )
}

/// Rendered artifacts of a trial: `(metrics.csv, messages.jsonl)`.
pub fn render(cfg: &ScenarioConfig, out: &TrialOutput) -> Result<(String, String)> {
    Ok((metrics_csv(&out.metrics, cfg.targets.len())?, messages_jsonl(&out.messages)?))
}

/// Writes a run directory and returns its manifest.
pub fn write_run(dir: &Path, cfg: &ScenarioConfig, out: &TrialOutput) -> Result<RunManifest> {
    std::fs::create_dir_all(dir)?;
    let config = cfg.to_toml_string();
    let (metrics, messages) = render(cfg, out)?;
    let mut files = BTreeMap::new();
    for (name, body) in [(CONFIG_FILE, &config), (METRICS_FILE, &metrics), (MESSAGES_FILE, &messages)] {
        std::fs::write(dir.join(name), body)?;
        files.insert(name.to_string(), sha256_hex(body.as_bytes()));
    }
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: cfg.hash(),
        seed: out.seed,
        ticks: cfg.tick_count(),
        aborted: out.aborted.clone(),
        files,
    };
    std::fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayMode {
    /// Channel losses are read back from the message log.
    ScriptedDrops,
    /// Channel losses are redrawn from the seed in the manifest.
    Reseeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub dir: PathBuf,
    pub seed: u64,
    pub metrics_identical: bool,
    pub messages_identical: bool,
    /// First differing line, 1-based, per artifact.
    pub first_difference: Vec<(String, usize)>,
}

impl ReplayReport {
    pub fn identical(&self) -> bool {
        self.metrics_identical && self.messages_identical
    }
}

fn run_dir(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.to_path_buf()
    } else {
        path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf)
    }
}

fn first_difference(a: &str, b: &str) -> usize {
    let mut la = a.lines();
    let mut lb = b.lines();
    let mut n = 1;
    loop {
        match (la.next(), lb.next()) {
            (None, None) => return n,
            (x, y) if x != y => return n,
            _ => n += 1,
        }
    }
}

/// Re-runs the trial recorded in the run directory containing `path` (the
/// directory itself, its message log or its manifest) and compares the
/// regenerated artifacts byte for byte.
pub fn replay(path: &Path, mode: ReplayMode) -> Result<ReplayReport> {
    let dir = run_dir(path);
    let manifest: RunManifest = serde_json::from_str(&std::fs::read_to_string(dir.join(MANIFEST_FILE))?)?;
    let cfg = ScenarioConfig::from_toml_str(&std::fs::read_to_string(dir.join(CONFIG_FILE))?)?;
    if cfg.hash() != manifest.config_hash {
        return Err(Error::ReplayMismatch(format!(
            "config hash {} differs from manifest {}",
            cfg.hash(),
            manifest.config_hash
        )));
    }
    let logged_metrics = std::fs::read_to_string(dir.join(METRICS_FILE))?;
    let logged_messages = std::fs::read_to_string(dir.join(MESSAGES_FILE))?;
    let drops = match mode {
        ReplayMode::ScriptedDrops if cfg.channel.enabled => DropSource::from_log(&parse_messages_jsonl(&logged_messages)?),
        _ => DropSource::Seeded,
    };
    let out = run_trial_with(
        &cfg,
        manifest.seed,
        TrialOptions {
            record_messages: true,
            drops,
        },
    )?;
    let (metrics, messages) = render(&cfg, &out)?;
    let mut report = ReplayReport {
        dir,
        seed: manifest.seed,
        metrics_identical: metrics == logged_metrics,
        messages_identical: messages == logged_messages,
        first_difference: Vec::new(),
    };
    if !report.metrics_identical {
        report.first_difference.push((METRICS_FILE.into(), first_difference(&metrics, &logged_metrics)));
    }
    if !report.messages_identical {
        report.first_difference.push((MESSAGES_FILE.into(), first_difference(&messages, &logged_messages)));
    }
    Ok(report)
}
