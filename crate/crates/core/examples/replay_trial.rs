//! Writes a lossy-channel trial to disk and replays it from its manifest.

use std::error::Error;
use std::path::Path;

use guts_search::sim::persist::{replay, run_logged, write_run, ReplayMode, MESSAGES_FILE};
use guts_search::sim::ScenarioConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut cfg = ScenarioConfig::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/small.toml"))?;
    cfg.duration = 60.0;
    cfg.channel.drop_probability = 0.25;
    let dir = std::env::temp_dir().join(format!("guts-replay-example-{}", std::process::id()));
    let out = run_logged(&cfg, 42)?;
    write_run(&dir, &cfg, &out)?;
    let lost = out.messages.iter().filter(|m| !m.delivered).count();
    println!("{} messages logged, {lost} lost", out.messages.len());

    for mode in [ReplayMode::ScriptedDrops, ReplayMode::Reseeded] {
        let report = replay(&dir.join(MESSAGES_FILE), mode)?;
        println!("{mode:?}: metrics identical {}, log identical {}", report.metrics_identical, report.messages_identical);
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
