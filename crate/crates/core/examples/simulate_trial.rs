//! A full trial from a scenario file, written to a run directory and plotted.

use std::error::Error;
use std::path::Path;

use guts_search::sim::persist::{run_logged, write_run};
use guts_search::sim::plot::plot_dir;
use guts_search::sim::ScenarioConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = ScenarioConfig::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/small.toml"))?;
    let out = run_logged(&cfg, cfg.seed)?;
    for row in out.team_rows().filter(|r| r.time % 20.0 == 0.0) {
        println!("t={:>5.0}s  coverage {:>6.2}%  views {:?}", row.time, row.pct_unknown, row.views);
    }
    for (id, plans) in &out.plans {
        println!("robot {id}: {plans} planning rounds");
    }

    let dir = std::env::temp_dir().join(format!("guts-sim-example-{}", std::process::id()));
    let manifest = write_run(&dir, &cfg, &out)?;
    println!("config hash {}", manifest.config_hash);
    for figure in plot_dir(&dir)? {
        println!("wrote {}", figure.display());
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
