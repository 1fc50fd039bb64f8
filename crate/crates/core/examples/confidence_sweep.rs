//! Mean target view counts as the target confidence varies.

use std::error::Error;
use std::path::Path;

use guts_search::sim::batch::confidence_sweep;
use guts_search::sim::ScenarioConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for name in ["sweep_one.toml", "sweep_two.toml"] {
        let mut cfg = ScenarioConfig::load(dir.join(name))?;
        if let Ok(n) = std::env::var("SWEEP_TRIALS") {
            cfg.trials = n.parse()?;
        }
        let sweep = cfg.batch.confidence_sweep.clone();
        println!("{name}: {} trials", cfg.trials);
        for row in confidence_sweep(&cfg, &sweep)? {
            println!("  c = {:<6} mean views per target {:?}, total {:.1}", row.confidence, row.mean_views, row.mean_total);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
