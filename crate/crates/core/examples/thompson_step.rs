//! One Thompson-sampling planning round with the loss of every candidate.

use std::error::Error;

use guts_search::action::{cells_in_zone, enumerate_candidates_in};
use guts_search::belief::{em_from_statistics, sample_posterior, CellStatistics, RecordKind, SensingRecord};
use guts_search::guts::{argmin_with_ties, score_candidates, GutsConfig};
use guts_search::{GridSpec, Point2, SensingDataset, ZonePolygon};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let grid = GridSpec::unit(3, 3)?;
    let zone = ZonePolygon::covering(&grid);
    let cells = cells_in_zone(&grid, &zone)?;
    let cfg = GutsConfig::default();

    // The left column has been flown; cell 8 gave a faint detection.
    let mut data = SensingDataset::new();
    for m in [0, 3, 6] {
        data.push(SensingRecord::new(m, 0.0, 1.0, 0, RecordKind::SelfPosition));
    }
    data.push(SensingRecord::new(8, 1.0, 0.05, 1, RecordKind::PeerDetection));

    let stats = CellStatistics::from_dataset(&data, &grid)?;
    let posterior = em_from_statistics(&stats, &cfg.em)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sample = sample_posterior(&posterior, &mut rng)?;

    let position = Point2::new(0.5, 2.5);
    let candidates = enumerate_candidates_in(&grid, &zone, &cells, position)?;
    let losses = score_candidates(&stats, &candidates, &sample, &posterior.responsibilities, &cfg)?;
    for (c, l) in candidates.iter().zip(&losses) {
        println!(
            "goal {}  cells {:?}  l2 {:.4}  ind {}  total {:.4}",
            c.goal_cell, c.traversed_cells, l.l2_term, l.indicator_term, l.total
        );
    }
    let best = argmin_with_ties(&losses, &mut rng).ok_or("no candidates")?;
    println!("chosen goal: cell {}", candidates[best].goal_cell);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
