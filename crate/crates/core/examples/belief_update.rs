//! Sparse Bayesian belief over a small grid, refit by EM after each batch of rows.

use std::error::Error;

use guts_search::belief::{em_posterior, EmConfig, RecordKind, SensingDataset, SensingRecord};
use guts_search::{GridSpec, Point2};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let grid = GridSpec::new(3, 2, 15.0, Point2::new(0.0, 0.0))?;
    let mut data = SensingDataset::new();

    // A clean pass over the bottom row.
    for cell in 0..3 {
        data.push(SensingRecord::new(cell, 0.0, 1.0, 0, RecordKind::SelfPosition));
    }
    // Two weak detections in cell 4.
    data.push(SensingRecord::new(4, 1.0, 0.2, 0, RecordKind::SelfDetection));
    data.push(SensingRecord::new(4, 1.0, 0.2, 1, RecordKind::PeerDetection));

    let post = em_posterior(&data, &grid, &EmConfig::default())?;
    println!("cell   mean     var      gamma");
    for m in 0..grid.cell_count() {
        println!(
            "{m:>4} {:>7.4} {:>8.4} {:>8.4}",
            post.mean[m],
            post.variance(m),
            post.responsibilities[m]
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
