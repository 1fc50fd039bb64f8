//! Peer messages over a lossy channel, folded into the receiver's dataset.

use std::error::Error;

use guts_search::comms::{deliver, fuse_message, ChannelConfig, FusionConfig, Payload, PeerMessage, RandomDrops};
use guts_search::{GridSpec, SensingDataset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let grid = GridSpec::unit(5, 5)?;
    let channel = ChannelConfig {
        enabled: true,
        drop_probability: 0.3,
        latency: 0.2,
    };
    let mut drops = RandomDrops::new(ChaCha8Rng::seed_from_u64(5));
    let mut queue = vec![
        PeerMessage::new(2, 0.0, Payload::Goal { cells: vec![6, 7, 8] })?,
        PeerMessage::new(1, 0.0, Payload::Pose { cell: 12 })?,
        PeerMessage::new(1, 0.1, Payload::Track { cell: 13, y: 1.0, c: 0.2 })?,
        PeerMessage::new(2, 0.3, Payload::Pose { cell: 9 })?,
    ];

    let mut data = SensingDataset::new();
    for now in [0.1, 0.2, 0.3, 0.4, 0.5] {
        let arrived = deliver(&mut queue, &channel, now, &mut drops)?;
        for msg in &arrived {
            fuse_message(&mut data, msg, &grid, &FusionConfig::default())?;
        }
        println!("t={now:.1}: {} delivered, {} still queued, {} rows", arrived.len(), queue.len(), data.len());
    }
    for r in data.records() {
        println!("  cell {:>2} y={} c={} from {} ({:?})", r.cell_index, r.observation_y, r.confidence_c, r.source_robot, r.kind);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
