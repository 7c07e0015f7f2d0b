//! Optimizes one channel realization with and without the RIS.

use risbc::harness::config::PlacementConfig;
use risbc::harness::sample_user_positions;
use risbc::rng::RealizationSeed;
use risbc::{alternating_optimize, sample_channels, AoOptions, ChannelSet64, SystemGeometry};

fn main() -> risbc::Result<()> {
    let geometry = SystemGeometry { n_t: 8, ..SystemGeometry::default() };
    let seed = RealizationSeed::new(7, 0);
    let users = sample_user_positions(&PlacementConfig::default(), 4, 2, seed)?;
    let channels: ChannelSet64 = sample_channels(&geometry, &users, seed)?;

    let with_ris = alternating_optimize(&channels, geometry.power, &AoOptions::default())?;
    let direct = alternating_optimize(&channels.clone().without_ris_link(), geometry.power, &AoOptions::default())?;

    println!("direct only: {:.3} bit/s/Hz", direct.sum_rate());
    println!("with RIS:    {:.3} bit/s/Hz after {} outer iterations", with_ris.sum_rate(), with_ris.outer_iterations);
    for (i, r) in with_ris.sum_rate_trace.iter().enumerate() {
        println!("  iteration {:>2}: {r:.5}", i + 1);
    }
    Ok(())
}
