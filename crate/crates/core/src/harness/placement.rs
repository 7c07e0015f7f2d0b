//! Random user placement on a quantized grid.

use rand::Rng;

use crate::channel::UserPlacement;
use crate::error::Result;
use crate::harness::config::PlacementConfig;
use crate::rng::{RealizationSeed, Stream};

fn grid_points(min: f64, max: f64, step: f64) -> u64 {
    ((max - min) / step + 1e-9).floor() as u64 + 1
}

fn draw<R: Rng + ?Sized>(rng: &mut R, min: f64, max: f64, step: f64) -> f64 {
    let i = rng.random_range(0..grid_points(min, max, step));
    min + i as f64 * step
}

/// Draws `users` placements uniformly from the grid.
///
/// A user with `l = 0` sits in the plane of the RIS and cannot be served by
/// it, so such draws are repeated.
pub fn sample_user_positions(
    grid: &PlacementConfig,
    users: usize,
    rx_antennas: usize,
    seed: RealizationSeed,
) -> Result<Vec<UserPlacement>> {
    let mut rng = seed.rng(Stream::Placement);
    let mut out = Vec::with_capacity(users);
    for _ in 0..users {
        let d = draw(&mut rng, grid.d_min, grid.d_max, grid.d_step);
        let l = loop {
            let l = draw(&mut rng, grid.l_min, grid.l_max, grid.l_step);
            if l != 0.0 {
                break l;
            }
        };
        let h = draw(&mut rng, grid.h_min, grid.h_max, grid.h_step);
        out.push(UserPlacement::new(d, l, h, rx_antennas)?);
    }
    Ok(out)
}
