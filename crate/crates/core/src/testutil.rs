use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{standard_complex_gaussian, ChannelSet};
use crate::covariance::CovarianceSet;
use crate::linalg::CMat;
use crate::scalar::C;

pub fn random_mat(r: usize, c: usize, rng: &mut ChaCha8Rng) -> CMat<f64> {
    CMat::<f64>::from_fn(r, c, |_, _| standard_complex_gaussian(rng))
}

pub fn random_channels(k: usize, n_r: usize, n_t: usize, n_ris: usize, seed: u64) -> ChannelSet<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = (0..k).map(|_| random_mat(n_r, n_t, &mut rng)).collect();
    let u = random_mat(n_ris, n_t, &mut rng);
    let g = (0..k)
        .map(|_| random_mat(n_r, n_ris, &mut rng) * C::new(0.3, 0.0))
        .collect();
    ChannelSet::new(d, u, g).unwrap()
}

/// Random PSD covariances with total trace `power`.
pub fn random_covs(dims: &[usize], power: f64, seed: u64) -> CovarianceSet<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mats: Vec<CMat<f64>> = dims
        .iter()
        .map(|&n| {
            let x = random_mat(n, n, &mut rng);
            &x * x.adjoint()
        })
        .collect();
    let tr: f64 = mats.iter().map(|m| m.trace().re).sum();
    let mats = mats.into_iter().map(|m| m * C::new(power / tr, 0.0)).collect();
    CovarianceSet::new(mats, power).unwrap()
}
