//! Complex-multiplication accounting.

use serde::Serialize;

/// Leading-order complex multiplications of one outer AO iteration:
///
/// `K·N_ris·N_t·N_r² + K·N_ris·N_t²·N_r + N_ris·N_t³
///  + L·I·(N_t³ + N_t·N_r² + N_t²·N_r + N_r³)`
///
/// where `L` is the number of bisection steps and `I` the mean number of
/// cyclic covariance passes per step.
pub fn complexity_estimate(k: u64, n_t: u64, n_r: u64, n_ris: u64, l: u64, i: u64) -> u128 {
    let (k, n_t, n_r, n_ris, l, i) =
        (k as u128, n_t as u128, n_r as u128, n_ris as u128, l as u128, i as u128);
    k * n_ris * n_t * n_r * n_r
        + k * n_ris * n_t * n_t * n_r
        + n_ris * n_t * n_t * n_t
        + l * i * (n_t * n_t * n_t + n_t * n_r * n_r + n_t * n_t * n_r + n_r * n_r * n_r)
}

/// Same expression evaluated with fractional measured `L` and `I`.
pub fn complexity_estimate_f64(k: usize, n_t: usize, n_r: usize, n_ris: usize, l: f64, i: f64) -> f64 {
    let (k, n_t, n_r, n_ris) = (k as f64, n_t as f64, n_r as f64, n_ris as f64);
    k * n_ris * n_t * n_r * n_r
        + k * n_ris * n_t * n_t * n_r
        + n_ris * n_t.powi(3)
        + l * i * (n_t.powi(3) + n_t * n_r * n_r + n_t * n_t * n_r + n_r.powi(3))
}

/// Running tally of complex multiplications in the dominant kernels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MulCounter {
    /// Effective-channel composition.
    pub channel: u64,
    /// Covariance stage: `H_sum` upkeep, `H̄_k` factorizations, EVDs.
    pub covariance: u64,
    /// Phase stage: `A_l`/`B_l` assembly and factorization.
    pub phase: u64,
}

impl MulCounter {
    pub fn total(&self) -> u64 {
        self.channel + self.covariance + self.phase
    }

    pub fn merge(&mut self, other: &MulCounter) {
        self.channel += other.channel;
        self.covariance += other.covariance;
        self.phase += other.phase;
    }

    pub(crate) fn matmul(m: usize, n: usize, p: usize) -> u64 {
        (m * n * p) as u64
    }

    pub(crate) fn cubic(n: usize) -> u64 {
        (n * n * n) as u64
    }
}
