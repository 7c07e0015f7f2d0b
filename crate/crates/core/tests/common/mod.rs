//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the solver code paths being checked.

#![allow(dead_code)]

use nalgebra::DMatrix;
pub type Complex64 = nalgebra::Complex<f64>;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use risbc::{ChannelSet, CovarianceSet};

pub type M = DMatrix<Complex64>;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian(r: usize, c: usize, scale: f64, rng: &mut impl Rng) -> M {
    let s = scale / 2f64.sqrt();
    M::from_fn(r, c, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

pub fn channels(k: usize, n_r: usize, n_t: usize, n_ris: usize, rng: &mut impl Rng) -> ChannelSet<f64> {
    let d = (0..k).map(|_| gaussian(n_r, n_t, 1.0, rng)).collect();
    let u = gaussian(n_ris, n_t, 1.0, rng);
    let g = (0..k).map(|_| gaussian(n_r, n_ris, 0.3, rng)).collect();
    ChannelSet::new(d, u, g).unwrap()
}

pub fn direct_channels(k: usize, n_r: usize, n_t: usize, rng: &mut impl Rng) -> Vec<M> {
    (0..k).map(|_| gaussian(n_r, n_t, 1.0, rng)).collect()
}

/// `D_k + G_k diag(θ) U`, with an explicit element loop.
pub fn effective(ch: &ChannelSet<f64>, theta: &[Complex64]) -> Vec<M> {
    (0..ch.users())
        .map(|k| {
            let mut h = ch.direct(k).clone();
            for l in 0..theta.len() {
                for i in 0..h.nrows() {
                    for j in 0..h.ncols() {
                        h[(i, j)] += ch.ris_user(k)[(i, l)] * theta[l] * ch.bs_ris()[(l, j)];
                    }
                }
            }
            h
        })
        .collect()
}

pub fn gram(h: &[M], s: &[M]) -> M {
    let n = h[0].ncols();
    let mut m = M::identity(n, n);
    for (hk, sk) in h.iter().zip(s) {
        m += hk.adjoint() * sk * hk;
    }
    m
}

/// `log₂ det` through an LU determinant.
pub fn log2_det(m: &M) -> f64 {
    m.clone().lu().determinant().re.log2()
}

pub fn rate_lu(h: &[M], s: &[M]) -> f64 {
    log2_det(&gram(h, s))
}

pub fn hermitian(m: &M) -> M {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn eig(m: &M) -> (Vec<f64>, M) {
    let e = nalgebra::SymmetricEigen::new(hermitian(m));
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

/// Euclidean projection onto `{x ≥ 0, Σx = total}`.
pub fn simplex_projection(v: &[f64], total: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (i, x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - total) / (i + 1) as f64;
        if x - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

/// Projected gradient ascent on the sum rate over
/// `{S_k ⪰ 0, Σ tr S_k = P}` with adaptive steps.
pub fn projected_gradient_rate(h: &[M], power: f64, iters: usize) -> f64 {
    let k = h.len();
    let mut s: Vec<M> = h
        .iter()
        .map(|hk| M::identity(hk.nrows(), hk.nrows()) * Complex64::new(power / (k * hk.nrows()) as f64, 0.0))
        .collect();
    let mut best = rate_lu(h, &s);
    let mut step = 1.0;
    for _ in 0..iters {
        let minv = gram(h, &s).try_inverse().unwrap();
        let trial_from = |t: f64| -> Vec<M> {
            let moved: Vec<(Vec<f64>, M)> =
                s.iter().zip(h).map(|(sk, hk)| eig(&(sk + hk * &minv * hk.adjoint() * Complex64::new(t, 0.0)))).collect();
            let all: Vec<f64> = moved.iter().flat_map(|(l, _)| l.iter().copied()).collect();
            let proj = simplex_projection(&all, power);
            let mut off = 0;
            moved
                .iter()
                .map(|(l, v)| {
                    let d = M::from_diagonal(&nalgebra::DVector::from_iterator(
                        l.len(),
                        proj[off..off + l.len()].iter().map(|&x| Complex64::new(x, 0.0)),
                    ));
                    off += l.len();
                    v * d * v.adjoint()
                })
                .collect()
        };
        let mut improved = false;
        for _ in 0..40 {
            let cand = trial_from(step);
            let r = rate_lu(h, &cand);
            if r > best {
                let gain = r - best;
                s = cand;
                best = r;
                step *= 1.5;
                improved = gain > 1e-13;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    best
}

pub fn to_covs(s: &[M], power: f64) -> CovarianceSet<f64> {
    CovarianceSet::new(s.to_vec(), power).unwrap()
}
