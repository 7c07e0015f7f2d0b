//! Quick self-checks on small random instances, run by `risbc check`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ao::{alternating_optimize, AoOptions, InitialPhases};
use crate::channel::{compose_all, standard_complex_gaussian, ChannelSet, RisPhases};
use crate::complexity::complexity_estimate;
use crate::covariance::{dual_bisection, BisectionOptions, CovarianceSet};
use crate::error::Result;
use crate::linalg::CMat;
use crate::ris::{build_subproblem, optimal_phase, sweep_phases_with, PhaseUpdate, SweepOptions};
use crate::scalar::C;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Gaussian channels with `G` attenuated by 0.3, a rough stand-in for the
/// weaker reflected path.
pub fn random_channels<R: Rng>(k: usize, n_r: usize, n_t: usize, n_ris: usize, rng: &mut R) -> ChannelSet<f64> {
    let mut mat = |r: usize, c: usize, scale: f64| {
        CMat::<f64>::from_fn(r, c, |_, _| standard_complex_gaussian(rng) * scale)
    };
    let d = (0..k).map(|_| mat(n_r, n_t, 1.0)).collect();
    let u = mat(n_ris, n_t, 1.0);
    let g = (0..k).map(|_| mat(n_r, n_ris, 0.3)).collect();
    ChannelSet::new(d, u, g).expect("consistent dimensions")
}

/// Random PSD covariances scaled to total trace `power`.
pub fn random_covariances<R: Rng>(k: usize, n_r: usize, power: f64, rng: &mut R) -> CovarianceSet<f64> {
    let mats: Vec<CMat<f64>> = (0..k)
        .map(|_| {
            let x = CMat::<f64>::from_fn(n_r, n_r, |_, _| standard_complex_gaussian(rng));
            &x * x.adjoint()
        })
        .collect();
    let tr: f64 = mats.iter().map(|m| m.trace().re).sum();
    let mats = mats.into_iter().map(|m| m * C::new(power / tr, 0.0)).collect();
    CovarianceSet::new(mats, power).expect("PSD by construction")
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// Runs every check on `instances` random instances each.
pub fn run_checks(instances: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst_drop = 0.0f64;
    let mut worst_mu_ratio = 0.0f64;
    for i in 0..instances {
        let k = rng.random_range(1..=4);
        let n_t = rng.random_range(2..=8);
        let n_ris = rng.random_range(4..=32);
        let power = rng.random_range(0.5..10.0);
        let ch = random_channels(k, 2, n_t, n_ris, &mut rng);
        let opts = AoOptions { initial_phases: InitialPhases::SeededRandom(seed ^ i as u64), ..AoOptions::default() };
        let rep = alternating_optimize(&ch, power, &opts)?;
        for w in rep.sum_rate_trace.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
        worst_mu_ratio = worst_mu_ratio.max(rep.mu / ((k * n_t) as f64 / power));
    }
    out.push(result("ao-monotone", worst_drop <= 1e-9, format!("largest trace decrease {worst_drop:.3e}")));
    out.push(result("multiplier-bound", worst_mu_ratio <= 1.0, format!("max mu/(K*Nt/P) {worst_mu_ratio:.4}")));

    let mut worst_gap = f64::NEG_INFINITY;
    let mut worst_recon = 0.0f64;
    for _ in 0..instances {
        let k = rng.random_range(1..=3);
        let n_t = rng.random_range(2..=6);
        let n_ris = rng.random_range(2..=16);
        let ch = random_channels(k, 2, n_t, n_ris, &mut rng);
        let covs = random_covariances(k, 2, rng.random_range(0.5..5.0), &mut rng);
        let angles: Vec<f64> = (0..n_ris).map(|_| rng.random_range(-PI..PI)).collect();
        let phases = RisPhases::from_angles(&angles);
        let l = rng.random_range(0..n_ris);
        let sub = build_subproblem(&ch, &phases, &covs, l);
        let best = match optimal_phase(&sub)? {
            PhaseUpdate::Set(t) => sub.objective(t)?,
            PhaseUpdate::KeepPrevious => sub.objective(phases.get(l))?,
        };
        let mut grid = f64::NEG_INFINITY;
        for g in 0..3600 {
            let phi = 2.0 * PI * g as f64 / 3600.0;
            grid = grid.max(sub.objective(C::new(phi.cos(), phi.sin()))?);
        }
        worst_gap = worst_gap.max(grid - best);
        let target = {
            let h = compose_all(&ch, &phases);
            let mut m = CMat::<f64>::identity(n_t, n_t);
            for (hk, s) in h.iter().zip(covs.mats()) {
                m += hk.adjoint() * s * hk;
            }
            m
        };
        worst_recon = worst_recon.max(sub.reconstruction_error(phases.get(l), &target));
        let (_, rep) = sweep_phases_with(&ch, &phases, &covs, &SweepOptions { diagnostics: true, ..Default::default() })?;
        worst_recon = worst_recon.max(rep.max_reconstruction_error);
    }
    out.push(result("phase-vs-grid", worst_gap <= 1e-6, format!("grid best minus closed form {worst_gap:.3e} bits")));
    out.push(result("reconstruction", worst_recon <= 1e-9, format!("max relative error {worst_recon:.3e}")));

    let id = vec![CMat::<f64>::identity(2, 2)];
    let sol = dual_bisection(&id, 2.0, &BisectionOptions::default())?;
    let eps = 1e-4 * 2.0 / 2.0;
    out.push(result(
        "identity-channel",
        (sol.sum_rate_bits - 2.0).abs() <= 1e-6 && (sol.mu - 0.5).abs() <= eps,
        format!("rate {:.9}, mu {:.6}", sol.sum_rate_bits, sol.mu),
    ));

    let mut worst_perm = 0.0f64;
    for _ in 0..instances {
        let k = rng.random_range(2..=4);
        let ch = random_channels(k, 2, rng.random_range(2..=6), 4, &mut rng);
        let phases = RisPhases::random(4, &mut rng);
        let h = compose_all(&ch, &phases);
        let mut rev = h.clone();
        rev.reverse();
        let opts = BisectionOptions::default();
        let a = dual_bisection(&h, 3.0, &opts)?.sum_rate_bits;
        let b = dual_bisection(&rev, 3.0, &opts)?.sum_rate_bits;
        worst_perm = worst_perm.max((a - b).abs());
    }
    out.push(result("permutation", worst_perm < 1e-6, format!("max rate change {worst_perm:.3e} bits")));

    let c = complexity_estimate(4, 8, 2, 225, 20, 8);
    out.push(result("complexity-formula", c == 368_000, format!("estimate {c}")));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass_on_a_few_instances() {
        for r in run_checks(4, 11).unwrap() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
