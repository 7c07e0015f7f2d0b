//! Alternating optimization against restarts, stationarity and cost checks.

mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use risbc::covariance::{dual_bisection, BisectionOptions};
use risbc::ris::{sweep_phases_with, SweepOptions};
use risbc::{alternating_optimize, AoOptions, InitialPhases, RisPhases};

fn tight() -> AoOptions<f64> {
    AoOptions { epsilon: Some(1e-8), ..AoOptions::default() }
}

fn fixed_phase_optimum(ch: &risbc::ChannelSet<f64>, theta: &[Complex64], power: f64) -> f64 {
    let h = effective(ch, theta);
    dual_bisection(&h, power, &BisectionOptions { epsilon: Some(1e-8), ..Default::default() })
        .unwrap()
        .sum_rate_bits
}

#[test]
fn beats_random_phase_restarts() {
    let mut r = rng(201);
    for _ in 0..5 {
        let ch = channels(2, 2, 4, 8, &mut r);
        let power = 2.0;
        let ao = alternating_optimize(&ch, power, &tight()).unwrap().sum_rate();
        let mut best = f64::NEG_INFINITY;
        for _ in 0..100 {
            let theta: Vec<Complex64> = (0..8)
                .map(|_| {
                    let phi = r.random_range(0.0..std::f64::consts::TAU);
                    Complex64::new(phi.cos(), phi.sin())
                })
                .collect();
            best = best.max(fixed_phase_optimum(&ch, &theta, power));
        }
        assert!(ao >= best - 1e-6, "AO {ao} below best random restart {best}");
    }
}

#[test]
fn exit_point_is_nearly_stationary() {
    let mut r = rng(202);
    for _ in 0..10 {
        let ch = channels(3, 2, 4, 16, &mut r);
        let power = 4.0;
        let rep = alternating_optimize(&ch, power, &tight()).unwrap();
        assert!(rep.converged);
        let rate = rep.sum_rate();
        // Covariances: re-solving at the final phases gains little.
        let resolved = fixed_phase_optimum(&ch, rep.phases.as_slice(), power);
        assert!(resolved - rate <= 1e-3 * rate, "covariance gap {}", resolved - rate);
        // Phases: one more sweep against the final covariances gains little.
        let (_, sweep) = sweep_phases_with(&ch, &rep.phases, &rep.covariances, &SweepOptions { diagnostics: true, ..Default::default() }).unwrap();
        let gain = sweep.objective_trace.last().unwrap() - sweep.objective_trace[0];
        assert!(gain <= 1e-3 * rate, "phase gap {gain}");
    }
}

#[test]
fn final_rate_matches_reported_solution() {
    let mut r = rng(203);
    let ch = channels(2, 2, 3, 6, &mut r);
    let rep = alternating_optimize(&ch, 1.5, &AoOptions::default()).unwrap();
    let h = effective(&ch, rep.phases.as_slice());
    let check = rate_lu(&h, rep.covariances.mats());
    assert!((check - rep.sum_rate()).abs() <= 1e-9 * check);
    for z in rep.phases.as_slice() {
        assert!((z.norm() - 1.0).abs() <= 1e-12);
    }
}

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn counted_work_tracks_the_complexity_estimate() {
    let mut r = rng(204);
    let mut counted = Vec::new();
    let mut estimated = Vec::new();
    for &(k, n_t, n_ris) in &[(1, 2, 4), (2, 4, 8), (2, 8, 16), (4, 4, 32), (4, 8, 64), (6, 8, 36), (3, 16, 16), (6, 16, 64), (2, 2, 100)] {
        let ch = channels(k, 2, n_t, n_ris, &mut r);
        let rep = alternating_optimize(&ch, 1.0, &AoOptions::default()).unwrap();
        counted.push(rep.multiplications.total() as f64);
        estimated.push(rep.estimated_multiplications);
    }
    let rho = correlation(&counted, &estimated);
    assert!(rho > 0.99, "correlation {rho}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_never_decreases(seed in any::<u64>(), k in 1usize..5, n_t in 1usize..9, n_ris in 1usize..33, init in any::<u64>()) {
        let mut r = rng(seed);
        let ch = channels(k, 2, n_t, n_ris, &mut r);
        let opts = AoOptions { initial_phases: InitialPhases::SeededRandom(init), ..AoOptions::default() };
        let rep = alternating_optimize(&ch, 2.0, &opts).unwrap();
        for w in rep.sum_rate_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9);
        }
        prop_assert!(rep.mu <= (k * n_t) as f64 / 2.0);
    }

    #[test]
    fn single_precision_tracks_double(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ch = channels(2, 2, 4, 8, &mut r);
        let a = alternating_optimize(&ch, 2.0, &AoOptions::default()).unwrap().sum_rate();
        let ch32 = ch.cast::<f32>();
        let b = alternating_optimize(&ch32, 2.0f32, &AoOptions::default()).unwrap().sum_rate() as f64;
        prop_assert!((a - b).abs() <= 2e-2 * a.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn phases_are_irrelevant_without_reflection(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ch = channels(2, 2, 3, 5, &mut r).without_ris_link();
        let theta: Vec<Complex64> = (0..5).map(|i| Complex64::new((i as f64).cos(), (i as f64).sin())).collect();
        let h = effective(&ch, &theta);
        for k in 0..2 {
            prop_assert_eq!(&h[k], ch.direct(k));
        }
        let rep = alternating_optimize(&ch, 1.0, &AoOptions::default()).unwrap();
        prop_assert_eq!(rep.outer_iterations, 1);
        prop_assert_eq!(rep.phases, RisPhases::ones(5));
    }
}
