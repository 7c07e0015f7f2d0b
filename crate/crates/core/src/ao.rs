//! Alternating optimization of dual-MAC covariances and RIS phases.
//!
//! Each outer iteration solves the fixed-phase covariance problem by dual
//! bisection and then sweeps every RIS element once with its closed-form
//! optimal phase. Both steps are exact block maximizations, so the sum rate
//! never decreases from one outer iteration to the next.

use serde::{Deserialize, Serialize};

use crate::channel::{compose_all, ChannelSet, RisPhases};
use crate::complexity::{complexity_estimate_f64, MulCounter};
use crate::covariance::{sum_rate_bits, BisectionOptions, CovarianceSet, CovarianceSolver, InnerOptions};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::ris::{PhaseSweeper, SweepOptions, SweepOrder};
use crate::rng::{RealizationSeed, Stream};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPhases {
    #[default]
    AllOnes,
    /// Uniform random phases drawn from the given seed.
    SeededRandom(u64),
}

impl InitialPhases {
    pub fn build<T: Real>(self, n_ris: usize) -> RisPhases<T> {
        match self {
            InitialPhases::AllOnes => RisPhases::ones(n_ris),
            InitialPhases::SeededRandom(seed) => {
                RisPhases::random(n_ris, &mut RealizationSeed::new(seed, 0).rng(Stream::Phases))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoOptions<T: Real> {
    /// Stop when the relative sum-rate gain of an outer iteration falls below this.
    pub outer_tol: T,
    pub max_outer: usize,
    /// Absolute bisection width; `None` means `1e−4·K·N_t/P`.
    pub epsilon: Option<T>,
    pub inner_tol: T,
    pub max_inner_cycles: Option<usize>,
    pub initial_phases: InitialPhases,
    /// When false, or when the RIS link is absent, only one covariance solve runs.
    pub optimize_phases: bool,
    /// Reuse the previous covariances and multiplier bracket across outer iterations.
    pub warm_start: bool,
    pub sweep_order: SweepOrder,
}

impl<T: Real> Default for AoOptions<T> {
    fn default() -> Self {
        AoOptions {
            outer_tol: T::lit(1e-4),
            max_outer: 50,
            epsilon: None,
            inner_tol: T::lit(1e-6),
            max_inner_cycles: None,
            initial_phases: InitialPhases::AllOnes,
            optimize_phases: true,
            warm_start: true,
            sweep_order: SweepOrder::Ascending,
        }
    }
}

impl<T: Real> AoOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.outer_tol > T::zero() && self.inner_tol > T::zero()) {
            return Err(Error::InvalidOption("tolerances must be positive".into()));
        }
        if self.epsilon.is_some_and(|e| !(e > T::zero())) {
            return Err(Error::InvalidOption("bisection epsilon must be positive".into()));
        }
        if self.max_outer == 0 || self.max_inner_cycles == Some(0) {
            return Err(Error::InvalidOption("iteration caps must be at least 1".into()));
        }
        Ok(())
    }

    fn bisection(&self, warm_bracket: Option<(T, T)>) -> BisectionOptions<T> {
        BisectionOptions {
            epsilon: self.epsilon,
            inner: InnerOptions { tol: self.inner_tol, max_cycles: self.max_inner_cycles, record_updates: false },
            warm_bracket,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AoReport<T: Real> {
    /// Sum rate (bits/s/Hz) at the end of each outer iteration.
    pub sum_rate_trace: Vec<T>,
    pub covariances: CovarianceSet<T>,
    pub phases: RisPhases<T>,
    pub mu: T,
    pub outer_iterations: usize,
    pub converged: bool,
    pub hit_max_outer: bool,
    /// Multipliers evaluated by each covariance solve.
    pub bisection_steps: Vec<usize>,
    /// Mean cyclic passes per multiplier, per covariance solve.
    pub inner_cycles: Vec<f64>,
    pub multiplications: MulCounter,
    /// Leading-order estimate summed over the outer iterations, using the
    /// measured `L` and `I` of each.
    pub estimated_multiplications: f64,
}

impl<T: Real> AoReport<T> {
    pub fn sum_rate(&self) -> T {
        self.sum_rate_trace.last().copied().unwrap_or_else(T::zero)
    }

    /// Mean bisection steps per covariance solve (`L`).
    pub fn mean_bisection_steps(&self) -> f64 {
        mean(self.bisection_steps.iter().map(|&s| s as f64))
    }

    /// Mean cyclic passes per bisection step (`I`).
    pub fn mean_inner_cycles(&self) -> f64 {
        let steps: usize = self.bisection_steps.iter().sum();
        if steps == 0 {
            return 0.0;
        }
        let cycles: f64 = self
            .bisection_steps
            .iter()
            .zip(&self.inner_cycles)
            .map(|(&s, &c)| s as f64 * c)
            .sum();
        cycles / steps as f64
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Runs the alternating optimization from the initial phases in `options`.
pub fn alternating_optimize<T: Real>(
    channels: &ChannelSet<T>,
    power: T,
    options: &AoOptions<T>,
) -> Result<AoReport<T>> {
    let phases = options.initial_phases.build(channels.n_ris());
    alternating_optimize_from(channels, power, phases, None, options)
}

/// Runs the alternating optimization from explicit starting phases and,
/// optionally, starting covariances (used as the incumbent of the first
/// covariance solve).
pub fn alternating_optimize_from<T: Real>(
    channels: &ChannelSet<T>,
    power: T,
    initial_phases: RisPhases<T>,
    initial_covs: Option<CovarianceSet<T>>,
    options: &AoOptions<T>,
) -> Result<AoReport<T>> {
    options.validate()?;
    if initial_phases.len() != channels.n_ris() {
        return Err(Error::Dimension(format!(
            "{} initial phases for {} RIS elements",
            initial_phases.len(),
            channels.n_ris()
        )));
    }
    let users = channels.users();
    let n_t = channels.n_t();
    let n_r = (0..users).map(|k| channels.user_antennas(k)).max().unwrap_or(0);
    let n_ris = channels.n_ris();
    let phases_active = options.optimize_phases && channels.has_ris_link();

    let mut counter = MulCounter::default();
    let mut phases = initial_phases;
    let mut h: Vec<CMat<T>> = compose_all(channels, &phases);
    counter.channel += (n_ris * n_t + users * n_r * n_ris * n_t) as u64;

    let mut covs: Option<Vec<CMat<T>>> = initial_covs.map(|c| c.into_mats());
    let mut bracket: Option<(T, T)> = None;
    let mut mu = T::zero();
    let mut trace: Vec<T> = Vec::new();
    let mut steps = Vec::new();
    let mut cycles = Vec::new();
    let mut estimate = 0.0;
    let mut converged = false;

    for iteration in 1..=options.max_outer {
        let mut solver = match (&covs, options.warm_start) {
            (Some(c), true) => CovarianceSolver::with_initial(&h, power, c.clone())?,
            _ => CovarianceSolver::new(&h, power)?,
        };
        let warm = if options.warm_start { bracket } else { None };
        let out = solver.bisection(&options.bisection(warm))?;
        counter.merge(solver.counter());

        let mut next = out.covs.into_mats();
        if let Some(prev) = &covs {
            if sum_rate_bits(&h, prev)? > out.sum_rate_bits {
                next = prev.clone();
            }
        }
        mu = out.mu;
        bracket = Some(out.bracket);
        steps.push(out.steps);
        let step_cycles = if out.steps == 0 { 0.0 } else { out.inner_cycles as f64 / out.steps as f64 };
        cycles.push(step_cycles);
        estimate += complexity_estimate_f64(
            users,
            n_t,
            n_r,
            if phases_active { n_ris } else { 0 },
            out.steps as f64,
            step_cycles,
        );

        let cov_set = CovarianceSet::new_unchecked(next, power);
        if phases_active {
            let mut sweeper = PhaseSweeper::new(channels, &phases, &cov_set);
            let report = sweeper.sweep(
                &mut phases,
                &SweepOptions { order: shuffled_for(options.sweep_order, iteration), diagnostics: false },
            )?;
            counter.merge(&report.counter);
            h = compose_all(channels, &phases);
            counter.channel += (n_ris * n_t + users * n_r * n_ris * n_t) as u64;
        }
        let rate = sum_rate_bits(&h, cov_set.mats())?;
        covs = Some(cov_set.into_mats());

        let previous = trace.last().copied();
        trace.push(rate);
        if !phases_active {
            converged = true;
            break;
        }
        if let Some(prev) = previous {
            let gain = rate - prev;
            if gain <= options.outer_tol * prev.abs() || (prev == T::zero() && rate == T::zero()) {
                converged = true;
                break;
            }
        }
    }

    let outer_iterations = trace.len();
    let covariances = CovarianceSet::new_unchecked(
        covs.unwrap_or_else(|| (0..users).map(|k| CMat::<T>::zeros(channels.user_antennas(k), channels.user_antennas(k))).collect()),
        power,
    );
    Ok(AoReport {
        sum_rate_trace: trace,
        covariances,
        phases,
        mu,
        outer_iterations,
        converged,
        hit_max_outer: !converged,
        bisection_steps: steps,
        inner_cycles: cycles,
        multiplications: counter,
        estimated_multiplications: estimate,
    })
}

fn shuffled_for(order: SweepOrder, iteration: usize) -> SweepOrder {
    match order {
        SweepOrder::Ascending => SweepOrder::Ascending,
        SweepOrder::Shuffled(seed) => SweepOrder::Shuffled(seed.wrapping_add(iteration as u64)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::dual_bisection;
    use crate::testutil::random_channels;

    #[test]
    fn disconnected_ris_stops_after_one_solve() {
        let ch = random_channels(2, 2, 4, 8, 1).without_ris_link();
        let report = alternating_optimize(&ch, 1.0, &AoOptions::default()).unwrap();
        assert!(report.outer_iterations <= 2);
        assert!(report.converged);
        let fixed = dual_bisection(&compose_all(&ch, &RisPhases::ones(8)), 1.0, &BisectionOptions::default()).unwrap();
        assert!((report.sum_rate() - fixed.sum_rate_bits).abs() < 1e-12);
    }

    #[test]
    fn disconnected_ris_with_forced_iterations() {
        // phases do nothing, so the second iteration must report no gain
        let mut ch = random_channels(2, 2, 4, 8, 2);
        ch = ch.without_ris_link();
        let opts = AoOptions { optimize_phases: true, ..AoOptions::default() };
        let r = alternating_optimize(&ch, 1.0, &opts).unwrap();
        assert!(r.outer_iterations <= 2);
    }

    #[test]
    fn no_ris_matches_plain_bisection() {
        let full = random_channels(3, 2, 4, 1, 3);
        let direct: Vec<_> = (0..3).map(|k| full.direct(k).clone()).collect();
        let ch = ChannelSet::direct_only(direct.clone()).unwrap();
        let report = alternating_optimize(&ch, 1.0, &AoOptions::default()).unwrap();
        let fixed = dual_bisection(&direct, 1.0, &BisectionOptions::default()).unwrap();
        assert_eq!(report.outer_iterations, 1);
        assert!((report.sum_rate() - fixed.sum_rate_bits).abs() < 1e-12);
    }

    #[test]
    fn trace_is_monotone() {
        let ch = random_channels(3, 2, 4, 12, 4);
        let report = alternating_optimize(&ch, 1.0, &AoOptions::default()).unwrap();
        assert!(report.sum_rate_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert!(report.phases.as_slice().iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        report.covariances.validate().unwrap();
        assert!(report.mu <= 3.0 * 4.0);
    }

    #[test]
    fn options_are_validated() {
        let ch = random_channels(1, 2, 2, 2, 5);
        let bad = AoOptions { max_outer: 0, ..AoOptions::default() };
        assert!(alternating_optimize(&ch, 1.0, &bad).is_err());
        let bad = AoOptions { outer_tol: 0.0, ..AoOptions::default() };
        assert!(alternating_optimize(&ch, 1.0, &bad).is_err());
    }

    #[test]
    fn cold_and_warm_starts_agree() {
        let ch = random_channels(2, 2, 3, 6, 6);
        let warm = alternating_optimize(&ch, 1.0, &AoOptions::default()).unwrap();
        let cold = alternating_optimize(&ch, 1.0, &AoOptions { warm_start: false, ..AoOptions::default() }).unwrap();
        assert!((warm.sum_rate() - cold.sum_rate()).abs() < 1e-3 * cold.sum_rate());
    }

    #[test]
    fn single_precision_runs() {
        let ch = random_channels(2, 2, 3, 6, 7);
        let r64 = alternating_optimize(&ch, 1.0, &AoOptions::default()).unwrap();
        let r32 = alternating_optimize(&ch.cast::<f32>(), 1.0f32, &AoOptions::default()).unwrap();
        assert!((r32.sum_rate() as f64 - r64.sum_rate()).abs() < 1e-2 * r64.sum_rate());
    }
}
