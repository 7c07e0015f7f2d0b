//! Fixed-phase covariance optimization on the dual MAC.
//!
//! Maximizes `log|I + Σ_k H_kᴴ S_k H_k|` subject to `Σ_k tr(S_k) ≤ P` by dual
//! decomposition: for a given multiplier `μ` the partial Lagrangian
//! `ln|I + Σ H_kᴴ S_k H_k| − μ(Σ tr(S_k) − P)` is maximized by cyclic
//! single-user water-filling, and `μ` is located by bisection on
//! `[0, K·N_t/P]`. Internal arithmetic is in nats.

use crate::complexity::MulCounter;
use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, creal, frobenius, hermitian_eig, identity, ln_det_hpd, min_eigenvalue,
    quad_form, symmetrize, trace_re, CMat,
};
use crate::scalar::Real;

/// Dual-MAC input covariances `S̄_k` under a sum-power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSet<T: Real> {
    mats: Vec<CMat<T>>,
    power: T,
}

impl<T: Real> CovarianceSet<T> {
    fn psd_tolerance() -> T {
        T::lit(1e-9).max(T::eps() * T::lit(256.0))
    }

    /// Validating constructor: every matrix Hermitian PSD and
    /// `Σ tr ≤ P·(1 + 1e−6)`.
    pub fn new(mats: Vec<CMat<T>>, power: T) -> Result<Self> {
        let set = CovarianceSet { mats, power };
        set.validate()?;
        Ok(set)
    }

    pub(crate) fn new_unchecked(mats: Vec<CMat<T>>, power: T) -> Self {
        CovarianceSet { mats, power }
    }

    pub fn zeros(dims: &[usize], power: T) -> Self {
        CovarianceSet {
            mats: dims.iter().map(|&n| CMat::<T>::zeros(n, n)).collect(),
            power,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tol = Self::psd_tolerance();
        for (k, s) in self.mats.iter().enumerate() {
            if !s.is_square() {
                return Err(Error::Dimension(format!("covariance {k} is not square")));
            }
            let norm = frobenius(s);
            let herm = frobenius(&(s - s.adjoint()));
            let min_eig = min_eigenvalue(s);
            if herm > tol * norm.max(T::one()) || min_eig < -tol * norm {
                return Err(Error::NotPsd { user: k, min_eig: min_eig.to_f64_lossy() });
            }
        }
        if self.total_trace() > self.power * (T::one() + T::lit(1e-6)) {
            return Err(Error::InvalidOption(format!(
                "total covariance trace {} exceeds budget {}",
                self.total_trace(),
                self.power
            )));
        }
        Ok(())
    }

    pub fn users(&self) -> usize {
        self.mats.len()
    }

    pub fn get(&self, k: usize) -> &CMat<T> {
        &self.mats[k]
    }

    pub fn mats(&self) -> &[CMat<T>] {
        &self.mats
    }

    pub fn into_mats(self) -> Vec<CMat<T>> {
        self.mats
    }

    pub fn power(&self) -> T {
        self.power
    }

    pub fn total_trace(&self) -> T {
        self.mats.iter().fold(T::zero(), |acc, s| acc + trace_re(s))
    }

    pub fn permuted(&self, order: &[usize]) -> Self {
        CovarianceSet {
            mats: order.iter().map(|&k| self.mats[k].clone()).collect(),
            power: self.power,
        }
    }
}

/// Bisection bookkeeping after one multiplier evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualState<T: Real> {
    pub mu: T,
    pub mu_min: T,
    pub mu_max: T,
    /// Partial Lagrangian at `mu` after the inner loop (nats).
    pub lagrangian: T,
    pub total_trace: T,
    pub inner_iterations: usize,
}

fn check_dims<T: Real>(h_list: &[CMat<T>], mats: &[CMat<T>]) -> Result<usize> {
    if h_list.len() != mats.len() {
        return Err(Error::Dimension(format!(
            "{} channels but {} covariances",
            h_list.len(),
            mats.len()
        )));
    }
    let n_t = h_list.first().map_or(0, |h| h.ncols());
    for (k, (h, s)) in h_list.iter().zip(mats).enumerate() {
        if h.ncols() != n_t || s.nrows() != h.nrows() || s.ncols() != h.nrows() {
            return Err(Error::Dimension(format!(
                "user {k}: H is {:?}, S is {:?}",
                h.shape(),
                s.shape()
            )));
        }
    }
    Ok(n_t)
}

/// `I + Σ_k H_kᴴ S_k H_k`.
pub fn mac_gram<T: Real>(h_list: &[CMat<T>], mats: &[CMat<T>]) -> CMat<T> {
    let n_t = h_list.first().map_or(0, |h| h.ncols());
    let mut m = identity::<T>(n_t);
    for (h, s) in h_list.iter().zip(mats) {
        m += quad_form(h, s);
    }
    symmetrize(&mut m);
    m
}

/// `log₂|I + Σ_k H_kᴴ S̄_k H_k|` in bits/s/Hz.
pub fn dual_mac_sum_rate<T: Real>(h_list: &[CMat<T>], covs: &CovarianceSet<T>) -> Result<T> {
    check_dims(h_list, covs.mats())?;
    let tol = CovarianceSet::<T>::psd_tolerance();
    for (k, s) in covs.mats().iter().enumerate() {
        let min_eig = min_eigenvalue(s);
        if min_eig < -tol * frobenius(s) {
            return Err(Error::NotPsd { user: k, min_eig: min_eig.to_f64_lossy() });
        }
    }
    sum_rate_bits(h_list, covs.mats())
}

/// Sum rate without the PSD check.
pub(crate) fn sum_rate_bits<T: Real>(h_list: &[CMat<T>], mats: &[CMat<T>]) -> Result<T> {
    Ok(ln_det_hpd(&mac_gram(h_list, mats))? / T::ln_2())
}

/// `H̄_k = I + Σ_{j≠k} H_jᴴ S̄_j H_j`.
pub fn interference_matrix<T: Real>(
    h_list: &[CMat<T>],
    covs: &CovarianceSet<T>,
    k: usize,
) -> CMat<T> {
    let n_t = h_list.first().map_or(0, |h| h.ncols());
    let mut m = identity::<T>(n_t);
    for (j, (h, s)) in h_list.iter().zip(covs.mats()).enumerate() {
        if j != k {
            m += quad_form(h, s);
        }
    }
    m
}

/// Single-user water-filling against interference-plus-identity `H̄_k`.
///
/// Returns `V diag((1/μ − 1/σ_i)₊) Vᴴ` with `(σ_i, V)` the eigenpairs of
/// `H_k H̄_k⁻¹ H_kᴴ`. Eigenvalues below `1e−12·σ_max` carry no power.
pub fn waterfill_update<T: Real>(h_k: &CMat<T>, hbar_k: &CMat<T>, mu: T) -> Result<CMat<T>> {
    if !(mu > T::zero()) {
        return Err(Error::InvalidMultiplier(mu.to_f64_lossy()));
    }
    let chol = cholesky(hbar_k.clone())?;
    let mut q = h_k * chol.solve(&h_k.adjoint());
    symmetrize(&mut q);
    let (sigma, v) = hermitian_eig(&q);
    let n = h_k.nrows();
    let mut s = CMat::<T>::zeros(n, n);
    let sigma_max = sigma.last().copied().unwrap_or_else(T::zero);
    let floor = sigma_max * T::lit(1e-12);
    let level = T::one() / mu;
    for (i, &si) in sigma.iter().enumerate() {
        if si <= floor || si <= T::zero() {
            continue;
        }
        let p = level - T::one() / si;
        if p > T::zero() {
            let col = v.column(i);
            s += (col * col.adjoint()) * creal(p);
        }
    }
    symmetrize(&mut s);
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions<T: Real> {
    /// Stop when the Lagrangian changes by less than this between cycles (nats).
    pub tol: T,
    /// Cycle cap; `None` means `100·K`.
    pub max_cycles: Option<usize>,
    /// Record the Lagrangian after every single-user update.
    pub record_updates: bool,
}

impl<T: Real> Default for InnerOptions<T> {
    fn default() -> Self {
        InnerOptions { tol: T::lit(1e-6), max_cycles: None, record_updates: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerOutcome<T: Real> {
    pub lagrangian: T,
    pub cycles: usize,
    /// Lagrangian before the first update, then after each update (if recorded).
    pub updates: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionOptions<T: Real> {
    /// Bracket width at which bisection stops; `None` means `1e−4·K·N_t/P`.
    pub epsilon: Option<T>,
    pub inner: InnerOptions<T>,
    /// Bracket of a previous nearby solve; it is widened and verified before use.
    pub warm_bracket: Option<(T, T)>,
}

impl<T: Real> Default for BisectionOptions<T> {
    fn default() -> Self {
        BisectionOptions { epsilon: None, inner: InnerOptions::default(), warm_bracket: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisectionOutcome<T: Real> {
    pub covs: CovarianceSet<T>,
    /// Midpoint of the final bracket.
    pub mu: T,
    pub bracket: (T, T),
    /// Number of multipliers evaluated.
    pub steps: usize,
    /// Total inner cycles over all steps.
    pub inner_cycles: usize,
    pub sum_rate_bits: T,
    pub history: Vec<DualState<T>>,
}

impl<T: Real> BisectionOutcome<T> {
    pub fn mean_inner_cycles(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.inner_cycles as f64 / self.steps as f64
        }
    }
}

/// Working state for one fixed-phase covariance solve.
#[derive(Debug, Clone)]
pub struct CovarianceSolver<'a, T: Real> {
    h: &'a [CMat<T>],
    n_t: usize,
    power: T,
    mats: Vec<CMat<T>>,
    hsum: CMat<T>,
    counter: MulCounter,
}

impl<'a, T: Real> CovarianceSolver<'a, T> {
    pub fn new(h: &'a [CMat<T>], power: T) -> Result<Self> {
        let dims: Vec<usize> = h.iter().map(|m| m.nrows()).collect();
        Self::with_initial(h, power, CovarianceSet::zeros(&dims, power).into_mats())
    }

    /// Starts the cyclic updates from `initial` instead of zero.
    pub fn with_initial(h: &'a [CMat<T>], power: T, initial: Vec<CMat<T>>) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::Dimension("at least one user is required".into()));
        }
        if !(power > T::zero()) {
            return Err(Error::InvalidOption(format!("power budget must be positive, got {power}")));
        }
        let n_t = check_dims(h, &initial)?;
        let hsum = mac_gram(h, &initial);
        Ok(CovarianceSolver { h, n_t, power, mats: initial, hsum, counter: MulCounter::default() })
    }

    pub fn counter(&self) -> &MulCounter {
        &self.counter
    }

    pub fn mu_cap(&self) -> T {
        T::lit((self.h.len() * self.n_t) as f64) / self.power
    }

    pub fn default_epsilon(&self) -> T {
        T::lit(1e-4) * self.mu_cap()
    }

    pub fn covariances(&self) -> CovarianceSet<T> {
        CovarianceSet::new_unchecked(self.mats.clone(), self.power)
    }

    fn total_trace(&self) -> T {
        self.mats.iter().fold(T::zero(), |acc, s| acc + trace_re(s))
    }

    fn resync(&mut self) {
        self.hsum = mac_gram(self.h, &self.mats);
        for h in self.h {
            let (n_r, n_t) = h.shape();
            self.counter.covariance += MulCounter::matmul(n_t, n_r, n_r) + MulCounter::matmul(n_t, n_t, n_r);
        }
    }

    fn lagrangian(&self, mu: T) -> Result<T> {
        Ok(ln_det_hpd(&self.hsum)? - mu * (self.total_trace() - self.power))
    }

    fn update_user(&mut self, k: usize, mu: T) -> Result<()> {
        let h = &self.h[k];
        let old = quad_form(h, &self.mats[k]);
        let mut hbar = &self.hsum - old;
        symmetrize(&mut hbar);
        let s = waterfill_update(h, &hbar, mu)?;
        let new = quad_form(h, &s);
        self.hsum = hbar + new;
        self.mats[k] = s;

        let (n_r, n_t) = h.shape();
        self.counter.covariance += MulCounter::cubic(n_t)
            + 2 * (MulCounter::matmul(n_t, n_r, n_r) + MulCounter::matmul(n_t, n_t, n_r))
            + 2 * MulCounter::cubic(n_r);
        Ok(())
    }

    /// Cyclic block-coordinate ascent on the partial Lagrangian at fixed `mu`.
    pub fn cyclic_maximize(&mut self, mu: T, opts: &InnerOptions<T>) -> Result<InnerOutcome<T>> {
        if !(mu > T::zero()) {
            return Err(Error::InvalidMultiplier(mu.to_f64_lossy()));
        }
        let users = self.h.len();
        let cap = opts.max_cycles.unwrap_or(100 * users).max(1);
        self.resync();
        let mut prev = self.lagrangian(mu)?;
        let mut updates = Vec::new();
        if opts.record_updates {
            updates.push(prev);
        }
        let mut change = T::zero();
        for cycle in 1..=cap {
            for k in 0..users {
                self.update_user(k, mu)?;
                if opts.record_updates {
                    updates.push(self.lagrangian(mu)?);
                }
            }
            let cur = self.lagrangian(mu)?;
            change = (cur - prev).abs();
            if change < opts.tol {
                return Ok(InnerOutcome { lagrangian: cur, cycles: cycle, updates });
            }
            prev = cur;
        }
        Err(Error::NoConvergence { cycles: cap, last_change: change.to_f64_lossy() })
    }

    /// Rate (nats) of the current iterate pulled back onto the budget, along
    /// with the scale applied (`1` when already feasible).
    fn feasible_rate(&self) -> Result<(T, T)> {
        let tr = self.total_trace();
        if tr <= self.power {
            return Ok((ln_det_hpd(&self.hsum)?, T::one()));
        }
        let scale = self.power / tr;
        let eye = identity::<T>(self.n_t);
        let scaled = &eye + (&self.hsum - &eye) * creal(scale);
        Ok((ln_det_hpd(&scaled)?, scale))
    }

    /// Bisection on `μ` with cyclic water-filling inside.
    ///
    /// The returned covariances are the best budget-feasible point seen; an
    /// iterate that overshoots the budget is scaled by `P/Σ tr` before being
    /// compared.
    pub fn bisection(&mut self, opts: &BisectionOptions<T>) -> Result<BisectionOutcome<T>> {
        let cap = self.mu_cap();
        let eps = opts.epsilon.unwrap_or_else(|| self.default_epsilon());
        if !(eps > T::zero()) {
            return Err(Error::InvalidOption("bisection epsilon must be positive".into()));
        }

        let mut best: Option<(T, T, Vec<CMat<T>>)> = None;
        let mut history = Vec::new();
        let mut inner_cycles = 0usize;

        let mut eval = |solver: &mut Self, mu: T, lo: T, hi: T| -> Result<T> {
            let out = solver.cyclic_maximize(mu, &opts.inner)?;
            inner_cycles += out.cycles;
            let tr = solver.total_trace();
            let (rate, scale) = solver.feasible_rate()?;
            if best.as_ref().is_none_or(|b| rate > b.0) {
                let mats = solver.mats.iter().map(|s| s * creal(scale)).collect();
                best = Some((rate, mu, mats));
            }
            history.push(DualState {
                mu,
                mu_min: lo,
                mu_max: hi,
                lagrangian: out.lagrangian,
                total_trace: tr,
                inner_iterations: out.cycles,
            });
            Ok(tr)
        };

        let (mut lo, mut hi) = match opts.warm_bracket {
            None => (T::zero(), cap),
            Some((a, b)) => {
                let center = (a + b) * T::lit(0.5);
                let mut half = (b - a).abs().max(eps);
                let mut lo = (center - half).max(T::zero());
                let mut hi = (center + half).min(cap);
                if hi < cap {
                    loop {
                        let tr = eval(self, hi, lo, hi)?;
                        if tr <= self.power || hi >= cap {
                            break;
                        }
                        lo = hi;
                        half = half + half;
                        hi = (lo + half).min(cap);
                    }
                }
                if lo > T::zero() {
                    loop {
                        let tr = eval(self, lo, lo, hi)?;
                        if tr > self.power || lo <= T::zero() {
                            break;
                        }
                        hi = lo;
                        half = half + half;
                        lo = (hi - half).max(T::zero());
                        if lo <= T::zero() {
                            break;
                        }
                    }
                }
                (lo, hi)
            }
        };

        while hi - lo >= eps {
            let mu = (lo + hi) * T::lit(0.5);
            let tr = eval(self, mu, lo, hi)?;
            if self.power < tr {
                lo = mu;
            } else {
                hi = mu;
            }
        }

        let steps = history.len();
        let (rate, _, mats) = match best {
            Some(b) => b,
            None => {
                // bracket already narrower than eps: evaluate its midpoint once
                let mu = (lo + hi) * T::lit(0.5);
                let out = self.cyclic_maximize(mu.max(T::eps()), &opts.inner)?;
                inner_cycles += out.cycles;
                let (rate, scale) = self.feasible_rate()?;
                (rate, mu, self.mats.iter().map(|s| s * creal(scale)).collect())
            }
        };
        self.mats = mats.clone();
        self.hsum = mac_gram(self.h, &self.mats);
        Ok(BisectionOutcome {
            covs: CovarianceSet::new_unchecked(mats, self.power),
            mu: (lo + hi) * T::lit(0.5),
            bracket: (lo, hi),
            steps: steps.max(1),
            inner_cycles,
            sum_rate_bits: rate / T::ln_2(),
            history,
        })
    }
}

/// Cyclic water-filling at fixed `mu`, starting from zero covariances.
pub fn inner_cyclic_maximize<T: Real>(
    h_list: &[CMat<T>],
    mu: T,
    power: T,
    opts: &InnerOptions<T>,
) -> Result<(CovarianceSet<T>, InnerOutcome<T>)> {
    let mut solver = CovarianceSolver::new(h_list, power)?;
    let out = solver.cyclic_maximize(mu, opts)?;
    Ok((solver.covariances(), out))
}

/// Solves the fixed-phase sum-rate problem by dual bisection.
pub fn dual_bisection<T: Real>(
    h_list: &[CMat<T>],
    power: T,
    opts: &BisectionOptions<T>,
) -> Result<BisectionOutcome<T>> {
    CovarianceSolver::new(h_list, power)?.bisection(opts)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMat;
    use crate::scalar::C;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_h(k: usize, n_r: usize, n_t: usize, seed: u64) -> Vec<CMat<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..k)
            .map(|_| {
                CMat::<f64>::from_fn(n_r, n_t, |_, _| crate::channel::standard_complex_gaussian(&mut rng))
            })
            .collect()
    }

    fn scalar(x: f64) -> CMat<f64> {
        CMat::<f64>::from_element(1, 1, C::new(x, 0.0))
    }

    #[test]
    fn zero_covariance_gives_zero_rate() {
        let h = random_h(2, 2, 3, 1);
        let covs = CovarianceSet::zeros(&[2, 2], 1.0);
        assert_eq!(dual_mac_sum_rate(&h, &covs).unwrap(), 0.0);
    }

    #[test]
    fn scalar_rate() {
        let covs = CovarianceSet::new(vec![scalar(3.0)], 3.0).unwrap();
        assert!((dual_mac_sum_rate(&[scalar(1.0)], &covs).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn non_psd_is_rejected() {
        let bad = CovarianceSet::new_unchecked(vec![scalar(-0.5)], 1.0);
        assert!(matches!(dual_mac_sum_rate(&[scalar(1.0)], &bad), Err(Error::NotPsd { user: 0, .. })));
        assert!(CovarianceSet::new(vec![scalar(-0.5)], 1.0).is_err());
        assert!(CovarianceSet::new(vec![scalar(2.0)], 1.0).is_err());
    }

    #[test]
    fn single_user_interference_is_identity() {
        let h = random_h(1, 2, 3, 2);
        let covs = CovarianceSet::new(vec![CMat::<f64>::identity(2, 2)], 2.0).unwrap();
        assert_eq!(interference_matrix(&h, &covs, 0), CMat::<f64>::identity(3, 3));
    }

    #[test]
    fn waterfill_scalar() {
        let s = waterfill_update(&scalar(1.0), &scalar(1.0), 0.5).unwrap();
        assert!((s[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn waterfill_clips_all_levels() {
        let h = random_h(1, 2, 3, 3).remove(0);
        let hbar = CMat::<f64>::identity(3, 3);
        let q = &h * h.adjoint();
        let sigma_max = hermitian_eig(&q).0[1];
        let s = waterfill_update(&h, &hbar, sigma_max * 1.01).unwrap();
        assert!(frobenius(&s) == 0.0);
    }

    #[test]
    fn waterfill_rejects_bad_multiplier() {
        assert_eq!(
            waterfill_update(&scalar(1.0), &scalar(1.0), 0.0),
            Err(Error::InvalidMultiplier(0.0))
        );
    }

    #[test]
    fn single_user_inner_loop_settles_after_one_update() {
        let h = random_h(1, 2, 4, 4);
        let opts = InnerOptions { record_updates: true, ..InnerOptions::default() };
        let (_, out) = inner_cyclic_maximize(&h, 0.3, 1.0, &opts).unwrap();
        assert_eq!(out.cycles, 2);
        assert!((out.updates[2] - out.updates[1]).abs() < 1e-12);
    }

    #[test]
    fn inner_lagrangian_is_monotone() {
        let h = random_h(3, 2, 4, 5);
        let opts = InnerOptions { record_updates: true, ..InnerOptions::default() };
        let (_, out) = inner_cyclic_maximize(&h, 0.2, 1.0, &opts).unwrap();
        assert!(out.updates.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    }

    #[test]
    fn inner_loop_cap_is_reported() {
        let h = random_h(3, 2, 4, 6);
        let opts = InnerOptions { tol: 0.0, max_cycles: Some(3), record_updates: false };
        assert!(matches!(
            inner_cyclic_maximize(&h, 0.2, 1.0, &opts),
            Err(Error::NoConvergence { cycles: 3, .. })
        ));
    }

    #[test]
    fn identity_channel_bisection() {
        let h = vec![CMat::<f64>::identity(2, 2)];
        let out = dual_bisection(&h, 2.0, &BisectionOptions::default()).unwrap();
        assert!((out.sum_rate_bits - 2.0).abs() < 1e-6);
        let eps = 1e-4 * 1.0;
        assert!((out.mu - 0.5).abs() <= eps);
        assert!(frobenius(&(out.covs.get(0) - CMat::<f64>::identity(2, 2))) < 1e-6);
    }

    #[test]
    fn vanishing_budget() {
        let h = random_h(2, 2, 3, 7);
        let out = dual_bisection(&h, 1e-9, &BisectionOptions::default()).unwrap();
        assert!(out.sum_rate_bits < 1e-6);
        assert!(out.covs.total_trace() <= 1e-9 * (1.0 + 1e-6));
    }

    #[test]
    fn bracket_stays_valid() {
        let h = random_h(3, 2, 4, 8);
        let out = dual_bisection(&h, 1.0, &BisectionOptions::default()).unwrap();
        let cap = 3.0 * 4.0 / 1.0;
        for st in &out.history {
            assert!(0.0 <= st.mu_min && st.mu_min < st.mu_max && st.mu_max <= cap);
            assert!(st.mu_min <= st.mu && st.mu <= st.mu_max);
        }
        assert!(out.mu <= cap);
        out.covs.validate().unwrap();
    }

    #[test]
    fn warm_bracket_reaches_same_optimum() {
        let h = random_h(2, 2, 4, 9);
        let cold = dual_bisection(&h, 1.0, &BisectionOptions::default()).unwrap();
        for bracket in [(cold.bracket.0 * 0.5, cold.bracket.0 * 0.5 + 1e-4), (cold.bracket.1 * 3.0, cold.bracket.1 * 3.0 + 1e-3), cold.bracket] {
            let opts = BisectionOptions { warm_bracket: Some(bracket), ..BisectionOptions::default() };
            let warm = dual_bisection(&h, 1.0, &opts).unwrap();
            assert!((warm.sum_rate_bits - cold.sum_rate_bits).abs() < 1e-6, "{bracket:?}");
            assert!((warm.mu - cold.mu).abs() < 2e-3);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let h: Vec<CMat<f32>> = random_h(2, 2, 3, 10)
            .iter()
            .map(|m| m.map(|z| C::new(z.re as f32, z.im as f32)))
            .collect();
        let h64 = random_h(2, 2, 3, 10);
        let a = dual_bisection(&h, 1.0f32, &BisectionOptions::default()).unwrap();
        let b = dual_bisection(&h64, 1.0f64, &BisectionOptions::default()).unwrap();
        assert!((a.sum_rate_bits as f64 - b.sum_rate_bits).abs() < 1e-3);
    }
}
