//! Closed-form coordinate-wise RIS phase optimization.
//!
//! With the covariances and all other phases fixed, the dual-MAC objective as
//! a function of one coefficient `θ_l` is `log|A_l + θ_l B_l + θ_l* B_lᴴ|`,
//! where `B_l = b_l u_l` has rank one (`u_l` is row `l` of `U`). Its maximizer
//! on the unit circle is `exp(−j·arg σ_l)` with `σ_l = u_l A_l⁻¹ b_l`, the
//! only nonzero eigenvalue of `A_l⁻¹ B_l`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{compose_all, ChannelSet, RisPhases};
use crate::complexity::MulCounter;
use crate::covariance::{mac_gram, CovarianceSet};
use crate::error::Result;
use crate::linalg::{cholesky, frobenius, ln_det_hpd, symmetrize, CMat, CVec};
use crate::scalar::{Real, C};

/// `A_l` and the factors of `B_l = b_l u_l` for one RIS element.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSubproblem<T: Real> {
    pub l: usize,
    pub a: CMat<T>,
    /// `b_l` (length `N_t`).
    pub b: CVec<T>,
    /// `u_l` as a column (length `N_t`); `B_l = b uᵀ`.
    pub u: CVec<T>,
}

impl<T: Real> PhaseSubproblem<T> {
    pub fn b_matrix(&self) -> CMat<T> {
        &self.b * self.u.transpose()
    }

    /// `A_l + θ B_l + θ* B_lᴴ`.
    pub fn assemble(&self, theta: C<T>) -> CMat<T> {
        let bm = self.b_matrix() * theta;
        let mut m = &self.a + &bm + bm.adjoint();
        symmetrize(&mut m);
        m
    }

    /// Objective in bits at `θ`.
    pub fn objective(&self, theta: C<T>) -> Result<T> {
        Ok(ln_det_hpd(&self.assemble(theta))? / T::ln_2())
    }

    /// `σ_l = u_l A_l⁻¹ b_l`, via one Cholesky factorization of `A_l`.
    pub fn sigma(&self) -> Result<C<T>> {
        let x = cholesky(self.a.clone())?.solve_vec(&self.b);
        Ok(self.u.iter().zip(x.iter()).fold(C::new(T::zero(), T::zero()), |acc, (u, x)| acc + u * x))
    }

    /// Relative deviation of `A_l + θB_l + θ*B_lᴴ` from `target`.
    pub fn reconstruction_error(&self, theta: C<T>, target: &CMat<T>) -> T {
        frobenius(&(self.assemble(theta) - target)) / frobenius(target).max(T::eps())
    }
}

/// Result of a single-element update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseUpdate<T: Real> {
    Set(C<T>),
    /// The objective does not depend on `θ_l`; keep the previous value.
    KeepPrevious,
}

/// `θ_l★ = exp(−j·arg σ_l)`, or [`PhaseUpdate::KeepPrevious`] when
/// `|σ_l| ≤ 1e−14·‖A_l‖`.
pub fn optimal_phase<T: Real>(sub: &PhaseSubproblem<T>) -> Result<PhaseUpdate<T>> {
    let sigma = sub.sigma()?;
    let mag = sigma.norm_sqr().sqrt();
    if mag <= T::lit(1e-14) * frobenius(&sub.a) || mag == T::zero() {
        return Ok(PhaseUpdate::KeepPrevious);
    }
    Ok(PhaseUpdate::Set(sigma.conj().unscale(mag)))
}

fn column_of<T: Real>(m: &CMat<T>, l: usize) -> CVec<T> {
    m.column(l).into_owned()
}

fn row_as_column<T: Real>(m: &CMat<T>, l: usize) -> CVec<T> {
    m.row(l).transpose()
}

/// Builds `A_l` and `b_l` directly from the channel blocks:
/// `A_l = I + Σ_k C_kᴴ S̄_k C_k + Σ_k u_lᴴ g_{k,l}ᴴ S̄_k g_{k,l} u_l` and
/// `b_l = Σ_k C_kᴴ S̄_k g_{k,l}`, with `C_k = H_k − θ_l g_{k,l} u_l`.
pub fn build_subproblem<T: Real>(
    channels: &ChannelSet<T>,
    phases: &RisPhases<T>,
    covs: &CovarianceSet<T>,
    l: usize,
) -> PhaseSubproblem<T> {
    let n_t = channels.n_t();
    let theta = phases.get(l);
    let u = row_as_column(channels.bs_ris(), l);
    let u_outer = u.conjugate() * u.transpose();
    let h_list = compose_all(channels, phases);
    let mut a = CMat::<T>::identity(n_t, n_t);
    let mut b = CVec::<T>::zeros(n_t);
    for (k, h) in h_list.iter().enumerate() {
        let g = column_of(channels.ris_user(k), l);
        let s = covs.get(k);
        let c_k = h - (&g * u.transpose()) * theta;
        let sg = s * &g;
        a += c_k.ad_mul(&(s * &c_k));
        let gsg = g.dotc(&sg);
        a += &u_outer * gsg;
        b += c_k.ad_mul(&sg);
    }
    symmetrize(&mut a);
    PhaseSubproblem { l, a, b, u }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    #[default]
    Ascending,
    /// Fresh random permutation per sweep (diagnostic).
    Shuffled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    pub order: SweepOrder,
    /// Record the objective after every element and check each subproblem
    /// against a full recomputation.
    pub diagnostics: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport<T: Real> {
    /// Objective (bits) before the sweep, then after each element when
    /// diagnostics are on.
    pub objective_trace: Vec<T>,
    pub max_reconstruction_error: T,
    /// Elements whose objective did not depend on their phase.
    pub kept: usize,
    pub counter: MulCounter,
}

/// Incremental sweep state: the effective channels and
/// `M = I + Σ H_kᴴ S̄_k H_k` are updated in place after every element.
#[derive(Debug, Clone)]
pub struct PhaseSweeper<'a, T: Real> {
    channels: &'a ChannelSet<T>,
    covs: &'a CovarianceSet<T>,
    h: Vec<CMat<T>>,
    gram: CMat<T>,
    counter: MulCounter,
}

impl<'a, T: Real> PhaseSweeper<'a, T> {
    pub fn new(channels: &'a ChannelSet<T>, phases: &RisPhases<T>, covs: &'a CovarianceSet<T>) -> Self {
        let h = compose_all(channels, phases);
        let gram = mac_gram(&h, covs.mats());
        let mut counter = MulCounter::default();
        let (n_t, n_ris) = (channels.n_t(), channels.n_ris());
        counter.channel += (n_ris * n_t) as u64;
        for k in 0..channels.users() {
            let n_r = channels.user_antennas(k);
            counter.channel += MulCounter::matmul(n_r, n_ris, n_t);
            counter.phase += MulCounter::matmul(n_t, n_r, n_r) + MulCounter::matmul(n_t, n_t, n_r);
        }
        PhaseSweeper { channels, covs, h, gram, counter }
    }

    pub fn effective_channels(&self) -> &[CMat<T>] {
        &self.h
    }

    pub fn gram(&self) -> &CMat<T> {
        &self.gram
    }

    pub fn counter(&self) -> &MulCounter {
        &self.counter
    }

    /// Objective (bits) at the current state.
    pub fn objective(&self) -> Result<T> {
        Ok(ln_det_hpd(&self.gram)? / T::ln_2())
    }

    /// Subproblem for element `l` at current phase `theta`, from the
    /// maintained state rather than from scratch.
    pub fn subproblem(&mut self, l: usize, theta: C<T>) -> PhaseSubproblem<T> {
        let n_t = self.channels.n_t();
        let u = row_as_column(self.channels.bs_ris(), l);
        let mut b = CVec::<T>::zeros(n_t);
        let mut gsg_total = T::zero();
        for (k, h) in self.h.iter().enumerate() {
            let g = column_of(self.channels.ris_user(k), l);
            let sg = self.covs.get(k) * &g;
            gsg_total += g.dotc(&sg).re;
            b += h.ad_mul(&sg);
            let n_r = h.nrows();
            self.counter.phase += (n_r * n_r + n_r * n_t + n_r) as u64;
        }
        let u_conj = u.conjugate();
        b -= &u_conj * (theta.conj() * gsg_total);
        let cross = (&b * u.transpose()) * theta;
        let mut a = &self.gram - &cross - cross.adjoint();
        symmetrize(&mut a);
        // Cholesky of A_l plus the two triangular solves and the rank-one terms
        self.counter.phase += (n_t * n_t * n_t / 6 + 4 * n_t * n_t) as u64;
        PhaseSubproblem { l, a, b, u }
    }

    /// Moves element `l` from `old` to `new`, updating channels and `M`.
    pub fn apply(&mut self, sub: &PhaseSubproblem<T>, old: C<T>, new: C<T>) {
        let delta = new - old;
        let n_t = self.channels.n_t();
        for (k, h) in self.h.iter_mut().enumerate() {
            let g = column_of(self.channels.ris_user(k), sub.l);
            *h += (&g * sub.u.transpose()) * delta;
            self.counter.phase += (h.nrows() * n_t) as u64;
        }
        self.gram = sub.assemble(new);
        self.counter.phase += (2 * n_t * n_t) as u64;
    }

    /// One pass over all elements.
    pub fn sweep(&mut self, phases: &mut RisPhases<T>, opts: &SweepOptions) -> Result<SweepReport<T>> {
        let n_ris = self.channels.n_ris();
        let mut order: Vec<usize> = (0..n_ris).collect();
        if let SweepOrder::Shuffled(seed) = opts.order {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        let mut trace = Vec::new();
        if opts.diagnostics {
            trace.push(self.objective()?);
        }
        let mut max_err = T::zero();
        let mut kept = 0;
        for l in order {
            let old = phases.get(l);
            let sub = self.subproblem(l, old);
            if opts.diagnostics {
                let full = mac_gram(&compose_all(self.channels, phases), self.covs.mats());
                max_err = max_err.max(sub.reconstruction_error(old, &full));
            }
            match optimal_phase(&sub)? {
                PhaseUpdate::Set(new) => {
                    self.apply(&sub, old, new);
                    phases.set(l, new);
                }
                PhaseUpdate::KeepPrevious => kept += 1,
            }
            if opts.diagnostics {
                trace.push(self.objective()?);
            }
        }
        Ok(SweepReport { objective_trace: trace, max_reconstruction_error: max_err, kept, counter: self.counter })
    }
}

/// Sweeps all elements once in ascending order.
pub fn sweep_all_phases<T: Real>(
    channels: &ChannelSet<T>,
    phases: &RisPhases<T>,
    covs: &CovarianceSet<T>,
) -> Result<RisPhases<T>> {
    Ok(sweep_phases_with(channels, phases, covs, &SweepOptions::default())?.0)
}

pub fn sweep_phases_with<T: Real>(
    channels: &ChannelSet<T>,
    phases: &RisPhases<T>,
    covs: &CovarianceSet<T>,
    opts: &SweepOptions,
) -> Result<(RisPhases<T>, SweepReport<T>)> {
    let mut out = phases.clone();
    let report = PhaseSweeper::new(channels, phases, covs).sweep(&mut out, opts)?;
    Ok((out, report))
}
