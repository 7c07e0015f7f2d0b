//! Channel matrices of one realization and the effective per-user channel
//! `H_k = D_k + G_k diag(θ) U`.

mod fading;
pub mod geometry;

pub use fading::{los_matrix, rician_block, sample_channels, standard_complex_gaussian};
pub use geometry::{
    db_to_linear, geometry_distances, path_loss_direct, path_loss_ris, ris_link_gain, Distances,
    SystemGeometry, UserPlacement,
};

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{czero, CMat};
use crate::scalar::{unit_phasor, Real, C};

/// `D_k`, `U` and `G_k` for all users, with the per-user large-scale
/// scalings already folded into `D_k` and `G_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T: Real> {
    direct: Vec<CMat<T>>,
    bs_ris: CMat<T>,
    ris_user: Vec<CMat<T>>,
}

impl<T: Real> ChannelSet<T> {
    pub fn new(direct: Vec<CMat<T>>, bs_ris: CMat<T>, ris_user: Vec<CMat<T>>) -> Result<Self> {
        if direct.len() != ris_user.len() {
            return Err(Error::Dimension(format!(
                "{} direct links but {} RIS links",
                direct.len(),
                ris_user.len()
            )));
        }
        let (n_ris, n_t) = bs_ris.shape();
        for (k, (d, g)) in direct.iter().zip(&ris_user).enumerate() {
            if d.ncols() != n_t || g.ncols() != n_ris || d.nrows() != g.nrows() {
                return Err(Error::Dimension(format!(
                    "user {k}: D is {:?}, G is {:?}, U is {:?}",
                    d.shape(),
                    g.shape(),
                    bs_ris.shape()
                )));
            }
            if d.nrows() == 0 {
                return Err(Error::Dimension(format!("user {k} has no antennas")));
            }
        }
        let finite = |m: &CMat<T>| m.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !(direct.iter().all(finite) && ris_user.iter().all(finite) && finite(&bs_ris)) {
            return Err(Error::Dimension("channel entries must be finite".into()));
        }
        Ok(ChannelSet { direct, bs_ris, ris_user })
    }

    /// Channel set without an RIS (`N_ris = 0`).
    pub fn direct_only(direct: Vec<CMat<T>>) -> Result<Self> {
        let n_t = direct.first().map_or(0, |d| d.ncols());
        let ris_user = direct.iter().map(|d| CMat::<T>::zeros(d.nrows(), 0)).collect();
        ChannelSet::new(direct, CMat::<T>::zeros(0, n_t), ris_user)
    }

    pub fn users(&self) -> usize {
        self.direct.len()
    }

    pub fn n_t(&self) -> usize {
        self.bs_ris.ncols()
    }

    pub fn n_ris(&self) -> usize {
        self.bs_ris.nrows()
    }

    pub fn user_antennas(&self, k: usize) -> usize {
        self.direct[k].nrows()
    }

    pub fn direct(&self, k: usize) -> &CMat<T> {
        &self.direct[k]
    }

    pub fn ris_user(&self, k: usize) -> &CMat<T> {
        &self.ris_user[k]
    }

    pub fn bs_ris(&self) -> &CMat<T> {
        &self.bs_ris
    }

    /// Zeroes every `G_k`, leaving only the direct links.
    pub fn without_ris_link(mut self) -> Self {
        self.ris_user.iter_mut().for_each(|g| g.fill(czero()));
        self
    }

    /// Zeroes every `D_k`, leaving only the RIS links.
    pub fn without_direct_link(mut self) -> Self {
        self.direct.iter_mut().for_each(|d| d.fill(czero()));
        self
    }

    /// True when some `G_k` has a nonzero entry and the RIS has elements.
    pub fn has_ris_link(&self) -> bool {
        self.n_ris() > 0
            && self.bs_ris.iter().any(|z| *z != czero())
            && self.ris_user.iter().any(|g| g.iter().any(|z| *z != czero()))
    }

    pub fn with_users_permuted(&self, order: &[usize]) -> Self {
        ChannelSet {
            direct: order.iter().map(|&k| self.direct[k].clone()).collect(),
            bs_ris: self.bs_ris.clone(),
            ris_user: order.iter().map(|&k| self.ris_user[k].clone()).collect(),
        }
    }

    pub fn cast<U: Real>(&self) -> ChannelSet<U> {
        let conv = |m: &CMat<T>| {
            m.map(|z| C::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy())))
        };
        ChannelSet {
            direct: self.direct.iter().map(conv).collect(),
            bs_ris: conv(&self.bs_ris),
            ris_user: self.ris_user.iter().map(conv).collect(),
        }
    }
}

/// RIS reflection coefficients, each of unit modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct RisPhases<T: Real>(Vec<C<T>>);

impl<T: Real> RisPhases<T> {
    pub fn modulus_tolerance() -> T {
        T::lit(1e-12).max(T::eps() * T::lit(128.0))
    }

    pub fn new(theta: Vec<C<T>>) -> Result<Self> {
        let tol = Self::modulus_tolerance();
        if let Some((l, z)) = theta
            .iter()
            .enumerate()
            .find(|(_, z)| !((z.norm_sqr().sqrt() - T::one()).abs() <= tol))
        {
            return Err(Error::InvalidOption(format!(
                "RIS coefficient {l} has modulus {}",
                z.norm_sqr().sqrt()
            )));
        }
        Ok(RisPhases(theta))
    }

    pub fn ones(n: usize) -> Self {
        RisPhases(vec![C::new(T::one(), T::zero()); n])
    }

    pub fn from_angles(angles: &[T]) -> Self {
        RisPhases(angles.iter().map(|&a| unit_phasor(a)).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let two_pi = T::two_pi();
        RisPhases(
            (0..n)
                .map(|_| unit_phasor(T::lit(rng.random::<f64>()) * two_pi))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.0
    }

    pub fn get(&self, l: usize) -> C<T> {
        self.0[l]
    }

    /// Writes `θ_l`, projecting onto the unit circle.
    pub fn set(&mut self, l: usize, value: C<T>) {
        let n = value.norm_sqr().sqrt();
        self.0[l] = if n > T::zero() { value.unscale(n) } else { C::new(T::one(), T::zero()) };
    }

    pub fn angles(&self) -> Vec<T> {
        self.0.iter().map(|z| z.im.atan2(z.re)).collect()
    }
}

/// `H_k = D_k + G_k diag(θ) U`.
pub fn compose_effective_channel<T: Real>(
    channels: &ChannelSet<T>,
    phases: &RisPhases<T>,
    k: usize,
) -> CMat<T> {
    let fu = reflected_bs_ris(channels, phases);
    compose_with_reflected(channels, &fu, k)
}

/// All effective channels, sharing the `diag(θ) U` product.
pub fn compose_all<T: Real>(channels: &ChannelSet<T>, phases: &RisPhases<T>) -> Vec<CMat<T>> {
    let fu = reflected_bs_ris(channels, phases);
    (0..channels.users())
        .map(|k| compose_with_reflected(channels, &fu, k))
        .collect()
}

fn reflected_bs_ris<T: Real>(channels: &ChannelSet<T>, phases: &RisPhases<T>) -> CMat<T> {
    assert_eq!(phases.len(), channels.n_ris(), "phase vector length must equal N_ris");
    let mut fu = channels.bs_ris.clone();
    for (l, mut row) in fu.row_iter_mut().enumerate() {
        row *= phases.get(l);
    }
    fu
}

fn compose_with_reflected<T: Real>(channels: &ChannelSet<T>, fu: &CMat<T>, k: usize) -> CMat<T> {
    let mut h = channels.direct[k].clone();
    if channels.n_ris() > 0 {
        h.gemm(C::new(T::one(), T::zero()), &channels.ris_user[k], fu, C::new(T::one(), T::zero()));
    }
    h
}
