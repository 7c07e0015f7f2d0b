//! Rician fading with a far-field rank-one LOS component.
//!
//! `H = sqrt(κ/(1+κ)) H_LOS + sqrt(1/(1+κ)) H_NLOS`. The NLOS part has i.i.d.
//! CN(0, 1) entries. The LOS part is `e^{-j2πd/λ} a_rx a_txᴴ`, where the
//! response vectors are evaluated along the unit vector joining the two array
//! midpoints and `d` is the midpoint distance. Every LOS entry has unit
//! modulus.

use std::f64::consts::PI;

use nalgebra::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use super::geometry::{
    geometry_distances, path_loss_direct, ris_link_gain, Point, SystemGeometry, UserPlacement,
};
use super::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::rng::{RealizationSeed, Stream};
use crate::scalar::{Real, C};

/// One CN(0, 1) draw.
pub fn standard_complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C<f64> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Far-field LOS matrix between two arrays (rows: receive elements).
pub fn los_matrix(
    rx_mid: Point,
    rx_offsets: &[Point],
    tx_mid: Point,
    tx_offsets: &[Point],
    wavelength: f64,
) -> CMat<f64> {
    let delta = sub(rx_mid, tx_mid);
    let dist = dot(delta, delta).sqrt();
    let dir = [delta[0] / dist, delta[1] / dist, delta[2] / dist];
    let k0 = 2.0 * PI / wavelength;
    let common = Complex::from_polar(1.0, -k0 * dist);
    let a_rx: Vec<C<f64>> = rx_offsets
        .iter()
        .map(|&p| Complex::from_polar(1.0, -k0 * dot(dir, p)))
        .collect();
    let a_tx: Vec<C<f64>> = tx_offsets
        .iter()
        .map(|&p| Complex::from_polar(1.0, -k0 * dot(dir, p)))
        .collect();
    CMat::<f64>::from_fn(rx_offsets.len(), tx_offsets.len(), |r, t| {
        common * a_rx[r] * a_tx[t].conj()
    })
}

/// Mixes a LOS matrix with fresh NLOS draws at Rician factor `kappa`.
pub fn rician_block<R: Rng + ?Sized>(los: &CMat<f64>, kappa: f64, rng: &mut R) -> CMat<f64> {
    let w_los = (kappa / (1.0 + kappa)).sqrt();
    let w_nlos = (1.0 / (1.0 + kappa)).sqrt();
    let (rows, cols) = los.shape();
    // column-major fill order fixes the stream consumption order
    CMat::<f64>::from_fn(rows, cols, |r, c| {
        los[(r, c)] * w_los + standard_complex_gaussian(rng) * w_nlos
    })
}

fn to_real<T: Real>(m: CMat<f64>) -> CMat<T> {
    m.map(|z| Complex::new(T::lit(z.re), T::lit(z.im)))
}

/// Draws one realization of all channel matrices.
///
/// `D_k` is scaled by `sqrt(β_DIR,k⁻¹ / N₀)` and `G_k` by
/// `sqrt(β_RIS,k⁻¹ / N₀)`; `U` is left unscaled, so rates are computed with
/// unit noise.
pub fn sample_channels<T: Real>(
    geometry: &SystemGeometry,
    placements: &[UserPlacement],
    seed: RealizationSeed,
) -> Result<ChannelSet<T>> {
    geometry.validate()?;
    if placements.is_empty() {
        return Err(Error::InvalidGeometry("at least one user is required".into()));
    }
    let kappa = geometry.rician_k;
    let bs_off = geometry.bs_offsets();
    let ris_off = geometry.ris_offsets();

    let u_los = los_matrix(
        geometry.ris_midpoint(),
        &ris_off,
        geometry.bs_midpoint(),
        &bs_off,
        geometry.wavelength,
    );
    let bs_ris = rician_block(&u_los, kappa, &mut seed.rng(Stream::BsRis));

    let mut direct = Vec::with_capacity(placements.len());
    let mut ris_user = Vec::with_capacity(placements.len());
    for (k, user) in placements.iter().enumerate() {
        user.validate()?;
        let user_off = geometry.user_offsets(user.n_antennas);
        let dist = geometry_distances(geometry, user);

        let d_los = los_matrix(
            user.midpoint(),
            &user_off,
            geometry.bs_midpoint(),
            &bs_off,
            geometry.wavelength,
        );
        let d_scale = (1.0 / (path_loss_direct(dist.d_t_k, geometry) * geometry.noise_power)).sqrt();
        let d = rician_block(&d_los, kappa, &mut seed.rng(Stream::Direct(k))) * Complex::from(d_scale);

        let g_los = los_matrix(
            user.midpoint(),
            &user_off,
            geometry.ris_midpoint(),
            &ris_off,
            geometry.wavelength,
        );
        let g_scale = (ris_link_gain(geometry, user)? / geometry.noise_power).sqrt();
        let g = rician_block(&g_los, kappa, &mut seed.rng(Stream::RisUser(k))) * Complex::from(g_scale);

        direct.push(to_real(d));
        ris_user.push(to_real(g));
    }
    ChannelSet::new(direct, to_real(bs_ris), ris_user)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn placements() -> Vec<UserPlacement> {
        vec![
            UserPlacement::new(200.0, 35.0, 1.75, 2).unwrap(),
            UserPlacement::new(420.0, 12.0, 1.6, 2).unwrap(),
        ]
    }

    #[test]
    fn los_entries_have_unit_modulus() {
        let g = SystemGeometry::default();
        let los = los_matrix(g.ris_midpoint(), &g.ris_offsets(), g.bs_midpoint(), &g.bs_offsets(), g.wavelength);
        assert_eq!(los.shape(), (225, 8));
        assert!(los.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        // rank one: every column is a scalar multiple of the first
        let c0 = los.column(0).into_owned();
        for c in 1..8 {
            let ratio = los[(0, c)] / c0[0];
            let diff = los.column(c) - &c0 * ratio;
            assert!(diff.norm() < 1e-9);
        }
    }

    #[test]
    fn rician_mixture_has_unit_average_power() {
        let los = CMat::<f64>::from_element(10, 10, Complex::from_polar(1.0, 0.3));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut acc = 0.0;
        let draws = 1000;
        for _ in 0..draws {
            acc += rician_block(&los, 1.0, &mut rng).iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        let mean = acc / (draws * 100) as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn los_and_nlos_power_split() {
        // κ = 1: ‖√½ LOS‖² equals E‖√½ NLOS‖² = rows·cols/2
        let g = SystemGeometry::default();
        let los = los_matrix(g.ris_midpoint(), &g.ris_offsets(), g.bs_midpoint(), &g.bs_offsets(), g.wavelength);
        let w = (0.5f64).sqrt();
        let p_los = frobenius(&(los.clone() * Complex::from(w))).powi(2);
        assert!((p_los - 225.0 * 8.0 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = SystemGeometry::default();
        let s = RealizationSeed::new(42, 9);
        let a: ChannelSet<f64> = sample_channels(&g, &placements(), s).unwrap();
        let b: ChannelSet<f64> = sample_channels(&g, &placements(), s).unwrap();
        assert_eq!(a, b);
        let c: ChannelSet<f64> = sample_channels(&g, &placements(), RealizationSeed::new(42, 10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noise_scaling_halves_entries() {
        let g = SystemGeometry::default();
        let g4 = SystemGeometry { noise_power: 4.0 * g.noise_power, ..g.clone() };
        let s = RealizationSeed::new(1, 1);
        let a: ChannelSet<f64> = sample_channels(&g, &placements(), s).unwrap();
        let b: ChannelSet<f64> = sample_channels(&g4, &placements(), s).unwrap();
        for k in 0..2 {
            assert!(frobenius(&(a.direct(k) * Complex::from(0.5) - b.direct(k))) < 1e-12 * frobenius(a.direct(k)));
            assert!(frobenius(&(a.ris_user(k) * Complex::from(0.5) - b.ris_user(k))) < 1e-12 * frobenius(a.ris_user(k)));
        }
        assert_eq!(a.bs_ris(), b.bs_ris());
    }

    #[test]
    fn degenerate_user_propagates() {
        let g = SystemGeometry::default();
        let p = vec![UserPlacement::new(300.0, 0.0, 1.8, 2).unwrap()];
        let r: Result<ChannelSet<f64>> = sample_channels(&g, &p, RealizationSeed::new(0, 0));
        assert!(matches!(r, Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn dimensions() {
        let g = SystemGeometry { n_t: 4, ris_rows: 2, ris_cols: 3, ..SystemGeometry::default() };
        let ch: ChannelSet<f32> = sample_channels(&g, &placements(), RealizationSeed::new(3, 0)).unwrap();
        assert_eq!(ch.users(), 2);
        assert_eq!(ch.n_t(), 4);
        assert_eq!(ch.n_ris(), 6);
        assert_eq!(ch.ris_user(1).shape(), (2, 6));
    }
}
