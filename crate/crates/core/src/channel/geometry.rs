//! Deployment geometry and large-scale path loss.
//!
//! Coordinates are Cartesian, in meters. The BS ULA runs parallel to the
//! y-axis with its midpoint at `(0, l_t, h_t)`, the RIS lies in the xz-plane
//! with its midpoint at `(d_ris, 0, h_ris)`, and every user ULA runs parallel
//! to the y-axis with its midpoint at `(d_k, l_k, h_k)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemGeometry {
    /// Carrier wavelength (m).
    pub wavelength: f64,
    /// BS antenna spacing (m).
    pub s_t: f64,
    /// User antenna spacing (m).
    pub s_r: f64,
    /// RIS element spacing, both dimensions (m).
    pub s_ris: f64,
    pub l_t: f64,
    pub h_t: f64,
    pub d_ris: f64,
    pub h_ris: f64,
    /// BS antenna count.
    pub n_t: usize,
    /// RIS rows (along z).
    pub ris_rows: usize,
    /// RIS columns (along x).
    pub ris_cols: usize,
    /// Direct-link path-loss exponent.
    pub alpha_dir: f64,
    /// BS antenna gain (linear).
    pub g_t: f64,
    /// User antenna gain (linear).
    pub g_r: f64,
    /// Total transmit power (W).
    pub power: f64,
    /// Noise power (W).
    pub noise_power: f64,
    /// Rician factor of every link.
    pub rician_k: f64,
}

impl Default for SystemGeometry {
    /// 2 GHz carrier, half-wavelength spacings, 15x15 RIS, 1 W, -110 dBW noise.
    fn default() -> Self {
        let wavelength = 0.15;
        SystemGeometry {
            wavelength,
            s_t: wavelength / 2.0,
            s_r: wavelength / 2.0,
            s_ris: wavelength / 2.0,
            l_t: 20.0,
            h_t: 10.0,
            d_ris: 30.0,
            h_ris: 5.0,
            n_t: 8,
            ris_rows: 15,
            ris_cols: 15,
            alpha_dir: 3.0,
            g_t: 2.0,
            g_r: 2.0,
            power: 1.0,
            noise_power: db_to_linear(-110.0),
            rician_k: 1.0,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl SystemGeometry {
    pub fn n_ris(&self) -> usize {
        self.ris_rows * self.ris_cols
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength),
            ("s_t", self.s_t),
            ("s_r", self.s_r),
            ("s_ris", self.s_ris),
            ("l_t", self.l_t),
            ("h_t", self.h_t),
            ("d_ris", self.d_ris),
            ("h_ris", self.h_ris),
            ("g_t", self.g_t),
            ("g_r", self.g_r),
            ("power", self.power),
            ("noise_power", self.noise_power),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGeometry(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_t == 0 {
            return Err(Error::InvalidGeometry("n_t must be at least 1".into()));
        }
        if self.n_ris() == 0 {
            return Err(Error::InvalidGeometry("RIS grid must have at least one element".into()));
        }
        if !(self.alpha_dir >= 2.0) {
            return Err(Error::InvalidGeometry(format!(
                "alpha_dir must be >= 2, got {}",
                self.alpha_dir
            )));
        }
        if !(self.rician_k.is_finite() && self.rician_k >= 0.0) {
            return Err(Error::InvalidGeometry("rician_k must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn bs_midpoint(&self) -> Point {
        [0.0, self.l_t, self.h_t]
    }

    pub fn ris_midpoint(&self) -> Point {
        [self.d_ris, 0.0, self.h_ris]
    }

    /// Element offsets of the BS ULA relative to its midpoint.
    pub fn bs_offsets(&self) -> Vec<Point> {
        ula_offsets(self.n_t, self.s_t)
    }

    /// Element offsets of a user ULA with `n` antennas.
    pub fn user_offsets(&self, n: usize) -> Vec<Point> {
        ula_offsets(n, self.s_r)
    }

    /// RIS element offsets, row-major: element `l = row * cols + col`, rows
    /// stacked along z and columns along x.
    pub fn ris_offsets(&self) -> Vec<Point> {
        let rc = (self.ris_rows as f64 - 1.0) / 2.0;
        let cc = (self.ris_cols as f64 - 1.0) / 2.0;
        let mut out = Vec::with_capacity(self.n_ris());
        for r in 0..self.ris_rows {
            for c in 0..self.ris_cols {
                out.push([(c as f64 - cc) * self.s_ris, 0.0, (r as f64 - rc) * self.s_ris]);
            }
        }
        out
    }

    /// BS-to-RIS midpoint distance.
    pub fn d_t_ris(&self) -> f64 {
        (self.d_ris.powi(2) + self.l_t.powi(2) + (self.h_t - self.h_ris).powi(2)).sqrt()
    }
}

fn ula_offsets(n: usize, spacing: f64) -> Vec<Point> {
    let mid = (n as f64 - 1.0) / 2.0;
    (0..n).map(|i| [0.0, (i as f64 - mid) * spacing, 0.0]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserPlacement {
    pub d: f64,
    pub l: f64,
    pub h: f64,
    pub n_antennas: usize,
}

impl UserPlacement {
    pub fn new(d: f64, l: f64, h: f64, n_antennas: usize) -> Result<Self> {
        let p = UserPlacement { d, l, h, n_antennas };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::InvalidGeometry(format!("user d must be positive, got {}", self.d)));
        }
        if !(self.l.is_finite() && self.h.is_finite()) {
            return Err(Error::InvalidGeometry("user coordinates must be finite".into()));
        }
        if self.n_antennas == 0 {
            return Err(Error::InvalidGeometry("user must have at least one antenna".into()));
        }
        Ok(())
    }

    pub fn midpoint(&self) -> Point {
        [self.d, self.l, self.h]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distances {
    pub d_t_ris: f64,
    pub d_ris_k: f64,
    pub d_t_k: f64,
}

pub fn geometry_distances(geometry: &SystemGeometry, user: &UserPlacement) -> Distances {
    Distances {
        d_t_ris: geometry.d_t_ris(),
        d_ris_k: ((geometry.d_ris - user.d).powi(2)
            + user.l.powi(2)
            + (geometry.h_ris - user.h).powi(2))
        .sqrt(),
        d_t_k: (user.d.powi(2) + (geometry.l_t - user.l).powi(2) + (geometry.h_t - user.h).powi(2))
            .sqrt(),
    }
}

/// Direct-link path loss `(4π/λ)² d^α` (linear, ≥ 1 means attenuation).
pub fn path_loss_direct(d_t_k: f64, geometry: &SystemGeometry) -> f64 {
    (4.0 * PI / geometry.wavelength).powi(2) * d_t_k.powf(geometry.alpha_dir)
}

/// Inverse far-field two-hop loss of the RIS link, `β_RIS⁻¹`.
pub fn ris_link_gain(geometry: &SystemGeometry, user: &UserPlacement) -> Result<f64> {
    let dist = geometry_distances(geometry, user);
    let cos_t = geometry.l_t / dist.d_t_ris;
    let cos_r = user.l / dist.d_ris_k;
    if !(cos_t > 0.0) {
        return Err(Error::DegenerateGeometry(
            "BS lies in the RIS plane (l_t = 0)".into(),
        ));
    }
    if !(cos_r > 0.0) {
        return Err(Error::DegenerateGeometry(format!(
            "user at l = {} lies in or behind the RIS plane",
            user.l
        )));
    }
    Ok(geometry.g_t * geometry.g_r * geometry.wavelength.powi(4) * cos_t * cos_r
        / (256.0 * PI * PI * dist.d_t_ris.powi(2) * dist.d_ris_k.powi(2)))
}

/// RIS-link path loss `β_RIS` (linear).
pub fn path_loss_ris(geometry: &SystemGeometry, user: &UserPlacement) -> Result<f64> {
    ris_link_gain(geometry, user).map(f64::recip)
}
