//! Scenario configuration, loaded from TOML with per-key overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ao::{AoOptions, InitialPhases};
use crate::channel::{db_to_linear, SystemGeometry};
use crate::error::{Error, Result};

/// Environment variable consulted for the default output directory.
pub const OUT_DIR_ENV: &str = "RISBC_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkMode {
    /// Direct BS-user links only.
    Direct,
    /// Links via the RIS only.
    Ris,
    Both,
}

impl LinkMode {
    pub const ALL: [LinkMode; 3] = [LinkMode::Direct, LinkMode::Ris, LinkMode::Both];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkMode::Direct => "direct",
            LinkMode::Ris => "ris",
            LinkMode::Both => "both",
        }
    }

    pub fn has_ris(self) -> bool {
        !matches!(self, LinkMode::Direct)
    }

    pub(crate) fn salt(self) -> u64 {
        match self {
            LinkMode::Direct => 1,
            LinkMode::Ris => 2,
            LinkMode::Both => 3,
        }
    }
}

impl fmt::Display for LinkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for LinkMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" | "direct-only" => Ok(LinkMode::Direct),
            "ris" | "ris-only" => Ok(LinkMode::Ris),
            "both" => Ok(LinkMode::Both),
            other => Err(Error::Config(format!("unknown link mode '{other}'"))),
        }
    }
}

/// Geometry parameters as written in a config file (noise in dBW, BS
/// antenna count taken from the sweep).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub wavelength: f64,
    pub s_t: f64,
    pub s_r: f64,
    pub s_ris: f64,
    pub l_t: f64,
    pub h_t: f64,
    pub d_ris: f64,
    pub h_ris: f64,
    pub ris_rows: usize,
    pub ris_cols: usize,
    pub alpha_dir: f64,
    pub g_t: f64,
    pub g_r: f64,
    pub power: f64,
    pub noise_db: f64,
    pub rician_k: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let g = SystemGeometry::default();
        GeometryConfig {
            wavelength: g.wavelength,
            s_t: g.s_t,
            s_r: g.s_r,
            s_ris: g.s_ris,
            l_t: g.l_t,
            h_t: g.h_t,
            d_ris: g.d_ris,
            h_ris: g.h_ris,
            ris_rows: g.ris_rows,
            ris_cols: g.ris_cols,
            alpha_dir: g.alpha_dir,
            g_t: g.g_t,
            g_r: g.g_r,
            power: g.power,
            noise_db: -110.0,
            rician_k: g.rician_k,
        }
    }
}

impl GeometryConfig {
    pub fn to_geometry(&self, n_t: usize) -> SystemGeometry {
        SystemGeometry {
            wavelength: self.wavelength,
            s_t: self.s_t,
            s_r: self.s_r,
            s_ris: self.s_ris,
            l_t: self.l_t,
            h_t: self.h_t,
            d_ris: self.d_ris,
            h_ris: self.h_ris,
            n_t,
            ris_rows: self.ris_rows,
            ris_cols: self.ris_cols,
            alpha_dir: self.alpha_dir,
            g_t: self.g_t,
            g_r: self.g_r,
            power: self.power,
            noise_power: db_to_linear(self.noise_db),
            rician_k: self.rician_k,
        }
    }
}

/// Quantized uniform user-placement grids (meters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlacementConfig {
    pub d_min: f64,
    pub d_max: f64,
    pub d_step: f64,
    pub l_min: f64,
    pub l_max: f64,
    pub l_step: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub h_step: f64,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        PlacementConfig {
            d_min: 200.0,
            d_max: 500.0,
            d_step: 2.0,
            l_min: 0.0,
            l_max: 70.0,
            l_step: 1.0,
            h_min: 1.5,
            h_max: 2.0,
            h_step: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AoConfig {
    pub outer_tol: f64,
    pub max_outer: usize,
    /// Bisection width relative to `K·N_t/P`.
    pub epsilon_rel: f64,
    pub inner_tol: f64,
    pub initial_phases: InitialPhases,
    pub warm_start: bool,
}

impl Default for AoConfig {
    fn default() -> Self {
        let d = AoOptions::<f64>::default();
        AoConfig {
            outer_tol: d.outer_tol,
            max_outer: d.max_outer,
            epsilon_rel: 1e-4,
            inner_tol: d.inner_tol,
            initial_phases: d.initial_phases,
            warm_start: d.warm_start,
        }
    }
}

impl AoConfig {
    pub fn options(&self, users: usize, n_t: usize, power: f64) -> AoOptions<f64> {
        AoOptions {
            outer_tol: self.outer_tol,
            max_outer: self.max_outer,
            epsilon: Some(self.epsilon_rel * (users * n_t) as f64 / power),
            inner_tol: self.inner_tol,
            initial_phases: self.initial_phases,
            warm_start: self.warm_start,
            ..AoOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write measured wall time per realization; off by default so that
    /// record files are byte-reproducible.
    pub record_timing: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("results")),
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub realizations: usize,
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
    /// Sweep over the number of users.
    pub users: Vec<usize>,
    /// Sweep over the number of BS antennas.
    pub tx_antennas: Vec<usize>,
    pub rx_antennas: usize,
    pub modes: Vec<LinkMode>,
    /// Use the same placements and channel draws for every link mode.
    pub matched_placements: bool,
    pub geometry: GeometryConfig,
    pub placement: PlacementConfig,
    pub ao: AoConfig,
    pub output: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 1,
            realizations: 1000,
            workers: 0,
            users: vec![4],
            tx_antennas: vec![8],
            rx_antennas: 2,
            modes: LinkMode::ALL.to_vec(),
            matched_placements: true,
            geometry: GeometryConfig::default(),
            placement: PlacementConfig::default(),
            ao: AoConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// `K ∈ {2, 4, 6}`, `N_t ∈ {2, 4, 8, 16}`, all three link modes.
    pub fn sweep_nt() -> Self {
        ScenarioConfig { users: vec![2, 4, 6], tx_antennas: vec![2, 4, 8, 16], ..Self::default() }
    }

    /// `K ∈ {1, …, 8}` at `N_t = 8`, all three link modes.
    pub fn sweep_k() -> Self {
        ScenarioConfig { users: (1..=8).collect(), tx_antennas: vec![8], ..Self::default() }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies `key.path=value`, where `value` is a TOML literal (bare words
    /// are taken as strings).
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not KEY=VALUE")))?;
        let key = key.trim();
        let raw = raw.trim();
        let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => toml::Value::String(raw.to_string()),
        };
        let mut root = toml::Value::try_from(&*self).map_err(|e| Error::Config(e.to_string()))?;
        let mut slot = &mut root;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = slot
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("'{key}' does not name a config field")))?;
            if !table.contains_key(*part) {
                return Err(Error::Config(format!("unknown config key '{key}'")));
            }
            if i + 1 == parts.len() {
                let old = &table[*part];
                let value = match (old, value.clone()) {
                    (toml::Value::Float(_), toml::Value::Integer(n)) => toml::Value::Float(n as f64),
                    (toml::Value::Array(_), v @ toml::Value::Array(_)) => v,
                    (toml::Value::Array(_), v) => toml::Value::Array(vec![v]),
                    (_, v) => v,
                };
                table.insert(part.to_string(), value);
                break;
            }
            slot = table.get_mut(*part).expect("checked above");
        }
        let next: ScenarioConfig = root
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("override '{assignment}': {e}")))?;
        next.validate()?;
        *self = next;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be at least 1".into()));
        }
        if self.users.is_empty() || self.tx_antennas.is_empty() || self.modes.is_empty() {
            return Err(Error::Config("users, tx_antennas and modes must be non-empty".into()));
        }
        if self.users.contains(&0) || self.tx_antennas.contains(&0) || self.rx_antennas == 0 {
            return Err(Error::Config("antenna and user counts must be positive".into()));
        }
        let p = &self.placement;
        for (name, lo, hi, step) in [
            ("d", p.d_min, p.d_max, p.d_step),
            ("l", p.l_min, p.l_max, p.l_step),
            ("h", p.h_min, p.h_max, p.h_step),
        ] {
            if !(step > 0.0 && hi >= lo) {
                return Err(Error::Config(format!("placement grid for {name} is empty")));
            }
        }
        if !(p.d_min > 0.0) {
            return Err(Error::Config("placement.d_min must be positive".into()));
        }
        if !(p.l_max > 0.0) {
            return Err(Error::Config("placement.l_max must be positive".into()));
        }
        self.geometry.to_geometry(self.tx_antennas[0]).validate()?;
        self.ao.options(1, 1, self.geometry.power).validate()?;
        if !(self.ao.epsilon_rel > 0.0) {
            return Err(Error::Config("ao.epsilon_rel must be positive".into()));
        }
        Ok(())
    }
}
