//! JSON run configuration.
//!
//! ```json
//! {
//!   "dimensionless": { "r": 0.1, "A": 0.1, "omega0": 1.0, "M": 1.0, "k0": 1.0 },
//!   "sweep": { "r_values": [0.1, 0.5], "A_range": { "min": 0.1, "max": 1.0, "count": 10 } },
//!   "death": { "r": [0.1, 0.3], "A_lo": 0.1, "A_hi": 1000.0 },
//!   "langevin": { "dt": 0.01, "n_steps": 1000, "ensemble": 100, "initial": { "xi": 0.1 } },
//!   "density": { "points": [[0.0, 0.1, 0.0, 0.1]] }
//! }
//! ```
//!
//! Exactly one of `physical` and `dimensionless` must be present. `hbar` and
//! `kB` default to 1.

use std::path::Path;

use serde::Deserialize;

use qbm_core::langevin::{NoiseMode, SimConfig, TrajectoryState};
use qbm_core::model::{from_dimensionless, DimensionlessPoint, PhysicalParams, ReferenceScale};
use qbm_core::Convention;

use crate::error::CliError;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    #[serde(rename = "M", alias = "mass")]
    pub mass: f64,
    pub eta: f64,
    #[serde(rename = "Omega", alias = "cutoff")]
    pub cutoff: f64,
    pub k0: f64,
    #[serde(rename = "T", alias = "temperature")]
    pub temperature: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(rename = "kB", alias = "k_b", default = "one")]
    pub k_b: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionlessSection {
    pub r: Option<f64>,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(default = "one")]
    pub omega0: f64,
    #[serde(rename = "M", alias = "mass", default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub k0: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(rename = "kB", alias = "k_b", default = "one")]
    pub k_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ARange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Default for ARange {
    fn default() -> Self {
        ARange {
            min: 0.1,
            max: 1.0,
            count: 10,
            spacing: Spacing::Linear,
        }
    }
}

impl ARange {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.min + f * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ConventionName {
    #[default]
    Standard,
    Paper,
}

impl From<ConventionName> for Convention {
    fn from(c: ConventionName) -> Self {
        match c {
            ConventionName::Standard => Convention::Standard,
            ConventionName::Paper => Convention::HbarUnit,
        }
    }
}

pub fn default_r_values() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// Grid of `(r, A)` points for the negativity sweep.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_r_values")]
    pub r_values: Vec<f64>,
    #[serde(rename = "A_range", default)]
    pub a_range: ARange,
    #[serde(default)]
    pub convention: ConventionName,
    #[serde(default)]
    pub regulator_check: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            r_values: default_r_values(),
            a_range: ARange::default(),
            convention: ConventionName::Standard,
            regulator_check: false,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.r_values.is_empty() {
            return Err(CliError::Config("sweep.r_values: must be nonempty".into()));
        }
        if let Some(r) = self.r_values.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(CliError::Config(format!(
                "sweep.r_values: {r} is not in (0, ∞)"
            )));
        }
        let a = &self.a_range;
        if a.count < 2 {
            return Err(CliError::Config("sweep.A_range.count: must be >= 2".into()));
        }
        if !(a.min.is_finite() && a.max.is_finite() && a.min >= 0.0 && a.max >= a.min) {
            return Err(CliError::Config(format!(
                "sweep.A_range: need 0 <= min <= max, got [{}, {}]",
                a.min, a.max
            )));
        }
        if a.spacing == Spacing::Log && a.min <= 0.0 {
            return Err(CliError::Config(
                "sweep.A_range.min: log spacing needs min > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeathSection {
    pub r: OneOrMany,
    #[serde(rename = "A_lo", default = "default_a_lo")]
    pub a_lo: f64,
    #[serde(rename = "A_hi", default = "default_a_hi")]
    pub a_hi: f64,
}

fn default_a_lo() -> f64 {
    0.1
}

fn default_a_hi() -> f64 {
    1000.0
}

impl DeathSection {
    pub fn r_values(&self) -> Vec<f64> {
        match &self.r {
            OneOrMany::One(r) => vec![*r],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseName {
    Off,
    #[default]
    ConstantEta,
    LocalFdr,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    #[serde(default)]
    pub zeta: f64,
    #[serde(default)]
    pub zeta_dot: f64,
    #[serde(default)]
    pub xi: f64,
    #[serde(default)]
    pub xi_dot: f64,
}

fn default_true() -> bool {
    true
}

fn default_one_u64() -> u64 {
    1
}

fn default_one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LangevinSection {
    pub dt: f64,
    pub n_steps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noise_mode: NoiseName,
    #[serde(default = "default_one_usize")]
    pub ensemble: usize,
    #[serde(default = "default_one_u64")]
    pub record_every: u64,
    #[serde(default = "default_true")]
    pub potential: bool,
    #[serde(default)]
    pub initial: InitialState,
    /// Optional path for the little-endian binary dump.
    pub binary_out: Option<String>,
}

impl LangevinSection {
    pub fn sim_config(&self, seed_override: Option<u64>) -> SimConfig {
        SimConfig {
            dt: self.dt,
            n_steps: self.n_steps,
            seed: seed_override.unwrap_or(self.seed),
            noise_mode: match self.noise_mode {
                NoiseName::Off => NoiseMode::Off,
                NoiseName::ConstantEta => NoiseMode::ConstantEta,
                NoiseName::LocalFdr => NoiseMode::LocalFdr,
            },
            ensemble: self.ensemble,
            record_every: self.record_every,
            potential: self.potential,
        }
    }

    pub fn initial_state(&self) -> TrajectoryState {
        TrajectoryState {
            t: 0.0,
            zeta: self.initial.zeta,
            zeta_dot: self.initial.zeta_dot,
            xi: self.initial.xi,
            xi_dot: self.initial.xi_dot,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySection {
    /// Explicit `(x₁, x₂, y₁, y₂)` points.
    #[serde(default)]
    pub points: Vec<[f64; 4]>,
    /// Diagonal elements `ρ(x₁, x₂; x₁, x₂)` on a square grid.
    pub diagonal_grid: Option<DiagonalGrid>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub physical: Option<PhysicalSection>,
    pub dimensionless: Option<DimensionlessSection>,
    pub sweep: Option<SweepSpec>,
    pub death: Option<DeathSection>,
    pub langevin: Option<LangevinSection>,
    pub density: Option<DensitySection>,
}

enum Source<'a> {
    Physical(&'a PhysicalSection),
    Dimensionless(&'a DimensionlessSection),
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn source(&self) -> Result<Source<'_>, CliError> {
        match (&self.physical, &self.dimensionless) {
            (Some(p), None) => Ok(Source::Physical(p)),
            (None, Some(d)) => Ok(Source::Dimensionless(d)),
            (Some(_), Some(_)) => Err(CliError::Config(
                "exactly one of `physical` and `dimensionless` may be given, found both".into(),
            )),
            (None, None) => Err(CliError::Config(
                "exactly one of `physical` and `dimensionless` is required".into(),
            )),
        }
    }

    /// Physical parameters of the single experiment described by the config.
    pub fn physical_params(&self) -> Result<PhysicalParams, CliError> {
        match self.source()? {
            Source::Physical(p) => {
                PhysicalParams::new(p.mass, p.eta, p.cutoff, p.k0, p.temperature, p.hbar, p.k_b)
                    .map_err(|e| CliError::config("physical", e))
            }
            Source::Dimensionless(d) => {
                let r =
                    d.r.ok_or_else(|| CliError::Config("dimensionless.r: missing".into()))?;
                let a =
                    d.a.ok_or_else(|| CliError::Config("dimensionless.A: missing".into()))?;
                let scale = self.reference_scale()?;
                from_dimensionless(DimensionlessPoint { r, a }, &scale)
                    .map_err(|e| CliError::config("dimensionless", e))
            }
        }
    }

    /// Reference scale used to map `(r, A)` grids to physical parameters.
    pub fn reference_scale(&self) -> Result<ReferenceScale, CliError> {
        let scale = match self.source()? {
            Source::Physical(_) => ReferenceScale::of(&self.physical_params()?),
            Source::Dimensionless(d) => ReferenceScale {
                omega0: d.omega0,
                mass: d.mass,
                k0: d.k0,
                hbar: d.hbar,
                k_b: d.k_b,
            },
        };
        for (field, v) in [
            ("omega0", scale.omega0),
            ("M", scale.mass),
            ("k0", scale.k0),
            ("hbar", scale.hbar),
            ("kB", scale.k_b),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Config(format!(
                    "dimensionless.{field}: must be > 0, got {v}"
                )));
            }
        }
        Ok(scale)
    }
}
