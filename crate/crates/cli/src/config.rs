//! JSON run configuration. Every field has a default; sections that are
//! present must be complete only where noted.

use std::path::{Path, PathBuf};

use quasidark_core::dynamics::{Dressing, IntegratorConfig, Model, RampShape};
use quasidark_core::{SpaceSpec, SystemParams};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Frequencies below this are almost certainly GHz typed as MHz.
const GHZ_SUSPICION: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub space: SpaceSpec,
    pub grid: GridConfig,
    pub schedule: ScheduleConfig,
    pub storage: StorageConfig,
    pub integrator: IntegratorSection,
    pub verify: VerifyConfig,
    pub output: Option<PathBuf>,
}

/// Physical constants, all in MHz (angular).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    #[serde(deserialize_with = "mhz")]
    pub omega: f64,
    #[serde(deserialize_with = "mhz")]
    pub omega_a: f64,
    /// Defaults to `omega_a - omega_f`.
    #[serde(deserialize_with = "opt_mhz")]
    pub omega_c: Option<f64>,
    #[serde(deserialize_with = "mhz")]
    pub omega_f: f64,
    /// Fixed qubit frequency; only used when resonance tracking is off.
    #[serde(deserialize_with = "opt_mhz")]
    pub omega_g: Option<f64>,
    #[serde(deserialize_with = "mhz")]
    pub g: f64,
    #[serde(deserialize_with = "mhz")]
    pub zeta: f64,
    pub track_resonance: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let p = SystemParams::experimental();
        SystemConfig {
            omega: p.omega,
            omega_a: p.omega_a,
            omega_c: None,
            omega_f: p.omega_f,
            omega_g: None,
            g: p.g,
            zeta: p.zeta,
            track_resonance: true,
        }
    }
}

impl SystemConfig {
    pub fn params(&self) -> SystemParams {
        let base = SystemParams::experimental();
        SystemParams {
            omega_g: self.omega_g.unwrap_or(base.omega_g),
            omega: self.omega,
            omega_a: self.omega_a,
            omega_c: self.omega_c.unwrap_or(self.omega_a - self.omega_f),
            omega_f: self.omega_f,
            g: self.g,
            zeta: self.zeta,
            xi: None,
            n_molecules: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub omega_max: f64,
    /// Number of intervals; the grid has `steps + 1` points.
    pub steps: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            omega_max: 30.0,
            steps: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub ramp: RampShape,
    pub omega_start: f64,
    pub omega_end: f64,
    pub duration_us: f64,
    pub samples: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            ramp: RampShape::Cosine,
            omega_start: 30.0,
            omega_end: 0.0,
            duration_us: 320.0,
            samples: 321,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StorageConfig {
    pub model: Model,
    /// Real amplitude of |g>; derived from `delta_abs` when absent.
    pub gamma: Option<f64>,
    pub delta_abs: f64,
    pub delta_phase: f64,
    pub retrieve: bool,
    pub sudden: bool,
    pub dressing: Dressing,
}

impl Default for StorageConfig {
    fn default() -> Self {
        StorageConfig {
            model: Model::Full,
            gamma: None,
            delta_abs: 1.0,
            delta_phase: 0.0,
            retrieve: false,
            sudden: false,
            dressing: Dressing::Dressed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        IntegratorSection {
            rtol: d.rtol,
            atol: d.atol,
            max_steps: d.max_steps,
        }
    }
}

impl IntegratorSection {
    pub fn config(&self) -> IntegratorConfig {
        IntegratorConfig {
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
            ..IntegratorConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub max_molecules: usize,
    pub residual_tolerance: f64,
    pub eigen_tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_molecules: 4,
            residual_tolerance: 1e-10,
            eigen_tolerance: 1e-10,
        }
    }
}

struct MhzVisitor;

impl<'de> Visitor<'de> for MhzVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
        f.write_str("a frequency in MHz (number, or string ending in \"MHz\")")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        let t = v.trim();
        let lower = t.to_ascii_lowercase();
        if lower.ends_with("ghz") {
            return Err(E::custom(format!(
                "\"{t}\": GHz is not accepted, give frequencies in MHz (6.044 GHz is 6044)"
            )));
        }
        let number = lower.strip_suffix("mhz").unwrap_or(&lower).trim();
        number
            .parse()
            .map_err(|_| E::custom(format!("\"{t}\" is not a frequency in MHz")))
    }
}

fn mhz<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(MhzVisitor)
}

fn opt_mhz<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    struct Opt;
    impl<'de> Visitor<'de> for Opt {
        type Value = Option<f64>;
        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a frequency in MHz or null")
        }
        fn visit_none<E: de::Error>(self) -> Result<Self::Value, E> {
            Ok(None)
        }
        fn visit_unit<E: de::Error>(self) -> Result<Self::Value, E> {
            Ok(None)
        }
        fn visit_some<D2: Deserializer<'de>>(self, d: D2) -> Result<Self::Value, D2::Error> {
            mhz(d).map(Some)
        }
    }
    d.deserialize_option(Opt)
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." || path.is_empty() {
                CliError::Config(format!("config: {inner}"))
            } else {
                CliError::Config(format!("config key `{path}`: {inner}"))
            }
        })
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Semantic checks that do not need any numerics.
    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.system;
        for (name, v) in [("system.omega", s.omega), ("system.omega_a", s.omega_a)] {
            if v.is_finite() && v.abs() < GHZ_SUSPICION {
                return Err(CliError::Config(format!(
                    "config key `{name}` = {v} looks like GHz; frequencies are in MHz (e.g. 6044, not 6.044)"
                )));
            }
        }
        if !s.track_resonance && s.omega_g.is_none() {
            return Err(CliError::Config(
                "config key `system.omega_g` is required when `system.track_resonance` is false".into(),
            ));
        }
        let p = s.params();
        p.validate().map_err(|e| CliError::Config(format!("system: {e}")))?;
        p.check_frequency_matching().map_err(|e| CliError::Config(format!("system: {e}")))?;
        self.space.validate().map_err(|e| CliError::Config(format!("space: {e}")))?;
        if self.grid.steps == 0 {
            return Err(CliError::Config(format!("config key `grid.steps`: {}", quasidark_core::Error::EmptyGrid)));
        }
        if !(self.grid.omega_max.is_finite() && self.grid.omega_max >= 0.0) {
            return Err(CliError::Config(format!("config key `grid.omega_max` must be >= 0, got {}", self.grid.omega_max)));
        }
        let sch = &self.schedule;
        if !(sch.duration_us.is_finite() && sch.duration_us > 0.0) {
            return Err(CliError::Config(format!("config key `schedule.duration_us` must be > 0, got {}", sch.duration_us)));
        }
        if sch.samples < 2 {
            return Err(CliError::Config("config key `schedule.samples` must be at least 2".into()));
        }
        let st = &self.storage;
        if !(0.0..=1.0).contains(&st.delta_abs) {
            return Err(CliError::Config(format!("config key `storage.delta_abs` must lie in [0, 1], got {}", st.delta_abs)));
        }
        if let Some(gamma) = st.gamma {
            let norm = gamma * gamma + st.delta_abs * st.delta_abs;
            if (norm - 1.0).abs() > 1e-9 {
                return Err(CliError::Config(format!(
                    "|gamma|^2 + |delta|^2 must be 1 (gamma = {gamma}, |delta| = {})",
                    st.delta_abs
                )));
            }
        }
        if self.verify.max_molecules == 0 || self.verify.max_molecules > quasidark_core::hamiltonian::MAX_MOLECULES {
            return Err(CliError::Config(format!(
                "config key `verify.max_molecules` must lie in 1..={}",
                quasidark_core::hamiltonian::MAX_MOLECULES
            )));
        }
        Ok(())
    }
}
