//! Run configuration: TOML schema, validation and unit conversion.
//!
//! Frequencies are given in laboratory units with the 2 pi implied
//! (`omega_z_mhz = 0.5` means an angular frequency of 2 pi x 0.5 MHz);
//! conversion to angular frequencies happens once, here.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};

use bipolaron::coupling::DriveParams;
use bipolaron::crystal::TrapConfig;

/// Raised for any parse, schema or range problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub trap: TrapSection,
    pub tweezer: TweezerSection,
    pub drive: DriveSection,
    pub thermal: ThermalSection,
    pub dynamics: DynamicsSection,
    pub output: OutputSection,
    #[serde(default)]
    pub mobility: MobilitySection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    pub ion_count: usize,
    pub mass_amu: f64,
    pub omega_x_mhz: f64,
    pub omega_y_mhz: f64,
    pub omega_z_mhz: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TweezerSection {
    /// "calibrated" (homogeneity targets) or "explicit" (per-state
    /// tweezer frequencies).
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_hz: Option<f64>,
    /// Signed tweezer trap frequencies in kHz for states |0>, |1>, |2>, |3>.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub varpi_khz: Option<[f64; 4]>,
    /// Per-site intensity weights, max 1; defaults to uniform.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    pub omega_khz: f64,
    pub mu_mhz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavelength_nm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_per_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detunings_khz: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSection {
    /// Sweep temperature grid in microkelvin.
    pub t_uk: Vec<f64>,
    pub epsilon: f64,
    pub sampler_seed: u64,
    pub sampler_count: usize,
    /// Enumeration cap; sampling takes over beyond it.
    pub max_configs: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    /// 1-based site index of the initial pair.
    pub initial_pair_site: usize,
    pub t_max_ms: f64,
    pub n_points: usize,
    /// Temperatures (microkelvin) for which full trajectories are emitted.
    #[serde(default = "default_evolve_temperatures")]
    pub temperatures_uk: Vec<f64>,
}

fn default_evolve_temperatures() -> Vec<f64> {
    vec![0.0, 25.0]
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MobilitySection {
    pub ion_counts: Vec<usize>,
}

impl Default for MobilitySection {
    fn default() -> Self {
        Self {
            ion_counts: vec![10, 15, 20, 25, 30],
        }
    }
}

/// Tweezer construction choice after validation.
#[derive(Debug, Clone)]
pub enum TweezerPlan {
    Calibrated { g: f64, gamma: f64 },
    Explicit { varpi_khz: [f64; 4], weights: Option<Vec<f64>> },
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig =
            toml::from_str(&text).map_err(|e| ConfigError(format!("{e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: &str| Err(ConfigError(msg.into()));
        let t = &self.trap;
        for (name, v) in [
            ("trap.mass_amu", t.mass_amu),
            ("trap.omega_x_mhz", t.omega_x_mhz),
            ("trap.omega_y_mhz", t.omega_y_mhz),
            ("trap.omega_z_mhz", t.omega_z_mhz),
            ("drive.omega_khz", self.drive.omega_khz),
            ("drive.mu_mhz", self.drive.mu_mhz),
            ("dynamics.t_max_ms", self.dynamics.t_max_ms),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(ConfigError(format!("{name} must be positive and finite")));
            }
        }
        match self.tweezer.mode.as_str() {
            "calibrated" => {
                if self.tweezer.g_hz.is_none() || self.tweezer.gamma_hz.is_none() {
                    return bad("calibrated tweezer mode requires g_hz and gamma_hz");
                }
                if self.tweezer.varpi_khz.is_some() || self.tweezer.weights.is_some() {
                    return bad("varpi_khz/weights only apply to explicit tweezer mode");
                }
            }
            "explicit" => {
                if self.tweezer.varpi_khz.is_none() {
                    return bad("explicit tweezer mode requires varpi_khz");
                }
                if self.tweezer.g_hz.is_some() || self.tweezer.gamma_hz.is_some() {
                    return bad("g_hz/gamma_hz only apply to calibrated tweezer mode");
                }
                if let Some(w) = &self.tweezer.weights {
                    if w.len() != t.ion_count {
                        return bad("tweezer.weights length must equal trap.ion_count");
                    }
                }
            }
            other => {
                return Err(ConfigError(format!(
                    "tweezer.mode must be \"calibrated\" or \"explicit\", got \"{other}\""
                )));
            }
        }
        match (self.drive.wavelength_nm, self.drive.k_per_m) {
            (Some(w), None) if w > 0.0 => {}
            (None, Some(k)) if k > 0.0 => {}
            (Some(_), Some(_)) => return bad("give either drive.wavelength_nm or drive.k_per_m"),
            _ => return bad("drive needs a positive wavelength_nm or k_per_m"),
        }
        if self.thermal.t_uk.is_empty() {
            return bad("thermal.t_uk must list at least one temperature");
        }
        if self.thermal.t_uk.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return bad("thermal.t_uk entries must be finite and >= 0");
        }
        if !(self.thermal.epsilon > 0.0 && self.thermal.epsilon < 1.0) {
            return bad("thermal.epsilon must lie in (0, 1)");
        }
        if self.thermal.sampler_count == 0 || self.thermal.max_configs == 0 {
            return bad("thermal.sampler_count and max_configs must be positive");
        }
        if self.dynamics.initial_pair_site < 1 || self.dynamics.initial_pair_site > t.ion_count {
            return bad("dynamics.initial_pair_site must lie in 1..=ion_count");
        }
        if self.dynamics.n_points < 2 {
            return bad("dynamics.n_points must be at least 2");
        }
        if self
            .dynamics
            .temperatures_uk
            .iter()
            .any(|&x| !x.is_finite() || x < 0.0)
        {
            return bad("dynamics.temperatures_uk entries must be finite and >= 0");
        }
        for f in &self.output.formats {
            if f != "csv" && f != "json" {
                return Err(ConfigError(format!("unknown output format \"{f}\"")));
            }
        }
        if self.mobility.ion_counts.is_empty()
            || self.mobility.ion_counts.iter().any(|&n| n < 3)
        {
            return bad("mobility.ion_counts must list chain sizes of at least 3");
        }
        Ok(())
    }

    pub fn trap(&self) -> Result<TrapConfig, ConfigError> {
        TrapConfig::new(
            self.trap.ion_count,
            self.trap.mass_amu,
            TAU * self.trap.omega_z_mhz * 1e6,
            TAU * self.trap.omega_x_mhz * 1e6,
            TAU * self.trap.omega_y_mhz * 1e6,
        )
        .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn tweezer_plan(&self) -> TweezerPlan {
        match self.tweezer.mode.as_str() {
            "calibrated" => TweezerPlan::Calibrated {
                g: TAU * self.tweezer.g_hz.unwrap(),
                gamma: TAU * self.tweezer.gamma_hz.unwrap(),
            },
            _ => TweezerPlan::Explicit {
                varpi_khz: self.tweezer.varpi_khz.unwrap(),
                weights: self.tweezer.weights.clone(),
            },
        }
    }

    pub fn drive(&self) -> Result<DriveParams, ConfigError> {
        let rabi = TAU * self.drive.omega_khz * 1e3;
        let mu = TAU * self.drive.mu_mhz * 1e6;
        let detunings = self
            .drive
            .detunings_khz
            .map(|d| [TAU * d[0] * 1e3, TAU * d[1] * 1e3, TAU * d[2] * 1e3]);
        let result = match (self.drive.wavelength_nm, self.drive.k_per_m) {
            (Some(w), None) => DriveParams::with_wavelength(rabi, mu, w * 1e-9, detunings),
            (None, Some(k)) => DriveParams::new(rabi, mu, k, detunings),
            _ => unreachable!("validated"),
        };
        result.map_err(|e| ConfigError(e.to_string()))
    }

    /// Initial pair site, 0-based.
    pub fn initial_site(&self) -> usize {
        self.dynamics.initial_pair_site - 1
    }

    pub fn wants_csv(&self) -> bool {
        self.output.formats.iter().any(|f| f == "csv")
    }

    pub fn wants_json(&self) -> bool {
        self.output.formats.iter().any(|f| f == "json")
    }
}
