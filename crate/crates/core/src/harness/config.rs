use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::{bell_fidelity_to_p, Basis};
use crate::codes::BbSpec;
use crate::decode::{BpOsdConfig, DecoderConfig};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Monolithic,
    /// Surface code with GHZ-mediated checks.
    Networked,
    /// BB code split across two nodes with teleported CNOTs on cut edges.
    Partitioned,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Monolithic => "monolithic",
            Mode::Networked => "networked",
            Mode::Partitioned => "partitioned",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Circuit-level error rate `p` (gates, measurement, reset, idle).
    P,
    /// GHZ-state error rate, with `p` held fixed.
    PGhz,
}

/// One curve of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Curve {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_bell: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bell_fidelity: Option<f64>,
}

impl Curve {
    /// Bell-pair error rate; 0 for curves without Bell pairs.
    pub fn bell_error(&self) -> Result<f64> {
        match (self.p_bell, self.bell_fidelity) {
            (Some(_), Some(_)) => Err(Error::config(
                "curves.p_bell",
                "give either p_bell or bell_fidelity, not both",
            )),
            (Some(p), None) => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::config(
                        "curves.p_bell",
                        format!("{p} outside [0, 1]"),
                    ));
                }
                Ok(p)
            }
            (None, Some(f)) => bell_fidelity_to_p(f)
                .map_err(|e| Error::config("curves.bell_fidelity", e.to_string())),
            (None, None) if self.mode == Mode::Partitioned => Err(Error::config(
                "curves.p_bell",
                "partitioned curves need p_bell or bell_fidelity",
            )),
            (None, None) => Ok(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    pub restarts: usize,
    pub tol: usize,
    pub seed: u64,
    /// Precomputed partition file; overrides the partitioner when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig {
            restarts: 64,
            tol: 2,
            seed: 0,
            file: None,
        }
    }
}

fn default_name() -> String {
    "experiment".into()
}
fn default_basis() -> Basis {
    Basis::Z
}
fn default_p_ghz() -> f64 {
    0.002
}
fn default_curves() -> Vec<Curve> {
    vec![Curve {
        mode: Mode::Monolithic,
        p_bell: None,
        bell_fidelity: None,
    }]
}
fn default_max_shots() -> u64 {
    1_000_000
}
fn default_max_failures() -> u64 {
    1000
}
fn default_batch_size() -> usize {
    1 << 14
}
fn default_workers() -> usize {
    4
}

/// A sweep over one noise parameter for one code (or a family of surface
/// code distances) and one or more curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// `surface`, a BB preset (`bb72`, `bb90`, `bb144`) or `bb` with `bb_spec`.
    pub code: String,
    /// Surface-code distances.
    #[serde(default)]
    pub distances: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bb_spec: Option<BbSpec>,
    /// Distance of a custom BB code, used for the default round count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bb_distance: Option<usize>,
    /// Noisy syndrome cycles; defaults to the code distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(default = "default_basis")]
    pub basis: Basis,
    pub sweep: SweepParameter,
    pub values: Vec<f64>,
    /// Circuit-level rate when sweeping `p_ghz`.
    #[serde(default)]
    pub p: f64,
    /// GHZ rate when sweeping `p`.
    #[serde(default = "default_p_ghz")]
    pub p_ghz: f64,
    #[serde(default = "default_curves")]
    pub curves: Vec<Curve>,
    #[serde(default)]
    pub partition: PartitionConfig,
    /// Matching for surface codes, BP-OSD for BB codes when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoder: Option<DecoderConfig>,
    #[serde(default = "default_max_shots")]
    pub max_shots: u64,
    #[serde(default = "default_max_failures")]
    pub max_failures: u64,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ExperimentConfig {
    /// Reads TOML, or JSON when the file ends in `.json`.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn is_surface(&self) -> bool {
        self.code == "surface"
    }

    pub fn decoder_config(&self) -> DecoderConfig {
        self.decoder.clone().unwrap_or(if self.is_surface() {
            DecoderConfig::Matching
        } else {
            DecoderConfig::BpOsd(BpOsdConfig::default())
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self.code.as_str() {
            "surface" => {
                if self.distances.is_empty() {
                    return Err(Error::config(
                        "distances",
                        "surface sweeps need at least one distance",
                    ));
                }
                if let Some(&d) = self.distances.iter().find(|&&d| d < 2) {
                    return Err(Error::config("distances", format!("distance {d} below 2")));
                }
            }
            "bb72" | "bb90" | "bb144" => {}
            "bb" => {
                if self.bb_spec.is_none() {
                    return Err(Error::config("bb_spec", "code `bb` needs a bb_spec table"));
                }
                if self.rounds.is_none() && self.bb_distance.is_none() {
                    return Err(Error::config(
                        "rounds",
                        "custom BB codes need rounds or bb_distance",
                    ));
                }
            }
            other => return Err(Error::config("code", format!("unknown code `{other}`"))),
        }
        if self.rounds == Some(0) {
            return Err(Error::config("rounds", "must be at least 1"));
        }
        if self.values.is_empty() {
            return Err(Error::config("values", "empty sweep"));
        }
        if let Some(v) = self.values.iter().find(|v| !(**v > 0.0 && **v < 0.5)) {
            return Err(Error::config("values", format!("{v} outside (0, 0.5)")));
        }
        if !(0.0..0.5).contains(&self.p) {
            return Err(Error::config("p", format!("{} outside [0, 0.5)", self.p)));
        }
        if !(0.0..=1.0).contains(&self.p_ghz) {
            return Err(Error::config(
                "p_ghz",
                format!("{} outside [0, 1]", self.p_ghz),
            ));
        }
        if self.curves.is_empty() {
            return Err(Error::config("curves", "no curves"));
        }
        for c in &self.curves {
            c.bell_error()?;
            match (c.mode, self.is_surface()) {
                (Mode::Networked, false) => {
                    return Err(Error::config(
                        "curves.mode",
                        "networked mode needs the surface code",
                    ))
                }
                (Mode::Partitioned, true) => {
                    return Err(Error::config(
                        "curves.mode",
                        "partitioned mode needs a BB code",
                    ))
                }
                _ => {}
            }
        }
        if self.max_shots == 0 {
            return Err(Error::config("max_shots", "must be at least 1"));
        }
        if self.max_failures == 0 {
            return Err(Error::config("max_failures", "must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if self.partition.restarts == 0 {
            return Err(Error::config("partition.restarts", "must be at least 1"));
        }
        if let Some(DecoderConfig::BpOsd(c)) = &self.decoder {
            c.validate()?;
        }
        Ok(())
    }
}
