use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use slosh_core::domain::{chebyshev_weight, flat_weight, half_disk_weight, load_custom_weight};
use slosh_core::spectrum::{BasisFamily, BasisSpec};
use slosh_core::{DomainWeight, SloshError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EndCondition {
    Pinned,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
    Full,
}

/// A number or the string `"auto"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Horizon {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl std::str::FromStr for Horizon {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Horizon::Auto(AutoTag::Auto));
        }
        s.parse::<f64>().map(Horizon::Value).map_err(|_| format!("expected a number or \"auto\", got {s:?}"))
    }
}

/// Injection points given by count (default placement) or explicitly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InjectionPoints {
    Count(usize),
    Points(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_container")]
    pub container: String,
    #[serde(default = "default_end")]
    pub end_condition: EndCondition,
    #[serde(default = "default_symmetry")]
    pub symmetry: Symmetry,
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
    #[serde(rename = "horizon_T", default = "default_horizon")]
    pub horizon: Horizon,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Use the Chebyshev basis `T_1..T_count` without the mass constraint.
    #[serde(default)]
    pub fixture: bool,
    /// Basis size; defaults to `2·n_modes + 8`.
    #[serde(default)]
    pub basis_count: Option<usize>,
    #[serde(default)]
    pub injection_points: Option<InjectionPoints>,
    /// `|f'|` at the injection points, required for containers without a closed form.
    #[serde(default)]
    pub wall_weights: Option<Vec<f64>>,
}

fn default_container() -> String {
    "half-disk".into()
}
fn default_end() -> EndCondition {
    EndCondition::Pinned
}
fn default_symmetry() -> Symmetry {
    Symmetry::Full
}
fn default_n_modes() -> usize {
    8
}
fn default_horizon() -> Horizon {
    Horizon::Auto(AutoTag::Auto)
}
fn default_output() -> PathBuf {
    PathBuf::from("slosh-out")
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, SloshError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SloshError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<(), SloshError> {
        if self.n_modes == 0 {
            return Err(SloshError::Input("n_modes must be at least 1".into()));
        }
        if let Horizon::Value(t) = self.horizon {
            if !(t > 0.0 && t.is_finite()) {
                return Err(SloshError::Input(format!("horizon_T must be positive, got {t}")));
            }
        }
        if let Some(count) = self.basis_count {
            if count < self.n_modes {
                return Err(SloshError::Input(format!("basis_count {count} is below n_modes {}", self.n_modes)));
            }
        }
        if let Some(path) = self.custom_path() {
            if !path.exists() {
                return Err(SloshError::Input(format!("custom weight file {} does not exist", path.display())));
            }
        } else if !matches!(self.container.as_str(), "half-disk" | "cheb-fixture" | "flat") {
            return Err(SloshError::Input(format!(
                "unknown container {:?}; expected half-disk, cheb-fixture, flat or custom:<path>",
                self.container
            )));
        }
        Ok(())
    }

    fn custom_path(&self) -> Option<PathBuf> {
        self.container.strip_prefix("custom:").map(PathBuf::from)
    }

    pub fn weight(&self) -> Result<DomainWeight, SloshError> {
        match self.custom_path() {
            Some(path) => load_custom_weight(&path),
            None => Ok(match self.container.as_str() {
                "cheb-fixture" => chebyshev_weight(),
                "flat" => flat_weight(),
                _ => half_disk_weight(),
            }),
        }
    }

    pub fn family(&self) -> BasisFamily {
        if self.fixture {
            return BasisFamily::Chebyshev;
        }
        match (self.end_condition, self.symmetry) {
            (EndCondition::Pinned, Symmetry::Antisymmetric) => BasisFamily::PinnedAntisymmetric,
            (EndCondition::Pinned, Symmetry::Symmetric) => BasisFamily::PinnedSymmetric,
            (EndCondition::Pinned, Symmetry::Full) => BasisFamily::PinnedFull,
            (EndCondition::Free, Symmetry::Antisymmetric) => BasisFamily::FreeAntisymmetric,
            (EndCondition::Free, Symmetry::Symmetric) => BasisFamily::FreeSymmetric,
            (EndCondition::Free, Symmetry::Full) => BasisFamily::FreeFull,
        }
    }

    pub fn basis(&self) -> BasisSpec {
        let family = self.family();
        match self.basis_count {
            Some(count) => BasisSpec::new(family, count),
            None => BasisSpec::for_modes(family, self.n_modes),
        }
    }

    /// SHA-256 of the canonical JSON form, ignoring where outputs go.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        let text = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
