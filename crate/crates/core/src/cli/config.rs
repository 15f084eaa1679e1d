use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::empirical::LaplacianVariant;
use crate::error::{Error, Result};
use crate::kernel::KernelDescriptor;
use crate::rates::{RateExperiment, RateInputs, TargetFunction};
use crate::space::SpaceDescriptor;
use crate::spectral::Window;

/// Strict JSON configuration shared by every command. Each command reads its
/// own section and fails with a configuration error when it is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Sole source of randomness.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<MatricesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<RatesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<RateInputs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gc: Option<GcConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatricesConfig {
    pub n: usize,
    /// Also write `<name>.bin` dumps.
    #[serde(default)]
    pub binary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub n: usize,
    #[serde(default = "identity")]
    pub variant: LaplacianVariant,
    /// Lowest eigenpairs only; the full spectrum when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default)]
    pub eigenvectors: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub max_frequency: usize,
}

/// [`RateExperiment`] without its seed, which comes from the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub ladder: Vec<usize>,
    pub trials: usize,
    pub window: Window,
    #[serde(default = "identity")]
    pub variant: LaplacianVariant,
    pub target: TargetFunction,
    #[serde(default = "default_probe_grid")]
    pub probe_grid: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl RatesConfig {
    pub fn experiment(&self, seed: u64) -> RateExperiment {
        RateExperiment {
            ladder: self.ladder.clone(),
            trials: self.trials,
            seed,
            window: self.window,
            variant: self.variant,
            target: self.target,
            probe_grid: self.probe_grid,
            alpha: self.alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GcConfig {
    pub ladder: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_probe_grid")]
    pub probe_grid: usize,
    #[serde(default = "default_targets")]
    pub targets: Vec<TargetFunction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_verify_grid")]
    pub grid: usize,
}

fn identity() -> LaplacianVariant {
    LaplacianVariant::Identity
}

fn default_probe_grid() -> usize {
    512
}

fn default_alpha() -> f64 {
    1.0
}

fn default_verify_grid() -> usize {
    512
}

fn default_targets() -> Vec<TargetFunction> {
    vec![TargetFunction::Constant { value: 1.0 }, TargetFunction::Cos { frequency: 1 }]
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical compact serialization.
    pub fn hash(&self) -> String {
        hex(&Sha256::digest(serde_json::to_vec(self).expect("configuration serializes")))
    }

    pub fn space(&self) -> Result<&SpaceDescriptor> {
        self.space.as_ref().ok_or_else(|| Error::config("missing `space`"))
    }

    pub fn kernel(&self) -> Result<&KernelDescriptor> {
        self.kernel.as_ref().ok_or_else(|| Error::config("missing `kernel`"))
    }

    pub fn section<'a, T>(&self, section: &'a Option<T>, name: &str) -> Result<&'a T> {
        section.as_ref().ok_or_else(|| Error::config(format!("missing `{name}` section")))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
