//! Run configuration: a single TOML file drives the whole pipeline so that
//! runs are reproducible artifacts.
//!
//! ```toml
//! [inputs]
//! indicators = "demo/indicators.csv"
//! regions = "demo/regions.csv"
//! values = "demo/values.csv"
//!
//! [coupling]
//! alpha = 0.5            # default 0.5; alpha + beta must be 1
//! beta = 0.5
//! d_variant = "literal"  # or "sqrt"
//!
//! [spatial]
//! scheme = "row_standardized"  # or "binary"
//! method = "permutation"       # or "normal_approx"
//! permutations = 999
//! seed = 42                    # required
//! lisa_alpha = 0.05
//!
//! [sde]
//! scopes = ["all", "east", "central", "west", "northeast"]
//! years = [2014, 2017, 2021]   # omit to report every panel year
//!
//! [output]
//! dir = "out"
//! geojson = true
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupling::{CouplingConfig, DVariant};
use crate::error::{Error, Result};
use crate::panel::MacroRegion;
use crate::spatial::{InferenceMethod, WeightScheme};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub inputs: InputsSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    pub spatial: SpatialSection,
    #[serde(default)]
    pub sde: SdeSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputsSection {
    pub indicators: PathBuf,
    pub regions: PathBuf,
    pub values: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingSection {
    #[serde(default = "default_half")]
    pub alpha: f64,
    #[serde(default = "default_half")]
    pub beta: f64,
    #[serde(default = "default_d_variant")]
    pub d_variant: String,
}

impl Default for CouplingSection {
    fn default() -> Self {
        CouplingSection {
            alpha: 0.5,
            beta: 0.5,
            d_variant: default_d_variant(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpatialSection {
    #[serde(default = "default_scheme")]
    pub scheme: String,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    /// Base seed for every permutation draw; mandatory so that reruns are
    /// reproducible by construction.
    pub seed: u64,
    #[serde(default = "default_lisa_alpha")]
    pub lisa_alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdeSection {
    #[serde(default = "default_scopes")]
    pub scopes: Vec<String>,
    /// Reporting years; `None` means every panel year.
    #[serde(default)]
    pub years: Option<Vec<i32>>,
}

impl Default for SdeSection {
    fn default() -> Self {
        SdeSection {
            scopes: default_scopes(),
            years: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSection {
    #[serde(default = "default_output_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_true")]
    pub geojson: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_output_dir(),
            geojson: true,
        }
    }
}

fn default_half() -> f64 {
    0.5
}
fn default_d_variant() -> String {
    "literal".into()
}
fn default_scheme() -> String {
    "row_standardized".into()
}
fn default_method() -> String {
    "permutation".into()
}
fn default_permutations() -> usize {
    999
}
fn default_lisa_alpha() -> f64 {
    0.05
}
fn default_scopes() -> Vec<String> {
    vec!["all".into()]
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_true() -> bool {
    true
}

/// Region filter behind one SDE scope label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeFilter {
    All,
    Macro(MacroRegion),
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        // relative paths resolve against the config file's directory
        if let Some(base) = path.parent() {
            for p in [
                &mut cfg.inputs.indicators,
                &mut cfg.inputs.regions,
                &mut cfg.inputs.values,
                &mut cfg.output.dir,
            ] {
                if p.is_relative() {
                    *p = base.join(&p);
                }
            }
        }
        cfg.check()?;
        Ok(cfg)
    }

    /// Semantic checks beyond TOML syntax.
    pub fn check(&self) -> Result<()> {
        self.coupling_config()?;
        self.weight_scheme()?;
        self.inference_method()?;
        self.scope_filters()?;
        if self.spatial.permutations == 0 {
            return Err(Error::Config("spatial.permutations must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.spatial.lisa_alpha) {
            return Err(Error::Config(format!(
                "spatial.lisa_alpha {} outside [0, 1]",
                self.spatial.lisa_alpha
            )));
        }
        if let Some(years) = &self.sde.years {
            if years.is_empty() {
                return Err(Error::Config("sde.years must not be empty when given".into()));
            }
        }
        if self.sde.scopes.is_empty() {
            return Err(Error::Config("sde.scopes must not be empty".into()));
        }
        Ok(())
    }

    pub fn coupling_config(&self) -> Result<CouplingConfig> {
        let variant = match self.coupling.d_variant.as_str() {
            "literal" => DVariant::Literal,
            "sqrt" => DVariant::Sqrt,
            other => {
                return Err(Error::Config(format!(
                    "coupling.d_variant `{other}` (expected literal or sqrt)"
                )))
            }
        };
        CouplingConfig::new(self.coupling.alpha, self.coupling.beta, variant).map_err(|e| {
            Error::Config(e.to_string())
        })
    }

    pub fn weight_scheme(&self) -> Result<WeightScheme> {
        match self.spatial.scheme.as_str() {
            "row_standardized" => Ok(WeightScheme::RowStandardized),
            "binary" => Ok(WeightScheme::BinaryContiguity),
            other => Err(Error::Config(format!(
                "spatial.scheme `{other}` (expected row_standardized or binary)"
            ))),
        }
    }

    pub fn inference_method(&self) -> Result<InferenceMethod> {
        match self.spatial.method.as_str() {
            "permutation" => Ok(InferenceMethod::Permutation),
            "normal_approx" => Ok(InferenceMethod::NormalApprox),
            other => Err(Error::Config(format!(
                "spatial.method `{other}` (expected permutation or normal_approx)"
            ))),
        }
    }

    /// Parsed (label, filter) pairs in config order.
    pub fn scope_filters(&self) -> Result<Vec<(String, ScopeFilter)>> {
        self.sde
            .scopes
            .iter()
            .map(|label| {
                let filter = if label == "all" {
                    ScopeFilter::All
                } else {
                    MacroRegion::parse(label).map(ScopeFilter::Macro).ok_or_else(|| {
                        Error::Config(format!(
                            "sde scope `{label}` (expected all/east/central/west/northeast)"
                        ))
                    })?
                };
                Ok((label.clone(), filter))
            })
            .collect()
    }
}
