//! Run configuration shared by the library, the CLI and the benchmark harness.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EPSILON_OT: f64 = 0.1;
pub const DEFAULT_C_BIRTH: f64 = 0.35;
pub const DEFAULT_C_DEATH: f64 = 0.35;
pub const DEFAULT_SINKHORN_ITERS: usize = 20;
pub const DEFAULT_LAMBDA_BIRTH: f64 = 1.0;
pub const DEFAULT_ETA_FORENSIC: f64 = 1.0;
pub const DEFAULT_RATIO: f64 = 0.1;
pub const DEFAULT_EPSILON_NORM: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 0;

/// How temporal evidence is extracted between consecutive frames.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TransportMode {
    /// Nearest real source per target; no plan, no birth evidence.
    HardAssignment,
    /// Entropic OT on the plain N×N cost with uniform marginals.
    BalancedOt,
    /// Slack node with the death route priced out.
    OnlyBirth,
    /// Slack node with both birth and death routes.
    #[default]
    BirthDeath,
}

impl TransportMode {
    pub const ALL: [TransportMode; 4] = [
        TransportMode::HardAssignment,
        TransportMode::BalancedOt,
        TransportMode::OnlyBirth,
        TransportMode::BirthDeath,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TransportMode::HardAssignment => "hard_assignment",
            TransportMode::BalancedOt => "balanced_ot",
            TransportMode::OnlyBirth => "only_birth",
            TransportMode::BirthDeath => "birth_death",
        }
    }
}

impl fmt::Display for TransportMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransportMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown transport mode `{s}`")))
    }
}

/// Spatial filter used to build the per-patch prior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpatialOperator {
    None,
    PatchVariance,
    Sobel,
    #[default]
    Laplacian,
}

impl SpatialOperator {
    pub const ALL: [SpatialOperator; 4] = [
        SpatialOperator::None,
        SpatialOperator::PatchVariance,
        SpatialOperator::Sobel,
        SpatialOperator::Laplacian,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SpatialOperator::None => "none",
            SpatialOperator::PatchVariance => "patch_variance",
            SpatialOperator::Sobel => "sobel",
            SpatialOperator::Laplacian => "laplacian",
        }
    }
}

impl fmt::Display for SpatialOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpatialOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown spatial operator `{s}`")))
    }
}

/// Every knob of one compression run. Embedded verbatim in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub epsilon_ot: f64,
    pub c_birth: f64,
    pub c_death: f64,
    pub sinkhorn_iters: usize,
    pub lambda_birth: f64,
    pub eta_forensic: f64,
    pub ratio: f64,
    pub epsilon_norm: f64,
    pub transport_mode: TransportMode,
    pub spatial_operator: SpatialOperator,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon_ot: DEFAULT_EPSILON_OT,
            c_birth: DEFAULT_C_BIRTH,
            c_death: DEFAULT_C_DEATH,
            sinkhorn_iters: DEFAULT_SINKHORN_ITERS,
            lambda_birth: DEFAULT_LAMBDA_BIRTH,
            eta_forensic: DEFAULT_ETA_FORENSIC,
            ratio: DEFAULT_RATIO,
            epsilon_norm: DEFAULT_EPSILON_NORM,
            transport_mode: TransportMode::default(),
            spatial_operator: SpatialOperator::default(),
            seed: DEFAULT_SEED,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        validate_ratio(self.ratio)?;
        if !(self.epsilon_ot.is_finite() && self.epsilon_ot > 0.0) {
            return Err(Error::Validation("epsilon_ot must be positive".into()));
        }
        if !(self.epsilon_norm.is_finite() && self.epsilon_norm > 0.0) {
            return Err(Error::Validation("epsilon_norm must be positive".into()));
        }
        if self.sinkhorn_iters == 0 {
            return Err(Error::Validation("sinkhorn_iters must be at least 1".into()));
        }
        for (name, v) in [
            ("c_birth", self.c_birth),
            ("c_death", self.c_death),
            ("lambda_birth", self.lambda_birth),
            ("eta_forensic", self.eta_forensic),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Validation(format!("{name} must be a nonnegative real")));
            }
        }
        Ok(())
    }
}

pub(crate) fn validate_ratio(ratio: f64) -> Result<()> {
    if ratio > 0.0 && ratio <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain("ratio must be in (0,1]".into()))
    }
}
