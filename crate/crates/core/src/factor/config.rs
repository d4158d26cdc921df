use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interchange::DatasetBundle;

/// How the pixel and neuron factors are kept from growing without bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMode {
    /// Squared Frobenius penalties `lambda_p`, `lambda_o` on every P_i, O_j.
    L2reg,
    /// Every column of every P_i and O_j is projected to unit L2 norm after
    /// each sweep; `lambda_p` and `lambda_o` are ignored.
    UnitColumns,
}

impl std::fmt::Display for NormMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormMode::L2reg => "l2reg",
            NormMode::UnitColumns => "unit-columns",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub rank: usize,
    pub lambda_p: f64,
    pub lambda_o: f64,
    pub lambda_f: f64,
    pub norm_mode: NormMode,
    /// Replace the squared penalty on F by the row-group L2,1 penalty.
    /// Only valid for activations-only bundles.
    pub group_sparse_f: bool,
    pub max_iters: usize,
    pub tol: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            rank: 10,
            lambda_p: 0.0,
            lambda_o: 0.0,
            lambda_f: 0.0,
            norm_mode: NormMode::L2reg,
            group_sparse_f: false,
            max_iters: 500,
            tol: 1e-6,
            epsilon: 1e-12,
            seed: 0,
        }
    }
}

impl FitConfig {
    pub fn with_rank(rank: usize) -> Self {
        Self {
            rank,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidConfig("rank must be at least 1".into()));
        }
        for (name, v) in [
            ("lambda_p", self.lambda_p),
            ("lambda_o", self.lambda_o),
            ("lambda_f", self.lambda_f),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tol must be > 0, got {}",
                self.tol
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be finite and > 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    pub fn validate_for(&self, bundle: &DatasetBundle) -> Result<()> {
        self.validate()?;
        if self.group_sparse_f && !bundle.is_activations_only() {
            return Err(Error::ModeViolation(format!(
                "group-sparse F requires an activations-only bundle, found {} pixel channels",
                bundle.channels().len()
            )));
        }
        Ok(())
    }

    /// Penalty weight actually applied to the P_i (zero in unit-column mode).
    pub fn effective_lambda_p(&self) -> f64 {
        match self.norm_mode {
            NormMode::L2reg => self.lambda_p,
            NormMode::UnitColumns => 0.0,
        }
    }

    pub fn effective_lambda_o(&self) -> f64 {
        match self.norm_mode {
            NormMode::L2reg => self.lambda_o,
            NormMode::UnitColumns => 0.0,
        }
    }
}
