use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arithmetic used for the coefficient pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionMode {
    /// binary64, guarded by `λ^-n ≤ 2^52 / 64`.
    #[default]
    Standard,
    /// 256-bit software floats.
    Extended,
    /// Exact rational arithmetic on the binary64 inputs.
    #[serde(alias = "exact")]
    ExactRational,
}

impl fmt::Display for PrecisionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrecisionMode::Standard => "standard",
            PrecisionMode::Extended => "extended",
            PrecisionMode::ExactRational => "exact",
        })
    }
}

impl FromStr for PrecisionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(PrecisionMode::Standard),
            "extended" => Ok(PrecisionMode::Extended),
            "exact" | "exact_rational" => Ok(PrecisionMode::ExactRational),
            other => Err(Error::Parse(format!("unknown precision mode `{other}`"))),
        }
    }
}

/// Numerical tolerances shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Symplecticity and spectral-symmetry checks.
    pub tol_spec: f64,
    /// Band around the unit circle treated as non-hyperbolic.
    pub tol_hyp: f64,
    /// Threshold for numerical transversality.
    pub tol_rank: f64,
    /// Backward error allowed for the dense eigenvalue oracle.
    pub tol_eig: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_spec: 1e-8,
            tol_hyp: 1e-7,
            tol_rank: 1e-9,
            tol_eig: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("tol_spec", self.tol_spec),
            ("tol_hyp", self.tol_hyp),
            ("tol_rank", self.tol_rank),
            ("tol_eig", self.tol_eig),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be a positive finite number, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Settings for a single run of any command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub precision_mode: PrecisionMode,
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision_mode: PrecisionMode::Standard,
            tolerances: Tolerances::default(),
            seed: 7,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()
    }

    pub fn with_precision(mut self, mode: PrecisionMode) -> Self {
        self.precision_mode = mode;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_roundtrip_and_partial_files() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"precision_mode":"extended","tolerances":{"tol_hyp":1e-6}}"#)
                .unwrap();
        assert_eq!(cfg.precision_mode, PrecisionMode::Extended);
        assert_eq!(cfg.tolerances.tol_hyp, 1e-6);
        assert_eq!(cfg.tolerances.tol_spec, 1e-8);
        assert_eq!(cfg.seed, 7);
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn zero_tolerance_is_rejected() {
        let mut t = Tolerances::default();
        t.tol_spec = 0.0;
        assert!(t.validate().is_err());
        assert!(Tolerances::default().validate().is_ok());
    }

    #[test]
    fn precision_names() {
        for m in [
            PrecisionMode::Standard,
            PrecisionMode::Extended,
            PrecisionMode::ExactRational,
        ] {
            assert_eq!(m.to_string().parse::<PrecisionMode>().unwrap(), m);
        }
        assert!("quad".parse::<PrecisionMode>().is_err());
    }
}
