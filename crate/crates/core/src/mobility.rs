//! Density-dependent edge mobilities `theta(rho_i, rho_j; v_ij)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Edge mobility model.
///
/// Both models are affine in the densities for a fixed velocity, so their
/// density partials are constant on each branch. The Jacobian assembly in
/// [`crate::jacobian`] relies on this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MobilityModel {
    /// `(rho_i + rho_j) / 2`.
    #[default]
    #[serde(rename = "mean")]
    ArithmeticMean,
    /// Upstream density: `rho_i` when `v_ij >= 0`, else `rho_j`.
    Upwind,
}

impl MobilityModel {
    /// Mobility on edge `(i, j)` carrying velocity `v_ij`. Fails on
    /// negative densities.
    pub fn theta(self, rho_i: f64, rho_j: f64, v_ij: f64) -> Result<f64> {
        check_density(rho_i, 1)?;
        check_density(rho_j, 2)?;
        Ok(self.eval(rho_i, rho_j, v_ij))
    }

    /// `(d theta / d rho_i, d theta / d rho_j)`. For the upwind model this is
    /// the branch selected by `v_ij >= 0`, which at `v_ij = 0` is an element
    /// of the Clarke generalized gradient.
    pub fn theta_partials(self, rho_i: f64, rho_j: f64, v_ij: f64) -> Result<(f64, f64)> {
        check_density(rho_i, 1)?;
        check_density(rho_j, 2)?;
        Ok(self.partials(v_ij))
    }

    /// Unchecked evaluation, used inside residual assembly where iterates
    /// may leave the simplex.
    #[inline]
    pub fn eval(self, rho_i: f64, rho_j: f64, v_ij: f64) -> f64 {
        match self {
            MobilityModel::ArithmeticMean => 0.5 * (rho_i + rho_j),
            MobilityModel::Upwind => {
                if v_ij >= 0.0 {
                    rho_i
                } else {
                    rho_j
                }
            }
        }
    }

    #[inline]
    pub fn partials(self, v_ij: f64) -> (f64, f64) {
        match self {
            MobilityModel::ArithmeticMean => (0.5, 0.5),
            MobilityModel::Upwind => {
                if v_ij >= 0.0 {
                    (1.0, 0.0)
                } else {
                    (0.0, 1.0)
                }
            }
        }
    }

    /// Whether the model needs strictly positive endpoint densities.
    pub fn requires_interior(self) -> bool {
        matches!(self, MobilityModel::ArithmeticMean)
    }
}

fn check_density(value: f64, node: usize) -> Result<()> {
    if value < 0.0 || value.is_nan() {
        Err(Error::NegativeDensity { node, value })
    } else {
        Ok(())
    }
}

impl fmt::Display for MobilityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MobilityModel::ArithmeticMean => "mean",
            MobilityModel::Upwind => "upwind",
        })
    }
}

impl FromStr for MobilityModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(MobilityModel::ArithmeticMean),
            "upwind" => Ok(MobilityModel::Upwind),
            other => Err(Error::InvalidConfig(format!("unknown mobility '{other}'"))),
        }
    }
}
