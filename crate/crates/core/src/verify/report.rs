use serde::{Deserialize, Serialize};

use crate::curves::CurveFamily;
use crate::error::{Error, Result};
use crate::geometry::Annulus;
use crate::grid_modulus::{Grid, ModulusEstimate, SolverOptions};
use crate::mappings::RadialStretch;

/// Resolution and padding of an auto-fitted grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: usize,
    /// Fraction of the bounding-box extent added on each side.
    pub padding: f64,
}

impl GridSpec {
    /// 256 cells per axis in the plane, 64 in space, fewer beyond.
    pub fn default_for(n: usize) -> Self {
        let resolution = match n {
            2 => 256,
            3 => 64,
            _ => 16,
        };
        GridSpec {
            resolution,
            padding: 0.05,
        }
    }

    pub fn fit(&self, fam: &CurveFamily) -> Result<Grid> {
        Grid::fit(fam, self.padding, self.resolution)
    }
}

/// Radial weight `Q(r)` used on the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialWeight {
    Constant { value: f64 },
    /// Dilatation bound of the radial stretch.
    Stretch { alpha: f64, n: usize },
}

impl RadialWeight {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            RadialWeight::Constant { value } => *value,
            RadialWeight::Stretch { alpha, n } => RadialStretch {
                alpha: *alpha,
                n: *n,
            }
            .q_unchecked(r),
        }
    }

    /// Check that the weight is defined on `[r1, r2]`.
    pub fn check_on(&self, a: &Annulus) -> Result<()> {
        match self {
            RadialWeight::Constant { value } if !(value.is_finite() && *value >= 0.0) => Err(
                Error::InvalidParameter(format!("Q must be finite and >= 0, got {value}")),
            ),
            RadialWeight::Stretch { alpha, n } => {
                RadialStretch::new(*alpha, *n)?;
                if a.r2 > 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "stretch dilatation is defined for r < 1, annulus reaches {}",
                        a.r2
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Inputs echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub mapping: String,
    pub alpha: Option<f64>,
    pub annulus: Option<Annulus>,
    pub eta: Option<String>,
    pub q: Option<RadialWeight>,
    pub family: String,
    pub family_size: usize,
    pub grid: Option<Grid>,
    pub solver: SolverOptions,
    pub seed: u64,
}

/// One inequality instance `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lhs: ModulusEstimate,
    /// Dual lower bound on the sampled-family modulus.
    pub lhs_lower_bound: f64,
    /// `None` when the right-hand side diverges.
    pub rhs: Option<f64>,
    /// `None` when the solver did not converge.
    pub satisfied: Option<bool>,
    /// `rhs − lhs.value`, when `rhs` is finite.
    pub margin: Option<f64>,
    pub metadata: ReportMetadata,
}

impl VerificationReport {
    pub(crate) fn assemble(
        lhs: ModulusEstimate,
        lhs_lower_bound: f64,
        rhs: Option<f64>,
        tol: f64,
        metadata: ReportMetadata,
    ) -> Self {
        let satisfied = if !lhs.converged {
            None
        } else {
            Some(match rhs {
                Some(r) => satisfied_with_slack(lhs.value, r, tol),
                None => true,
            })
        };
        VerificationReport {
            lhs,
            lhs_lower_bound,
            rhs,
            satisfied,
            margin: rhs.map(|r| r - lhs.value),
            metadata,
        }
    }
}

/// `lhs ≤ rhs + 2·tol·rhs`.
pub fn satisfied_with_slack(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs <= rhs + 2.0 * tol * rhs.abs()
}
