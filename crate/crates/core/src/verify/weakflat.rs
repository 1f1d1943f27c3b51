use serde::{Deserialize, Serialize};

use crate::curves::{connecting_family, ConnectOptions};
use crate::error::{Error, Result};
use crate::geometry::{Ball, PointSet};
use crate::grid_modulus::{
    discrete_modulus, weak_flat_lower_bound, weak_flat_radius, ModulusEstimate, SolverOptions,
};
use crate::verify::report::GridSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakFlatConfig {
    /// Sample points per continuum.
    pub continuum_samples: usize,
    pub jitter: f64,
    pub seed: u64,
    pub grid: GridSpec,
    pub solver: SolverOptions,
}

impl WeakFlatConfig {
    pub fn default_for(n: usize) -> Self {
        WeakFlatConfig {
            continuum_samples: 64,
            jitter: 0.1,
            seed: 0,
            grid: GridSpec::default_for(n),
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakFlatReport {
    pub x0: Vec<f64>,
    pub eps0: f64,
    pub p: f64,
    pub c_n: f64,
    pub eps: f64,
    /// `c_n log(eps0 / eps)`.
    pub bound: f64,
    pub discrete: ModulusEstimate,
}

/// Choose `eps` with `c_n log(eps0/eps) > P`, then estimate the modulus of
/// curves joining two continua that both cross `S(x0, eps0)` and `S(x0, eps)`.
pub fn weak_flatness_probe(
    x0: &[f64],
    eps0: f64,
    p: f64,
    c_n: f64,
    fam_size: usize,
    cfg: &WeakFlatConfig,
) -> Result<WeakFlatReport> {
    if !(p > 0.0 && eps0 > 0.0 && c_n > 0.0) {
        return Err(Error::InvalidParameter(
            "weak flatness needs P > 0, eps0 > 0, c_n > 0".into(),
        ));
    }
    let eps = weak_flat_radius(c_n, eps0, p);
    let discrete = weak_flatness_at(x0, eps0, eps, fam_size, cfg)?;
    Ok(WeakFlatReport {
        x0: x0.to_vec(),
        eps0,
        p,
        c_n,
        eps,
        bound: weak_flat_lower_bound(c_n, eps0, eps),
        discrete,
    })
}

/// Discrete modulus of the connecting family for a given inner radius `eps`.
///
/// `E` is a radial segment in direction `+u` and `F` one in direction `-u`,
/// both spanning radii `eps/2 ..= 1.5 eps0` about `x0`; curves stay out of
/// `B(x0, eps/4)`.
pub fn weak_flatness_at(
    x0: &[f64],
    eps0: f64,
    eps: f64,
    fam_size: usize,
    cfg: &WeakFlatConfig,
) -> Result<ModulusEstimate> {
    let n = x0.len();
    if n < 2 {
        return Err(Error::BadDimension(n));
    }
    if !(eps > 0.0 && eps < eps0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < eps < eps0, got eps={eps}, eps0={eps0}"
        )));
    }
    if cfg.continuum_samples < 2 {
        return Err(Error::InvalidParameter("need at least 2 continuum samples".into()));
    }
    let (inner, outer) = (0.5 * eps, 1.5 * eps0);
    let m = cfg.continuum_samples;
    let radial = |sign: f64| -> Result<PointSet> {
        let pts = (0..m)
            .map(|k| {
                let r = inner * (outer / inner).powf(k as f64 / (m - 1) as f64);
                let mut p = x0.to_vec();
                p[0] += sign * r;
                p
            })
            .collect();
        PointSet::new(pts)
    };
    let e = radial(1.0)?;
    let f = radial(-1.0)?;
    let hole = Ball::new(x0.to_vec(), 0.25 * eps)?;
    let opts = ConnectOptions {
        jitter: cfg.jitter,
        seed: cfg.seed,
        ..ConnectOptions::default()
    };
    let fam = connecting_family(&e, &f, &[hole], fam_size, &opts)?;
    let grid = cfg.grid.fit(&fam)?;
    discrete_modulus(&fam, &grid, n, &cfg.solver)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_exceeds_p() {
        let cfg = WeakFlatConfig {
            grid: GridSpec { resolution: 32, padding: 0.05 },
            ..WeakFlatConfig::default_for(2)
        };
        let r = weak_flatness_probe(&[0.0, 0.0], 0.5, 3.0, 2.0, 16, &cfg).unwrap();
        assert!(r.bound > 3.0);
        assert!(r.eps < 0.5);
        assert!(r.discrete.value > 0.0);
    }

    #[test]
    fn small_p_keeps_eps_near_eps0() {
        let eps = weak_flat_radius(2.0, 0.5, 1e-9);
        assert!(eps < 0.5 && 0.5 - eps < 1e-8);
    }

    #[test]
    fn rejects_bad_radii() {
        let cfg = WeakFlatConfig::default_for(2);
        assert!(weak_flatness_at(&[0.0, 0.0], 0.5, 0.6, 4, &cfg).is_err());
        assert!(weak_flatness_probe(&[0.0, 0.0], 0.5, -1.0, 1.0, 4, &cfg).is_err());
    }
}
