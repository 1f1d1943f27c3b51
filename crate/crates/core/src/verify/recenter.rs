use serde::{Deserialize, Serialize};

use crate::curves::ring_family;
use crate::error::{Error, Result};
use crate::geometry::{euclid, sample_sphere, Annulus, Ball};
use crate::grid_modulus::{discrete_modulus, Grid, ModulusEstimate, SolverOptions};
use crate::verify::report::satisfied_with_slack;

/// Nested-ball recentering of the ring `A(x1, eps1, eps1*)` about a nearby
/// center `a_{k0+1}` with `|a_k − x1| < 1/k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecenterReport {
    pub x1: Vec<f64>,
    pub eps1: f64,
    pub eps1_star: f64,
    pub k0: u64,
    /// `eps1 + 1/(k0+1)`
    pub eps_t1: f64,
    /// `eps1 + 2/(k0+1)`
    pub eps_t2: f64,
    /// `a_{k0+1}`, placed at distance `1/(k0+1)` from `x1` along the first axis.
    pub center: Vec<f64>,
    pub samples: usize,
    /// `B(x1,eps1) ⊂ B(a,eps_t1) ⊂ B(a,eps_t2) ⊂ B(x1,eps1*)`, checked by
    /// center distance and on sampled boundary spheres. The first pair is
    /// internally tangent, hence the relative slack of 1e-12.
    pub centers_checked: bool,
}

pub fn recenter_annulus(x1: &[f64], eps1: f64, eps1_star: f64, samples: usize) -> Result<RecenterReport> {
    if x1.len() < 2 {
        return Err(Error::BadDimension(x1.len()));
    }
    if !(eps1 > 0.0 && eps1 < eps1_star && eps1_star.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < eps1 < eps1_star, got {eps1}, {eps1_star}"
        )));
    }
    let gap = eps1_star - eps1;
    let k0 = ((3.0 / gap).ceil() as u64).max(1);
    let step = 1.0 / (k0 + 1) as f64;
    let eps_t1 = eps1 + step;
    let eps_t2 = eps1 + 2.0 * step;
    let mut center = x1.to_vec();
    center[0] += step;

    let chain = [
        Ball::new(x1.to_vec(), eps1)?,
        Ball::new(center.clone(), eps_t1)?,
        Ball::new(center.clone(), eps_t2)?,
        Ball::new(x1.to_vec(), eps1_star)?,
    ];
    let centers_checked = samples > 0
        && chain.windows(2).all(|w| {
            let (inner, outer) = (&w[0], &w[1]);
            let slack = 1e-12 * outer.radius;
            euclid(&inner.center, &outer.center) + inner.radius <= outer.radius + slack
                && sample_sphere(&inner.center, inner.radius, samples)
                    .iter()
                    .all(|p| euclid(p, &outer.center) <= outer.radius * (1.0 + 1e-12))
        });

    Ok(RecenterReport {
        x1: x1.to_vec(),
        eps1,
        eps1_star,
        k0,
        eps_t1,
        eps_t2,
        center,
        samples,
        centers_checked,
    })
}

/// Modulus comparison behind the recentering: every curve joining the
/// boundary spheres of `A(x1, eps1, eps1*)` crosses `A(a, eps_t1, eps_t2)`,
/// so the first family's modulus is at most the second's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorizationCheck {
    /// `Γ(S(x1, eps1*), S(x1, eps1), A(x1, eps1, eps1*))`
    pub outer: ModulusEstimate,
    /// `Γ(S(a, eps_t1), S(a, eps_t2), A(a, eps_t1, eps_t2))`
    pub inner: ModulusEstimate,
    pub grid: Grid,
    pub holds: bool,
}

pub fn check_minorization(
    report: &RecenterReport,
    fam_size: usize,
    subdiv: usize,
    resolution: usize,
    solver: &SolverOptions,
) -> Result<MinorizationCheck> {
    let big = Annulus::new(report.x1.clone(), report.eps1, report.eps1_star)?;
    let small = Annulus::new(report.center.clone(), report.eps_t1, report.eps_t2)?;
    let fam_big = ring_family(&big, fam_size, subdiv)?;
    let fam_small = ring_family(&small, fam_size, subdiv)?;
    let grid = Grid::cube(&report.x1, 1.05 * report.eps1_star, resolution)?;
    let n = report.x1.len();
    let (outer, inner) = rayon::join(
        || discrete_modulus(&fam_big, &grid, n, solver),
        || discrete_modulus(&fam_small, &grid, n, solver),
    );
    let (outer, inner) = (outer?, inner?);
    let holds = satisfied_with_slack(outer.value, inner.value, solver.tol);
    Ok(MinorizationCheck {
        outer,
        inner,
        grid,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_gap_example() {
        let r = recenter_annulus(&[0.0, 0.0], 1.0, 2.0, 1000).unwrap();
        assert_eq!(r.k0, 3);
        assert_eq!(r.eps_t1, 1.25);
        assert_eq!(r.eps_t2, 1.5);
        assert!(r.centers_checked);
    }

    #[test]
    fn wide_gap_floors_at_one() {
        let r = recenter_annulus(&[0.0, 0.0, 0.0], 0.5, 100.0, 50).unwrap();
        assert_eq!(r.k0, 1);
        assert!(r.centers_checked);
    }

    #[test]
    fn ordering_holds_over_many_gaps() {
        for i in 1..200 {
            let gap = i as f64 * 0.037;
            let r = recenter_annulus(&[0.3, -0.2], 0.7, 0.7 + gap, 64).unwrap();
            assert!(r.eps1 < r.eps_t1 && r.eps_t1 < r.eps_t2 && r.eps_t2 < r.eps1_star);
            assert!(r.eps1 + 3.0 / (r.k0 as f64 + 1.0) < r.eps1_star);
            assert!(r.centers_checked, "gap {gap}");
        }
    }

    #[test]
    fn rejects_inverted_radii() {
        assert!(recenter_annulus(&[0.0, 0.0], 2.0, 1.0, 10).is_err());
    }
}
