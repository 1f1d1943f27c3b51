use serde::{Deserialize, Serialize};

use crate::curves::{map_family, ring_family};
use crate::error::{Error, Result};
use crate::geometry::Annulus;
use crate::grid_modulus::{admissible_eta, rhs_integral, solve_discrete_modulus, RadialTestDensity, SolverOptions};
use crate::mappings::Mapping;
use crate::verify::report::{GridSpec, RadialWeight, ReportMetadata, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingCheckConfig {
    /// Vertices per radial curve.
    pub subdiv: usize,
    /// Vertices inserted per segment before mapping.
    pub refine: usize,
    /// Image-side grid.
    pub grid: GridSpec,
    pub solver: SolverOptions,
}

impl RingCheckConfig {
    pub fn default_for(n: usize) -> Self {
        RingCheckConfig {
            subdiv: 64,
            refine: 0,
            grid: GridSpec::default_for(n),
            solver: SolverOptions::default(),
        }
    }
}

/// Check `M(f(Γ(S1, S2, A))) ≤ ∫_A Q η^n(|x − x0|) dm` on a sampled ring family.
pub fn verify_ring_inequality(
    map: &dyn Mapping,
    q: &RadialWeight,
    a: &Annulus,
    eta: &RadialTestDensity,
    fam_size: usize,
    cfg: &RingCheckConfig,
) -> Result<VerificationReport> {
    let n = a.dim();
    if map.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            got: n,
        });
    }
    let adm = admissible_eta(eta)?;
    if !adm.admissible {
        return Err(Error::NotAdmissible(adm.integral));
    }
    q.check_on(a)?;

    let fam = ring_family(a, fam_size, cfg.subdiv)?;
    let image = map_family(map, &fam, cfg.refine)?;
    let grid = cfg.grid.fit(&image)?;
    let sol = solve_discrete_modulus(&image, &grid, n, &cfg.solver)?;
    let rhs = match rhs_integral(|r| q.eval(r), eta, a, n) {
        Ok(v) => Some(v),
        Err(Error::Divergent) => None,
        Err(e) => return Err(e),
    };
    let metadata = ReportMetadata {
        mapping: map.name(),
        alpha: map.alpha(),
        annulus: Some(a.clone()),
        eta: Some(serde_json::to_string(eta).expect("serializable")),
        q: Some(*q),
        family: fam.label.clone(),
        family_size: fam.len(),
        grid: Some(grid),
        solver: cfg.solver,
        seed: 0,
    };
    Ok(VerificationReport::assemble(
        sol.estimate,
        sol.lower_bound,
        rhs,
        cfg.solver.tol,
        metadata,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mappings::Identity;

    #[test]
    fn rejects_inadmissible_eta() {
        let a = Annulus::centered(2, 1.0, 2.0).unwrap();
        let eta = RadialTestDensity::Tabulated {
            knots: vec![1.0, 2.0],
            values: vec![0.5, 0.5],
        };
        let err = verify_ring_inequality(
            &Identity::new(2),
            &RadialWeight::Constant { value: 1.0 },
            &a,
            &eta,
            8,
            &RingCheckConfig::default_for(2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotAdmissible(v) if (v - 0.5).abs() < 1e-9));
    }

    #[test]
    fn zero_weight_is_a_violation() {
        let a = Annulus::centered(2, 1.0, std::f64::consts::E).unwrap();
        let cfg = RingCheckConfig {
            grid: GridSpec { resolution: 64, padding: 0.05 },
            ..RingCheckConfig::default_for(2)
        };
        let r = verify_ring_inequality(
            &Identity::new(2),
            &RadialWeight::Constant { value: 0.0 },
            &a,
            &RadialTestDensity::Step { r1: 1.0, r2: std::f64::consts::E },
            64,
            &cfg,
        )
        .unwrap();
        assert_eq!(r.rhs, Some(0.0));
        assert!(r.lhs.value > 0.0);
        assert_eq!(r.satisfied, Some(false));
        assert!(r.margin.unwrap() < 0.0);
    }

    #[test]
    fn stretch_weight_needs_unit_ball() {
        let a = Annulus::centered(2, 0.5, 1.5).unwrap();
        let err = verify_ring_inequality(
            &Identity::new(2),
            &RadialWeight::Stretch { alpha: 1.0, n: 2 },
            &a,
            &RadialTestDensity::Step { r1: 0.5, r2: 1.5 },
            8,
            &RingCheckConfig::default_for(2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
    }
}
