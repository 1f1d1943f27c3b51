use crate::curves::{map_family, CurveFamily};
use crate::error::{Error, Result};
use crate::grid_modulus::{solve_discrete_modulus, GridDensity, ModulusEstimate, SolverOptions};
use crate::mappings::Mapping;
use crate::verify::report::{GridSpec, ReportMetadata, VerificationReport};

const ADMISSIBLE_SLACK: f64 = 1e-9;

/// Check `M(f(Γ)) ≤ Σ_c Q_c ρ_c^n |c|` for an admissible grid density `ρ`.
///
/// `q` and `rho` live on the same source grid; the image family gets its own
/// auto-fitted grid from `image_grid`.
pub fn verify_general_inequality(
    map: &dyn Mapping,
    q: &GridDensity,
    fam: &CurveFamily,
    rho: &GridDensity,
    image_grid: &GridSpec,
    solver: &SolverOptions,
) -> Result<VerificationReport> {
    if q.grid != rho.grid {
        return Err(Error::InvalidGrid("Q and rho must share a grid".into()));
    }
    let n = rho.grid.dim();
    if !fam.is_empty() && fam.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: fam.dim(),
        });
    }
    for (i, c) in fam.curves().iter().enumerate() {
        let integral = rho
            .line_integral(c)
            .ok_or(Error::CurveExitsGrid { curve: i })?;
        if integral < 1.0 - ADMISSIBLE_SLACK {
            return Err(Error::DensityNotAdmissible { curve: i, integral });
        }
    }
    let rhs = rho.weighted_energy(q, n as f64)?;

    let (estimate, lower, grid) = if fam.is_empty() {
        let est = ModulusEstimate {
            value: 0.0,
            iterations: 0,
            converged: true,
            residual: 0.0,
        };
        (est, 0.0, None)
    } else {
        let image = map_family(map, fam, 0)?;
        let grid = image_grid.fit(&image)?;
        let sol = solve_discrete_modulus(&image, &grid, n, solver)?;
        (sol.estimate, sol.lower_bound, Some(grid))
    };
    let metadata = ReportMetadata {
        mapping: map.name(),
        alpha: map.alpha(),
        annulus: None,
        eta: None,
        q: None,
        family: fam.label.clone(),
        family_size: fam.len(),
        grid,
        solver: *solver,
        seed: 0,
    };
    Ok(VerificationReport::assemble(
        estimate,
        lower,
        Some(rhs),
        solver.tol,
        metadata,
    ))
}
