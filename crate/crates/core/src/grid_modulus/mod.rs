//! Moduli of curve families: closed forms for rings, the discrete extremal
//! length program, radial test densities and the bounds built from them.

mod grid;
mod radial;
mod solver;

pub use grid::{Grid, GridDensity, MIN_RESOLUTION};
pub use radial::{admissible_eta, rhs_integral, Admissibility, RadialTestDensity, ADMISSIBILITY_SLACK};
pub use solver::{
    discrete_modulus, solve_discrete_modulus, ModulusEstimate, ModulusSolution, SolverOptions,
};

use crate::error::{Error, Result};

/// Surface area `ω_{n−1}` of the unit sphere in `R^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        n => 2.0 * PI / (n as f64 - 2.0) * unit_sphere_area(n - 2),
    }
}

/// Modulus of the family joining the boundary spheres of `A(x0, r1, r2)`:
/// `ω_{n−1} (log(r2/r1))^(1−n)`.
pub fn analytic_ring_modulus(n: usize, r1: f64, r2: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::BadDimension(n));
    }
    if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
        return Err(Error::InvalidAnnulus { r1, r2 });
    }
    Ok(unit_sphere_area(n) * (r2 / r1).ln().powi(1 - n as i32))
}

/// `‖Q‖ / (ε₁* − ε₁)^n`.
pub fn l1_ring_bound(q_l1: f64, eps1: f64, eps1_star: f64, n: usize) -> Result<f64> {
    if !(eps1 > 0.0 && eps1 < eps1_star) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < eps1 < eps1_star, got {eps1}, {eps1_star}"
        )));
    }
    if !(q_l1 >= 0.0) {
        return Err(Error::InvalidParameter(format!("‖Q‖ must be >= 0, got {q_l1}")));
    }
    Ok(q_l1 / (eps1_star - eps1).powi(n as i32))
}

/// `c_n log(ε₀/ε)`.
pub fn weak_flat_lower_bound(c_n: f64, eps0: f64, eps: f64) -> f64 {
    c_n * (eps0 / eps).ln()
}

/// Largest `ε` whose bound `c_n log(ε₀/ε)` exceeds `p`, shaved by a relative `1e-6`.
pub fn weak_flat_radius(c_n: f64, eps0: f64, p: f64) -> f64 {
    eps0 * (-(p / c_n) * (1.0 + 1e-6)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-15);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-15);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((unit_sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn ring_modulus_values() {
        assert!((analytic_ring_modulus(2, 1.0, E).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((analytic_ring_modulus(3, 2.0, 2.0 * E).unwrap() - 4.0 * PI).abs() < 1e-13);
        let seq: Vec<f64> = [2.0, 10.0, 1e3, 1e9]
            .iter()
            .map(|r| analytic_ring_modulus(2, 1.0, *r).unwrap())
            .collect();
        assert!(seq.windows(2).all(|w| w[1] < w[0]));
        assert!(seq[3] < 0.35);
        assert!(analytic_ring_modulus(2, 1.0, 1.0).is_err());
        assert!(analytic_ring_modulus(1, 1.0, 2.0).is_err());
    }

    #[test]
    fn l1_ring_bound_examples() {
        assert!((l1_ring_bound(PI, 0.25, 0.5, 2).unwrap() - 16.0 * PI).abs() < 1e-13);
        assert_eq!(l1_ring_bound(0.0, 0.25, 0.5, 3).unwrap(), 0.0);
        assert!(l1_ring_bound(1.0, 0.5, 0.5, 2).is_err());
        assert!(l1_ring_bound(1.0, 0.6, 0.5, 2).is_err());
    }

    #[test]
    fn weak_flat_examples() {
        let c = 1.7;
        assert!((weak_flat_lower_bound(c, 0.5, 0.5 / E) - c).abs() < 1e-15);
        let d = weak_flat_lower_bound(c, 0.5, 0.05) - weak_flat_lower_bound(c, 0.5, 0.1);
        assert!((d - c * 2f64.ln()).abs() < 1e-14);
        let eps = weak_flat_radius(c, 0.5, 100.0);
        assert!(eps < 0.5 * (-100.0 / c).exp());
        assert!(weak_flat_lower_bound(c, 0.5, eps) > 100.0);
        assert!((weak_flat_radius(c, 0.5, 1e-9) - 0.5).abs() < 1e-8);
    }
}
