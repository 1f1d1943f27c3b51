use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Annulus;
use crate::grid_modulus::unit_sphere_area;
use crate::quadrature::{composite, integrate_with_breaks, QuadOptions};

/// Radial test density `η` on `(r1, r2)`, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialTestDensity {
    /// `1 / (r2 − r1)` on `[r1, r2]`.
    Step { r1: f64, r2: f64 },
    /// `1 / (t log(r2/r1))` on `[r1, r2]`.
    Extremal { r1: f64, r2: f64 },
    /// Piecewise linear through `(knots[i], values[i])`.
    Tabulated { knots: Vec<f64>, values: Vec<f64> },
}

impl RadialTestDensity {
    pub fn validate(&self) -> Result<()> {
        match self {
            RadialTestDensity::Step { r1, r2 } | RadialTestDensity::Extremal { r1, r2 } => {
                if !(*r1 > 0.0 && r2 > r1 && r2.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "test density needs 0 < r1 < r2, got r1={r1}, r2={r2}"
                    )));
                }
            }
            RadialTestDensity::Tabulated { knots, values } => {
                if knots.len() < 2 || knots.len() != values.len() {
                    return Err(Error::InvalidParameter(
                        "tabulated density needs matching knots and values (at least 2)".into(),
                    ));
                }
                if !(knots[0] > 0.0) || knots.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidParameter(
                        "knots must be positive and strictly increasing".into(),
                    ));
                }
                if knots.iter().any(|k| !k.is_finite())
                    || values.iter().any(|v| !(v.is_finite() && *v >= 0.0))
                {
                    return Err(Error::InvalidParameter(
                        "tabulated values must be finite and nonnegative".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RadialTestDensity::Step { .. } => "step",
            RadialTestDensity::Extremal { .. } => "extremal",
            RadialTestDensity::Tabulated { .. } => "tabulated",
        }
    }

    /// Closed support `[r1, r2]`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            RadialTestDensity::Step { r1, r2 } | RadialTestDensity::Extremal { r1, r2 } => (*r1, *r2),
            RadialTestDensity::Tabulated { knots, .. } => (knots[0], knots[knots.len() - 1]),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (a, b) = self.support();
        if t < a || t > b {
            return 0.0;
        }
        match self {
            RadialTestDensity::Step { r1, r2 } => 1.0 / (r2 - r1),
            RadialTestDensity::Extremal { r1, r2 } => 1.0 / (t * (r2 / r1).ln()),
            RadialTestDensity::Tabulated { knots, values } => {
                let i = knots.partition_point(|k| *k <= t).clamp(1, knots.len() - 1);
                let (k0, k1) = (knots[i - 1], knots[i]);
                let w = (t - k0) / (k1 - k0);
                values[i - 1] + w * (values[i] - values[i - 1])
            }
        }
    }

    fn breaks_within(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut b = vec![lo];
        if let RadialTestDensity::Tabulated { knots, .. } = self {
            b.extend(knots.iter().copied().filter(|k| *k > lo && *k < hi));
        }
        b.push(hi);
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub integral: f64,
    pub admissible: bool,
}

pub const ADMISSIBILITY_SLACK: f64 = 1e-12;

/// `∫ η dr` and whether it reaches 1.
pub fn admissible_eta(eta: &RadialTestDensity) -> Result<Admissibility> {
    eta.validate()?;
    let integral = match eta {
        RadialTestDensity::Step { .. } | RadialTestDensity::Extremal { .. } => 1.0,
        RadialTestDensity::Tabulated { knots, .. } => {
            let opts = QuadOptions {
                abs_tol: 1e-10,
                rel_tol: 0.0,
                ..QuadOptions::default()
            };
            integrate_with_breaks(|t| eta.eval(t), knots, &opts)?.value
        }
    };
    Ok(Admissibility {
        integral,
        admissible: integral >= 1.0 - ADMISSIBILITY_SLACK,
    })
}

/// `∫_A Q(|x − x0|) η(|x − x0|)^n dm(x) = ω_{n−1} ∫ Q(r) η(r)^n r^(n−1) dr`.
///
/// Divergence is reported when the composite estimate at least doubles on two
/// consecutive refinements, or when the integrand is not finite.
pub fn rhs_integral(
    q: impl Fn(f64) -> f64,
    eta: &RadialTestDensity,
    a: &Annulus,
    n: usize,
) -> Result<f64> {
    eta.validate()?;
    if n < 2 {
        return Err(Error::BadDimension(n));
    }
    let (s1, s2) = eta.support();
    let lo = s1.max(a.r1);
    let hi = s2.min(a.r2);
    if lo >= hi {
        return Ok(0.0);
    }
    let integrand = |r: f64| {
        let e = eta.eval(r);
        if e == 0.0 {
            0.0
        } else {
            q(r) * e.powi(n as i32) * r.powi(n as i32 - 1)
        }
    };
    let breaks = eta.breaks_within(lo, hi);

    let mut prev: Option<f64> = None;
    let mut doublings = 0;
    for level in 0..10 {
        let est: f64 = breaks
            .windows(2)
            .map(|w| composite(integrand, w[0], w[1], 1 << level))
            .sum();
        if !est.is_finite() {
            return Err(Error::Divergent);
        }
        if let Some(p) = prev {
            if p > 0.0 && est >= 2.0 * p {
                doublings += 1;
                if doublings == 2 {
                    return Err(Error::Divergent);
                }
            } else {
                doublings = 0;
            }
        }
        prev = Some(est);
    }

    let opts = QuadOptions {
        abs_tol: 1e-9,
        rel_tol: 0.0,
        ..QuadOptions::default()
    };
    let v = integrate_with_breaks(integrand, &breaks, &opts)?.value;
    Ok(unit_sphere_area(n) * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_modulus::analytic_ring_modulus;
    use std::f64::consts::{E, PI};

    #[test]
    fn closed_form_admissibility() {
        let s = admissible_eta(&RadialTestDensity::Step { r1: 0.3, r2: 0.7 }).unwrap();
        assert_eq!(s.integral, 1.0);
        assert!(s.admissible);
        let x = admissible_eta(&RadialTestDensity::Extremal { r1: 1.0, r2: 5.0 }).unwrap();
        assert_eq!(x.integral, 1.0);
        assert!(x.admissible);
    }

    #[test]
    fn extremal_integrates_to_one_numerically() {
        let eta = RadialTestDensity::Extremal { r1: 0.2, r2: 3.0 };
        let opts = QuadOptions { abs_tol: 1e-13, ..QuadOptions::default() };
        let v = integrate_with_breaks(|t| eta.eval(t), &[0.2, 3.0], &opts).unwrap().value;
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tabulated_cases() {
        let zero = RadialTestDensity::Tabulated { knots: vec![1.0, 2.0], values: vec![0.0, 0.0] };
        let z = admissible_eta(&zero).unwrap();
        assert_eq!(z.integral, 0.0);
        assert!(!z.admissible);
        // triangle of height 2 on [1, 2]
        let tri = RadialTestDensity::Tabulated {
            knots: vec![1.0, 1.5, 2.0],
            values: vec![0.0, 2.0, 0.0],
        };
        let t = admissible_eta(&tri).unwrap();
        assert!((t.integral - 1.0).abs() < 1e-12);
        assert!(t.admissible);
        assert!(RadialTestDensity::Tabulated { knots: vec![2.0, 1.0], values: vec![1.0, 1.0] }
            .validate()
            .is_err());
    }

    #[test]
    fn rhs_examples() {
        let a = Annulus::centered(2, 1.0, 2.0).unwrap();
        let step = RadialTestDensity::Step { r1: 1.0, r2: 2.0 };
        assert!((rhs_integral(|_| 1.0, &step, &a, 2).unwrap() - 3.0 * PI).abs() < 1e-9);
        assert_eq!(rhs_integral(|_| 0.0, &step, &a, 2).unwrap(), 0.0);
        for n in 2..=4 {
            let ring = Annulus::centered(n, 0.5, 0.5 * E).unwrap();
            let ext = RadialTestDensity::Extremal { r1: 0.5, r2: 0.5 * E };
            let v = rhs_integral(|_| 1.0, &ext, &ring, n).unwrap();
            assert!((v - analytic_ring_modulus(n, 0.5, 0.5 * E).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn rhs_detects_divergence() {
        let a = Annulus::centered(2, 1.0, 2.0).unwrap();
        let step = RadialTestDensity::Step { r1: 1.0, r2: 2.0 };
        let e = rhs_integral(|r| 1.0 / (r - 1.0).powi(3), &step, &a, 2).unwrap_err();
        assert_eq!(e, Error::Divergent);
    }
}
