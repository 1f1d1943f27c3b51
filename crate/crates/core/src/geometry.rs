//! Points of the extended space, the chordal metric, annuli and the few set
//! functionals (diameter, distance, sphere crossing) the rest of the crate needs.

use serde::{Deserialize, Serialize};

use crate::curves::Polyline;
use crate::error::{Error, Result};

/// A point of `R^n` or the point at infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendedPoint {
    Finite(Vec<f64>),
    Infinity,
}

impl ExtendedPoint {
    pub fn finite(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::BadDimension(coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate);
        }
        Ok(ExtendedPoint::Finite(coords))
    }

    pub fn origin(n: usize) -> Self {
        ExtendedPoint::Finite(vec![0.0; n])
    }

    /// Coordinates of a finite point; infinity is rejected.
    pub fn coords(&self) -> Result<&[f64]> {
        match self {
            ExtendedPoint::Finite(c) => Ok(c),
            ExtendedPoint::Infinity => Err(Error::InfinitePoint),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedPoint::Infinity)
    }

    /// `None` for infinity, which is compatible with every dimension.
    pub fn dim(&self) -> Option<usize> {
        match self {
            ExtendedPoint::Finite(c) => Some(c.len()),
            ExtendedPoint::Infinity => None,
        }
    }
}

impl From<Vec<f64>> for ExtendedPoint {
    fn from(v: Vec<f64>) -> Self {
        ExtendedPoint::Finite(v)
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn euclid(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn check_same_dim(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(())
}

/// Chordal distance on the one-point compactification of `R^n`.
pub fn chordal_dist(x: &ExtendedPoint, y: &ExtendedPoint) -> Result<f64> {
    use ExtendedPoint::*;
    match (x, y) {
        (Infinity, Infinity) => Ok(0.0),
        (Finite(a), Infinity) | (Infinity, Finite(a)) => {
            Ok(1.0 / (1.0 + a.iter().map(|v| v * v).sum::<f64>()).sqrt())
        }
        (Finite(a), Finite(b)) => {
            check_same_dim(a, b)?;
            let na = (1.0 + a.iter().map(|v| v * v).sum::<f64>()).sqrt();
            let nb = (1.0 + b.iter().map(|v| v * v).sum::<f64>()).sqrt();
            Ok(euclid(a, b) / (na * nb))
        }
    }
}

/// Open ball `B(center, radius)`, Euclidean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Ball { center, radius })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        euclid(x, &self.center) < self.radius
    }

    /// Closed-ball inclusion `self ⊂ other`, decided exactly from centers and radii.
    pub fn is_inside(&self, other: &Ball) -> bool {
        euclid(&self.center, &other.center) + self.radius <= other.radius
    }
}

/// `A(center, r1, r2) = { x : r1 < |x - center| < r2 }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub center: Vec<f64>,
    pub r1: f64,
    pub r2: f64,
}

impl Annulus {
    pub fn new(center: Vec<f64>, r1: f64, r2: f64) -> Result<Self> {
        if center.len() < 2 {
            return Err(Error::BadDimension(center.len()));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate);
        }
        if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
            return Err(Error::InvalidAnnulus { r1, r2 });
        }
        Ok(Annulus { center, r1, r2 })
    }

    pub fn centered(n: usize, r1: f64, r2: f64) -> Result<Self> {
        Annulus::new(vec![0.0; n], r1, r2)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r = euclid(x, &self.center);
        self.r1 < r && r < self.r2
    }
}

/// A finite sample of a continuum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySet)?;
        let n = first.len();
        if n < 2 {
            return Err(Error::BadDimension(n));
        }
        for p in &points {
            check_same_dim(first, p)?;
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFiniteCoordinate);
            }
        }
        Ok(PointSet { points })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn sup_pairs(a: &PointSet, b: &PointSet, d: impl Fn(&[f64], &[f64]) -> f64) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.points
        .iter()
        .flat_map(|x| b.points.iter().map(|y| d(x, y)))
        .fold(0.0, f64::max))
}

fn inf_pairs(a: &PointSet, b: &PointSet, d: impl Fn(&[f64], &[f64]) -> f64) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a.points
        .iter()
        .flat_map(|x| b.points.iter().map(|y| d(x, y)))
        .fold(f64::INFINITY, f64::min))
}

fn chordal_finite(x: &[f64], y: &[f64]) -> f64 {
    let nx = (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let ny = (1.0 + y.iter().map(|v| v * v).sum::<f64>()).sqrt();
    euclid(x, y) / (nx * ny)
}

pub fn diam(a: &PointSet) -> Result<f64> {
    sup_pairs(a, a, euclid)
}

pub fn dist(a: &PointSet, b: &PointSet) -> Result<f64> {
    inf_pairs(a, b, euclid)
}

pub fn diam_h(a: &PointSet) -> Result<f64> {
    sup_pairs(a, a, chordal_finite)
}

pub fn dist_h(a: &PointSet, b: &PointSet) -> Result<f64> {
    inf_pairs(a, b, chordal_finite)
}

/// Whether the polyline meets the sphere `S(center, r)`: some segment has its
/// endpoints on opposite sides, or a vertex lies on it within `1e-12 * r`.
pub fn crosses_sphere(curve: &Polyline, center: &[f64], r: f64) -> bool {
    let tol = 1e-12 * r;
    let side = |v: &[f64]| {
        let d = euclid(v, center) - r;
        if d.abs() <= tol {
            0
        } else if d < 0.0 {
            -1
        } else {
            1
        }
    };
    let sides: Vec<i8> = curve.vertices().map(side).collect();
    if sides.contains(&0) {
        return true;
    }
    sides.windows(2).any(|w| w[0] != w[1])
}

/// Quasi-uniform unit directions: equal angles for `n = 2`, a Fibonacci
/// lattice for `n = 3`, seeded Gaussian samples otherwise.
pub fn sphere_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        2 => (0..count)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let s = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * k as f64;
                    vec![s * phi.cos(), s * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            use rand::SeedableRng;
            use rand_distr::{Distribution, StandardNormal};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_0000 + n as u64);
            (0..count)
                .map(|_| loop {
                    let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let l = norm(&v);
                    if l > 1e-9 {
                        break v.into_iter().map(|c| c / l).collect();
                    }
                })
                .collect()
        }
    }
}

/// Sample `count` points of the sphere `S(center, r)`.
pub fn sample_sphere(center: &[f64], r: f64, count: usize) -> Vec<Vec<f64>> {
    sphere_directions(center.len(), count)
        .into_iter()
        .map(|d| center.iter().zip(&d).map(|(c, u)| c + r * u).collect())
        .collect()
}
