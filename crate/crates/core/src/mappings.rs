//! The radial stretch `f(x) = (1 + |x|^α) x / |x|`, its inverse, its
//! dilatation bound `Q`, and a small mapping interface used by the curve
//! transport and the probes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::norm;
use crate::grid_modulus::unit_sphere_area;
use crate::quadrature::{integrate, QuadOptions};

/// A map defined on a subset of `R^n`.
pub trait Mapping: Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn in_domain(&self, x: &[f64]) -> bool;
    /// Evaluate at a point of the domain.
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// Shape parameter, for maps that have one.
    fn alpha(&self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Identity {
    n: usize,
}

impl Identity {
    pub fn new(n: usize) -> Self {
        Identity { n }
    }
}

impl Mapping for Identity {
    fn name(&self) -> String {
        "identity".into()
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.n
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if !self.in_domain(x) {
            return Err(Error::PointOutsideDomain(self.name()));
        }
        Ok(x.to_vec())
    }
}

/// Parameters of the radial stretch of the punctured unit ball onto the ring
/// `1 < |y| < 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialStretch {
    pub alpha: f64,
    pub n: usize,
}

impl RadialStretch {
    pub fn new(alpha: f64, n: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if n < 2 {
            return Err(Error::BadDimension(n));
        }
        Ok(RadialStretch { alpha, n })
    }

    /// The removed interior point `(0, ..., 0, 1/2)`.
    pub fn e1(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.n];
        p[self.n - 1] = 0.5;
        p
    }

    /// Image of `e1`: `(0, ..., 0, 1 + 2^-α)`, which is `3/2` at `α = 1`.
    pub fn e2(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.n];
        p[self.n - 1] = 1.0 + 0.5f64.powf(self.alpha);
        p
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let r = norm(x);
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::PointOutsideDomain(format!(
                "radial: |x| = {r} not in (0, 1)"
            )));
        }
        let s = (1.0 + r.powf(self.alpha)) / r;
        Ok(x.iter().map(|c| s * c).collect())
    }

    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y)?;
        let r = norm(y);
        if !(r > 1.0 && r < 2.0) {
            return Err(Error::PointOutsideDomain(format!(
                "radial-inverse: |y| = {r} not in (1, 2)"
            )));
        }
        let s = (r - 1.0).powf(1.0 / self.alpha) / r;
        Ok(y.iter().map(|c| s * c).collect())
    }

    /// `Q(r) = ((1 + r^α) / (α r^α))^(n-1)` for `0 < r < 1`.
    pub fn q_radial(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParameter(format!("Q_radial needs 0 < r < 1, got {r}")));
        }
        Ok(self.q_unchecked(r))
    }

    pub(crate) fn q_unchecked(&self, r: f64) -> f64 {
        let ra = r.powf(self.alpha);
        ((1.0 + ra) / (self.alpha * ra)).powi(self.n as i32 - 1)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Critical `α` for `Q ∈ L^p`: `n / (p (n - 1))`.
    pub fn threshold(n: usize, p: f64) -> f64 {
        n as f64 / (p * (n as f64 - 1.0))
    }
}

/// Forward radial stretch on `B^n \ {0, e1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radial(pub RadialStretch);

/// Inverse radial stretch on `{1 < |y| < 2} \ {e2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialInverse(pub RadialStretch);

impl Mapping for RadialStretch {
    fn alpha(&self) -> Option<f64> {
        Some(self.alpha)
    }
    fn name(&self) -> String {
        Radial(*self).name()
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        Radial(*self).in_domain(x)
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Radial(*self).apply(x)
    }
}

impl Mapping for Radial {
    fn alpha(&self) -> Option<f64> {
        Some(self.0.alpha)
    }
    fn name(&self) -> String {
        format!("radial[alpha={}]", self.0.alpha)
    }
    fn dim(&self) -> usize {
        self.0.n
    }
    fn in_domain(&self, x: &[f64]) -> bool {
        if x.len() != self.0.n {
            return false;
        }
        let r = norm(x);
        r > 0.0 && r < 1.0 && x != self.0.e1().as_slice()
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() == self.0.n && x == self.0.e1().as_slice() {
            return Err(Error::PointOutsideDomain(self.name()));
        }
        self.0.forward(x)
    }
}

impl Mapping for RadialInverse {
    fn alpha(&self) -> Option<f64> {
        Some(self.0.alpha)
    }
    fn name(&self) -> String {
        format!("radial-inverse[alpha={}]", self.0.alpha)
    }
    fn dim(&self) -> usize {
        self.0.n
    }
    fn in_domain(&self, y: &[f64]) -> bool {
        if y.len() != self.0.n {
            return false;
        }
        let r = norm(y);
        r > 1.0 && r < 2.0 && y != self.0.e2().as_slice()
    }
    fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() == self.0.n && y == self.0.e2().as_slice() {
            return Err(Error::PointOutsideDomain(self.name()));
        }
        self.0.inverse(y)
    }
}

/// Look up a mapping by its command-line name.
pub fn mapping_by_name(name: &str, alpha: f64, n: usize) -> Result<Box<dyn Mapping>> {
    match name {
        "identity" => {
            if n < 2 {
                return Err(Error::BadDimension(n));
            }
            Ok(Box::new(Identity::new(n)))
        }
        "radial" => Ok(Box::new(Radial(RadialStretch::new(alpha, n)?))),
        "radial-inverse" => Ok(Box::new(RadialInverse(RadialStretch::new(alpha, n)?))),
        other => Err(Error::UnknownMapping(other.to_string())),
    }
}

/// `‖Q‖_{L^p(B^n)}` or a divergence flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpNorm {
    pub finite: bool,
    /// `None` when the integral diverges.
    pub value: Option<f64>,
    pub threshold: f64,
}

/// `‖Q‖_p` with default quadrature settings.
pub fn lp_norm_q(m: &RadialStretch, p: f64) -> Result<LpNorm> {
    lp_norm_q_with(m, p, &QuadOptions::default())
}

/// `‖Q‖_p` with explicit quadrature settings, so the caller can check
/// stability under refinement.
///
/// Near `r = 0` the radial integrand behaves like `r^e` with
/// `e = n - 1 - α p (n - 1)`. For `e ∈ (-1, 0)` the variable change
/// `r = u^k`, `k = 1 / (1 - α (n - 1) p / n)`, turns it into a bounded
/// integrand `~ u^(n-1)`.
pub fn lp_norm_q_with(m: &RadialStretch, p: f64, opts: &QuadOptions) -> Result<LpNorm> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    let n = m.n as f64;
    let alpha = m.alpha;
    let threshold = RadialStretch::threshold(m.n, p);
    if alpha >= threshold {
        return Ok(LpNorm {
            finite: false,
            value: None,
            threshold,
        });
    }
    let power = p * (n - 1.0);
    let expo = n - 1.0 - alpha * power;
    // Q(r)^p r^(n-1) = ((1 + r^α)/α)^(p(n-1)) · r^e
    let integral = if expo < 0.0 {
        let k = 1.0 / (1.0 - alpha * (n - 1.0) * p / n);
        let g = move |u: f64| {
            let ua = u.powf(k * alpha);
            k * ((1.0 + ua) / alpha).powf(power) * u.powf(n - 1.0)
        };
        integrate(g, 0.0, 1.0, opts)?
    } else {
        let g = move |r: f64| ((1.0 + r.powf(alpha)) / alpha).powf(power) * r.powf(expo);
        integrate(g, 0.0, 1.0, opts)?
    };
    let value = (unit_sphere_area(m.n) * integral.value).powf(1.0 / p);
    if !value.is_finite() {
        return Ok(LpNorm {
            finite: false,
            value: None,
            threshold,
        });
    }
    Ok(LpNorm {
        finite: true,
        value: Some(value),
        threshold,
    })
}
