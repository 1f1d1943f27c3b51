//! Polyline curves and generators for the curve families the toolkit works with.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{dist, euclid, sphere_directions, Annulus, Ball, PointSet};
use crate::mappings::Mapping;

/// Ordered vertices of a piecewise-linear curve, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    n: usize,
    coords: Vec<f64>,
}

impl Polyline {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidPolyline(format!(
                "need at least 2 vertices, got {}",
                vertices.len()
            )));
        }
        let n = vertices[0].len();
        if n < 2 {
            return Err(Error::BadDimension(n));
        }
        let mut coords = Vec::with_capacity(n * vertices.len());
        for v in &vertices {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFiniteCoordinate);
            }
            coords.extend_from_slice(v);
        }
        let line = Polyline { n, coords };
        for (i, w) in line.segments().enumerate() {
            if w.0 == w.1 {
                return Err(Error::InvalidPolyline(format!(
                    "vertices {i} and {} coincide",
                    i + 1
                )));
            }
        }
        Ok(line)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.n
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.n)
    }

    pub fn first(&self) -> &[f64] {
        self.vertex(0)
    }

    pub fn last(&self) -> &[f64] {
        self.vertex(self.num_vertices() - 1)
    }

    pub fn segments(&self) -> impl Iterator<Item = (&[f64], &[f64])> + '_ {
        let n = self.n;
        (0..self.num_vertices() - 1)
            .map(move |i| (&self.coords[i * n..(i + 1) * n], &self.coords[(i + 1) * n..(i + 2) * n]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| euclid(a, b)).sum()
    }

    /// Insert `k` evenly spaced vertices inside every segment.
    pub fn refined(&self, k: usize) -> Polyline {
        if k == 0 {
            return self.clone();
        }
        let mut coords = Vec::with_capacity(self.coords.len() * (k + 1));
        for (a, b) in self.segments() {
            for j in 0..=k {
                let t = j as f64 / (k + 1) as f64;
                coords.extend(a.iter().zip(b).map(|(x, y)| x + t * (y - x)));
            }
        }
        coords.extend_from_slice(self.last());
        Polyline { n: self.n, coords }
    }

    /// Vertices `start..=end` as a new polyline.
    pub fn subrange(&self, start: usize, end: usize) -> Result<Polyline> {
        if end <= start || end >= self.num_vertices() {
            return Err(Error::InvalidPolyline(format!(
                "bad vertex range {start}..={end}"
            )));
        }
        Ok(Polyline {
            n: self.n,
            coords: self.coords[start * self.n..(end + 1) * self.n].to_vec(),
        })
    }

    pub fn to_vertices(&self) -> Vec<Vec<f64>> {
        self.vertices().map(<[f64]>::to_vec).collect()
    }
}

/// A finite family of curves with a label recording how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFamily {
    pub label: String,
    n: usize,
    curves: Vec<Polyline>,
}

impl CurveFamily {
    pub fn new(label: impl Into<String>, curves: Vec<Polyline>) -> Result<Self> {
        let first = curves
            .first()
            .ok_or_else(|| Error::InvalidParameter("curve family is empty".into()))?;
        let n = first.dim();
        if let Some(c) = curves.iter().find(|c| c.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.dim(),
            });
        }
        Ok(CurveFamily {
            label: label.into(),
            n,
            curves,
        })
    }

    pub fn empty(label: impl Into<String>, n: usize) -> Self {
        CurveFamily {
            label: label.into(),
            n,
            curves: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn curves(&self) -> &[Polyline] {
        &self.curves
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    /// Axis-aligned bounding box `(lo, hi)` of every vertex.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut it = self.curves.iter().flat_map(Polyline::vertices);
        let first = it.next()?;
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for v in it {
            for k in 0..self.n {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Some((lo, hi))
    }

    /// The family with every curve repeated `times` times.
    pub fn duplicated(&self, times: usize) -> CurveFamily {
        let curves = self
            .curves
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.clone(), times))
            .collect();
        CurveFamily {
            label: format!("{}*{times}", self.label),
            n: self.n,
            curves,
        }
    }

    /// Keep the curves whose indices are selected.
    pub fn subfamily(&self, keep: impl Fn(usize) -> bool) -> CurveFamily {
        CurveFamily {
            label: format!("sub({})", self.label),
            n: self.n,
            curves: self
                .curves
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(*i))
                .map(|(_, c)| c.clone())
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyRepr {
    label: String,
    n: usize,
    curves: Vec<Vec<Vec<f64>>>,
}

impl Serialize for CurveFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FamilyRepr {
            label: self.label.clone(),
            n: self.n,
            curves: self.curves.iter().map(Polyline::to_vertices).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CurveFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = FamilyRepr::deserialize(d)?;
        let curves = repr
            .curves
            .into_iter()
            .map(Polyline::new)
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        if let Some(c) = curves.iter().find(|c| c.dim() != repr.n) {
            return Err(D::Error::custom(format!(
                "curve dimension {} does not match n={}",
                c.dim(),
                repr.n
            )));
        }
        Ok(CurveFamily {
            label: repr.label,
            n: repr.n,
            curves,
        })
    }
}

/// Radial curves joining the two boundary spheres of `a`, vertices spaced
/// geometrically in radius.
pub fn ring_family(a: &Annulus, count: usize, subdiv: usize) -> Result<CurveFamily> {
    let a = Annulus::new(a.center.clone(), a.r1, a.r2)?;
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    if subdiv < 2 {
        return Err(Error::InvalidParameter("subdiv must be at least 2".into()));
    }
    let ratio = a.r2 / a.r1;
    let radii: Vec<f64> = (0..subdiv)
        .map(|k| match k {
            0 => a.r1,
            k if k == subdiv - 1 => a.r2,
            k => a.r1 * ratio.powf(k as f64 / (subdiv - 1) as f64),
        })
        .collect();
    let curves = sphere_directions(a.dim(), count)
        .into_par_iter()
        .map(|d| {
            let verts = radii
                .iter()
                .map(|r| a.center.iter().zip(&d).map(|(c, u)| c + r * u).collect())
                .collect();
            Polyline::new(verts)
        })
        .collect::<Result<Vec<_>>>()?;
    CurveFamily::new(
        format!(
            "ring(center={:?}, r1={}, r2={}, count={count})",
            a.center, a.r1, a.r2
        ),
        curves,
    )
}

/// Options for [`connecting_family`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectOptions {
    /// Perturbation amplitude as a fraction of `dist(E, F)`.
    pub jitter: f64,
    /// Vertices per curve before bending around forbidden balls.
    pub vertices: usize,
    pub seed: u64,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        ConnectOptions {
            jitter: 0.1,
            vertices: 33,
            seed: 0,
        }
    }
}

const BEND_FACTOR: f64 = 1.05;

/// Curves from points of `e` to points of `f`: jittered segments, bent around
/// every forbidden ball.
pub fn connecting_family(
    e: &PointSet,
    f: &PointSet,
    exclude: &[Ball],
    count: usize,
    opts: &ConnectOptions,
) -> Result<CurveFamily> {
    let n = e.dim();
    if f.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.dim(),
        });
    }
    if let Some(b) = exclude.iter().find(|b| b.center.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.center.len(),
        });
    }
    let gap = dist(e, f)?;
    let scale = e
        .points()
        .iter()
        .chain(f.points())
        .map(|p| p.iter().map(|c| c.abs()).fold(0.0, f64::max))
        .fold(1.0, f64::max);
    if gap <= 1e-12 * scale {
        return Err(Error::SetsIntersect);
    }
    for p in e.points().iter().chain(f.points()) {
        if exclude.iter().any(|b| b.contains(p)) {
            return Err(Error::InvalidParameter(
                "an endpoint set meets a forbidden ball".into(),
            ));
        }
    }
    if opts.vertices < 2 {
        return Err(Error::InvalidParameter("need at least 2 vertices per curve".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let plans: Vec<(usize, usize, f64, Vec<f64>)> = (0..count)
        .map(|_| {
            let i = rng.random_range(0..e.len());
            let j = rng.random_range(0..f.len());
            let amp = opts.jitter * gap * rng.random_range(-1.0..=1.0);
            let dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            (i, j, amp, dir)
        })
        .collect();

    let curves = plans
        .into_par_iter()
        .map(|(i, j, amp, dir)| {
            let a = &e.points()[i];
            let b = &f.points()[j];
            let chord = unit(&sub(b, a));
            let perp = perpendicular(&dir, &chord);
            let m = opts.vertices;
            let mut verts: Vec<Vec<f64>> = (0..m)
                .map(|k| {
                    let t = k as f64 / (m - 1) as f64;
                    let bump = amp * (std::f64::consts::PI * t).sin();
                    (0..n)
                        .map(|c| a[c] + t * (b[c] - a[c]) + bump * perp[c])
                        .collect()
                })
                .collect();
            for ball in exclude {
                verts = bend_around(verts, ball, &chord, &perp);
            }
            verts.dedup();
            Polyline::new(verts)
        })
        .collect::<Result<Vec<_>>>()?;
    CurveFamily::new(format!("connect(|E|={}, |F|={}, count={count})", e.len(), f.len()), curves)
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(a: &[f64]) -> Vec<f64> {
    let l = dot(a, a).sqrt();
    a.iter().map(|x| x / l).collect()
}

/// Component of `v` orthogonal to the unit vector `d`, normalized; falls back
/// to a coordinate axis when `v` is (nearly) parallel to `d`.
fn perpendicular(v: &[f64], d: &[f64]) -> Vec<f64> {
    let try_dir = |v: &[f64]| {
        let p = dot(v, d);
        let w: Vec<f64> = v.iter().zip(d).map(|(x, y)| x - p * y).collect();
        let l = dot(&w, &w).sqrt();
        (l > 1e-8).then(|| w.iter().map(|x| x / l).collect::<Vec<f64>>())
    };
    if let Some(w) = try_dir(v) {
        return w;
    }
    (0..d.len())
        .find_map(|k| {
            let mut e = vec![0.0; d.len()];
            e[k] = 1.0;
            try_dir(&e)
        })
        .expect("some axis is not parallel to d")
}

/// Refine near the ball, then push every vertex inside it onto the sphere of
/// radius `BEND_FACTOR * radius`, keeping its coordinate along the chord.
fn bend_around(verts: Vec<Vec<f64>>, ball: &Ball, chord: &[f64], perp: &[f64]) -> Vec<Vec<f64>> {
    let target = BEND_FACTOR * ball.radius;
    let max_step = 0.2 * ball.radius;
    let mut dense: Vec<Vec<f64>> = Vec::with_capacity(verts.len());
    for w in verts.windows(2) {
        dense.push(w[0].clone());
        let (a, b) = (&w[0], &w[1]);
        if segment_distance(a, b, &ball.center) < 2.0 * ball.radius {
            let pieces = (euclid(a, b) / max_step).ceil() as usize;
            for k in 1..pieces {
                let t = k as f64 / pieces as f64;
                dense.push(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect());
            }
        }
    }
    dense.push(verts.last().cloned().expect("non-empty"));

    // side of the chord the curve passes on, decided once per curve
    let offsets: Vec<f64> = dense.iter().map(|v| dot(&sub(v, &ball.center), perp)).collect();
    let side = offsets
        .iter()
        .zip(&dense)
        .filter(|(_, v)| ball.contains(v))
        .map(|(o, _)| *o)
        .sum::<f64>();
    let side = if side < 0.0 { -1.0 } else { 1.0 };

    dense
        .into_iter()
        .map(|v| {
            if !ball.contains(&v) {
                return v;
            }
            let w = sub(&v, &ball.center);
            let along = dot(&w, chord).clamp(-target, target);
            let rest: Vec<f64> = w
                .iter()
                .zip(chord)
                .map(|(x, c)| x - dot(&w, chord) * c)
                .collect();
            let rest_len = dot(&rest, &rest).sqrt();
            let dir: Vec<f64> = if rest_len > 1e-9 * ball.radius && dot(&rest, perp) * side >= 0.0 {
                rest.iter().map(|x| x / rest_len).collect()
            } else {
                perp.iter().map(|x| side * x).collect()
            };
            let h = (target * target - along * along).max(0.0).sqrt();
            (0..v.len())
                .map(|k| ball.center[k] + along * chord[k] + h * dir[k])
                .collect()
        })
        .collect()
}

fn segment_distance(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let l2 = dot(&ab, &ab);
    let t = if l2 > 0.0 { (dot(&ap, &ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    let q: Vec<f64> = a.iter().zip(&ab).map(|(x, d)| x + t * d).collect();
    euclid(&q, p)
}

/// Image family: refine each curve, then map it vertex by vertex.
pub fn map_family(f: &dyn Mapping, fam: &CurveFamily, refine: usize) -> Result<CurveFamily> {
    let curves = fam
        .curves()
        .par_iter()
        .enumerate()
        .map(|(ci, c)| {
            let fine = c.refined(refine);
            let verts = fine
                .vertices()
                .enumerate()
                .map(|(vi, v)| {
                    if !f.in_domain(v) {
                        return Err(Error::OutsideDomain {
                            mapping: f.name(),
                            curve: ci,
                            vertex: vi,
                        });
                    }
                    f.apply(v)
                })
                .collect::<Result<Vec<_>>>()?;
            Polyline::new(verts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveFamily {
        label: format!("{}({})", f.name(), fam.label),
        n: fam.dim(),
        curves,
    })
}
