use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{diam, diam_h, sample_sphere, PointSet};
use crate::mappings::Mapping;

/// Extension-verdict thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    /// Probe points per sphere.
    pub dirs: usize,
    /// Oscillation at the smallest radius must fall below this.
    pub oscillation_cutoff: f64,
    /// Minimum number of radii in the trailing non-increasing run.
    pub trend_radii: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            dirs: 64,
            oscillation_cutoff: 1e-3,
            trend_radii: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeLevel {
    pub radius: f64,
    pub images: Vec<Vec<f64>>,
    pub oscillation: f64,
    pub chordal_oscillation: f64,
}

/// Images of shrinking spheres about a boundary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProbe {
    pub mapping: String,
    pub boundary_point: Vec<f64>,
    pub levels: Vec<ProbeLevel>,
    pub extends: bool,
    /// Centroid of the last batch of images, when the map extends.
    pub limit: Option<Vec<f64>>,
    pub config: ClusterConfig,
}

/// Sample the map on `S(target, r) ∩ domain` for each radius and decide
/// whether the oscillation shrinks to zero.
pub fn cluster_probe(
    map: &dyn Mapping,
    target: &[f64],
    radii: &[f64],
    cfg: &ClusterConfig,
) -> Result<ClusterProbe> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParameter("radii must be positive".into()));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("radii must be strictly decreasing".into()));
    }
    if target.len() != map.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            got: target.len(),
        });
    }
    if cfg.dirs < 2 {
        return Err(Error::InvalidParameter("need at least 2 probe directions".into()));
    }
    let mut levels = Vec::with_capacity(radii.len());
    for &r in radii {
        let images = sample_sphere(target, r, cfg.dirs)
            .into_iter()
            .filter(|p| map.in_domain(p))
            .map(|p| map.apply(&p))
            .collect::<Result<Vec<_>>>()?;
        if images.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "no probe point of radius {r} lies in the domain of `{}`",
                map.name()
            )));
        }
        let set = PointSet::new(images)?;
        levels.push(ProbeLevel {
            radius: r,
            oscillation: diam(&set)?,
            chordal_oscillation: diam_h(&set)?,
            images: set.points().to_vec(),
        });
    }

    let osc: Vec<f64> = levels.iter().map(|l| l.oscillation).collect();
    let last = *osc.last().expect("at least one radius");
    let tail = cfg.trend_radii.max(2);
    let trending = osc.len() >= tail && osc[osc.len() - tail..].windows(2).all(|w| w[1] <= w[0]);
    let extends = last < cfg.oscillation_cutoff && trending;
    let limit = extends.then(|| {
        let imgs = &levels.last().expect("at least one radius").images;
        let mut c = vec![0.0; target.len()];
        for p in imgs {
            for (ck, pk) in c.iter_mut().zip(p) {
                *ck += pk;
            }
        }
        c.iter().map(|v| v / imgs.len() as f64).collect()
    });

    Ok(ClusterProbe {
        mapping: map.name(),
        boundary_point: target.to_vec(),
        levels,
        extends,
        limit,
        config: *cfg,
    })
}

/// Geometric radii `start, start/10, ...` down to `end` (inclusive, within rounding).
pub fn geometric_radii(start: f64, end: f64) -> Result<Vec<f64>> {
    if !(start > 0.0 && end > 0.0 && end <= start) {
        return Err(Error::InvalidParameter(format!(
            "radius range {start}:{end} must be positive and decreasing"
        )));
    }
    let steps = (start / end).log10().round() as i32;
    Ok((0..=steps).map(|k| start / 10f64.powi(k)).collect())
}
