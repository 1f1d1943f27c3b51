use serde::{Deserialize, Serialize};

use crate::curves::{CurveFamily, Polyline};
use crate::error::{Error, Result};
use crate::geometry::euclid;

pub const MIN_RESOLUTION: usize = 8;

/// Axis-aligned box split into `resolution[k]` equal cells along axis `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    resolution: Vec<usize>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        let n = lo.len();
        if n < 2 {
            return Err(Error::BadDimension(n));
        }
        if hi.len() != n || resolution.len() != n {
            return Err(Error::InvalidGrid("bounds and resolution differ in dimension".into()));
        }
        for k in 0..n {
            if !(lo[k].is_finite() && hi[k].is_finite() && lo[k] < hi[k]) {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: need lo < hi, got [{}, {}]",
                    lo[k], hi[k]
                )));
            }
            if resolution[k] < MIN_RESOLUTION {
                return Err(Error::InvalidGrid(format!(
                    "axis {k}: resolution {} below {MIN_RESOLUTION}",
                    resolution[k]
                )));
            }
        }
        let cells: Option<usize> = resolution.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r));
        if cells.is_none_or(|c| c > u32::MAX as usize) {
            return Err(Error::InvalidGrid("too many cells".into()));
        }
        Ok(Grid { lo, hi, resolution })
    }

    /// Same resolution on every axis.
    pub fn uniform(lo: Vec<f64>, hi: Vec<f64>, resolution: usize) -> Result<Self> {
        let n = lo.len();
        Grid::new(lo, hi, vec![resolution; n])
    }

    /// Cube `center ± half_width`.
    pub fn cube(center: &[f64], half_width: f64, resolution: usize) -> Result<Self> {
        Grid::uniform(
            center.iter().map(|c| c - half_width).collect(),
            center.iter().map(|c| c + half_width).collect(),
            resolution,
        )
    }

    /// Bounding box of the family, padded by `padding` times its extent on
    /// each side. Degenerate axes get the largest extent.
    pub fn fit(fam: &CurveFamily, padding: f64, resolution: usize) -> Result<Self> {
        let (lo, hi) = fam
            .bounding_box()
            .ok_or_else(|| Error::InvalidGrid("cannot fit a grid to an empty family".into()))?;
        let widest = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
        if widest <= 0.0 {
            return Err(Error::InvalidGrid("family is a single point".into()));
        }
        let (mut glo, mut ghi) = (Vec::new(), Vec::new());
        for (a, b) in lo.iter().zip(&hi) {
            let w = b - a;
            let (a, b, w) = if w < 1e-9 * widest {
                let m = 0.5 * (a + b);
                (m - 0.5 * widest, m + 0.5 * widest, widest)
            } else {
                (*a, *b, w)
            };
            glo.push(a - padding * w);
            ghi.push(b + padding * w);
        }
        Grid::uniform(glo, ghi, resolution)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn edge(&self, k: usize) -> f64 {
        (self.hi[k] - self.lo[k]) / self.resolution[k] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.edge(k)).product()
    }

    pub fn num_cells(&self) -> usize {
        self.resolution.iter().product()
    }

    /// Flat index of the cell containing `x`; points on the outer faces are
    /// assigned to the boundary cells.
    pub fn locate(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        for k in (0..self.dim()).rev() {
            let j = ((x[k] - self.lo[k]) / self.edge(k)).floor();
            let j = (j.max(0.0) as usize).min(self.resolution[k] - 1);
            idx = idx * self.resolution[k] + j;
        }
        idx
    }

    pub fn cell_center(&self, mut idx: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        for (k, ck) in c.iter_mut().enumerate() {
            let j = idx % self.resolution[k];
            idx /= self.resolution[k];
            *ck = self.lo[k] + (j as f64 + 0.5) * self.edge(k);
        }
        c
    }

    fn contains(&self, x: &[f64]) -> bool {
        (0..self.dim()).all(|k| {
            let slack = 1e-9 * (self.hi[k] - self.lo[k]);
            x[k] >= self.lo[k] - slack && x[k] <= self.hi[k] + slack
        })
    }

    /// Length of the polyline inside each cell, by exact clipping against the
    /// cell faces. Sorted by cell index, one entry per cell.
    pub fn clip(&self, curve: &Polyline) -> Option<Vec<(u32, f64)>> {
        let n = self.dim();
        if curve.dim() != n || !curve.vertices().all(|v| self.contains(v)) {
            return None;
        }
        let mut out: Vec<(u32, f64)> = Vec::new();
        let mut ts: Vec<f64> = Vec::new();
        let mut mid = vec![0.0; n];
        for (a, b) in curve.segments() {
            let len = euclid(a, b);
            ts.clear();
            ts.push(0.0);
            ts.push(1.0);
            for k in 0..n {
                let d = b[k] - a[k];
                if d == 0.0 {
                    continue;
                }
                let h = self.edge(k);
                let (lo, hi) = if d > 0.0 { (a[k], b[k]) } else { (b[k], a[k]) };
                let first = ((lo - self.lo[k]) / h).ceil() as i64;
                let last = ((hi - self.lo[k]) / h).floor() as i64;
                for j in first.max(0)..=last.min(self.resolution[k] as i64) {
                    let t = (self.lo[k] + j as f64 * h - a[k]) / d;
                    if t > 0.0 && t < 1.0 {
                        ts.push(t);
                    }
                }
            }
            ts.sort_by(f64::total_cmp);
            for w in ts.windows(2) {
                let dt = w[1] - w[0];
                if dt <= 0.0 {
                    continue;
                }
                let tm = 0.5 * (w[0] + w[1]);
                for k in 0..n {
                    mid[k] = a[k] + tm * (b[k] - a[k]);
                }
                out.push((self.locate(&mid) as u32, dt * len));
            }
        }
        out.sort_by_key(|e| e.0);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(out.len());
        for (c, l) in out {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += l,
                _ => merged.push((c, l)),
            }
        }
        Some(merged)
    }
}

/// Nonnegative piecewise-constant density on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub grid: Grid,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_cells() {
            return Err(Error::InvalidGrid(format!(
                "density has {} values for {} cells",
                values.len(),
                grid.num_cells()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter(
                "density values must be finite and nonnegative".into(),
            ));
        }
        Ok(GridDensity { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.num_cells()];
        GridDensity { grid, values }
    }

    /// Sample `f` at cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.num_cells()).map(|i| f(&grid.cell_center(i))).collect();
        GridDensity::new(grid, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Σ_c ρ_c^p · |c|`.
    pub fn energy(&self, p: f64) -> f64 {
        self.values.iter().map(|v| v.powf(p)).sum::<f64>() * self.grid.cell_volume()
    }

    /// `Σ_c w_c ρ_c^p · |c|` for a weight on the same grid.
    pub fn weighted_energy(&self, weight: &GridDensity, p: f64) -> Result<f64> {
        if weight.grid != self.grid {
            return Err(Error::InvalidGrid("weight and density live on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&weight.values)
            .map(|(r, w)| if *r == 0.0 { 0.0 } else { w * r.powf(p) })
            .sum::<f64>()
            * self.grid.cell_volume())
    }

    /// `∫_γ ρ ds`, or `None` if the curve leaves the grid.
    pub fn line_integral(&self, curve: &Polyline) -> Option<f64> {
        self.grid
            .clip(curve)
            .map(|cells| cells.iter().map(|(c, l)| self.values[*c as usize] * l).sum())
    }

    pub fn scaled(&self, s: f64) -> GridDensity {
        GridDensity {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Smallest line integral over the family; `None` if a curve leaves the grid.
    pub fn min_line_integral(&self, fam: &CurveFamily) -> Option<f64> {
        fam.curves()
            .iter()
            .map(|c| self.line_integral(c))
            .try_fold(f64::INFINITY, |m, v| v.map(|v| m.min(v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid(res: usize) -> Grid {
        Grid::uniform(vec![0.0, 0.0], vec![1.0, 1.0], res).unwrap()
    }

    #[test]
    fn rejects_coarse_or_flat_grids() {
        assert!(Grid::uniform(vec![0.0, 0.0], vec![1.0, 1.0], 7).is_err());
        assert!(Grid::uniform(vec![0.0, 0.0], vec![1.0, 0.0], 8).is_err());
        assert!(Grid::uniform(vec![0.0], vec![1.0], 8).is_err());
    }

    #[test]
    fn clip_axis_segment() {
        let g = unit_grid(8);
        let c = Polyline::new(vec![vec![0.0, 0.3], vec![1.0, 0.3]]).unwrap();
        let cells = g.clip(&c).unwrap();
        assert_eq!(cells.len(), 8);
        for (_, l) in &cells {
            assert!((l - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn clip_diagonal_total_length() {
        let g = unit_grid(10);
        let c = Polyline::new(vec![vec![0.05, 0.02], vec![0.93, 0.71], vec![0.2, 0.9]]).unwrap();
        let cells = g.clip(&c).unwrap();
        let total: f64 = cells.iter().map(|e| e.1).sum();
        assert!((total - c.length()).abs() < 1e-13);
        assert!(cells.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn clip_diagonal_through_corners() {
        let g = unit_grid(8);
        let c = Polyline::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let cells = g.clip(&c).unwrap();
        assert_eq!(cells.len(), 8);
        for (i, (cell, l)) in cells.iter().enumerate() {
            assert_eq!(*cell as usize, i * 8 + i);
            assert!((l - 2f64.sqrt() / 8.0).abs() < 1e-14);
        }
    }

    #[test]
    fn clip_outside_is_none() {
        let g = unit_grid(8);
        let c = Polyline::new(vec![vec![0.5, 0.5], vec![1.5, 0.5]]).unwrap();
        assert!(g.clip(&c).is_none());
    }

    #[test]
    fn locate_and_center_agree() {
        let g = Grid::new(vec![-1.0, 0.0, 2.0], vec![1.0, 3.0, 4.0], vec![8, 9, 10]).unwrap();
        for idx in [0, 17, 300, g.num_cells() - 1] {
            assert_eq!(g.locate(&g.cell_center(idx)), idx);
        }
    }

    #[test]
    fn density_validation_and_energy() {
        let g = unit_grid(8);
        assert!(GridDensity::new(g.clone(), vec![1.0; 3]).is_err());
        assert!(GridDensity::new(g.clone(), vec![-1.0; 64]).is_err());
        let d = GridDensity::new(g.clone(), vec![2.0; 64]).unwrap();
        assert!((d.energy(2.0) - 4.0).abs() < 1e-12);
        let c = Polyline::new(vec![vec![0.0, 0.5], vec![1.0, 0.5]]).unwrap();
        assert!((d.line_integral(&c).unwrap() - 2.0).abs() < 1e-14);
    }
}
