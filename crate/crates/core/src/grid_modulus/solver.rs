//! Discrete modulus of a sampled curve family:
//!
//! ```text
//! minimize   Σ_c ρ_c^n |c|
//! subject to Σ_c ρ_c ℓ_i(c) ≥ 1  for every curve i,   ρ ≥ 0
//! ```
//!
//! The program is solved through its Lagrangian. For multipliers `λ ≥ 0` the
//! inner minimization over `ρ ≥ 0` is explicit,
//! `ρ_c(λ) = (s_c / (n |c|))^(1/(n-1))` with `s = Lᵀλ`, and the dual function
//! `g(λ) = Σλ − (n−1) |c| Σ ρ_c(λ)^n` has (sub)gradient `1 − Lρ(λ)`.
//! The multipliers follow an accelerated projected ascent: the first step is
//! Polyak's `(best primal − g) / |∇g|²`, later steps are found by
//! backtracking, and each update is projected back onto `λ ≥ 0`. Every
//! evaluated `ρ(λ)` is rescaled until all constraints hold, which certifies an
//! upper bound; `g(λ)` certifies a lower bound. The solve stops once the
//! relative gap between the two is below `tol`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::CurveFamily;
use crate::error::{Error, Result};
use crate::grid_modulus::grid::{Grid, GridDensity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative duality gap at which the solve stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-4,
            max_iter: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest constraint violation `max_i (1 − ∫_γi ρ)` of the returned density.
    pub residual: f64,
}

/// Estimate together with its certificates.
#[derive(Debug, Clone)]
pub struct ModulusSolution {
    pub estimate: ModulusEstimate,
    /// Admissible density attaining `estimate.value`.
    pub density: GridDensity,
    /// Dual lower bound on the discrete modulus of the sampled family.
    pub lower_bound: f64,
}

/// Sparse curve/cell incidence restricted to cells that some curve visits.
struct Incidence {
    /// Global index of each active cell.
    cells: Vec<u32>,
    /// Per curve: (active cell, length inside it).
    rows: Vec<Vec<(u32, f64)>>,
    /// Per active cell: (curve, length).
    cols: Vec<Vec<(u32, f64)>>,
}

impl Incidence {
    fn build(fam: &CurveFamily, grid: &Grid) -> Result<Self> {
        let clipped = fam
            .curves()
            .par_iter()
            .enumerate()
            .map(|(i, c)| grid.clip(c).ok_or(Error::CurveExitsGrid { curve: i }))
            .collect::<Result<Vec<_>>>()?;
        let mut cells: Vec<u32> = clipped.iter().flatten().map(|e| e.0).collect();
        cells.sort_unstable();
        cells.dedup();
        let local = |g: u32| cells.binary_search(&g).expect("cell is active") as u32;
        let rows: Vec<Vec<(u32, f64)>> = clipped
            .iter()
            .map(|r| r.iter().map(|&(g, l)| (local(g), l)).collect())
            .collect();
        let mut cols = vec![Vec::new(); cells.len()];
        for (i, r) in rows.iter().enumerate() {
            for &(c, l) in r {
                cols[c as usize].push((i as u32, l));
            }
        }
        Ok(Incidence { cells, rows, cols })
    }
}

const CHUNK: usize = 2048;
const STEP_SHRINK: f64 = 0.5;
const STEP_GROW: f64 = 1.25;

/// Order-stable parallel sum.
fn stable_sum(xs: &[f64]) -> f64 {
    xs.par_chunks(CHUNK)
        .map(|c| c.iter().sum::<f64>())
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

struct State<'a> {
    inc: &'a Incidence,
    exponent: f64,
    /// `n |c|`
    scale: f64,
    rho: Vec<f64>,
    /// `Lρ`
    integrals: Vec<f64>,
}

impl State<'_> {
    fn update(&mut self, lambda: &[f64]) {
        let (exp, scale) = (self.exponent, self.scale);
        let inv = 1.0 / (exp - 1.0);
        self.rho
            .par_iter_mut()
            .zip(self.inc.cols.par_iter())
            .for_each(|(r, col)| {
                let s: f64 = col.iter().map(|&(i, l)| lambda[i as usize] * l).sum();
                *r = if s > 0.0 { (s / scale).powf(inv) } else { 0.0 };
            });
        let rho = &self.rho;
        self.integrals
            .par_iter_mut()
            .zip(self.inc.rows.par_iter())
            .for_each(|(t, row)| {
                *t = row.iter().map(|&(c, l)| rho[c as usize] * l).sum();
            });
    }

    fn energy_sum(&self) -> f64 {
        let p: Vec<f64> = self.rho.par_iter().map(|r| r.powf(self.exponent)).collect();
        stable_sum(&p)
    }
}

/// Best admissible density seen so far and the best dual value.
struct Incumbent {
    upper: f64,
    lower: f64,
    rho: Vec<f64>,
    scale: f64,
}

impl Incumbent {
    /// Record the dual value at `lambda` and the rescaled primal candidate
    /// `ρ(λ)`; returns the dual value.
    fn observe(&mut self, st: &State, lambda: &[f64], vol: f64, p: f64) -> f64 {
        let energy = vol * st.energy_sum();
        let dual = stable_sum(lambda) - (p - 1.0) * energy;
        self.lower = self.lower.max(dual);
        let min_int = st
            .integrals
            .par_iter()
            .cloned()
            .reduce(|| f64::INFINITY, f64::min);
        if min_int > 0.0 {
            let cand = energy / min_int.powf(p);
            if cand < self.upper {
                self.upper = cand;
                self.rho.copy_from_slice(&st.rho);
                self.scale = 1.0 / min_int;
            }
        }
        dual
    }

    fn gap_closed(&self, tol: f64) -> bool {
        self.upper - self.lower <= tol * self.upper
    }
}

/// Discrete modulus of `fam` on `grid` with exponent `n`.
pub fn discrete_modulus(
    fam: &CurveFamily,
    grid: &Grid,
    exponent: usize,
    opts: &SolverOptions,
) -> Result<ModulusEstimate> {
    solve_discrete_modulus(fam, grid, exponent, opts).map(|s| s.estimate)
}

/// As [`discrete_modulus`], also returning the extremal density and the dual bound.
pub fn solve_discrete_modulus(
    fam: &CurveFamily,
    grid: &Grid,
    exponent: usize,
    opts: &SolverOptions,
) -> Result<ModulusSolution> {
    if exponent < 2 {
        return Err(Error::InvalidParameter(format!(
            "exponent must be at least 2, got {exponent}"
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    if !fam.is_empty() && fam.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: fam.dim(),
        });
    }
    if fam.is_empty() {
        return Ok(ModulusSolution {
            estimate: ModulusEstimate {
                value: 0.0,
                iterations: 0,
                converged: true,
                residual: 0.0,
            },
            density: GridDensity::zeros(grid.clone()),
            lower_bound: 0.0,
        });
    }

    let inc = Incidence::build(fam, grid)?;
    let vol = grid.cell_volume();
    let p = exponent as f64;
    let k = inc.rows.len();
    let mut st = State {
        inc: &inc,
        exponent: p,
        scale: p * vol,
        rho: vec![0.0; inc.cells.len()],
        integrals: vec![0.0; k],
    };

    // Incumbent: the uniform density, rescaled to be admissible.
    let min_len = inc
        .rows
        .iter()
        .map(|r| r.iter().map(|e| e.1).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let mut inc_best = Incumbent {
        upper: vol * inc.cells.len() as f64 * min_len.powf(-p),
        lower: 0.0,
        rho: vec![1.0; inc.cells.len()],
        scale: 1.0 / min_len,
    };

    // Multipliers start at the best constant vector, found in closed form.
    let mut x = vec![1.0; k];
    st.update(&x);
    let e1 = st.energy_sum();
    let c = (k as f64 / (p * vol * e1)).powf(p - 1.0);
    x.iter_mut().for_each(|l| *l = c);

    // Accelerated projected ascent on the dual: `x` is the iterate, `y` the
    // extrapolated point, both kept in λ ≥ 0.
    let mut y = x.clone();
    let mut trial = vec![0.0; k];
    let mut grad = vec![0.0; k];
    let mut theta = 1.0f64;
    let mut step: Option<f64> = None;
    let mut dual_x = f64::NEG_INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        st.update(&y);
        let dual_y = inc_best.observe(&st, &y, vol, p);
        if inc_best.gap_closed(opts.tol) {
            converged = true;
            break;
        }
        grad.par_iter_mut()
            .zip(st.integrals.par_iter())
            .for_each(|(g, t)| *g = 1.0 - t);

        // first trial step is Polyak's, aimed at the best certified primal value
        let mut t = match step {
            Some(t) => t * STEP_GROW,
            None => {
                let sq: Vec<f64> = grad.par_iter().map(|g| g * g).collect();
                let g2 = stable_sum(&sq);
                if g2 == 0.0 {
                    break;
                }
                (inc_best.upper - dual_y) / g2
            }
        };
        // backtrack until the quadratic model under-estimates the ascent
        let dual_new = loop {
            trial
                .par_iter_mut()
                .zip(y.par_iter().zip(grad.par_iter()))
                .for_each(|(z, (yv, g))| *z = (yv + t * g).max(0.0));
            st.update(&trial);
            let d = inc_best.observe(&st, &trial, vol, p);
            let model: Vec<f64> = trial
                .par_iter()
                .zip(y.par_iter().zip(grad.par_iter()))
                .map(|(z, (yv, g))| {
                    let dz = z - yv;
                    g * dz - dz * dz / (2.0 * t)
                })
                .collect();
            if d >= dual_y + stable_sum(&model) - 1e-14 * dual_y.abs() || t < f64::MIN_POSITIVE {
                break d;
            }
            t *= STEP_SHRINK;
        };
        step = Some(t);

        if dual_new < dual_x {
            theta = 1.0;
            y.copy_from_slice(&trial);
        } else {
            let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            let beta = (theta - 1.0) / theta_next;
            y.par_iter_mut()
                .zip(trial.par_iter().zip(x.par_iter()))
                .for_each(|(yv, (z, xv))| *yv = (z + beta * (z - xv)).max(0.0));
            theta = theta_next;
        }
        x.copy_from_slice(&trial);
        dual_x = dual_new;
        if inc_best.gap_closed(opts.tol) {
            converged = true;
            break;
        }
    }
    let Incumbent { upper, lower, rho: best_rho, scale: best_scale } = inc_best;

    let mut values = vec![0.0; grid.num_cells()];
    for (c, r) in inc.cells.iter().zip(&best_rho) {
        values[*c as usize] = r * best_scale;
    }
    let density = GridDensity::new(grid.clone(), values)?;
    let residual = inc
        .rows
        .iter()
        .map(|row| {
            let t: f64 = row.iter().map(|&(c, l)| best_rho[c as usize] * best_scale * l).sum();
            (1.0 - t).max(0.0)
        })
        .fold(0.0, f64::max);

    Ok(ModulusSolution {
        estimate: ModulusEstimate {
            value: upper,
            iterations,
            converged,
            residual,
        },
        density,
        lower_bound: lower.min(upper),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{ring_family, CurveFamily, Polyline};
    use crate::geometry::Annulus;
    use crate::grid_modulus::analytic_ring_modulus;

    fn ring(n: usize, count: usize) -> CurveFamily {
        ring_family(&Annulus::centered(n, 1.0, 2.0).unwrap(), count, 16).unwrap()
    }

    #[test]
    fn empty_family_has_zero_modulus() {
        let g = Grid::cube(&[0.0, 0.0], 1.0, 8).unwrap();
        let est = discrete_modulus(&CurveFamily::empty("none", 2), &g, 2, &SolverOptions::default()).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.converged);
    }

    #[test]
    fn curve_leaving_grid_is_reported() {
        let g = Grid::cube(&[0.0, 0.0], 1.0, 8).unwrap();
        let c = Polyline::new(vec![vec![0.0, 0.0], vec![3.0, 0.0]]).unwrap();
        let fam = CurveFamily::new("out", vec![c]).unwrap();
        let err = discrete_modulus(&fam, &g, 2, &SolverOptions::default()).unwrap_err();
        assert_eq!(err, Error::CurveExitsGrid { curve: 0 });
    }

    #[test]
    fn rejects_bad_options() {
        let fam = ring(2, 8);
        let g = Grid::cube(&[0.0, 0.0], 2.1, 16).unwrap();
        assert!(discrete_modulus(&fam, &g, 1, &SolverOptions::default()).is_err());
        let bad = SolverOptions { tol: 0.0, ..SolverOptions::default() };
        assert!(discrete_modulus(&fam, &g, 2, &bad).is_err());
    }

    #[test]
    fn single_segment_matches_closed_form() {
        // one straight curve of length L: optimum is L^(1-n) spread along it
        let g = Grid::uniform(vec![0.0, 0.0], vec![1.0, 1.0], 16).unwrap();
        let c = Polyline::new(vec![vec![0.0, 0.53], vec![1.0, 0.53]]).unwrap();
        let fam = CurveFamily::new("one", vec![c]).unwrap();
        let est = discrete_modulus(&fam, &g, 2, &SolverOptions::default()).unwrap();
        // row of 16 cells of area h^2, rho = 1: energy = 16 h^2 = 1/16
        assert!((est.value - 1.0 / 16.0).abs() < 1e-4 / 16.0 * 2.0, "{}", est.value);
    }

    #[test]
    fn solution_is_admissible() {
        let fam = ring(2, 48);
        let g = Grid::cube(&[0.0, 0.0], 2.1, 48).unwrap();
        let sol = solve_discrete_modulus(&fam, &g, 2, &SolverOptions::default()).unwrap();
        assert!(sol.estimate.converged);
        assert_eq!(sol.estimate.residual, 0.0);
        assert!(sol.density.min_line_integral(&fam).unwrap() >= 1.0 - 1e-12);
        assert!((sol.density.energy(2.0) - sol.estimate.value).abs() < 1e-9 * sol.estimate.value);
        assert!(sol.lower_bound <= sol.estimate.value);
        assert!(sol.estimate.value - sol.lower_bound <= 1e-4 * sol.estimate.value * 1.01);
    }

    #[test]
    fn duplication_does_not_change_value() {
        let fam = ring(2, 40);
        let g = Grid::cube(&[0.0, 0.0], 2.1, 40).unwrap();
        let opts = SolverOptions::default();
        let a = discrete_modulus(&fam, &g, 2, &opts).unwrap().value;
        let b = discrete_modulus(&fam.duplicated(3), &g, 2, &opts).unwrap().value;
        assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
    }

    #[test]
    fn three_dimensional_ring() {
        let fam = ring(3, 1000);
        let g = Grid::cube(&[0.0, 0.0, 0.0], 2.1, 24).unwrap();
        let est = discrete_modulus(&fam, &g, 3, &SolverOptions::default()).unwrap();
        let exact = analytic_ring_modulus(3, 1.0, 2.0).unwrap();
        assert!(est.converged);
        // family dense enough to hit every shell cell
        assert!((est.value / exact - 1.0).abs() < 0.15, "{} vs {exact}", est.value);
    }
}
