use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use qcmod::curves::{ring_family, CurveFamily};
use qcmod::geometry::Annulus;
use qcmod::grid_modulus::{
    analytic_ring_modulus, solve_discrete_modulus, weak_flat_lower_bound, weak_flat_radius, Grid,
    GridDensity, RadialTestDensity, SolverOptions,
};
use qcmod::mappings::{lp_norm_q, mapping_by_name, RadialStretch};
use qcmod::verify::{
    check_minorization, cluster_probe, recenter_annulus, verify_general_inequality,
    verify_ring_inequality, weak_flatness_at, ClusterConfig, GridSpec, RadialWeight,
    RingCheckConfig, WeakFlatConfig,
};
use qcmod::{Error, Result};

use crate::output::Record;
use crate::parse;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discrete modulus of a radial ring family against the closed form
    ModulusRing(ModulusRingArgs),
    /// Ring inequality M(f(Γ)) ≤ ∫ Q η^n on an annulus
    VerifyRing(VerifyRingArgs),
    /// General inequality M(f(Γ)) ≤ ∫ Q ρ^n for a family read from JSON
    VerifyGeneral(VerifyGeneralArgs),
    /// L^p norm of the radial stretch dilatation on the unit ball
    Integrability(IntegrabilityArgs),
    /// Modulus growth of connecting families near a point
    Weakflat(WeakflatArgs),
    /// Recentered annulus chain, optionally with the modulus comparison
    Recenter(RecenterArgs),
    /// Cluster-set probe of a mapping at a boundary point
    Cluster(ClusterArgs),
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct SolverArgs {
    /// Relative duality-gap tolerance.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 20000)]
    pub max_iter: usize,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions { tol: self.tol, max_iter: self.max_iter }
    }
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct GridArgs {
    /// Cells per axis [default: 256 for n=2, 64 for n=3, 16 above].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Bounding-box padding, relative to the extent.
    #[arg(long, default_value_t = 0.05)]
    pub padding: f64,
}

impl GridArgs {
    fn resolve(&mut self, n: usize) -> GridSpec {
        let res = *self.grid.get_or_insert(GridSpec::default_for(n).resolution);
        GridSpec { resolution: res, padding: self.padding }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModulusRingArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long)]
    pub r1: f64,
    #[arg(long)]
    pub r2: f64,
    #[arg(long, default_value_t = 720)]
    pub curves: usize,
    /// Vertices per curve.
    #[arg(long, default_value_t = 64)]
    pub subdiv: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum EtaKind {
    /// 1/(r2 − r1) on [r1, r2]
    Step,
    /// 1/(r log(r2/r1)) on [r1, r2]
    Extremal,
    /// Piecewise linear through --eta-knots / --eta-values
    Tabulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum WeightKind {
    Constant,
    /// Radial stretch dilatation Q(|x|) for the given α and n
    Stretch,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyRingArgs {
    /// identity | radial | radial-inverse
    #[arg(long, default_value = "radial")]
    pub map: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long)]
    pub r1: f64,
    #[arg(long)]
    pub r2: f64,
    /// Annulus center as comma-separated coordinates [default: origin].
    #[arg(long)]
    pub center: Option<String>,
    #[arg(long, value_enum, default_value_t = EtaKind::Step)]
    pub eta: EtaKind,
    #[arg(long)]
    pub eta_knots: Option<String>,
    #[arg(long)]
    pub eta_values: Option<String>,
    #[arg(long, value_enum, default_value_t = WeightKind::Stretch)]
    pub q: WeightKind,
    /// Value of a constant Q.
    #[arg(long, default_value_t = 1.0)]
    pub q_value: f64,
    #[arg(long, default_value_t = 720)]
    pub curves: usize,
    #[arg(long, default_value_t = 64)]
    pub subdiv: usize,
    /// Vertices inserted per segment before mapping.
    #[arg(long, default_value_t = 0)]
    pub refine: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyGeneralArgs {
    /// identity | radial | radial-inverse
    #[arg(long, default_value = "identity")]
    pub map: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Curve family JSON: {"label", "n", "curves": [[[x, ...], ...], ...]}.
    #[arg(long)]
    pub family: PathBuf,
    /// Grid density JSON for Q; a constant --q-value is used when absent.
    #[arg(long)]
    pub q: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub q_value: f64,
    /// Admissible grid density JSON; the source-side extremal density is
    /// computed when absent.
    #[arg(long)]
    pub rho: Option<PathBuf>,
    /// Cells per axis of the source grid when neither --q nor --rho fixes it.
    #[arg(long)]
    pub source_grid: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IntegrabilityArgs {
    /// One value or a comma-separated sweep.
    #[arg(long)]
    pub alpha: String,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WeakflatArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Center as comma-separated coordinates [default: origin].
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    pub eps0: f64,
    /// Target lower bound P; requires --c-n.
    #[arg(long)]
    pub p: Option<f64>,
    /// Constant in the bound c_n log(eps0/eps).
    #[arg(long)]
    pub c_n: Option<f64>,
    /// Inner radius; overrides the radius derived from --p.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub curves: usize,
    /// Sample points per continuum.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.1)]
    pub jitter: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RecenterArgs {
    #[arg(long, default_value = "0,0")]
    pub x1: String,
    #[arg(long)]
    pub eps1: f64,
    #[arg(long)]
    pub eps1_star: f64,
    /// Sphere samples per inclusion check.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Also compare the moduli of the two ring families.
    #[arg(long)]
    pub minorization: bool,
    #[arg(long, default_value_t = 360)]
    pub curves: usize,
    #[arg(long, default_value_t = 64)]
    pub subdiv: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClusterArgs {
    /// identity | radial | radial-inverse
    #[arg(long)]
    pub map: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// origin | e1 | e2 | comma-separated coordinates
    #[arg(long)]
    pub target: String,
    /// `start:end` (factor-10 steps) or a comma-separated decreasing list.
    #[arg(long, default_value = "1e-2:1e-6")]
    pub radii: String,
    #[arg(long, default_value_t = 64)]
    pub dirs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub cutoff: f64,
    /// Radii in the trailing non-increasing run.
    #[arg(long, default_value_t = 3)]
    pub trend: usize,
}

/// Resolved configuration echoed into every report.
#[derive(Serialize)]
struct Resolved<'a, T: Serialize> {
    seed: u64,
    #[serde(flatten)]
    args: &'a T,
}

fn record<T: Serialize>(
    command: &'static str,
    seed: u64,
    args: &T,
    report: &impl Serialize,
    converged: bool,
) -> Record {
    Record::new(command, &Resolved { seed, args }, report, converged)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("cannot parse {}: {e}", path.display())))
}

fn read_density(path: &Path) -> Result<GridDensity> {
    let raw: GridDensity = read_json(path)?;
    let grid = Grid::new(raw.grid.lo().to_vec(), raw.grid.hi().to_vec(), raw.grid.resolution().to_vec())?;
    GridDensity::new(grid, raw.values().to_vec())
}

fn positive_count(name: &str, v: usize) -> Result<()> {
    if v == 0 {
        return Err(Error::InvalidParameter(format!("--{name} must be positive")));
    }
    Ok(())
}

pub fn run(cmd: Command, seed: u64) -> Result<Vec<Record>> {
    match cmd {
        Command::ModulusRing(a) => modulus_ring(a, seed),
        Command::VerifyRing(a) => verify_ring(a, seed),
        Command::VerifyGeneral(a) => verify_general(a, seed),
        Command::Integrability(a) => integrability(a, seed),
        Command::Weakflat(a) => weakflat(a, seed),
        Command::Recenter(a) => recenter(a, seed),
        Command::Cluster(a) => cluster(a, seed),
    }
}

fn modulus_ring(mut a: ModulusRingArgs, seed: u64) -> Result<Vec<Record>> {
    positive_count("curves", a.curves)?;
    let analytic = analytic_ring_modulus(a.n, a.r1, a.r2)?;
    let spec = a.grid.resolve(a.n);
    let fam = ring_family(&Annulus::centered(a.n, a.r1, a.r2)?, a.curves, a.subdiv)?;
    let grid = spec.fit(&fam)?;
    let sol = solve_discrete_modulus(&fam, &grid, a.n, &a.solver.options())?;
    let report = json!({
        "analytic": analytic,
        "discrete": sol.estimate,
        "lower_bound": sol.lower_bound,
        "relative_error": sol.estimate.value / analytic - 1.0,
        "grid": grid,
    });
    Ok(vec![record("modulus-ring", seed, &a, &report, sol.estimate.converged)])
}

fn eta_of(a: &VerifyRingArgs, r1: f64, r2: f64) -> Result<RadialTestDensity> {
    let eta = match a.eta {
        EtaKind::Step => RadialTestDensity::Step { r1, r2 },
        EtaKind::Extremal => RadialTestDensity::Extremal { r1, r2 },
        EtaKind::Tabulated => {
            let (Some(k), Some(v)) = (&a.eta_knots, &a.eta_values) else {
                return Err(Error::InvalidParameter(
                    "--eta tabulated needs --eta-knots and --eta-values".into(),
                ));
            };
            RadialTestDensity::Tabulated { knots: parse::floats(k)?, values: parse::floats(v)? }
        }
    };
    eta.validate()?;
    Ok(eta)
}

fn verify_ring(mut a: VerifyRingArgs, seed: u64) -> Result<Vec<Record>> {
    positive_count("curves", a.curves)?;
    let map = mapping_by_name(&a.map, a.alpha, a.n)?;
    let center = match &a.center {
        Some(c) => parse::point(c, a.n)?,
        None => vec![0.0; a.n],
    };
    let ann = Annulus::new(center, a.r1, a.r2)?;
    let eta = eta_of(&a, a.r1, a.r2)?;
    let q = match a.q {
        WeightKind::Constant => RadialWeight::Constant { value: a.q_value },
        WeightKind::Stretch => {
            RadialStretch::new(a.alpha, a.n)?;
            RadialWeight::Stretch { alpha: a.alpha, n: a.n }
        }
    };
    let cfg = RingCheckConfig {
        subdiv: a.subdiv,
        refine: a.refine,
        grid: a.grid.resolve(a.n),
        solver: a.solver.options(),
    };
    let mut report = verify_ring_inequality(map.as_ref(), &q, &ann, &eta, a.curves, &cfg)?;
    report.metadata.seed = seed;
    let converged = report.lhs.converged;
    Ok(vec![record("verify-ring", seed, &a, &report, converged)])
}

fn verify_general(mut a: VerifyGeneralArgs, seed: u64) -> Result<Vec<Record>> {
    let fam: CurveFamily = read_json(&a.family)?;
    let n = fam.dim();
    let map = mapping_by_name(&a.map, a.alpha, n)?;
    let q_file = a.q.as_deref().map(read_density).transpose()?;
    let rho_file = a.rho.as_deref().map(read_density).transpose()?;
    let solver = a.solver.options();

    let source_grid = match (&q_file, &rho_file) {
        (_, Some(r)) => r.grid.clone(),
        (Some(q), None) => q.grid.clone(),
        (None, None) => {
            let res = *a.source_grid.get_or_insert(GridSpec::default_for(n).resolution);
            GridSpec { resolution: res, padding: a.grid.padding }.fit(&fam)?
        }
    };
    let mut source_converged = true;
    let rho = match rho_file {
        Some(r) => r,
        None => {
            let sol = solve_discrete_modulus(&fam, &source_grid, n, &solver)?;
            source_converged = sol.estimate.converged;
            sol.density
        }
    };
    let q = match q_file {
        Some(q) => q,
        None => GridDensity::from_fn(source_grid.clone(), |_| a.q_value)?,
    };
    let image_spec = a.grid.resolve(n);
    let mut report = verify_general_inequality(map.as_ref(), &q, &fam, &rho, &image_spec, &solver)?;
    report.metadata.seed = seed;
    let converged = report.lhs.converged && source_converged;
    let out = json!({ "source_grid": source_grid, "verification": report });
    Ok(vec![record("verify-general", seed, &a, &out, converged)])
}

fn integrability(a: IntegrabilityArgs, seed: u64) -> Result<Vec<Record>> {
    let alphas = parse::floats(&a.alpha)?;
    alphas
        .iter()
        .map(|&alpha| {
            let m = RadialStretch::new(alpha, a.n)?;
            let norm = lp_norm_q(&m, a.p)?;
            let cfg = json!({ "alpha": alpha, "p": a.p, "n": a.n });
            Ok(record("integrability", seed, &cfg, &norm, true))
        })
        .collect()
}

fn weakflat(mut a: WeakflatArgs, seed: u64) -> Result<Vec<Record>> {
    positive_count("curves", a.curves)?;
    let x0 = match &a.x0 {
        Some(s) => parse::point(s, a.n)?,
        None => vec![0.0; a.n],
    };
    if let Some(c) = a.c_n {
        if !(c > 0.0) {
            return Err(Error::InvalidParameter("--c-n must be positive".into()));
        }
    }
    let eps = match (a.eps, a.p, a.c_n) {
        (Some(e), _, _) => e,
        (None, Some(p), Some(c)) if p > 0.0 => weak_flat_radius(c, a.eps0, p),
        (None, Some(_), Some(_)) => return Err(Error::InvalidParameter("--p must be positive".into())),
        _ => {
            return Err(Error::InvalidParameter(
                "give --eps, or --p together with --c-n".into(),
            ))
        }
    };
    let cfg = WeakFlatConfig {
        continuum_samples: a.samples,
        jitter: a.jitter,
        seed,
        grid: a.grid.resolve(a.n),
        solver: a.solver.options(),
    };
    let est = weak_flatness_at(&x0, a.eps0, eps, a.curves, &cfg)?;
    let bound = a.c_n.map(|c| weak_flat_lower_bound(c, a.eps0, eps));
    let report = json!({ "x0": x0, "eps0": a.eps0, "eps": eps, "bound": bound, "discrete": est });
    Ok(vec![record("weakflat", seed, &a, &report, est.converged)])
}

fn recenter(mut a: RecenterArgs, seed: u64) -> Result<Vec<Record>> {
    let x1 = parse::floats(&a.x1)?;
    let rep = recenter_annulus(&x1, a.eps1, a.eps1_star, a.samples)?;
    let (minor, converged) = if a.minorization {
        positive_count("curves", a.curves)?;
        let res = a.grid.resolve(x1.len()).resolution;
        let m = check_minorization(&rep, a.curves, a.subdiv, res, &a.solver.options())?;
        let c = m.outer.converged && m.inner.converged;
        (Some(m), c)
    } else {
        (None, true)
    };
    let report = json!({ "recenter": rep, "minorization": minor });
    Ok(vec![record("recenter", seed, &a, &report, converged)])
}

fn cluster(a: ClusterArgs, seed: u64) -> Result<Vec<Record>> {
    let map = mapping_by_name(&a.map, a.alpha, a.n)?;
    let target = parse::target(&a.target, a.alpha, a.n)?;
    let radii = parse::radii(&a.radii)?;
    let cfg = ClusterConfig { dirs: a.dirs, oscillation_cutoff: a.cutoff, trend_radii: a.trend };
    let probe = cluster_probe(map.as_ref(), &target, &radii, &cfg)?;
    let mut resolved = serde_json::to_value(&a).expect("args serialize");
    resolved["target_point"] = json!(target);
    resolved["radii_list"] = json!(radii);
    Ok(vec![record("cluster", seed, &resolved, &probe, true)])
}
