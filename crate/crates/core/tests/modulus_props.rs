use proptest::prelude::*;
use proptest::test_runner::Config;
use qcmod::curves::{connecting_family, ring_family, ConnectOptions, CurveFamily, Polyline};
use qcmod::geometry::{Annulus, PointSet};
use qcmod::grid_modulus::{
    analytic_ring_modulus, discrete_modulus, rhs_integral, solve_discrete_modulus, Grid,
    RadialTestDensity, SolverOptions,
};
use qcmod::mappings::{RadialInverse, RadialStretch};
use qcmod::verify::{cluster_probe, geometric_radii, recenter_annulus, satisfied_with_slack, ClusterConfig};

const TOL: f64 = 1e-4;

fn opts() -> SolverOptions {
    SolverOptions { tol: TOL, ..SolverOptions::default() }
}

/// Seeded family joining two short vertical segments, with a 64^2 grid around it.
fn small_instance(seed: u64, count: usize) -> (CurveFamily, Grid) {
    let e = PointSet::new(vec![vec![-1.0, -0.5], vec![-1.0, 0.0], vec![-1.0, 0.5]]).unwrap();
    let f = PointSet::new(vec![vec![1.0, -0.5], vec![1.0, 0.0], vec![1.0, 0.5]]).unwrap();
    let o = ConnectOptions { seed, vertices: 17, ..ConnectOptions::default() };
    let fam = connecting_family(&e, &f, &[], count, &o).unwrap();
    let grid = Grid::fit(&fam, 0.05, 64).unwrap();
    (fam, grid)
}

proptest! {
    #![proptest_config(Config::with_cases(24))]

    #[test]
    fn subfamily_does_not_increase(seed in any::<u64>(), count in 2usize..100, mask in any::<u64>()) {
        let (fam, grid) = small_instance(seed, count);
        let sub = fam.subfamily(|i| (mask >> (i % 64)) & 1 == 1 || i == 0);
        let full = discrete_modulus(&fam, &grid, 2, &opts()).unwrap().value;
        let part = discrete_modulus(&sub, &grid, 2, &opts()).unwrap().value;
        prop_assert!(part <= full + 2.0 * TOL * full, "{part} > {full}");
    }

    #[test]
    fn duplicates_leave_value_unchanged(seed in any::<u64>(), count in 1usize..50, times in 2usize..4) {
        let (fam, grid) = small_instance(seed, count);
        let a = discrete_modulus(&fam, &grid, 2, &opts()).unwrap().value;
        let b = discrete_modulus(&fam.duplicated(times), &grid, 2, &opts()).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
    }

    #[test]
    fn exit_density_is_admissible(seed in any::<u64>(), count in 1usize..100) {
        let (fam, grid) = small_instance(seed, count);
        let sol = solve_discrete_modulus(&fam, &grid, 2, &opts()).unwrap();
        prop_assert!(sol.estimate.converged);
        prop_assert!(sol.estimate.residual <= 1e-9);
        prop_assert!(sol.density.min_line_integral(&fam).unwrap() >= 1.0 - 1e-9);
        prop_assert!(sol.density.values().iter().all(|v| *v >= 0.0 && v.is_finite()));
    }

    #[test]
    fn fixed_seed_is_deterministic(seed in any::<u64>(), count in 1usize..60) {
        let (f1, g1) = small_instance(seed, count);
        let (f2, g2) = small_instance(seed, count);
        prop_assert_eq!(&f1, &f2);
        let a = solve_discrete_modulus(&f1, &g1, 2, &opts()).unwrap();
        let b = solve_discrete_modulus(&f2, &g2, 2, &opts()).unwrap();
        prop_assert_eq!(a.estimate, b.estimate);
        prop_assert_eq!(a.density, b.density);
    }

    #[test]
    fn longer_curves_are_cheaper(seed in any::<u64>(), count in 1usize..60, cut in 1usize..6) {
        // every full curve contains its own middle piece
        let (fam, grid) = small_instance(seed, count);
        let pieces: Vec<Polyline> = fam
            .curves()
            .iter()
            .map(|c| c.subrange(cut, c.num_vertices() - 1 - cut).unwrap())
            .collect();
        let inner = CurveFamily::new("pieces", pieces).unwrap();
        let m1 = discrete_modulus(&fam, &grid, 2, &opts()).unwrap().value;
        let m2 = discrete_modulus(&inner, &grid, 2, &opts()).unwrap().value;
        prop_assert!(m1 <= m2 + 2.0 * TOL * m2, "{m1} > {m2}");
    }

    // odd resolution keeps axis-aligned rays off cell boundaries
    #[test]
    fn dilation_invariance(scale in 0.05..20.0f64, count in 8usize..64) {
        let base = Annulus::centered(2, 1.0, 2.0).unwrap();
        let big = Annulus::centered(2, scale, 2.0 * scale).unwrap();
        let m1 = discrete_modulus(
            &ring_family(&base, count, 16).unwrap(),
            &Grid::cube(&[0.0, 0.0], 2.1, 47).unwrap(),
            2,
            &opts(),
        ).unwrap().value;
        let m2 = discrete_modulus(
            &ring_family(&big, count, 16).unwrap(),
            &Grid::cube(&[0.0, 0.0], 2.1 * scale, 47).unwrap(),
            2,
            &opts(),
        ).unwrap().value;
        prop_assert!((m1 - m2).abs() <= 2.0 * TOL * m1, "{m1} vs {m2}");
    }
}

proptest! {
    #[test]
    fn extremal_rhs_is_ring_modulus(n in 2usize..5, r1 in 0.01..3.0f64, ratio in 1.05..30.0f64) {
        let r2 = r1 * ratio;
        let a = Annulus::centered(n, r1, r2).unwrap();
        let rhs = rhs_integral(|_| 1.0, &RadialTestDensity::Extremal { r1, r2 }, &a, n).unwrap();
        let exact = analytic_ring_modulus(n, r1, r2).unwrap();
        prop_assert!((rhs - exact).abs() <= 1e-8 * exact.max(1.0));
    }

    #[test]
    fn recentered_radii_are_ordered(e1 in 1e-3..10.0f64, gap in 1e-3..50.0f64) {
        let r = recenter_annulus(&[0.1, -0.2, 0.3], e1, e1 + gap, 32).unwrap();
        prop_assert!(r.eps1 < r.eps_t1 && r.eps_t1 < r.eps_t2 && r.eps_t2 < r.eps1_star);
        prop_assert!(r.centers_checked);
    }

    #[test]
    fn inverse_oscillation_shrinks(a in 0.2..2.5f64, dirs in 8usize..64) {
        let m = RadialStretch::new(a, 2).unwrap();
        let radii = geometric_radii(1e-2, 1e-6).unwrap();
        let cfg = ClusterConfig { dirs, ..ClusterConfig::default() };
        let p = cluster_probe(&RadialInverse(m), &m.e2(), &radii, &cfg).unwrap();
        for w in p.levels.windows(2) {
            prop_assert!(w[1].oscillation <= 1.1 * w[0].oscillation);
        }
    }

    #[test]
    fn slack_rule(lhs in 0.0..10.0f64, rhs in 0.0..10.0f64) {
        prop_assert_eq!(satisfied_with_slack(lhs, rhs, TOL), lhs <= rhs + 2.0 * TOL * rhs);
    }
}
