use std::f64::consts::PI;

use magnon_core::lattice::{CouplingSet, LatticeSpec, MomentumGrid};
use magnon_core::oracle::{
    build_gibbs, convergence_study, eeb_margin, fluctuation_two_point, GibbsMode, SpinConfig,
};
use magnon_core::Error;

fn chain(l: usize, j: f64, j3: f64, h: f64) -> (LatticeSpec, CouplingSet) {
    (LatticeSpec::new(1, l).unwrap(), CouplingSet::nearest_neighbor(1, j, j3, h).unwrap())
}

#[test]
fn translation_invariant_on_three_sites() {
    let (lattice, c) = chain(3, 0.7, 1.0, 0.9);
    let g = build_gibbs(&SpinConfig::new(5, lattice, c).unwrap(), 1.3, GibbsMode::Sector).unwrap();
    let m0 = g.site_s3(0);
    for x in 1..3 {
        assert!((g.site_s3(x) - m0).abs() < 1e-12);
        assert!((g.plus_minus(x, (x + 1) % 3) - g.plus_minus(0, 1)).abs() < 1e-12);
    }
}

#[test]
fn site_average_fluctuations_shrink_with_copies() {
    let (lattice, c) = chain(2, 1.0, 1.0, 1.0);
    let variances: Vec<f64> = [1u32, 5, 9]
        .iter()
        .map(|&n| {
            let g = build_gibbs(&SpinConfig::new(n, lattice, c.clone()).unwrap(), 0.5, GibbsMode::Sector).unwrap();
            g.site_average_variance(0)
        })
        .collect();
    assert!(variances.windows(2).all(|w| w[1] < w[0]), "{variances:?}");
    assert!(variances[2] < 0.5 * variances[0]);
}

#[test]
fn two_point_function_is_nonnegative_and_sums_to_density() {
    let (lattice, c) = chain(3, 1.0, 1.0, 0.6);
    let grid = MomentumGrid::new(lattice);
    let g = build_gibbs(&SpinConfig::new(3, lattice, c).unwrap(), 2.0, GibbsMode::Sector).unwrap();
    let values: Vec<f64> = grid.points().iter().map(|q| fluctuation_two_point(&g, q)).collect();
    assert!(values.iter().all(|&t| t >= -1e-14));
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let local = (0..3).map(|x| g.plus_minus(x, x)).sum::<f64>() / (3.0 * 3.0);
    assert!((mean - local).abs() < 1e-12);
}

#[test]
fn eeb_holds_on_anisotropic_square() {
    let lattice = LatticeSpec::new(2, 2).unwrap();
    let c = CouplingSet::nearest_neighbor(2, 0.4, 1.0, 1.7).unwrap();
    let grid = MomentumGrid::new(lattice);
    for mode in [GibbsMode::Sector, GibbsMode::FullTensor] {
        let g = build_gibbs(&SpinConfig::new(1, lattice, c.clone()).unwrap(), 1.1, mode).unwrap();
        for q in grid.points() {
            let e = eeb_margin(&g, q);
            assert!(e.minus.holds(1e-9) && e.plus.holds(1e-9), "{e:?}");
        }
    }
}

#[test]
fn low_temperature_ensemble_is_polarized() {
    let (lattice, c) = chain(2, 1.0, 1.0, 2.5);
    let g = build_gibbs(&SpinConfig::new(3, lattice, c).unwrap(), 20.0, GibbsMode::Sector).unwrap();
    assert!((g.magnetization() + 1.0).abs() < 1e-12);
}

#[test]
fn convergence_table_shapes() {
    let (lattice, c) = chain(2, 1.0, 1.0, 2.5);
    let t = convergence_study(&lattice, &c, &[3], 1.0, &[PI], GibbsMode::Sector).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert!(t.strictly_decreasing());
    let r = t.rows[0];
    assert!((-1.0..=0.0).contains(&r.m_n));
    assert!((r.discrepancy - (r.t_n - r.p_n).abs()).abs() == 0.0);
}

#[test]
fn infeasible_requests_are_refused() {
    let (lattice, c) = chain(2, 1.0, 1.0, 2.5);
    assert!(matches!(SpinConfig::new(4, lattice, c.clone()), Err(Error::Parameter(_))));
    let big = LatticeSpec::new(1, 8).unwrap();
    let cfg = SpinConfig::new(3, big, CouplingSet::nearest_neighbor(1, 1.0, 1.0, 1.0).unwrap()).unwrap();
    assert!(matches!(build_gibbs(&cfg, 1.0, GibbsMode::FullTensor), Err(Error::DimensionCap { .. })));
}
