use std::f64::consts::PI;

use magnon_core::lattice::{CouplingSet, LatticeSpec, MomentumGrid};
use magnon_core::spinwave::{
    selfconsistency_defect, solve_magnetization, ThermalParams, DEFAULT_SCAN_POINTS, DEFAULT_TOL,
};
use magnon_core::Error;

/// Neumaier-compensated mean of `-m / (e^{2β(h - mD)} - 1)` minus `(1+m)/2`.
fn compensated_defect(m: f64, beta: f64, h: f64, d: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &dq in d {
        let term = -m / (2.0 * beta * (h - m * dq)).exp_m1();
        let t = sum + term;
        comp += if sum.abs() >= term.abs() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
    }
    (sum + comp) / d.len() as f64 - 0.5 * (1.0 + m)
}

fn dense_root(beta: f64, h: f64, d: &[f64], points: usize) -> f64 {
    let x = |i: usize| -1.0 + i as f64 / points as f64;
    let mut prev = compensated_defect(x(0), beta, h, d);
    for i in 1..=points {
        let cur = compensated_defect(x(i), beta, h, d);
        if prev.signum() != cur.signum() {
            let (mut lo, mut hi) = (x(i - 1), x(i));
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if compensated_defect(mid, beta, h, d).signum() == prev.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev = cur;
    }
    panic!("no sign change");
}

fn chain_d(l: usize, j: f64, j3: f64) -> Vec<f64> {
    (0..l).map(|k| 2.0 * j3 - 2.0 * j * (2.0 * PI * k as f64 / l as f64).cos()).collect()
}

#[test]
fn defect_matches_independent_summation() {
    let grid = MomentumGrid::new(LatticeSpec::new(1, 8).unwrap());
    let c = CouplingSet::nearest_neighbor(1, 1.0, 1.0, 0.5).unwrap();
    let p = ThermalParams::new(2.0, 0.5).unwrap();
    let d = chain_d(8, 1.0, 1.0);
    for m in [-0.999, -0.9, -0.5, -0.1] {
        let lib = selfconsistency_defect(m, &p, &c, &grid).unwrap();
        let reference = compensated_defect(m, 2.0, 0.5, &d);
        assert!((lib - reference).abs() < 1e-14, "m = {m}: {lib} vs {reference}");
    }
}

#[test]
fn chain_solution_matches_dense_scan() {
    for (l, beta) in [(8, 2.0), (8, 0.5), (64, 2.0)] {
        let grid = MomentumGrid::new(LatticeSpec::new(1, l).unwrap());
        let c = CouplingSet::nearest_neighbor(1, 1.0, 1.0, 0.5).unwrap();
        let p = ThermalParams::new(beta, 0.5).unwrap();
        let sol = solve_magnetization(&p, &c, &grid, DEFAULT_TOL, DEFAULT_SCAN_POINTS).unwrap();
        let oracle = dense_root(beta, 0.5, &chain_d(l, 1.0, 1.0), 200_000);
        assert!((sol.m_star - oracle).abs() < 1e-10, "L={l} β={beta}: {} vs {oracle}", sol.m_star);
        assert!(sol.residual.abs() <= 1e-10);
        assert!(sol.m_star <= sol.bound + 1e-9);
        assert!(!sol.multiple_roots());
    }
}

#[test]
fn square_lattice_solution_matches_dense_scan() {
    let l = 6;
    let grid = MomentumGrid::new(LatticeSpec::new(2, l).unwrap());
    let c = CouplingSet::nearest_neighbor(2, 1.0, 1.2, 1.5).unwrap();
    let p = ThermalParams::new(1.5, 1.5).unwrap();
    let sol = solve_magnetization(&p, &c, &grid, DEFAULT_TOL, DEFAULT_SCAN_POINTS).unwrap();
    let d: Vec<f64> = grid
        .points()
        .iter()
        .map(|k| 4.0 * 1.2 - 2.0 * (k[0].cos() + k[1].cos()))
        .collect();
    let oracle = dense_root(1.5, 1.5, &d, 200_000);
    assert!((sol.m_star - oracle).abs() < 1e-10);
    assert!(sol.m_star <= sol.bound_diagnostics.tightest + 1e-9);
}

#[test]
fn occupations_sum_to_half_of_one_plus_m() {
    let grid = MomentumGrid::new(LatticeSpec::new(1, 32).unwrap());
    let c = CouplingSet::nearest_neighbor(1, 1.0, 1.0, 0.3).unwrap();
    let p = ThermalParams::new(1.0, 0.3).unwrap();
    let sol = solve_magnetization(&p, &c, &grid, DEFAULT_TOL, DEFAULT_SCAN_POINTS).unwrap();
    assert!((sol.mean_occupation() - 0.5 * (1.0 + sol.m_star)).abs() < 1e-10);
    assert!(sol.occupations.iter().all(|&n| n >= 0.0));
    assert!(sol.dispersion.iter().all(|&e| e > 0.0));
}

#[test]
fn antiferro_like_couplings_are_refused() {
    let grid = MomentumGrid::new(LatticeSpec::new(1, 8).unwrap());
    let c = CouplingSet::nearest_neighbor(1, 1.0, 0.0, 0.5).unwrap();
    let p = ThermalParams::new(1.0, 0.5).unwrap();
    let err = solve_magnetization(&p, &c, &grid, DEFAULT_TOL, DEFAULT_SCAN_POINTS).unwrap_err();
    assert!(matches!(err, Error::Regime(_)), "{err}");
}

#[test]
fn csv_couplings_agree_with_builder() {
    let text = "# chain\ndz1,J,J3\n1,1,1\n";
    let from_csv = CouplingSet::from_csv_reader(text.as_bytes(), 1, 0.5).unwrap();
    let built = CouplingSet::nearest_neighbor(1, 1.0, 1.0, 0.5).unwrap();
    assert_eq!(from_csv, built);
}
