//! Fluctuation operators and the checks built on them.

use num_complex::Complex64;
use serde::Serialize;

use super::ensemble::{CollectiveOp, GibbsEnsemble, SpinComponent};

/// Imaginary parts above this signal a bug, not rounding.
const IMAG_TOL: f64 = 1e-10;
/// Expectations below this make the entropy term degenerate.
const EEB_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FluctuationKind {
    Plus,
    Minus,
    Z,
}

/// `F^♯(k) = (n|Λ|)^{-1/2} Σ_x (S^♯(x) - ω(S^♯(x))) e^{±ik·x}`.
///
/// `F+` carries `e^{+ik·x}`, `F-` carries `e^{-ik·x}` (so `F+(k)* = F-(k)`),
/// and `F3` carries `e^{+ik·x}`. Only `F3` is centred: `ω(S±(x))` vanishes
/// by the U(1) symmetry of the finite-volume Gibbs state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationObservable {
    pub kind: FluctuationKind,
    pub momentum: Vec<f64>,
}

impl FluctuationObservable {
    pub fn plus(k: &[f64]) -> Self {
        Self { kind: FluctuationKind::Plus, momentum: k.to_vec() }
    }

    pub fn minus(k: &[f64]) -> Self {
        Self { kind: FluctuationKind::Minus, momentum: k.to_vec() }
    }

    pub fn z(k: &[f64]) -> Self {
        Self { kind: FluctuationKind::Z, momentum: k.to_vec() }
    }

    pub fn to_op(&self, g: &GibbsEnsemble) -> CollectiveOp {
        let lattice = g.lattice();
        let sites = lattice.num_sites();
        let norm = 1.0 / (g.copies() as f64 * sites as f64).sqrt();
        let sign = match self.kind {
            FluctuationKind::Minus => -1.0,
            _ => 1.0,
        };
        let coeffs: Vec<Complex64> = (0..sites)
            .map(|x| {
                let phase: f64 = lattice
                    .coords(x)
                    .iter()
                    .zip(&self.momentum)
                    .map(|(&c, &k)| c as f64 * k)
                    .sum();
                Complex64::from_polar(norm, sign * phase)
            })
            .collect();
        let (component, shift) = match self.kind {
            FluctuationKind::Plus => (SpinComponent::Plus, Complex64::new(0.0, 0.0)),
            FluctuationKind::Minus => (SpinComponent::Minus, Complex64::new(0.0, 0.0)),
            FluctuationKind::Z => {
                let shift = -coeffs
                    .iter()
                    .enumerate()
                    .map(|(x, c)| c * g.site_s3(x))
                    .sum::<Complex64>();
                (SpinComponent::Z, shift)
            }
        };
        CollectiveOp { component, coeffs, shift }
    }
}

fn real(z: Complex64, what: &str) -> f64 {
    assert!(z.im.abs() <= IMAG_TOL * z.norm().max(1.0), "{what} has imaginary part {}", z.im);
    z.re
}

fn phase(g: &GibbsEnsemble, x: usize, q: &[f64]) -> f64 {
    g.lattice().coords(x).iter().zip(q).map(|(&c, &k)| c as f64 * k).sum()
}

/// `ω(F+(q) F-(q)) = (1/n|Λ|) Σ_{x,y} e^{iq·(x-y)} ω(S+(x) S-(y))`.
pub fn fluctuation_two_point(g: &GibbsEnsemble, q: &[f64]) -> f64 {
    let sites = g.num_sites();
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..sites {
        for y in 0..sites {
            let ph = phase(g, x, q) - phase(g, y, q);
            acc += Complex64::from_polar(g.plus_minus(x, y), ph);
        }
    }
    real(acc / (g.copies() as f64 * sites as f64), "two-point function")
}

/// `ω([F+(k), F-(q)])`, evaluated from both operator orderings.
pub fn commutator_expectation(g: &GibbsEnsemble, k: &[f64], q: &[f64]) -> f64 {
    let fp = FluctuationObservable::plus(k).to_op(g);
    let fm = FluctuationObservable::minus(q).to_op(g);
    let c = g.expectation(&[fp.clone(), fm.clone()]) - g.expectation(&[fm, fp]);
    real(c, "commutator")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EebSides {
    /// `β ω(X*[H, X])`.
    pub lhs: f64,
    /// `ω(X*X) ln(ω(X*X)/ω(XX*))`.
    pub rhs: f64,
    /// Set when `ω(X*X)` or `ω(XX*)` underflows; `rhs` is then 0.
    pub degenerate: bool,
}

impl EebSides {
    pub fn margin(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.degenerate || self.lhs >= self.rhs - tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EebMargin {
    /// `X = F-(q)`.
    pub minus: EebSides,
    /// `X = F+(q)`.
    pub plus: EebSides,
}

fn eeb_sides(g: &GibbsEnsemble, x: &CollectiveOp) -> EebSides {
    let xs = x.adjoint();
    let lhs = g.beta() * real(g.energy_commutator(x), "ω(X*[H,X])");
    let xsx = real(g.expectation(&[xs.clone(), x.clone()]), "ω(X*X)");
    let xxs = real(g.expectation(&[x.clone(), xs]), "ω(XX*)");
    if xsx < EEB_FLOOR || xxs < EEB_FLOOR {
        return EebSides { lhs, rhs: 0.0, degenerate: true };
    }
    EebSides { lhs, rhs: xsx * (xsx / xxs).ln(), degenerate: false }
}

/// Both sides of the energy-entropy balance inequality for `X = F∓(q)`.
pub fn eeb_margin(g: &GibbsEnsemble, q: &[f64]) -> EebMargin {
    EebMargin {
        minus: eeb_sides(g, &FluctuationObservable::minus(q).to_op(g)),
        plus: eeb_sides(g, &FluctuationObservable::plus(q).to_op(g)),
    }
}

/// `|ω(F+F+F-F-) - 2 ω(F+F-)²|` at momentum `q`.
pub fn wick_residual(g: &GibbsEnsemble, q: &[f64]) -> f64 {
    let fp = FluctuationObservable::plus(q).to_op(g);
    let fm = FluctuationObservable::minus(q).to_op(g);
    let four = real(g.expectation(&[fp.clone(), fp.clone(), fm.clone(), fm.clone()]), "four-point");
    let two = real(g.expectation(&[fp, fm]), "two-point");
    (four - 2.0 * two * two).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{CouplingSet, LatticeSpec};
    use crate::oracle::{build_gibbs, GibbsMode, SpinConfig};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn ensemble(n: u32, sites: usize, beta: f64, mode: GibbsMode) -> GibbsEnsemble {
        let lattice = LatticeSpec::new(1, sites).unwrap();
        let c = if sites == 1 {
            CouplingSet::new(1, vec![], 2.5).unwrap()
        } else {
            CouplingSet::nearest_neighbor(1, 1.0, 1.0, 2.5).unwrap()
        };
        build_gibbs(&SpinConfig::new(n, lattice, c).unwrap(), beta, mode).unwrap()
    }

    #[test]
    fn infinite_temperature_two_point() {
        let g = ensemble(1, 2, 0.0, GibbsMode::Sector);
        for q in [0.0, PI] {
            assert_abs_diff_eq!(fluctuation_two_point(&g, &[q]), 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn two_point_matches_operator_route() {
        let g = ensemble(3, 2, 1.0, GibbsMode::Sector);
        for q in [0.0, PI] {
            let fp = FluctuationObservable::plus(&[q]).to_op(&g);
            let fm = FluctuationObservable::minus(&[q]).to_op(&g);
            let direct = g.expectation(&[fp, fm]);
            assert_abs_diff_eq!(direct.re, fluctuation_two_point(&g, &[q]), epsilon = 1e-14);
            assert!(direct.im.abs() < 1e-12);
        }
    }

    #[test]
    fn five_copy_two_point_matches_full_tensor() {
        let s = ensemble(5, 2, 1.0, GibbsMode::Sector);
        let f = ensemble(5, 2, 1.0, GibbsMode::FullTensor);
        assert_abs_diff_eq!(fluctuation_two_point(&s, &[PI]), fluctuation_two_point(&f, &[PI]), epsilon = 1e-10);
    }

    #[test]
    fn commutators_follow_translation_invariance() {
        let g = ensemble(3, 2, 1.0, GibbsMode::Sector);
        assert_abs_diff_eq!(commutator_expectation(&g, &[0.0], &[PI]), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(commutator_expectation(&g, &[PI], &[PI]), g.magnetization(), epsilon = 1e-12);
        let hot = ensemble(3, 2, 0.0, GibbsMode::Sector);
        assert_abs_diff_eq!(commutator_expectation(&hot, &[0.0], &[0.0]), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn f3_commutator_matches_finite_s_identity() {
        // [F3(k), F+(q)] = (2/sqrt(n|Λ|)) F+(q+k) with the centring shift dropping out.
        let g = ensemble(3, 2, 1.0, GibbsMode::Sector);
        let f3 = FluctuationObservable::z(&[PI]).to_op(&g);
        let fp = FluctuationObservable::plus(&[0.0]).to_op(&g);
        let fm = FluctuationObservable::minus(&[PI]).to_op(&g);
        let lhs = g.expectation(&[fm.clone(), f3.clone(), fp.clone()]) - g.expectation(&[fm.clone(), fp, f3]);
        let fp_sum = FluctuationObservable::plus(&[PI]).to_op(&g);
        let rhs = g.expectation(&[fm, fp_sum]) * (2.0 / (3.0f64 * 2.0).sqrt());
        assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-12);
        assert_abs_diff_eq!(lhs.im, rhs.im, epsilon = 1e-12);
    }

    #[test]
    fn f3_is_centred() {
        let g = ensemble(3, 2, 1.0, GibbsMode::Sector);
        let f3 = FluctuationObservable::z(&[0.0]).to_op(&g);
        assert!(g.expectation(&[f3]).norm() < 1e-12);
    }

    #[test]
    fn eeb_at_infinite_temperature() {
        let g = ensemble(3, 2, 0.0, GibbsMode::Sector);
        for q in [0.0, PI] {
            let m = eeb_margin(&g, &[q]);
            assert_abs_diff_eq!(m.minus.lhs, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m.minus.rhs, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn eeb_holds_with_positive_margin() {
        let g = ensemble(3, 2, 1.0, GibbsMode::Sector);
        for q in [0.0, PI] {
            let m = eeb_margin(&g, &[q]);
            assert!(m.minus.margin() > 0.0 && m.plus.margin() > 0.0);
            // Swapping X and X* flips the log ratio.
            let a = fluctuation_two_point(&g, &[q]);
            let ratio_minus = m.minus.rhs / a;
            let fp = FluctuationObservable::plus(&[q]).to_op(&g);
            let fm = FluctuationObservable::minus(&[q]).to_op(&g);
            let b = g.expectation(&[fm, fp]).re;
            assert_abs_diff_eq!(ratio_minus, -m.plus.rhs / b, epsilon = 1e-10);
        }
    }

    #[test]
    fn single_pauli_wick_residual() {
        // n = 1, |Λ| = 1, β = 0: F± = σ±, σ+σ+ = 0 and ω(σ+σ-) = 1/2,
        // so the residual is |0 - 2·(1/2)²| = 1/2.
        let g = ensemble(1, 1, 0.0, GibbsMode::Sector);
        assert_abs_diff_eq!(wick_residual(&g, &[0.0]), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn wick_residual_vanishes_near_fock_state() {
        let g = ensemble(3, 2, 30.0, GibbsMode::Sector);
        assert!(wick_residual(&g, &[PI]) < 1e-20);
    }
}
