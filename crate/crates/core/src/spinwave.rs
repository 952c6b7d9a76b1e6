//! Infinite-spin quasi-free magnon theory.
//!
//! In the ferromagnetic regime the large-spin equilibrium state is Gaussian in
//! the fluctuation operators, with occupation
//!
//! ```text
//! n(q) = -m / (exp(2β[h - m D(q)]) - 1)
//! ```
//!
//! where `m = ω(σ³) ∈ [-1, 0]` is fixed self-consistently by
//! `(1/|Λ|) Σ_q n(q) = (1 + m) / 2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{d_of_q, validate_ferromagnetic, CouplingSet, MomentumGrid, DEFAULT_GAP_TOL};

/// Occupations below this are flushed to zero.
const OCCUPATION_FLOOR: f64 = 1e-300;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_SCAN_POINTS: usize = 4096;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalParams {
    beta: f64,
    h: f64,
}

impl ThermalParams {
    pub fn new(beta: f64, h: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Parameter(format!("beta must be finite and positive, got {beta}")));
        }
        if !h.is_finite() {
            return Err(Error::Parameter(format!("field must be finite, got {h}")));
        }
        Ok(Self { beta, h })
    }

    /// Uses the field stored with the couplings.
    pub fn for_couplings(beta: f64, c: &CouplingSet) -> Result<Self> {
        Self::new(beta, c.h())
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn h(&self) -> f64 {
        self.h
    }
}

fn check_magnetization(m: f64) -> Result<()> {
    if !(-1.0..=0.0).contains(&m) {
        return Err(Error::Parameter(format!("magnetization {m} outside [-1, 0]")));
    }
    Ok(())
}

/// Occupation as a function of `D(q)` directly.
pub fn occupation_from_d(d: f64, m: f64, p: &ThermalParams) -> Result<f64> {
    check_magnetization(m)?;
    let gap = p.h - m * d;
    if !(gap > 0.0) {
        return Err(Error::Regime(format!(
            "h - m D(q) = {gap} is not positive (h = {}, m = {m}, D(q) = {d})",
            p.h
        )));
    }
    if m == 0.0 {
        return Ok(0.0);
    }
    let n = -m / (2.0 * p.beta * gap).exp_m1();
    Ok(if n < OCCUPATION_FLOOR { 0.0 } else { n })
}

/// Magnon occupation `ω(F⁺(q)F⁻(q))` at magnetization `m`.
pub fn occupation(q: &[f64], m: f64, p: &ThermalParams, c: &CouplingSet) -> Result<f64> {
    occupation_from_d(d_of_q(c, q), m, p)
}

pub fn dispersion_from_d(d: f64, m: f64, h: f64) -> Result<f64> {
    if m == 0.0 {
        return Err(Error::VanishingMagnetization);
    }
    check_magnetization(m)?;
    Ok(2.0 * (d + h / (-m)))
}

/// Magnon energy `ε(q) = 2(D(q) + h/(-m))`.
pub fn dispersion(q: &[f64], m: f64, p: &ThermalParams, c: &CouplingSet) -> Result<f64> {
    dispersion_from_d(d_of_q(c, q), m, p.h)
}

/// Self-consistency defect evaluated on a cached table of `D(q)`.
#[derive(Debug, Clone)]
pub struct SelfConsistency {
    params: ThermalParams,
    d_values: Vec<f64>,
}

impl SelfConsistency {
    pub fn new(p: &ThermalParams, c: &CouplingSet, grid: &MomentumGrid) -> Self {
        Self {
            params: *p,
            d_values: grid.points().iter().map(|k| d_of_q(c, k)).collect(),
        }
    }

    pub fn d_values(&self) -> &[f64] {
        &self.d_values
    }

    /// `G(m) = (1/|Λ|) Σ_q n(q; m) - (1 + m)/2`, summed in grid order.
    pub fn defect(&self, m: f64) -> Result<f64> {
        let mut sum = 0.0;
        for &d in &self.d_values {
            sum += occupation_from_d(d, m, &self.params)?;
        }
        Ok(sum / self.d_values.len() as f64 - 0.5 * (1.0 + m))
    }
}

pub fn selfconsistency_defect(
    m: f64,
    p: &ThermalParams,
    c: &CouplingSet,
    grid: &MomentumGrid,
) -> Result<f64> {
    SelfConsistency::new(p, c, grid).defect(m)
}

/// Upper bound `-1 + 2/(e^{2βh} - 1)` on the magnetization.
pub fn magnetization_bound(p: &ThermalParams) -> f64 {
    -1.0 + 2.0 / (2.0 * p.beta * p.h).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundDiagnostics {
    /// `-1 + 2/(e^{2βh} - 1)`.
    pub field_bound: f64,
    /// `-1 + 2/(e^{2βD(0)} - 1)`, present when `D(0) > 0`.
    pub d0_bound: Option<f64>,
    /// Low-temperature form `-1 + 2e^{-2βD(0)}`.
    pub d0_asymptotic: Option<f64>,
    /// The tightest of the applicable bounds.
    pub tightest: f64,
}

pub fn bound_diagnostics(p: &ThermalParams, c: &CouplingSet) -> BoundDiagnostics {
    let field_bound = magnetization_bound(p);
    let d0 = c.total(crate::lattice::Exchange::Longitudinal)
        - c.total(crate::lattice::Exchange::Transverse);
    let (d0_bound, d0_asymptotic) = if d0 > 0.0 && p.h > d0 {
        let x = 2.0 * p.beta * d0;
        (Some(-1.0 + 2.0 / x.exp_m1()), Some(-1.0 + 2.0 * (-x).exp()))
    } else {
        (None, None)
    };
    let tightest = d0_bound.map_or(field_bound, |b| b.min(field_bound));
    BoundDiagnostics { field_bound, d0_bound, d0_asymptotic, tightest }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinWaveSolution {
    pub params: ThermalParams,
    /// Self-consistent `ω(σ³)`, the root of `G` closest to -1.
    pub m_star: f64,
    pub d_values: Vec<f64>,
    /// `n(q)` in grid order.
    pub occupations: Vec<f64>,
    /// `ε(q)` in grid order; empty when `m_star == 0`.
    pub dispersion: Vec<f64>,
    /// `|G(m_star)|`.
    pub residual: f64,
    /// Every root found, ascending.
    pub all_roots: Vec<f64>,
    pub bound: f64,
    pub bound_diagnostics: BoundDiagnostics,
    pub diagnostics: Vec<String>,
}

impl SpinWaveSolution {
    pub fn multiple_roots(&self) -> bool {
        self.all_roots.len() > 1
    }

    /// `(1/|Λ|) Σ_q n(q)`.
    pub fn mean_occupation(&self) -> f64 {
        self.occupations.iter().sum::<f64>() / self.occupations.len() as f64
    }
}

fn bisect(f: &SelfConsistency, mut lo: f64, mut hi: f64, mut g_lo: f64, tol: f64) -> Result<(f64, f64)> {
    let mut last = (lo, g_lo);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = f.defect(mid)?;
        last = (mid, g_mid);
        if g_mid == 0.0 || (hi - lo <= tol && g_mid.abs() <= tol) {
            break;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(last)
}

/// Solves `G(m) = 0` on `[-1, 0]` by a uniform sign-change scan followed by
/// bisection on every bracket.
pub fn solve_magnetization(
    p: &ThermalParams,
    c: &CouplingSet,
    grid: &MomentumGrid,
    tol: f64,
    scan_points: usize,
) -> Result<SpinWaveSolution> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    if scan_points < 2 {
        return Err(Error::Parameter("scan needs at least 2 points".into()));
    }
    if (p.h - c.h()).abs() > 0.0 {
        return Err(Error::Parameter(format!(
            "thermal field {} differs from coupling field {}",
            p.h,
            c.h()
        )));
    }
    let report = validate_ferromagnetic(c, grid, DEFAULT_GAP_TOL);
    if !report.is_valid() {
        return Err(Error::Regime(report.messages.join("; ")));
    }

    let g = SelfConsistency::new(p, c, grid);
    let g_top = g.defect(0.0)?;
    let g_bottom = g.defect(-1.0)?;
    assert!(g_top < 0.0, "G(0) = {g_top} must be negative");
    if g_bottom < 0.0 {
        return Err(Error::NoRoot(format!("G(-1) = {g_bottom} < 0")));
    }

    let step = 1.0 / (scan_points - 1) as f64;
    let grid_m = |i: usize| if i + 1 == scan_points { 0.0 } else { -1.0 + i as f64 * step };
    let mut roots = Vec::new();
    let mut prev_m = grid_m(0);
    let mut prev_g = g_bottom;
    if prev_g == 0.0 {
        roots.push((prev_m, 0.0));
    }
    for i in 1..scan_points {
        let m = grid_m(i);
        let gm = if i + 1 == scan_points { g_top } else { g.defect(m)? };
        if gm == 0.0 {
            roots.push((m, 0.0));
        } else if prev_g != 0.0 && (gm > 0.0) != (prev_g > 0.0) {
            roots.push(bisect(&g, prev_m, m, prev_g, tol)?);
        }
        prev_m = m;
        prev_g = gm;
    }
    let &(m_star, g_star) = roots
        .first()
        .ok_or_else(|| Error::NoRoot("no sign change of G on [-1, 0]".into()))?;

    let d_values = g.d_values;
    let occupations = d_values
        .iter()
        .map(|&d| occupation_from_d(d, m_star, p))
        .collect::<Result<Vec<_>>>()?;
    let dispersion = if m_star < 0.0 {
        d_values
            .iter()
            .map(|&d| dispersion_from_d(d, m_star, p.h))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    let bound_diagnostics = bound_diagnostics(p, c);
    let mut diagnostics = report.messages;
    if roots.len() > 1 {
        diagnostics.push(format!(
            "{} roots of the self-consistency equation; selected the one nearest -1",
            roots.len()
        ));
    }
    if g_star.abs() > tol {
        diagnostics.push(format!("residual {:.3e} exceeds tolerance {tol:.3e}", g_star.abs()));
    }
    Ok(SpinWaveSolution {
        params: *p,
        m_star,
        d_values,
        occupations,
        dispersion,
        residual: g_star.abs(),
        all_roots: roots.iter().map(|r| r.0).collect(),
        bound: bound_diagnostics.field_bound,
        bound_diagnostics,
        diagnostics,
    })
}
