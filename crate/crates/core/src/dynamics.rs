//! Gaussian magnon states under the quadratic magnon Hamiltonian.
//!
//! With `[F-(q), F+(q')] = -m δ(q,q')` and `H = Σ_q ε(q) F+(q)F-(q)`, the
//! Heisenberg equation gives `F-(q, t) = e^{i m ε(q) t} F-(q)`. A state is
//! stored through its normally ordered covariance `γ = ⟨F+ F-⟩`; evolution
//! multiplies mode-basis entries by `e^{-i m (ε(q) - ε(q')) t}` and is exact.
//!
//! Site and mode operators are related by
//! `F±(x) = |Λ|^{-1/2} Σ_q F±(q) e^{∓iq·x}`, so with `U[x][q] = e^{iq·x}/√|Λ|`
//! the site covariance is `conj(U) γ_mode Uᵀ`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{d_of_q, CouplingSet, MomentumGrid, TorusCouplings};
use crate::spinwave::{dispersion_from_d, SpinWaveSolution};

const HERMITIAN_TOL: f64 = 1e-10;
const PSD_FLOOR: f64 = -1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSpectrum {
    /// `ε(q)` in grid order.
    pub eps: Vec<f64>,
    /// `(-m) ε(q)`, the phase velocity of mode `q`.
    pub omega: Vec<f64>,
}

/// Everything the dynamics needs besides the covariance itself.
#[derive(Debug, Clone)]
pub struct MagnonSystem {
    grid: MomentumGrid,
    torus: TorusCouplings,
    m: f64,
    spectrum: ModeSpectrum,
    /// `U[x][q] = e^{iq·x}/√|Λ|`.
    fourier: DMatrix<Complex64>,
}

impl MagnonSystem {
    /// Rejects `m = 0`, where the magnons lose their quantum character and
    /// the spectrum is undefined.
    pub fn new(grid: MomentumGrid, couplings: &CouplingSet, m: f64) -> Result<Self> {
        if m == 0.0 {
            return Err(Error::VanishingMagnetization);
        }
        let torus = couplings.torus_matrices(grid.lattice())?;
        let eps = grid
            .points()
            .iter()
            .map(|k| dispersion_from_d(d_of_q(couplings, k), m, couplings.h()))
            .collect::<Result<Vec<_>>>()?;
        let omega = eps.iter().map(|e| -m * e).collect();
        let lattice = *grid.lattice();
        let n = grid.len();
        let norm = 1.0 / (n as f64).sqrt();
        let fourier = DMatrix::from_fn(n, n, |x, q| {
            let phase: f64 = lattice
                .coords(x)
                .iter()
                .zip(grid.point(q))
                .map(|(&c, &k)| c as f64 * k)
                .sum();
            Complex64::from_polar(norm, phase)
        });
        Ok(Self { grid, torus, m, spectrum: ModeSpectrum { eps, omega }, fourier })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn spectrum(&self) -> &ModeSpectrum {
        &self.spectrum
    }

    pub fn num_sites(&self) -> usize {
        self.grid.len()
    }

    fn to_site(&self, mode: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.fourier.conjugate() * mode * self.fourier.transpose()
    }

    fn to_mode(&self, site: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.fourier.transpose() * site * self.fourier.conjugate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Site,
    Mode,
}

/// Quasi-free magnon state given by `γ[a][b] = ⟨F+(a) F-(b)⟩`.
#[derive(Debug, Clone)]
pub struct GaussianMagnonState {
    system: Arc<MagnonSystem>,
    basis: Basis,
    gamma: DMatrix<Complex64>,
}

impl GaussianMagnonState {
    /// Validates Hermiticity and positive semidefiniteness.
    pub fn new(system: Arc<MagnonSystem>, basis: Basis, gamma: DMatrix<Complex64>) -> Result<Self> {
        let n = system.num_sites();
        if gamma.shape() != (n, n) {
            return Err(Error::State(format!(
                "covariance is {:?}, expected {n}x{n}",
                gamma.shape()
            )));
        }
        let scale = gamma.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let skew = (&gamma - gamma.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if skew > HERMITIAN_TOL * scale {
            return Err(Error::State(format!("covariance is not Hermitian (defect {skew:.3e})")));
        }
        let min_eig = gamma
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < PSD_FLOOR * scale {
            return Err(Error::State(format!("covariance has negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { system, basis, gamma })
    }

    /// Rank-one state `N |ψ̄⟩⟨ψ̄|` in the site basis: a Gaussian packet of
    /// `number` magnons centred at `center` with carrier momentum `k0`.
    ///
    /// This is a non-equilibrium initial condition evolved within the same
    /// quadratic magnon model, outside the equilibrium setting of the theory.
    pub fn wave_packet(
        system: Arc<MagnonSystem>,
        center: &[f64],
        width: f64,
        k0: &[f64],
        number: f64,
    ) -> Result<Self> {
        if !(width > 0.0) || !(number >= 0.0) {
            return Err(Error::State("packet needs positive width and nonnegative number".into()));
        }
        let lattice = *system.grid.lattice();
        let l = lattice.size() as f64;
        let psi: Vec<Complex64> = (0..lattice.num_sites())
            .map(|x| {
                let c = lattice.coords(x);
                let mut r2 = 0.0;
                let mut phase = 0.0;
                for ((&ci, &x0), &k) in c.iter().zip(center).zip(k0) {
                    let d = (ci as f64 - x0).rem_euclid(l);
                    let d = if d > l / 2.0 { d - l } else { d };
                    r2 += d * d;
                    phase += k * ci as f64;
                }
                Complex64::from_polar((-r2 / (2.0 * width * width)).exp(), phase)
            })
            .collect();
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        let n = psi.len();
        let gamma = DMatrix::from_fn(n, n, |a, b| psi[a].conj() * psi[b] * (number / norm2));
        Self::new(system, Basis::Site, gamma)
    }

    pub fn system(&self) -> &Arc<MagnonSystem> {
        &self.system
    }

    pub fn m(&self) -> f64 {
        self.system.m
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn gamma(&self) -> &DMatrix<Complex64> {
        &self.gamma
    }

    pub fn mode_covariance(&self) -> DMatrix<Complex64> {
        match self.basis {
            Basis::Mode => self.gamma.clone(),
            Basis::Site => self.system.to_mode(&self.gamma),
        }
    }

    pub fn site_covariance(&self) -> DMatrix<Complex64> {
        match self.basis {
            Basis::Site => self.gamma.clone(),
            Basis::Mode => self.system.to_site(&self.gamma),
        }
    }

    pub fn in_basis(&self, basis: Basis) -> Self {
        let gamma = match basis {
            Basis::Site => self.site_covariance(),
            Basis::Mode => self.mode_covariance(),
        };
        Self { system: self.system.clone(), basis, gamma }
    }

    /// `Σ_x ⟨F+(x)F-(x)⟩`, basis independent.
    pub fn total_number(&self) -> f64 {
        self.gamma.trace().re
    }

    /// `Σ_q ε(q) ⟨F+(q)F-(q)⟩`.
    pub fn energy(&self) -> f64 {
        let mode = self.mode_covariance();
        self.system
            .spectrum
            .eps
            .iter()
            .enumerate()
            .map(|(q, e)| e * mode[(q, q)].re)
            .sum()
    }
}

/// Diagonal mode covariance `n(q)` of the self-consistent solution.
pub fn equilibrium_state(
    sol: &SpinWaveSolution,
    grid: &MomentumGrid,
    couplings: &CouplingSet,
) -> Result<GaussianMagnonState> {
    if sol.m_star == 0.0 {
        return Err(Error::VanishingMagnetization);
    }
    let system = Arc::new(MagnonSystem::new(grid.clone(), couplings, sol.m_star)?);
    mode_diagonal_state(system, &sol.occupations)
}

/// State with mode covariance `diag(occupations)`.
pub fn mode_diagonal_state(system: Arc<MagnonSystem>, occupations: &[f64]) -> Result<GaussianMagnonState> {
    let n = system.num_sites();
    if occupations.len() != n {
        return Err(Error::State(format!("{} occupations for {n} modes", occupations.len())));
    }
    let gamma = DMatrix::from_fn(n, n, |a, b| {
        if a == b {
            Complex64::new(occupations[a], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    GaussianMagnonState::new(system, Basis::Mode, gamma)
}

/// Exact evolution by time `t`; the result keeps the input's basis.
pub fn evolve(state: &GaussianMagnonState, t: f64) -> GaussianMagnonState {
    let sys = &state.system;
    let m = sys.m;
    let eps = &sys.spectrum.eps;
    let mut mode = state.mode_covariance();
    for a in 0..mode.nrows() {
        for b in 0..mode.ncols() {
            if a != b {
                mode[(a, b)] *= Complex64::from_polar(1.0, -m * (eps[a] - eps[b]) * t);
            }
        }
    }
    let evolved = GaussianMagnonState { system: sys.clone(), basis: Basis::Mode, gamma: mode };
    if state.basis == Basis::Site {
        evolved.in_basis(Basis::Site)
    } else {
        evolved
    }
}

/// `⟨F+(x)F-(x)⟩` for every site.
pub fn number_density(state: &GaussianMagnonState) -> Vec<f64> {
    let site = state.site_covariance();
    (0..site.nrows()).map(|x| site[(x, x)].re).collect()
}

/// Time derivative of the number density from the site-space equation of
/// motion, `2im Σ_y J(x,y) (⟨F+(y)F-(x)⟩ - ⟨F-(y)F+(x)⟩)`.
///
/// `⟨F-(y)F+(x)⟩ = ⟨F+(x)F-(y)⟩ - m δ(x,y)`, and the `δ` term drops because
/// `J(x,x) = 0`. The bracket is `2i Im γ(y,x)`, so the result is real.
pub fn number_density_rate(state: &GaussianMagnonState) -> Vec<f64> {
    let site = state.site_covariance();
    let sys = &state.system;
    let n = sys.num_sites();
    let m = sys.m;
    (0..n)
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for y in 0..n {
                let j = sys.torus.j(x, y);
                if j == 0.0 {
                    continue;
                }
                let normal = site[(y, x)];
                let anti = site[(x, y)] - if x == y { Complex64::new(m, 0.0) } else { Complex64::new(0.0, 0.0) };
                acc += (normal - anti) * j;
            }
            let value = Complex64::new(0.0, 2.0 * m) * acc;
            debug_assert!(value.im.abs() <= 1e-9 * value.norm().max(1.0));
            value.re
        })
        .collect()
}
