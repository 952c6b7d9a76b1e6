use serde::Serialize;

use super::ensemble::{build_gibbs, GibbsMode, SpinConfig};
use super::observables::fluctuation_two_point;
use crate::error::Result;
use crate::lattice::{CouplingSet, LatticeSpec};
use crate::spinwave::{occupation, ThermalParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    /// `n = 2S+1`.
    pub n: u32,
    /// Oracle magnetization `ω(σ3)`.
    pub m_n: f64,
    /// Oracle two-point function `ω(F+(q)F-(q))`.
    pub t_n: f64,
    /// Quasi-free prediction at `m_n`.
    pub p_n: f64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub beta: f64,
    pub q: Vec<f64>,
    pub mode: GibbsMode,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].discrepancy < w[0].discrepancy)
    }

    pub fn non_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].discrepancy <= w[0].discrepancy)
    }
}

/// Compares the exact finite-`n` two-point function with the quasi-free
/// occupation evaluated at the oracle's own magnetization.
pub fn convergence_study(
    lattice: &LatticeSpec,
    couplings: &CouplingSet,
    copies: &[u32],
    beta: f64,
    q: &[f64],
    mode: GibbsMode,
) -> Result<ConvergenceTable> {
    let params = ThermalParams::for_couplings(beta, couplings)?;
    let rows = copies
        .iter()
        .map(|&n| {
            let cfg = SpinConfig::new(n, *lattice, couplings.clone())?;
            let g = build_gibbs(&cfg, beta, mode)?;
            let m_n = g.magnetization();
            let t_n = fluctuation_two_point(&g, q);
            let p_n = occupation(q, m_n.clamp(-1.0, 0.0), &params, couplings)?;
            Ok(ConvergenceRow { n, m_n, t_n, p_n, discrepancy: (t_n - p_n).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceTable { beta, q: q.to_vec(), mode, rows })
}
