use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{FullTensorBasis, SectorBasis, SpinBasis};
use super::sectors::{sector_decomposition, SectorTable};
use crate::error::{Error, Result};
use crate::lattice::{CouplingSet, LatticeSpec, TorusCouplings};

/// Largest single sector block (product of per-site `2j+1`).
pub const MAX_SECTOR_BLOCK_DIM: usize = 10_000;
/// Largest Hilbert space for the copy-resolved path.
pub const MAX_FULL_TENSOR_DIM: u128 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GibbsMode {
    /// Multiplicity-weighted sum over per-site total-spin assignments.
    Sector,
    /// Every copy resolved; dimension `2^{n|Λ|}`.
    FullTensor,
}

/// `n = 2S+1` spin-1/2 copies per site on a periodic lattice.
#[derive(Debug, Clone)]
pub struct SpinConfig {
    copies: u32,
    lattice: LatticeSpec,
    couplings: CouplingSet,
    torus: TorusCouplings,
}

impl SpinConfig {
    pub fn new(copies: u32, lattice: LatticeSpec, couplings: CouplingSet) -> Result<Self> {
        // Validates parity and the copy cap.
        sector_decomposition(copies)?;
        let torus = couplings.torus_matrices(&lattice)?;
        Ok(Self { copies, lattice, couplings, torus })
    }

    pub fn copies(&self) -> u32 {
        self.copies
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn couplings(&self) -> &CouplingSet {
        &self.couplings
    }
}

/// Column-stored sparse matrix: `columns[s]` lists `(t, H[t][s])`.
#[derive(Debug, Clone)]
struct SparseColumns {
    columns: Vec<Vec<(usize, f64)>>,
}

impl SparseColumns {
    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (s, col) in self.columns.iter().enumerate() {
            if v[s] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for &(t, a) in col {
                out[t] += v[s] * a;
            }
        }
        out
    }
}

/// Rescaled Heisenberg Hamiltonian
/// `-(1/2n) Σ_{x≠y} [4J(x,y) S+(x)S-(y) + J3(x,y) S3(x)S3(y)] + h Σ_x S3(x)`.
fn assemble_hamiltonian(basis: &dyn SpinBasis, copies: u32, t: &TorusCouplings) -> SparseColumns {
    let sites = basis.num_sites();
    let scale = 1.0 / (2.0 * copies as f64);
    let hopping: Vec<(usize, usize, f64)> = (0..sites)
        .flat_map(|x| (0..sites).map(move |y| (x, y)))
        .filter(|&(x, y)| x != y && t.j(x, y) != 0.0)
        .map(|(x, y)| (x, y, -4.0 * scale * t.j(x, y)))
        .collect();
    let columns = (0..basis.dim())
        .map(|s| {
            let mut diag = 0.0;
            for x in 0..sites {
                let sx = basis.s3(s, x) as f64;
                diag += t.h * sx;
                for y in 0..sites {
                    if x != y {
                        diag -= scale * t.j3(x, y) * sx * basis.s3(s, y) as f64;
                    }
                }
            }
            let mut col = vec![(s, diag)];
            for &(x, y, c) in &hopping {
                basis.lower(s, y, &mut |s1, a| {
                    basis.raise(s1, x, &mut |s2, b| col.push((s2, c * a * b)));
                });
            }
            col.sort_by_key(|e| e.0);
            col.dedup_by(|next, kept| {
                if next.0 == kept.0 {
                    kept.1 += next.1;
                    true
                } else {
                    false
                }
            });
            col.retain(|e| e.1 != 0.0);
            col
        })
        .collect();
    SparseColumns { columns }
}

#[derive(Debug, Clone)]
enum BlockBasis {
    Sector(SectorBasis),
    Full(FullTensorBasis),
}

impl BlockBasis {
    fn as_dyn(&self) -> &dyn SpinBasis {
        match self {
            BlockBasis::Sector(b) => b,
            BlockBasis::Full(b) => b,
        }
    }
}

/// Eigenpairs of `H` restricted to one value of total `S3`.
#[derive(Debug, Clone)]
struct Subspace {
    states: Vec<usize>,
    energies: Vec<f64>,
    /// Column `a` is the eigenvector of `energies[a]` in `states` order.
    vectors: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct Block {
    /// Per-site `2j`; empty for the full-tensor block.
    pub twice_j: Vec<u32>,
    /// `ln Π_x multiplicity(j_x)`.
    pub log_weight: f64,
    basis: BlockBasis,
    hamiltonian: SparseColumns,
    subspaces: Vec<Subspace>,
}

impl Block {
    fn build(basis: BlockBasis, twice_j: Vec<u32>, log_weight: f64, cfg: &SpinConfig) -> Self {
        let b = basis.as_dyn();
        let hamiltonian = assemble_hamiltonian(b, cfg.copies, &cfg.torus);
        let mut groups: std::collections::BTreeMap<i32, Vec<usize>> = Default::default();
        for s in 0..b.dim() {
            groups.entry(b.total_s3(s)).or_default().push(s);
        }
        let mut local = vec![usize::MAX; b.dim()];
        let subspaces = groups
            .into_values()
            .map(|states| {
                for (i, &s) in states.iter().enumerate() {
                    local[s] = i;
                }
                let d = states.len();
                let mut h = DMatrix::<f64>::zeros(d, d);
                for (i, &s) in states.iter().enumerate() {
                    for &(t, a) in &hamiltonian.columns[s] {
                        debug_assert_ne!(local[t], usize::MAX, "H must conserve total S3");
                        h[(local[t], i)] += a;
                    }
                }
                let eig = SymmetricEigen::new(h);
                Subspace {
                    states,
                    energies: eig.eigenvalues.iter().copied().collect(),
                    vectors: eig.eigenvectors,
                }
            })
            .collect();
        Self { twice_j, log_weight, basis, hamiltonian, subspaces }
    }

    pub fn dim(&self) -> usize {
        self.basis.as_dyn().dim()
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.subspaces.iter().flat_map(|s| s.energies.iter().copied())
    }

    fn eigenvector(&self, sub: &Subspace, a: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, &s) in sub.states.iter().enumerate() {
            v[s] = Complex64::new(sub.vectors[(i, a)], 0.0);
        }
        v
    }

    fn apply(&self, op: &CollectiveOp, v: &[Complex64]) -> Vec<Complex64> {
        let b = self.basis.as_dyn();
        let mut out: Vec<Complex64> = v.iter().map(|&a| a * op.shift).collect();
        for (s, &amp) in v.iter().enumerate() {
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (x, &c) in op.coeffs.iter().enumerate() {
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let ca = c * amp;
                match op.component {
                    SpinComponent::Plus => b.raise(s, x, &mut |t, a| out[t] += ca * a),
                    SpinComponent::Minus => b.lower(s, x, &mut |t, a| out[t] += ca * a),
                    SpinComponent::Z => out[s] += ca * b.s3(s, x) as f64,
                }
            }
        }
        out
    }

    fn apply_word(&self, word: &[CollectiveOp], v: &[Complex64]) -> Vec<Complex64> {
        word.iter().rev().fold(v.to_vec(), |acc, op| self.apply(op, &acc))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinComponent {
    Plus,
    Minus,
    Z,
}

/// `Σ_x c_x S^♯(x) + shift · 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveOp {
    pub component: SpinComponent,
    pub coeffs: Vec<Complex64>,
    pub shift: Complex64,
}

impl CollectiveOp {
    pub fn site(component: SpinComponent, site: usize, sites: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); sites];
        coeffs[site] = Complex64::new(1.0, 0.0);
        Self { component, coeffs, shift: Complex64::new(0.0, 0.0) }
    }

    /// Hermitian adjoint.
    pub fn adjoint(&self) -> Self {
        let component = match self.component {
            SpinComponent::Plus => SpinComponent::Minus,
            SpinComponent::Minus => SpinComponent::Plus,
            SpinComponent::Z => SpinComponent::Z,
        };
        Self {
            component,
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
            shift: self.shift.conj(),
        }
    }
}

/// Exact Gibbs state `e^{-βH}/Z` of the rescaled Heisenberg Hamiltonian.
#[derive(Debug, Clone)]
pub struct GibbsEnsemble {
    copies: u32,
    lattice: LatticeSpec,
    couplings: CouplingSet,
    beta: f64,
    mode: GibbsMode,
    blocks: Vec<Block>,
    ground_energy: f64,
    /// `ln Σ exp(ln w - β(E - E0))`.
    shifted_log_z: f64,
    site_s3: Vec<f64>,
    site_s_plus: Vec<Complex64>,
    /// `ω(S+(x) S-(y))`, row-major.
    plus_minus: Vec<f64>,
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn build_gibbs(cfg: &SpinConfig, beta: f64, mode: GibbsMode) -> Result<GibbsEnsemble> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::Parameter(format!("beta must be finite and >= 0, got {beta}")));
    }
    let sites = cfg.lattice.num_sites();
    let n = cfg.copies;
    let specs: Vec<(BlockBasis, Vec<u32>, f64)> = match mode {
        GibbsMode::Sector => {
            let table = sector_decomposition(n)?;
            let largest = (n as u128 + 1).checked_pow(sites as u32).unwrap_or(u128::MAX);
            if largest > MAX_SECTOR_BLOCK_DIM as u128 {
                return Err(Error::DimensionCap {
                    what: "sector block dimension",
                    size: largest,
                    limit: MAX_SECTOR_BLOCK_DIM as u128,
                });
            }
            sector_assignments(&table, sites)
                .into_iter()
                .map(|picks| {
                    let twice_j: Vec<u32> = picks.iter().map(|&i| table.entries[i].twice_j).collect();
                    let log_weight = picks
                        .iter()
                        .map(|&i| (table.entries[i].multiplicity as f64).ln())
                        .sum();
                    (BlockBasis::Sector(SectorBasis::new(twice_j.clone())), twice_j, log_weight)
                })
                .collect()
        }
        GibbsMode::FullTensor => {
            let bits = n as u128 * sites as u128;
            let size = if bits < 127 { 1u128 << bits } else { u128::MAX };
            if size > MAX_FULL_TENSOR_DIM {
                return Err(Error::DimensionCap {
                    what: "full-tensor dimension",
                    size,
                    limit: MAX_FULL_TENSOR_DIM,
                });
            }
            vec![(BlockBasis::Full(FullTensorBasis::new(n, sites)), Vec::new(), 0.0)]
        }
    };

    let blocks: Vec<Block> = specs
        .into_par_iter()
        .map(|(basis, twice_j, log_weight)| Block::build(basis, twice_j, log_weight, cfg))
        .collect();

    let ground_energy = blocks
        .iter()
        .flat_map(|b| b.energies())
        .fold(f64::INFINITY, f64::min);
    let shifted_log_z = log_sum_exp(
        blocks
            .iter()
            .flat_map(|b| b.energies().map(move |e| b.log_weight - beta * (e - ground_energy))),
    );

    let mut ensemble = GibbsEnsemble {
        copies: n,
        lattice: cfg.lattice,
        couplings: cfg.couplings.clone(),
        beta,
        mode,
        blocks,
        ground_energy,
        shifted_log_z,
        site_s3: Vec::new(),
        site_s_plus: Vec::new(),
        plus_minus: Vec::new(),
    };
    ensemble.fill_caches();
    Ok(ensemble)
}

/// All per-site picks of sector-table rows, lexicographic.
fn sector_assignments(table: &SectorTable, sites: usize) -> Vec<Vec<usize>> {
    let k = table.entries.len();
    let total = k.pow(sites as u32);
    (0..total)
        .map(|mut idx| {
            let mut picks = vec![0; sites];
            for p in picks.iter_mut().rev() {
                *p = idx % k;
                idx /= k;
            }
            picks
        })
        .collect()
}

impl GibbsEnsemble {
    pub fn copies(&self) -> u32 {
        self.copies
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn couplings(&self) -> &CouplingSet {
        &self.couplings
    }

    pub fn num_sites(&self) -> usize {
        self.lattice.num_sites()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mode(&self) -> GibbsMode {
        self.mode
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn ground_energy(&self) -> f64 {
        self.ground_energy
    }

    pub fn log_z(&self) -> f64 {
        self.shifted_log_z - self.beta * self.ground_energy
    }

    /// `ln Z` from unshifted Boltzmann factors, for consistency checks.
    pub fn recompute_log_z(&self) -> f64 {
        log_sum_exp(self.blocks.iter().flat_map(|b| {
            b.energies().map(move |e| b.log_weight - self.beta * e)
        }))
    }

    fn probability(&self, block: &Block, energy: f64) -> f64 {
        (block.log_weight - self.beta * (energy - self.ground_energy) - self.shifted_log_z).exp()
    }

    /// `Σ_a p_a f(block, v_a, E_a)` with a fixed, block-ordered reduction.
    fn thermal_sum<F>(&self, f: F) -> Complex64
    where
        F: Fn(&Block, &[Complex64], f64) -> Complex64 + Sync,
    {
        let partial: Vec<Complex64> = self
            .blocks
            .par_iter()
            .map(|block| {
                let mut acc = Complex64::new(0.0, 0.0);
                for sub in &block.subspaces {
                    for (a, &e) in sub.energies.iter().enumerate() {
                        let p = self.probability(block, e);
                        if p == 0.0 {
                            continue;
                        }
                        let v = block.eigenvector(sub, a);
                        acc += f(block, &v, e) * p;
                    }
                }
                acc
            })
            .collect();
        partial.into_iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b)
    }

    /// `ω(A_1 A_2 ... A_k)` for a word of collective operators.
    pub fn expectation(&self, word: &[CollectiveOp]) -> Complex64 {
        self.thermal_sum(|block, v, _| inner(v, &block.apply_word(word, v)))
    }

    /// `ω(X* [H, X])`.
    pub fn energy_commutator(&self, x: &CollectiveOp) -> Complex64 {
        self.thermal_sum(|block, v, e| {
            let xv = block.apply(x, v);
            let hxv = block.hamiltonian.apply(&xv);
            inner(&xv, &hxv) - inner(&xv, &xv) * e
        })
    }

    /// `ω(1)`; equals 1 up to rounding.
    pub fn trace(&self) -> f64 {
        self.thermal_sum(|_, _, _| Complex64::new(1.0, 0.0)).re
    }

    /// `ω(H)`.
    pub fn energy(&self) -> f64 {
        self.thermal_sum(|_, _, e| Complex64::new(e, 0.0)).re
    }

    fn fill_caches(&mut self) {
        let sites = self.num_sites();
        let z_ops: Vec<_> = (0..sites).map(|x| CollectiveOp::site(SpinComponent::Z, x, sites)).collect();
        let p_ops: Vec<_> = (0..sites).map(|x| CollectiveOp::site(SpinComponent::Plus, x, sites)).collect();
        let m_ops: Vec<_> = (0..sites).map(|x| CollectiveOp::site(SpinComponent::Minus, x, sites)).collect();
        self.site_s3 = z_ops.iter().map(|op| self.expectation(std::slice::from_ref(op)).re).collect();
        self.site_s_plus = p_ops.iter().map(|op| self.expectation(std::slice::from_ref(op))).collect();
        // ω(S+(x)S-(y)) = Σ p ⟨S-(x)v | S-(y)v⟩, computed in one pass.
        let flat = self.blocks.par_iter().map(|block| {
            let mut acc = vec![0.0; sites * sites];
            for sub in &block.subspaces {
                for (a, &e) in sub.energies.iter().enumerate() {
                    let p = self.probability(block, e);
                    if p == 0.0 {
                        continue;
                    }
                    let v = block.eigenvector(sub, a);
                    let lowered: Vec<_> = m_ops.iter().map(|op| block.apply(op, &v)).collect();
                    for x in 0..sites {
                        for y in 0..sites {
                            acc[x * sites + y] += p * inner(&lowered[x], &lowered[y]).re;
                        }
                    }
                }
            }
            acc
        });
        let partial: Vec<Vec<f64>> = flat.collect();
        let mut pm = vec![0.0; sites * sites];
        for part in partial {
            for (a, b) in pm.iter_mut().zip(part) {
                *a += b;
            }
        }
        self.plus_minus = pm;
    }

    /// `ω(S3(x))`.
    pub fn site_s3(&self, x: usize) -> f64 {
        self.site_s3[x]
    }

    /// `ω(S+(x))`; `ω(S-(x))` is its conjugate.
    pub fn site_s_plus(&self, x: usize) -> Complex64 {
        self.site_s_plus[x]
    }

    /// `ω(S+(x) S-(y))`.
    pub fn plus_minus(&self, x: usize, y: usize) -> f64 {
        self.plus_minus[x * self.num_sites() + y]
    }

    /// Per-copy magnetization `ω(σ3) = (1/n|Λ|) Σ_x ω(S3(x))`.
    pub fn magnetization(&self) -> f64 {
        self.site_s3.iter().sum::<f64>() / (self.copies as f64 * self.num_sites() as f64)
    }

    /// Variance of the site average `S3(x)/n`.
    pub fn site_average_variance(&self, x: usize) -> f64 {
        let sites = self.num_sites();
        let z = CollectiveOp::site(SpinComponent::Z, x, sites);
        let second = self.expectation(&[z.clone(), z]).re;
        let n = self.copies as f64;
        second / (n * n) - (self.site_s3[x] / n).powi(2)
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
