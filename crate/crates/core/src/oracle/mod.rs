//! Exact Gibbs states of the rescaled Heisenberg model at finite spin.
//!
//! Each site carries `n = 2S+1` spin-1/2 copies, and the Hamiltonian only
//! sees the collective spins `S^♯(x)`. The trace over `(C²)^{⊗n}` per site
//! therefore splits into total-spin sectors `j` weighted by their
//! multiplicities, and the Gibbs state is assembled from small blocks
//! `⊗_x V_{j_x}`. A copy-resolved path over the full `2^{n|Λ|}` space computes
//! the same quantities on small instances.

mod basis;
mod convergence;
mod ensemble;
mod observables;
mod sectors;

pub use basis::{FullTensorBasis, SectorBasis, SpinBasis};
pub use convergence::{convergence_study, ConvergenceRow, ConvergenceTable};
pub use ensemble::{
    build_gibbs, Block, CollectiveOp, GibbsEnsemble, GibbsMode, SpinComponent, SpinConfig,
    MAX_FULL_TENSOR_DIM, MAX_SECTOR_BLOCK_DIM,
};
pub use observables::{
    commutator_expectation, eeb_margin, fluctuation_two_point, wick_residual, EebMargin, EebSides,
    FluctuationKind, FluctuationObservable,
};
pub use sectors::{sector_decomposition, SectorEntry, SectorTable, MAX_COPIES};
