//! Total-spin content of `n` spin-1/2 copies.

use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_COPIES: u32 = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SectorEntry {
    /// `2j`, always odd for odd `n`.
    pub twice_j: u32,
    pub multiplicity: u64,
}

impl SectorEntry {
    pub fn block_dim(&self) -> u64 {
        self.twice_j as u64 + 1
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SectorTable {
    pub copies: u32,
    /// Ordered by decreasing `j`.
    pub entries: Vec<SectorEntry>,
}

impl SectorTable {
    /// `Σ_j multiplicity(j) (2j + 1)`, which equals `2^n`.
    pub fn total_dimension(&self) -> u64 {
        self.entries.iter().map(|e| e.multiplicity * e.block_dim()).sum()
    }
}

fn binomial(n: u64, k: i64) -> u64 {
    if k < 0 || k as u64 > n {
        return 0;
    }
    let k = (k as u64).min(n - k as u64);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Splits `(C²)^{⊗n}` into spin-`j` irreducibles with multiplicities
/// `C(n, n/2 - j) - C(n, n/2 - j - 1)`.
pub fn sector_decomposition(n: u32) -> Result<SectorTable> {
    if n % 2 == 0 {
        return Err(Error::Parameter(format!("copy count must be odd (2S+1), got {n}")));
    }
    if n > MAX_COPIES {
        return Err(Error::DimensionCap {
            what: "copies per site",
            size: n as u128,
            limit: MAX_COPIES as u128,
        });
    }
    let entries = (1..=n)
        .rev()
        .step_by(2)
        .map(|twice_j| {
            // n/2 - j = (n - 2j)/2, an integer for odd n and odd 2j.
            let k = ((n - twice_j) / 2) as i64;
            SectorEntry {
                twice_j,
                multiplicity: binomial(n as u64, k) - binomial(n as u64, k - 1),
            }
        })
        .collect();
    Ok(SectorTable { copies: n, entries })
}
