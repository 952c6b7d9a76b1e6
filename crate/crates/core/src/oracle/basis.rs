//! Product bases on which collective site spins act.
//!
//! Two realisations are provided. [`SectorBasis`] is a tensor product of one
//! spin-`j_x` irreducible per site, with `S±` the angular-momentum ladder
//! operators and `S3 = 2 J_z`. [`FullTensorBasis`] keeps every copy as a bit,
//! so `S±(x)` is literally `Σ_i σ±_i(x)`. On a given sector the two agree.

/// Action of `S3(x)`, `S+(x)` and `S-(x)` on basis states.
pub trait SpinBasis: Send + Sync {
    fn dim(&self) -> usize;
    fn num_sites(&self) -> usize;

    /// Eigenvalue of `S3(x)` (Pauli units, so an integer).
    fn s3(&self, state: usize, site: usize) -> i32;

    fn raise(&self, state: usize, site: usize, out: &mut dyn FnMut(usize, f64));
    fn lower(&self, state: usize, site: usize, out: &mut dyn FnMut(usize, f64));

    fn total_s3(&self, state: usize) -> i32 {
        (0..self.num_sites()).map(|x| self.s3(state, x)).sum()
    }
}

/// `⊗_x V_{j_x}` with local states `|j, m⟩`, `2m = -2j + 2a`, `a = 0..=2j`.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    twice_j: Vec<u32>,
    strides: Vec<usize>,
    dim: usize,
}

impl SectorBasis {
    pub fn new(twice_j: Vec<u32>) -> Self {
        let mut strides = vec![0; twice_j.len()];
        let mut dim = 1usize;
        for x in (0..twice_j.len()).rev() {
            strides[x] = dim;
            dim *= twice_j[x] as usize + 1;
        }
        Self { twice_j, strides, dim }
    }

    pub fn twice_j(&self) -> &[u32] {
        &self.twice_j
    }

    fn local(&self, state: usize, site: usize) -> usize {
        (state / self.strides[site]) % (self.twice_j[site] as usize + 1)
    }

    fn twice_m(&self, state: usize, site: usize) -> i32 {
        -(self.twice_j[site] as i32) + 2 * self.local(state, site) as i32
    }
}

impl SpinBasis for SectorBasis {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_sites(&self) -> usize {
        self.twice_j.len()
    }

    fn s3(&self, state: usize, site: usize) -> i32 {
        self.twice_m(state, site)
    }

    fn raise(&self, state: usize, site: usize, out: &mut dyn FnMut(usize, f64)) {
        let tj = self.twice_j[site] as i32;
        let tm = self.twice_m(state, site);
        if tm < tj {
            // ⟨m+1|J+|m⟩ = sqrt(j(j+1) - m(m+1))
            let c = 0.5 * (((tj - tm) * (tj + tm + 2)) as f64).sqrt();
            out(state + self.strides[site], c);
        }
    }

    fn lower(&self, state: usize, site: usize, out: &mut dyn FnMut(usize, f64)) {
        let tj = self.twice_j[site] as i32;
        let tm = self.twice_m(state, site);
        if tm > -tj {
            let c = 0.5 * (((tj + tm) * (tj - tm + 2)) as f64).sqrt();
            out(state - self.strides[site], c);
        }
    }
}

/// All `2^{n|Λ|}` configurations of `n` Pauli spins per site. Bit `x·n + i`
/// set means copy `i` at site `x` has `σ3 = +1`.
#[derive(Debug, Clone)]
pub struct FullTensorBasis {
    copies: u32,
    sites: usize,
}

impl FullTensorBasis {
    pub fn new(copies: u32, sites: usize) -> Self {
        assert!(copies as usize * sites < usize::BITS as usize);
        Self { copies, sites }
    }

    fn site_mask(&self, site: usize) -> usize {
        ((1usize << self.copies) - 1) << (site * self.copies as usize)
    }
}

impl SpinBasis for FullTensorBasis {
    fn dim(&self) -> usize {
        1usize << (self.copies as usize * self.sites)
    }

    fn num_sites(&self) -> usize {
        self.sites
    }

    fn s3(&self, state: usize, site: usize) -> i32 {
        let up = (state & self.site_mask(site)).count_ones() as i32;
        2 * up - self.copies as i32
    }

    fn raise(&self, state: usize, site: usize, out: &mut dyn FnMut(usize, f64)) {
        let base = site * self.copies as usize;
        for i in 0..self.copies as usize {
            let bit = 1usize << (base + i);
            if state & bit == 0 {
                out(state | bit, 1.0);
            }
        }
    }

    fn lower(&self, state: usize, site: usize, out: &mut dyn FnMut(usize, f64)) {
        let base = site * self.copies as usize;
        for i in 0..self.copies as usize {
            let bit = 1usize << (base + i);
            if state & bit != 0 {
                out(state & !bit, 1.0);
            }
        }
    }
}
