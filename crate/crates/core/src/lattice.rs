//! Periodic lattices, exchange couplings and the ferromagnetic-regime check.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};

/// Periodic hypercubic torus of `size^dim` sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatticeSpec {
    dim: usize,
    size: usize,
}

impl LatticeSpec {
    pub fn new(dim: usize, size: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Lattice("dimension must be at least 1".into()));
        }
        if size == 0 {
            return Err(Error::Lattice("linear size must be at least 1".into()));
        }
        let sites = (size as u128).checked_pow(dim as u32);
        match sites {
            Some(s) if s <= usize::MAX as u128 => Ok(Self { dim, size }),
            _ => Err(Error::Lattice(format!("{size}^{dim} sites overflow"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn num_sites(&self) -> usize {
        self.size.pow(self.dim as u32)
    }

    /// Coordinates of a site, lexicographic with the last component fastest.
    pub fn coords(&self, site: usize) -> Vec<i64> {
        let mut out = vec![0; self.dim];
        let mut rest = site;
        for c in out.iter_mut().rev() {
            *c = (rest % self.size) as i64;
            rest /= self.size;
        }
        out
    }

    /// Site index of a coordinate vector, reduced mod `size` componentwise.
    pub fn site_index(&self, coords: &[i64]) -> usize {
        debug_assert_eq!(coords.len(), self.dim);
        let l = self.size as i64;
        coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.size + c.rem_euclid(l) as usize)
    }

    /// Site reached from `site` by the displacement `z`.
    pub fn translate(&self, site: usize, z: &[i64]) -> usize {
        let mut c = self.coords(site);
        for (ci, zi) in c.iter_mut().zip(z) {
            *ci += zi;
        }
        self.site_index(&c)
    }
}

/// Integer displacement vector between lattice sites.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Displacement(pub Vec<i64>);

impl Displacement {
    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt()
    }

    fn dot(&self, k: &[f64]) -> f64 {
        self.0.iter().zip(k).map(|(&z, &k)| z as f64 * k).sum()
    }
}

impl fmt::Display for Displacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Selects the transverse (`J`) or longitudinal (`J3`) exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exchange {
    Transverse,
    Longitudinal,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CouplingPair {
    pub j: f64,
    pub j3: f64,
}

impl CouplingPair {
    fn get(&self, which: Exchange) -> f64 {
        match which {
            Exchange::Transverse => self.j,
            Exchange::Longitudinal => self.j3,
        }
    }
}

/// Finite-range, translation-invariant exchange couplings keyed by
/// displacement, plus the external field `h`.
///
/// Every stored displacement `z` has its mirror `-z` stored with the same
/// values, and the on-site coupling is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingSet {
    dim: usize,
    entries: BTreeMap<Displacement, CouplingPair>,
    h: f64,
}

impl CouplingSet {
    /// Builds a coupling set from explicit entries. Both `z` and `-z` must be
    /// present with equal values.
    pub fn new(
        dim: usize,
        entries: impl IntoIterator<Item = (Vec<i64>, CouplingPair)>,
        h: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Coupling("dimension must be at least 1".into()));
        }
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::Coupling(format!("field must be finite and >= 0, got {h}")));
        }
        let mut map = BTreeMap::new();
        for (z, pair) in entries {
            let z = Displacement(z);
            check_entry(dim, &z, pair)?;
            if let Some(prev) = map.insert(z.clone(), pair) {
                if prev != pair {
                    return Err(Error::Coupling(format!("conflicting duplicate entries for {z}")));
                }
            }
        }
        for (z, pair) in &map {
            match map.get(&z.neg()) {
                Some(mirror) if mirror == pair => {}
                Some(_) => {
                    return Err(Error::Coupling(format!(
                        "couplings at {z} and {} differ; J(z) = J(-z) required",
                        z.neg()
                    )))
                }
                None => {
                    return Err(Error::Coupling(format!("displacement {z} has no mirror {}", z.neg())))
                }
            }
        }
        Ok(Self { dim, entries: map, h })
    }

    /// Entries for each `z` are mirrored to `-z` automatically; a mirror that
    /// is also listed must agree.
    pub fn symmetrized(
        dim: usize,
        entries: impl IntoIterator<Item = (Vec<i64>, CouplingPair)>,
        h: f64,
    ) -> Result<Self> {
        let mut map: BTreeMap<Displacement, CouplingPair> = BTreeMap::new();
        for (z, pair) in entries {
            let z = Displacement(z);
            check_entry(dim, &z, pair)?;
            if let Some(prev) = map.insert(z.clone(), pair) {
                if prev != pair {
                    return Err(Error::Coupling(format!("conflicting duplicate entries for {z}")));
                }
            }
        }
        let mirrors: Vec<_> = map.iter().map(|(z, p)| (z.neg(), *p)).collect();
        for (mz, pair) in mirrors {
            match map.get(&mz) {
                Some(existing) if *existing != pair => {
                    return Err(Error::Coupling(format!(
                        "couplings at {mz} and {} differ; J(z) = J(-z) required",
                        mz.neg()
                    )))
                }
                Some(_) => {}
                None => {
                    map.insert(mz, pair);
                }
            }
        }
        Self::new(dim, map.into_iter().map(|(z, p)| (z.0, p)), h)
    }

    /// Hypercubic nearest-neighbour couplings of strengths `j` and `j3`.
    pub fn nearest_neighbor(dim: usize, j: f64, j3: f64, h: f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(2 * dim);
        for axis in 0..dim {
            for sign in [1, -1] {
                let mut z = vec![0; dim];
                z[axis] = sign;
                entries.push((z, CouplingPair { j, j3 }));
            }
        }
        Self::new(dim, entries, h)
    }

    /// Reads `dz1,...,dznu,J,J3` rows. Missing mirrors are inserted.
    pub fn from_csv_reader<R: Read>(reader: R, dim: usize, h: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected: Vec<String> = (1..=dim)
            .map(|i| format!("dz{i}"))
            .chain(["J".to_string(), "J3".to_string()])
            .collect();
        let got: Vec<&str> = headers.iter().collect();
        if got != expected.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::Coupling(format!(
                "expected header {}, found {}",
                expected.join(","),
                got.join(",")
            )));
        }
        let mut entries = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |what: &str| Error::Coupling(format!("row {}: cannot parse {what}", line + 1));
            let z = (0..dim)
                .map(|i| rec[i].parse::<i64>().map_err(|_| bad(&format!("dz{}", i + 1))))
                .collect::<Result<Vec<_>>>()?;
            let j = rec[dim].parse::<f64>().map_err(|_| bad("J"))?;
            let j3 = rec[dim + 1].parse::<f64>().map_err(|_| bad("J3"))?;
            entries.push((z, CouplingPair { j, j3 }));
        }
        Self::symmetrized(dim, entries, h)
    }

    pub fn from_csv_path(path: &std::path::Path, dim: usize, h: f64) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file, dim, h)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn with_field(&self, h: f64) -> Result<Self> {
        Self::new(self.dim, self.entries.iter().map(|(z, p)| (z.0.clone(), *p)), h)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Displacement, &CouplingPair)> {
        self.entries.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest displacement norm carrying a nonzero coupling.
    pub fn range(&self) -> f64 {
        self.entries
            .iter()
            .filter(|(_, p)| p.j != 0.0 || p.j3 != 0.0)
            .map(|(z, _)| z.norm())
            .fold(0.0, f64::max)
    }

    /// `Σ_z J(z)`, the zero-momentum transform.
    pub fn total(&self, which: Exchange) -> f64 {
        self.entries.values().map(|p| p.get(which)).sum()
    }

    /// Coupling matrices on the torus. Periodic images of a displacement are
    /// summed, so the matrix is circulant with symbol `J(k)` on the grid.
    pub fn torus_matrices(&self, lattice: &LatticeSpec) -> Result<TorusCouplings> {
        if lattice.dim() != self.dim {
            return Err(Error::Coupling(format!(
                "coupling dimension {} does not match lattice dimension {}",
                self.dim,
                lattice.dim()
            )));
        }
        let n = lattice.num_sites();
        let mut j = vec![0.0; n * n];
        let mut j3 = vec![0.0; n * n];
        for (z, pair) in &self.entries {
            if pair.j == 0.0 && pair.j3 == 0.0 {
                continue;
            }
            for x in 0..n {
                let y = lattice.translate(x, &z.0);
                if y == x {
                    return Err(Error::Coupling(format!(
                        "displacement {z} wraps onto the same site on a torus of size {}",
                        lattice.size()
                    )));
                }
                j[x * n + y] += pair.j;
                j3[x * n + y] += pair.j3;
            }
        }
        Ok(TorusCouplings { num_sites: n, j, j3, h: self.h })
    }
}

fn check_entry(dim: usize, z: &Displacement, pair: CouplingPair) -> Result<()> {
    if z.0.len() != dim {
        return Err(Error::Coupling(format!("displacement {z} is not {dim}-dimensional")));
    }
    if !(pair.j.is_finite() && pair.j3.is_finite()) {
        return Err(Error::Coupling(format!("non-finite coupling at {z}")));
    }
    if z.is_zero() && (pair.j != 0.0 || pair.j3 != 0.0) {
        return Err(Error::Coupling("on-site coupling must vanish".into()));
    }
    Ok(())
}

/// Dense, row-major `J(x,y)` and `J3(x,y)` on a finite torus.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusCouplings {
    pub num_sites: usize,
    pub j: Vec<f64>,
    pub j3: Vec<f64>,
    pub h: f64,
}

impl TorusCouplings {
    pub fn j(&self, x: usize, y: usize) -> f64 {
        self.j[x * self.num_sites + y]
    }

    pub fn j3(&self, x: usize, y: usize) -> f64 {
        self.j3[x * self.num_sites + y]
    }
}

/// Dual lattice `{2πn/L : n ∈ {0..L-1}^ν}`, lexicographic in `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    lattice: LatticeSpec,
    points: Vec<Vec<f64>>,
}

impl MomentumGrid {
    pub fn new(lattice: LatticeSpec) -> Self {
        let step = 2.0 * PI / lattice.size() as f64;
        let points = (0..lattice.num_sites())
            .map(|i| lattice.coords(i).into_iter().map(|n| n as f64 * step).collect())
            .collect();
        Self { lattice, points }
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// Integer label `n` of the `i`-th momentum.
    pub fn index_vector(&self, i: usize) -> Vec<i64> {
        self.lattice.coords(i)
    }

    /// Momentum `2πn/L` for an integer label (reduced mod `L`).
    pub fn momentum_of(&self, n: &[i64]) -> Vec<f64> {
        self.points[self.lattice.site_index(n)].clone()
    }

    /// Position of `-k` (mod 2π) in the grid.
    pub fn negated(&self, i: usize) -> usize {
        let n: Vec<i64> = self.lattice.coords(i).into_iter().map(|c| -c).collect();
        self.lattice.site_index(&n)
    }
}

/// `Σ_z J(z) e^{-ik·z}` for the chosen exchange. Real for even couplings.
pub fn fourier_coupling(c: &CouplingSet, which: Exchange, k: &[f64]) -> f64 {
    let mut re = 0.0;
    let mut im = 0.0;
    let mut scale = 0.0;
    for (z, pair) in &c.entries {
        let v = pair.get(which);
        let phase = z.dot(k);
        re += v * phase.cos();
        im -= v * phase.sin();
        scale += v.abs();
    }
    assert!(
        im.abs() <= 1e-12 * scale.max(1.0),
        "imaginary residue {im} in Fourier transform of even couplings"
    );
    re
}

/// Fourier symbol `D(q) = J3(0) - J(q)` of `λ(x)δ(x,y) - J(x,y)`.
pub fn d_of_q(c: &CouplingSet, k: &[f64]) -> f64 {
    c.total(Exchange::Longitudinal) - fourier_coupling(c, Exchange::Transverse, k)
}

pub const DEFAULT_GAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `D(q)` in grid order.
    pub d_values: Vec<f64>,
    pub d0: f64,
    pub min_d: f64,
    /// Grid position of the minimizing momentum.
    pub argmin: usize,
    pub argmin_q: Vec<f64>,
    pub gap_ok: bool,
    pub field_ok_strict: bool,
    pub field_ok_relaxed: bool,
    pub messages: Vec<String>,
}

impl ValidationReport {
    /// Gap and relaxed field condition both hold.
    pub fn is_valid(&self) -> bool {
        self.gap_ok && self.field_ok_relaxed
    }
}

/// Checks `D(q) >= -tol` on the grid and the field conditions
/// `h > D(0) > 0` (strict) and `h > max(D(0), 0)` (relaxed).
pub fn validate_ferromagnetic(c: &CouplingSet, grid: &MomentumGrid, tol: f64) -> ValidationReport {
    let d_values: Vec<f64> = grid.points().iter().map(|k| d_of_q(c, k)).collect();
    let d0 = d_values[0];
    let (argmin, min_d) = d_values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, d)| if d < best.1 { (i, d) } else { best });
    let argmin_q = grid.point(argmin).to_vec();
    let h = c.h();
    let gap_ok = min_d >= -tol;
    let field_ok_strict = h > d0 && d0 > 0.0;
    let field_ok_relaxed = h > d0.max(0.0);

    let mut messages = Vec::new();
    let label = grid.index_vector(argmin);
    if gap_ok {
        messages.push(format!("D(q) >= 0 on the grid; minimum {min_d:.6e} at q = 2π{label:?}/L"));
    } else {
        messages.push(format!(
            "D(q) is negative: minimum {min_d:.6e} at q = 2π{label:?}/L = {argmin_q:?}"
        ));
    }
    if field_ok_strict {
        messages.push(format!("h = {h} > D(0) = {d0} > 0"));
    } else if field_ok_relaxed {
        messages.push(format!(
            "h = {h} > max(D(0), 0) holds but h > D(0) > 0 does not (D(0) = {d0})"
        ));
    } else {
        messages.push(format!("field too weak: h = {h} <= max(D(0), 0) with D(0) = {d0}"));
    }
    ValidationReport {
        d_values,
        d0,
        min_d,
        argmin,
        argmin_q,
        gap_ok,
        field_ok_strict,
        field_ok_relaxed,
        messages,
    }
}
