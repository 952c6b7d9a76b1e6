//! Run configuration: flat `section.key = value` lines (TOML dotted keys).

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use magnon_core::oracle::GibbsMode;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeSection,
    pub couplings: PathBuf,
    pub beta: f64,
    pub h: f64,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub validate: ValidateSection,
    #[serde(default)]
    pub solve: SolveSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub dynamics: DynamicsSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub dim: usize,
    pub size: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSection {
    pub tol: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self { tol: magnon_core::lattice::DEFAULT_GAP_TOL }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSection {
    pub tol: f64,
    pub scan_points: usize,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self {
            tol: magnon_core::spinwave::DEFAULT_TOL,
            scan_points: magnon_core::spinwave::DEFAULT_SCAN_POINTS,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    /// Ladder of `n = 2S+1`.
    pub copies: Vec<u32>,
    /// Integer momentum label; `q = 2π·q/L`. Defaults to the zone boundary.
    pub q: Option<Vec<i64>>,
    pub mode: GibbsMode,
    /// Require a strictly decreasing discrepancy column.
    pub strict: bool,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { copies: vec![1, 3, 5, 7], q: None, mode: GibbsMode::Sector, strict: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    Equilibrium,
    Packet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    pub times: Vec<f64>,
    pub initial: Initial,
    /// Magnetization; solved self-consistently when absent.
    pub m: Option<f64>,
    pub tol: f64,
    pub packet: PacketSection,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        Self {
            times: vec![0.0, 0.5, 1.0],
            initial: Initial::Equilibrium,
            m: None,
            tol: 1e-10,
            packet: PacketSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketSection {
    pub center: Option<Vec<f64>>,
    pub width: f64,
    /// Integer carrier momentum label.
    pub momentum: Option<Vec<i64>>,
    pub number: f64,
}

impl Default for PacketSection {
    fn default() -> Self {
        Self { center: None, width: 1.5, momentum: None, number: 1.0 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        if cfg.couplings.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.couplings = dir.join(&cfg.couplings);
            }
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        ensure!(self.lattice.dim >= 1, "lattice.dim must be >= 1");
        ensure!(self.lattice.size >= 1, "lattice.size must be >= 1");
        ensure!(self.beta.is_finite() && self.beta >= 0.0, "beta must be finite and >= 0");
        ensure!(self.h.is_finite() && self.h >= 0.0, "h must be finite and >= 0");
        ensure!(self.validate.tol >= 0.0, "validate.tol must be >= 0");
        ensure!(self.solve.tol > 0.0, "solve.tol must be > 0");
        ensure!(self.solve.scan_points >= 2, "solve.scan_points must be >= 2");
        ensure!(self.dynamics.tol > 0.0, "dynamics.tol must be > 0");
        ensure!(
            self.dynamics.times.iter().all(|t| t.is_finite()),
            "dynamics.times must be finite"
        );
        if let Some(q) = &self.oracle.q {
            ensure!(q.len() == self.lattice.dim, "oracle.q must have lattice.dim components");
        }
        let p = &self.dynamics.packet;
        if let Some(c) = &p.center {
            ensure!(c.len() == self.lattice.dim, "dynamics.packet.center must have lattice.dim components");
        }
        if let Some(k) = &p.momentum {
            ensure!(k.len() == self.lattice.dim, "dynamics.packet.momentum must have lattice.dim components");
        }
        if !self.couplings.is_file() {
            bail!("coupling file {} does not exist", self.couplings.display());
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        magnon_core::output::to_json(self)
    }

    /// The effective configuration as flat `section.key = value` lines.
    pub fn preamble(&self) -> Vec<String> {
        let mut lines = Vec::new();
        flatten("", &self.to_json(), &mut lines);
        lines
    }
}

fn flatten(prefix: &str, value: &serde_json::Value, lines: &mut Vec<String>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, lines);
            }
        }
        serde_json::Value::Null => {}
        other => lines.push(format!("{prefix} = {other}")),
    }
}
