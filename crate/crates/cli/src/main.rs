//! `magnon`: command-line driver for spin-wave thermodynamics, the exact
//! finite-spin oracle and magnon dynamics.

mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use magnon_core::dynamics::{
    equilibrium_state, evolve, mode_diagonal_state, number_density, GaussianMagnonState, MagnonSystem,
};
use magnon_core::lattice::{validate_ferromagnetic, CouplingSet, LatticeSpec, MomentumGrid};
use magnon_core::oracle::{convergence_study, sector_decomposition};
use magnon_core::output::{self, CsvArtifact};
use magnon_core::spinwave::{occupation_from_d, solve_magnetization, ThermalParams};
use serde_json::{json, Value};

use config::{Format, Initial, RunConfig};

const ENV_OUT_DIR: &str = "MAGNON_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "magnon", version, about = "Spin-wave thermodynamics and magnon dynamics on the torus")]
struct Cli {
    /// Output directory; overrides MAGNON_OUT_DIR and output.dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Artifact format; overrides output.format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the ferromagnetic regime conditions.
    Validate(ConfigArg),
    /// Solve the self-consistency equation for the magnetization.
    Solve(ConfigArg),
    /// Run the exact finite-spin convergence study.
    Oracle(ConfigArg),
    /// Evolve a Gaussian magnon state and record the number density.
    Dynamics(ConfigArg),
    /// Print the spin-sector decomposition of n copies of spin one half.
    Sectors {
        /// Number of copies; must be odd.
        #[arg(long)]
        copies: u32,
    },
}

#[derive(Debug, clap::Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

enum Failure {
    Scientific(anyhow::Error),
    Usage(anyhow::Error),
}

impl From<magnon_core::Error> for Failure {
    fn from(e: magnon_core::Error) -> Self {
        use magnon_core::Error as E;
        match e {
            E::Regime(_) | E::VanishingMagnetization | E::NoRoot(_) => Failure::Scientific(e.into()),
            _ => Failure::Usage(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<(), Failure>;

struct Sink {
    out_dir: PathBuf,
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Scientific(e)) => {
            eprintln!("failed: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Sectors { copies } => {
            let ctx = context(cli, None);
            let table = sector_decomposition(*copies)?;
            match ctx.format {
                Format::Json => write_json(&ctx, "sectors", &output::sectors_json(&table)),
                Format::Csv => write_csv(&ctx, "sectors", &output::sectors_csv(&table)),
            }
        }
        Command::Validate(a) => {
            let cfg = RunConfig::load(&a.config)?;
            validate(&context(cli, Some(&cfg)), &cfg)
        }
        Command::Solve(a) => {
            let cfg = RunConfig::load(&a.config)?;
            solve(&context(cli, Some(&cfg)), &cfg)
        }
        Command::Oracle(a) => {
            let cfg = RunConfig::load(&a.config)?;
            oracle(&context(cli, Some(&cfg)), &cfg)
        }
        Command::Dynamics(a) => {
            let cfg = RunConfig::load(&a.config)?;
            dynamics(&context(cli, Some(&cfg)), &cfg)
        }
    }
}

fn context(cli: &Cli, cfg: Option<&RunConfig>) -> Sink {
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(ENV_OUT_DIR).map(PathBuf::from))
        .or_else(|| cfg.and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."));
    let format = cli.format.or_else(|| cfg.and_then(|c| c.output.format)).unwrap_or(Format::Json);
    Sink { out_dir, format }
}

fn write_file(ctx: &Sink, name: &str, bytes: &[u8]) -> Outcome {
    fs::create_dir_all(&ctx.out_dir)
        .with_context(|| format!("creating output directory {}", ctx.out_dir.display()))?;
    let path = ctx.out_dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_json(ctx: &Sink, stem: &str, value: &Value) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| anyhow!(e))?;
    text.push('\n');
    write_file(ctx, &format!("{stem}.json"), text.as_bytes())
}

fn write_csv(ctx: &Sink, stem: &str, csv: &CsvArtifact) -> Outcome {
    let mut buf = Vec::new();
    csv.write_to(&mut buf).map_err(|e| anyhow!(e))?;
    write_file(ctx, &format!("{stem}.csv"), &buf)
}

fn setup(cfg: &RunConfig) -> Result<(LatticeSpec, CouplingSet, MomentumGrid), Failure> {
    let lattice = LatticeSpec::new(cfg.lattice.dim, cfg.lattice.size)?;
    let couplings = CouplingSet::from_csv_path(&cfg.couplings, cfg.lattice.dim, cfg.h)?;
    couplings.torus_matrices(&lattice)?;
    Ok((lattice, couplings, MomentumGrid::new(lattice)))
}

fn validate(ctx: &Sink, cfg: &RunConfig) -> Outcome {
    let (_, couplings, grid) = setup(cfg)?;
    let report = validate_ferromagnetic(&couplings, &grid, cfg.validate.tol);
    let mut preamble = cfg.preamble();
    preamble.push(format!("valid = {}", report.is_valid()));
    preamble.extend(report.messages.iter().map(|m| format!("message = {m}")));
    match ctx.format {
        Format::Json => write_json(ctx, "validate", &output::validation_json(&report, &grid, &cfg.to_json()))?,
        Format::Csv => write_csv(ctx, "validate", &output::validation_csv(&report, &grid, preamble))?,
    }
    for m in &report.messages {
        eprintln!("{m}");
    }
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::Scientific(anyhow!("couplings are outside the ferromagnetic regime")))
    }
}

fn solve(ctx: &Sink, cfg: &RunConfig) -> Outcome {
    let (_, couplings, grid) = setup(cfg)?;
    let params = ThermalParams::new(cfg.beta, cfg.h)?;
    let sol = solve_magnetization(&params, &couplings, &grid, cfg.solve.tol, cfg.solve.scan_points)?;
    match ctx.format {
        Format::Json => write_json(ctx, "solve", &output::solution_json(&sol, &grid, &cfg.to_json()))?,
        Format::Csv => {
            let mut preamble = cfg.preamble();
            preamble.push(format!("m_star = {}", output::fmt_f64(sol.m_star)));
            preamble.push(format!("residual = {}", output::fmt_f64(sol.residual)));
            preamble.push(format!("bound = {}", output::fmt_f64(sol.bound)));
            write_csv(ctx, "solve", &output::solution_csv(&sol, &grid, preamble))?
        }
    }
    if sol.multiple_roots() {
        eprintln!("warning: {} roots found, reporting the one nearest -1", sol.all_roots.len());
    }
    Ok(())
}

fn oracle(ctx: &Sink, cfg: &RunConfig) -> Outcome {
    let (lattice, couplings, grid) = setup(cfg)?;
    let label = cfg
        .oracle
        .q
        .clone()
        .unwrap_or_else(|| vec![(cfg.lattice.size / 2) as i64; cfg.lattice.dim]);
    let q = grid.momentum_of(&label);
    let table = convergence_study(&lattice, &couplings, &cfg.oracle.copies, cfg.beta, &q, cfg.oracle.mode)?;
    match ctx.format {
        Format::Json => write_json(ctx, "oracle", &output::convergence_json(&table, &cfg.to_json()))?,
        Format::Csv => {
            let mut preamble = cfg.preamble();
            preamble.push(format!("strictly_decreasing = {}", table.strictly_decreasing()));
            write_csv(ctx, "oracle", &output::convergence_csv(&table, preamble))?
        }
    }
    let monotone = if cfg.oracle.strict { table.strictly_decreasing() } else { table.non_increasing() };
    if monotone {
        Ok(())
    } else {
        Err(Failure::Scientific(anyhow!("discrepancy column is not monotonically decreasing")))
    }
}

fn initial_state(cfg: &RunConfig, couplings: &CouplingSet, grid: &MomentumGrid) -> Result<GaussianMagnonState, Failure> {
    let m = match cfg.dynamics.m {
        Some(m) if !(-1.0..=0.0).contains(&m) => {
            return Err(Failure::Usage(anyhow!("dynamics.m must lie in [-1, 0], got {m}")))
        }
        Some(m) => m,
        None => {
            let params = ThermalParams::new(cfg.beta, cfg.h)?;
            let sol = solve_magnetization(&params, couplings, grid, cfg.solve.tol, cfg.solve.scan_points)?;
            if cfg.dynamics.initial == Initial::Equilibrium {
                return Ok(equilibrium_state(&sol, grid, couplings)?);
            }
            sol.m_star
        }
    };
    let system = Arc::new(MagnonSystem::new(grid.clone(), couplings, m)?);
    match cfg.dynamics.initial {
        Initial::Equilibrium => {
            let params = ThermalParams::new(cfg.beta, cfg.h)?;
            let occupations = grid
                .points()
                .iter()
                .map(|k| occupation_from_d(magnon_core::lattice::d_of_q(couplings, k), m, &params))
                .collect::<magnon_core::Result<Vec<_>>>()?;
            Ok(mode_diagonal_state(system, &occupations)?)
        }
        Initial::Packet => {
            let p = &cfg.dynamics.packet;
            let center = p
                .center
                .clone()
                .unwrap_or_else(|| vec![(cfg.lattice.size / 2) as f64; cfg.lattice.dim]);
            let label = p.momentum.clone().unwrap_or_else(|| vec![1; cfg.lattice.dim]);
            let k0 = grid.momentum_of(&label);
            Ok(GaussianMagnonState::wave_packet(system, &center, p.width, &k0, p.number)?)
        }
    }
}

fn dynamics(ctx: &Sink, cfg: &RunConfig) -> Outcome {
    let (_, couplings, grid) = setup(cfg)?;
    let state = initial_state(cfg, &couplings, &grid)?;
    let n0 = state.total_number();
    let e0 = state.energy();
    let mut csv = output::trajectory_csv(cfg.lattice.dim, cfg.preamble());
    let mut worst = (0.0f64, 0.0f64);
    let mut last = (0.0, state.clone());
    for &t in &cfg.dynamics.times {
        let s = evolve(&state, t);
        worst.0 = worst.0.max((s.total_number() - n0).abs());
        worst.1 = worst.1.max((s.energy() - e0).abs());
        output::push_trajectory_rows(&mut csv, &s, t, &number_density(&s));
        last = (t, s);
    }
    write_csv(ctx, "dynamics", &csv)?;
    let config = cfg.to_json();
    let snapshot = json!({
        "initial": output::gamma_json(&state, 0.0, &Value::Null),
        "final": output::gamma_json(&last.1, last.0, &Value::Null),
        "conservation": {
            "max_number_drift": output::json_f64(worst.0),
            "max_energy_drift": output::json_f64(worst.1),
            "tol": output::json_f64(cfg.dynamics.tol),
        },
        "config": config,
    });
    write_json(ctx, "dynamics_gamma", &snapshot)?;
    if worst.0 <= cfg.dynamics.tol && worst.1 <= cfg.dynamics.tol {
        Ok(())
    } else {
        Err(Failure::Scientific(anyhow!(
            "conservation violated: number drift {:.3e}, energy drift {:.3e}",
            worst.0,
            worst.1
        )))
    }
}
