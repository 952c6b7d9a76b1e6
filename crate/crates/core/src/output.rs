//! Machine-readable artifacts. Floats are written with 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Map, Number, Value};

use crate::dynamics::GaussianMagnonState;
use crate::lattice::{MomentumGrid, ValidationReport};
use crate::oracle::{ConvergenceTable, SectorTable};
use crate::spinwave::SpinWaveSolution;

/// `x` with 17 significant digits, e.g. `-6.8696471476289168e-1`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(fmt_f64(x).parse::<Number>().expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

/// Rewrites every non-integer number in `v` with 17 significant digits.
pub fn full_precision(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                json_f64(text.parse::<f64>().expect("JSON number parses as f64"))
            } else {
                Value::Number(n)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(full_precision).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, full_precision(v))).collect()),
        other => other,
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Value {
    full_precision(serde_json::to_value(value).expect("artifact types serialize"))
}

fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| json_f64(x)).collect())
}

fn grid_json(grid: &MomentumGrid) -> Value {
    Value::Array(grid.points().iter().map(|k| floats(k)).collect())
}

fn with_config(mut body: Map<String, Value>, config: &Value) -> Value {
    body.insert("config".into(), config.clone());
    Value::Object(body)
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(o) => o,
        _ => unreachable!("artifact bodies are objects"),
    }
}

pub fn validation_json(report: &ValidationReport, grid: &MomentumGrid, config: &Value) -> Value {
    let mut body = object(to_json(report));
    body.insert("q".into(), grid_json(grid));
    body.insert("min_q_index".into(), json!(grid.index_vector(report.argmin)));
    with_config(body, config)
}

pub fn solution_json(sol: &SpinWaveSolution, grid: &MomentumGrid, config: &Value) -> Value {
    let body = json!({
        "m_star": json_f64(sol.m_star),
        "residual": json_f64(sol.residual),
        "bound": json_f64(sol.bound),
        "bound_diagnostics": to_json(&sol.bound_diagnostics),
        "roots": floats(&sol.all_roots),
        "multiple_roots": sol.multiple_roots(),
        "beta": json_f64(sol.params.beta()),
        "h": json_f64(sol.params.h()),
        "q": grid_json(grid),
        "d_of_q": floats(&sol.d_values),
        "n_of_q": floats(&sol.occupations),
        "eps_of_q": floats(&sol.dispersion),
        "diagnostics": sol.diagnostics,
    });
    with_config(object(body), config)
}

pub fn convergence_json(table: &ConvergenceTable, config: &Value) -> Value {
    let mut body = object(to_json(table));
    body.insert("strictly_decreasing".into(), json!(table.strictly_decreasing()));
    with_config(body, config)
}

pub fn sectors_json(table: &SectorTable) -> Value {
    to_json(table)
}

fn complex_matrix(m: &nalgebra::DMatrix<num_complex::Complex64>) -> Value {
    let rows = |f: fn(&num_complex::Complex64) -> f64| {
        Value::Array(
            (0..m.nrows())
                .map(|r| Value::Array((0..m.ncols()).map(|c| json_f64(f(&m[(r, c)]))).collect()))
                .collect(),
        )
    };
    json!({ "re": rows(|z| z.re), "im": rows(|z| z.im) })
}

/// Mode-basis covariance snapshot.
pub fn gamma_json(state: &GaussianMagnonState, t: f64, config: &Value) -> Value {
    let sys = state.system();
    let body = json!({
        "t": json_f64(t),
        "m": json_f64(state.m()),
        "basis": "mode",
        "q": grid_json(sys.grid()),
        "eps_of_q": floats(&sys.spectrum().eps),
        "omega_of_q": floats(&sys.spectrum().omega),
        "total_number": json_f64(state.total_number()),
        "energy": json_f64(state.energy()),
        "gamma": complex_matrix(&state.mode_covariance()),
    });
    with_config(object(body), config)
}

/// CSV with `# `-prefixed preamble lines, a header row and data rows.
pub struct CsvArtifact {
    pub preamble: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvArtifact {
    pub fn new(preamble: Vec<String>, header: Vec<String>) -> Self {
        Self { preamble, header, rows: Vec::new() }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        for line in &self.preamble {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn q_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("q{i}")).collect()
}

pub fn validation_csv(report: &ValidationReport, grid: &MomentumGrid, preamble: Vec<String>) -> CsvArtifact {
    let mut header = q_header(grid.lattice().dim());
    header.push("D".into());
    let mut csv = CsvArtifact::new(preamble, header);
    for (k, d) in grid.points().iter().zip(&report.d_values) {
        let mut row: Vec<String> = k.iter().map(|&x| fmt_f64(x)).collect();
        row.push(fmt_f64(*d));
        csv.rows.push(row);
    }
    csv
}

pub fn solution_csv(sol: &SpinWaveSolution, grid: &MomentumGrid, preamble: Vec<String>) -> CsvArtifact {
    let mut header = q_header(grid.lattice().dim());
    header.extend(["D", "n", "eps"].map(String::from));
    let mut csv = CsvArtifact::new(preamble, header);
    for (i, k) in grid.points().iter().enumerate() {
        let mut row: Vec<String> = k.iter().map(|&x| fmt_f64(x)).collect();
        row.push(fmt_f64(sol.d_values[i]));
        row.push(fmt_f64(sol.occupations[i]));
        row.push(sol.dispersion.get(i).map_or_else(|| "NaN".into(), |&e| fmt_f64(e)));
        csv.rows.push(row);
    }
    csv
}

pub fn convergence_csv(table: &ConvergenceTable, preamble: Vec<String>) -> CsvArtifact {
    let header = ["n", "m_n", "t_n", "p_n", "discrepancy"].map(String::from).to_vec();
    let mut csv = CsvArtifact::new(preamble, header);
    for r in &table.rows {
        csv.rows.push(vec![
            r.n.to_string(),
            fmt_f64(r.m_n),
            fmt_f64(r.t_n),
            fmt_f64(r.p_n),
            fmt_f64(r.discrepancy),
        ]);
    }
    csv
}

pub fn sectors_csv(table: &SectorTable) -> CsvArtifact {
    let header = ["twice_j", "j", "multiplicity", "block_dim"].map(String::from).to_vec();
    let mut csv = CsvArtifact::new(vec![format!("copies = {}", table.copies)], header);
    for e in &table.entries {
        csv.rows.push(vec![
            e.twice_j.to_string(),
            fmt_f64(e.j()),
            e.multiplicity.to_string(),
            e.block_dim().to_string(),
        ]);
    }
    csv
}

/// Header `t, x1..xν, density` for trajectories.
pub fn trajectory_csv(dim: usize, preamble: Vec<String>) -> CsvArtifact {
    let mut header = vec!["t".to_string()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    header.push("density".into());
    CsvArtifact::new(preamble, header)
}

pub fn push_trajectory_rows(csv: &mut CsvArtifact, state: &GaussianMagnonState, t: f64, density: &[f64]) {
    let lattice = *state.system().grid().lattice();
    for (x, d) in density.iter().enumerate() {
        let mut row = vec![fmt_f64(t)];
        row.extend(lattice.coords(x).iter().map(|c| c.to_string()));
        row.push(fmt_f64(*d));
        csv.rows.push(row);
    }
}
