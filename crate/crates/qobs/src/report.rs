use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::{Algorithm, ScenarioConfig};
use crate::sweep::{ok, SweepRow};

pub const CSV_HEADER: &str = "k_n,alg1_trace,alg1_frob,alg1_nv2,alg2_trace,alg2_frob,alg2_rho,\
alg3_trace,alg3_frob,alg3_nv2,alg3_transformed,classical_trace,classical_frob";

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn csv_line(row: &SweepRow) -> String {
    let a1 = ok(&row.alg1);
    let a2 = ok(&row.alg2);
    let a3 = ok(&row.alg3);
    let cl = ok(&row.classical);
    [
        row.k_n.to_string(),
        cell(a1.map(|m| m.metrics.trace)),
        cell(a1.map(|m| m.metrics.frobenius)),
        cell(a1.map(|m| m.n_v2)),
        cell(a2.map(|m| m.metrics.trace)),
        cell(a2.map(|m| m.metrics.frobenius)),
        cell(a2.map(|m| m.rho_opt)),
        cell(a3.map(|m| m.metrics.trace)),
        cell(a3.map(|m| m.metrics.frobenius)),
        cell(a3.map(|m| m.n_v2)),
        cell(a3.map(|m| m.transformed)),
        cell(cl.map(|m| m.trace)),
        cell(cl.map(|m| m.frobenius)),
    ]
    .join(",")
}

pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&csv_line(r));
        out.push('\n');
    }
    out
}

/// Writes the sweep table. An empty table is an error and leaves no file
/// behind.
pub fn emit_csv(rows: &[SweepRow], destination: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::NoRows);
    }
    fs::write(destination, render_csv(rows)).map_err(|e| Error::io(destination, e))
}

/// Two whitespace-separated columns, `k_n trace`, for every row where the
/// algorithm produced a value.
pub fn plot_data(rows: &[SweepRow], algorithm: Algorithm) -> String {
    let mut out = format!("# k_n trace_{}\n", algorithm.name());
    for r in rows {
        if let Some(t) = r.trace(algorithm) {
            writeln!(out, "{} {}", r.k_n, t).unwrap();
        }
    }
    out
}

fn sibling(base: &Path, suffix: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    base.with_file_name(format!("{stem}{suffix}"))
}

pub fn plot_path(csv: &Path, algorithm: Algorithm) -> PathBuf {
    sibling(csv, &format!(".{}.dat", algorithm.name()))
}

pub fn metadata_path(csv: &Path) -> PathBuf {
    sibling(csv, ".meta.json")
}

#[derive(Serialize)]
struct Metadata<'a> {
    generator: String,
    matrix_norm: &'static str,
    scalar_summary: &'static str,
    config: &'a ScenarioConfig,
    failures: Vec<Failure<'a>>,
    plot_files: Vec<String>,
}

#[derive(Serialize)]
struct Failure<'a> {
    k_n: f64,
    algorithm: Algorithm,
    reason: &'a str,
}

pub fn render_metadata(config: &ScenarioConfig, rows: &[SweepRow], plots: &[PathBuf]) -> String {
    let mut failures = Vec::new();
    for r in rows {
        for (algorithm, reason) in r.errors() {
            failures.push(Failure {
                k_n: r.k_n,
                algorithm,
                reason,
            });
        }
        if let Some(reason) = ok(&r.alg3).and_then(|m| m.failure_reason.as_deref()) {
            failures.push(Failure {
                k_n: r.k_n,
                algorithm: Algorithm::Alg3,
                reason,
            });
        }
    }
    let meta = Metadata {
        generator: format!("qobs {}", env!("CARGO_PKG_VERSION")),
        matrix_norm: "frobenius",
        scalar_summary: "trace",
        config,
        failures,
        plot_files: plots
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&meta).expect("plain data serializes");
    s.push('\n');
    s
}

/// Writes the CSV, one plot-data file per requested algorithm and the
/// metadata sidecar. Returns every path written.
pub fn write_sweep_outputs(
    config: &ScenarioConfig,
    rows: &[SweepRow],
    csv: &Path,
) -> Result<Vec<PathBuf>> {
    emit_csv(rows, csv)?;
    let mut written = vec![csv.to_path_buf()];
    let mut plots = Vec::new();
    for &a in &config.algorithms {
        let p = plot_path(csv, a);
        fs::write(&p, plot_data(rows, a)).map_err(|e| Error::io(&p, e))?;
        plots.push(p);
    }
    let meta = metadata_path(csv);
    fs::write(&meta, render_metadata(config, rows, &plots)).map_err(|e| Error::io(&meta, e))?;
    written.extend(plots);
    written.push(meta);
    Ok(written)
}
