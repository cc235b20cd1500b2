//! Writes experiment artifacts: iteration and sweep CSVs, surfaces and the
//! manifest.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use fvk_core::FlowState;

use crate::config::ExperimentConfig;
use crate::experiments::{Abort, Report, RunOptions};

/// One row of the per-iteration CSV. Row `k = 0` is the initial state and
/// carries no step data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRow {
    pub k: usize,
    pub tau: Option<f64>,
    pub rejections: Option<usize>,
    pub newton_iterations: Option<usize>,
    pub newton_residual_final: Option<f64>,
    pub force_factor: Option<f64>,
    pub e_bending: f64,
    pub e_membrane: f64,
    pub e_force: f64,
    pub e_total: f64,
    pub dw_norm: Option<f64>,
    pub du_norm: Option<f64>,
    pub dissipation: Option<f64>,
    pub crease_jump: Option<f64>,
    pub mean_curv_1: Option<f64>,
    pub mean_curv_2: Option<f64>,
    pub q_sym: Option<f64>,
}

pub fn iteration_rows(state: &FlowState) -> Vec<IterationRow> {
    let e0 = state.energy_history[0];
    let mut rows = vec![IterationRow {
        k: 0,
        tau: None,
        rejections: None,
        newton_iterations: None,
        newton_residual_final: None,
        force_factor: None,
        e_bending: e0.bending,
        e_membrane: e0.membrane,
        e_force: e0.force,
        e_total: e0.total,
        dw_norm: None,
        du_norm: None,
        dissipation: None,
        crease_jump: None,
        mean_curv_1: None,
        mean_curv_2: None,
        q_sym: None,
    }];
    rows.extend(state.records.iter().map(|r| IterationRow {
        k: r.k,
        tau: Some(r.tau),
        rejections: Some(r.rejections),
        newton_iterations: Some(r.newton_iterations),
        newton_residual_final: r.newton_residuals.last().copied(),
        force_factor: Some(r.force_factor),
        e_bending: r.energy.bending,
        e_membrane: r.energy.membrane,
        e_force: r.energy.force,
        e_total: r.energy.total,
        dw_norm: Some(r.dw_norm),
        du_norm: Some(r.du_norm),
        dissipation: Some(r.dissipation),
        crease_jump: Some(r.crease_jump),
        mean_curv_1: Some(r.diagnostics.mean_curv[0]),
        mean_curv_2: Some(r.diagnostics.mean_curv[1]),
        q_sym: r.diagnostics.q_sym,
    }));
    rows
}

pub fn write_csv<T: Serialize, W: Write>(out: W, rows: &[T]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(io::Error::other)?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub library: String,
    pub library_version: String,
    pub runner_version: String,
    /// SHA-256 of the canonical configuration text.
    pub config_sha256: String,
    pub config: String,
    pub threads: usize,
    pub deterministic: bool,
    /// `ok` or `solver_abort`.
    pub status: String,
    pub aborts: Vec<Abort>,
    pub outputs: Vec<OutputFile>,
    /// SHA-256 over the sorted `(path, sha256)` list of all numeric outputs.
    pub outputs_sha256: String,
    pub summary: Value,
    pub elapsed_seconds: f64,
}

impl Manifest {
    pub fn solver_aborted(&self) -> bool {
        !self.aborts.is_empty()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects written files relative to the output directory.
struct Sink {
    root: PathBuf,
    files: Vec<OutputFile>,
}

impl Sink {
    fn write(&mut self, rel: &str, bytes: Vec<u8>) -> io::Result<()> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut f = BufWriter::new(fs::File::create(&path)?);
        f.write_all(&bytes)?;
        f.flush()?;
        self.files.push(OutputFile {
            path: rel.to_owned(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }
}

/// Writes every artifact of `report` below `dir` and returns the manifest,
/// which is also stored as `manifest.json`.
pub fn write_report(
    dir: &Path,
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    report: &Report,
    elapsed_seconds: f64,
) -> io::Result<Manifest> {
    fs::create_dir_all(dir)?;
    let mut sink = Sink {
        root: dir.to_owned(),
        files: Vec::new(),
    };
    for run in &report.runs {
        if cfg.output.iterations_csv {
            let mut buf = Vec::new();
            write_csv(&mut buf, &iteration_rows(&run.state))?;
            sink.write(&format!("{}/iterations.csv", run.label), buf)?;
        }
        for (name, surface) in &run.surfaces {
            let mut buf = Vec::new();
            surface.write_vtk(&mut buf)?;
            sink.write(&format!("{}/surface_{name}.vtk", run.label), buf)?;
        }
    }
    let mut buf = Vec::new();
    let rows: Vec<_> = report.runs.iter().map(|r| r.point.clone()).collect();
    write_csv(&mut buf, &rows)?;
    sink.write("sweep.csv", buf)?;

    let mut files = sink.files;
    files.sort_by(|a, b| a.path.cmp(&b.path));
    let listing: String = files.iter().map(|f| format!("{}\0{}\n", f.path, f.sha256)).collect();
    let config = cfg.canonical();
    let aborts: Vec<Abort> = report.aborts().into_iter().cloned().collect();
    let manifest = Manifest {
        experiment: cfg.kind.name().to_owned(),
        library: "fvk-core".to_owned(),
        library_version: fvk_core::VERSION.to_owned(),
        runner_version: env!("CARGO_PKG_VERSION").to_owned(),
        config_sha256: sha256_hex(config.as_bytes()),
        config,
        threads: opts.threads,
        deterministic: opts.deterministic,
        status: if aborts.is_empty() { "ok" } else { "solver_abort" }.to_owned(),
        aborts,
        outputs_sha256: sha256_hex(listing.as_bytes()),
        outputs: files,
        summary: report.summary.clone(),
        elapsed_seconds,
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(io::Error::other)?;
    fs::write(dir.join("manifest.json"), json)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_known_input() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn csv_leaves_missing_values_empty() {
        #[derive(Serialize)]
        struct Row {
            a: usize,
            b: Option<f64>,
        }
        let mut buf = Vec::new();
        write_csv(&mut buf, &[Row { a: 1, b: None }, Row { a: 2, b: Some(0.1) }]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,\n2,0.1\n");
    }
}
