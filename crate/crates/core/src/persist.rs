//! On-disk formats.
//!
//! * Dataset: CSV with header `y,x1,…,xd`, one row per observation, reals
//!   written with 17 significant digits, plus a JSON sidecar (same path
//!   with extension `.json`) holding the generating metadata and a SHA-256
//!   digest of the values. Reading verifies the digest, so a round trip is
//!   bit-exact or fails.
//! * Sample set: CSV with header `theta1,…,thetad`, one retained draw per
//!   row, plus a JSON sidecar with the sampler config, acceptance rate,
//!   diagnostics and the digest of the data the chain ran on.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, DatasetMeta};
use crate::sampler::{ChainDiagnostics, SampleSet, SamplerConfig, TargetSummary};

/// `path` with its extension replaced by `json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// A real with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse(format!("{}: {other:?}", path.display())),
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(f))?)
}

fn parse_real(s: &str, path: &Path) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{}: not a number: {s:?}", path.display())))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DatasetSidecar {
    n: usize,
    d: usize,
    digest: String,
    meta: DatasetMeta,
}

pub fn write_dataset(data: &Dataset, path: &Path) -> Result<()> {
    {
        let mut w = csv::Writer::from_writer(create(path)?);
        let mut header = vec!["y".to_string()];
        header.extend((1..=data.d()).map(|j| format!("x{j}")));
        w.write_record(&header).map_err(|e| csv_err(path, e))?;
        for (row, y) in data.rows().zip(data.labels()) {
            let mut rec = vec![y.to_string()];
            rec.extend(row.iter().map(|v| fmt_real(*v)));
            w.write_record(&rec).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    write_json(
        &sidecar_path(path),
        &DatasetSidecar { n: data.n(), d: data.d(), digest: data.digest(), meta: data.meta.clone() },
    )
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let side: DatasetSidecar = read_json(&sidecar_path(path))?;
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.len() != side.d + 1 || &header[0] != "y" {
        return Err(Error::Parse(format!("{}: expected header y,x1..x{}", path.display(), side.d)));
    }
    let mut x = Vec::with_capacity(side.n * side.d);
    let mut y = Vec::with_capacity(side.n);
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let label: i8 = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{}: bad label {:?}", path.display(), &rec[0])))?;
        y.push(label);
        for f in rec.iter().skip(1) {
            x.push(parse_real(f, path)?);
        }
    }
    let data = Dataset::new(x, y, side.d, side.meta)?;
    if data.digest() != side.digest {
        return Err(Error::Parse(format!("{}: content does not match the sidecar digest", path.display())));
    }
    Ok(data)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SampleSidecar {
    n_draws: usize,
    dim: usize,
    acceptance_rate: f64,
    config: SamplerConfig,
    target: TargetSummary,
    diagnostics: ChainDiagnostics,
}

pub fn write_samples(set: &SampleSet, path: &Path) -> Result<()> {
    let d = set.dim();
    {
        let mut w = csv::Writer::from_writer(create(path)?);
        let header: Vec<String> = (1..=d).map(|j| format!("theta{j}")).collect();
        w.write_record(&header).map_err(|e| csv_err(path, e))?;
        for draw in &set.draws {
            w.write_record(draw.iter().map(|v| fmt_real(*v))).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    write_json(
        &sidecar_path(path),
        &SampleSidecar {
            n_draws: set.draws.len(),
            dim: d,
            acceptance_rate: set.acceptance_rate,
            config: set.config.clone(),
            target: set.target.clone(),
            diagnostics: set.diagnostics.clone(),
        },
    )
}

pub fn read_samples(path: &Path) -> Result<SampleSet> {
    let side: SampleSidecar = read_json(&sidecar_path(path))?;
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut draws = Vec::with_capacity(side.n_draws);
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let draw = rec.iter().map(|f| parse_real(f, path)).collect::<Result<Vec<f64>>>()?;
        crate::error::check_dim(side.dim, draw.len())?;
        draws.push(draw);
    }
    crate::error::check_dim(side.n_draws, draws.len())?;
    Ok(SampleSet {
        draws,
        acceptance_rate: side.acceptance_rate,
        config: side.config,
        target: side.target,
        diagnostics: side.diagnostics,
    })
}
