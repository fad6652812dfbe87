//! Per-grid summaries and output files of an experiment.
//!
//! Files written under the output directory, all named after the
//! experiment:
//!
//! * `<name>_runs.csv`: one row per `(n, replication)`;
//! * `<name>_summary.csv`: means and standard errors over replications;
//! * `<name>_manifest.json`: master seed, crate version, the full
//!   experiment spec, design statistics and fitted log-log slopes;
//! * `<name>_<column>.dat`: two-column `n value` files for plotting.
//!
//! Timings go to the manifest only, so the CSV files are a deterministic
//! function of the experiment spec and seed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DesignSummary, ExperimentResult, ExperimentSpec, RunRecord};
use crate::error::{Error, Result};
use crate::persist::{fmt_real, write_json};
use crate::risk::line_fit;

/// Columns summarized per grid point.
pub const SUMMARY_COLUMNS: [&str; 12] = [
    "renyi",
    "hellinger2",
    "tv2",
    "kl",
    "weighted_error",
    "l2_error",
    "excess_risk",
    "mean_weighted_error",
    "mean_l2_error",
    "epsilon_n",
    "bound_hellinger2",
    "acceptance_rate",
];

/// Additional columns that are present only for some experiment kinds.
pub const OPTIONAL_COLUMNS: [&str; 4] = ["risk_rate_gamma", "kl_star", "r_n", "oracle_bound"];

fn column(rec: &RunRecord, name: &str) -> Option<f64> {
    Some(match name {
        "renyi" => rec.renyi,
        "hellinger2" => rec.hellinger2,
        "tv2" => rec.tv2,
        "kl" => rec.kl,
        "weighted_error" => rec.weighted_error,
        "l2_error" => rec.l2_error,
        "excess_risk" => rec.excess_risk,
        "mean_weighted_error" => rec.mean_weighted_error,
        "mean_l2_error" => rec.mean_l2_error,
        "epsilon_n" => rec.epsilon_n,
        "bound_hellinger2" => rec.bound_hellinger2,
        "bound_expectation" => rec.bound_expectation,
        "estimation_scale" => rec.estimation_scale,
        "risk_rate_sqrt" => rec.risk_rate_sqrt,
        "acceptance_rate" => rec.acceptance_rate,
        "risk_rate_gamma" => rec.risk_rate_gamma?,
        "gamma" => rec.gamma?,
        "kl_star" => rec.kl_star?,
        "r_n" => rec.r_n?,
        "oracle_bound" => rec.oracle_bound?,
        _ => return None,
    })
}

/// Mean and standard error over replications at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub n: usize,
    pub n_replications: usize,
    /// `(column, mean, standard error)`.
    pub columns: Vec<(String, f64, f64)>,
}

impl GridSummary {
    pub fn mean(&self, name: &str) -> Option<f64> {
        self.columns.iter().find(|c| c.0 == name).map(|c| c.1)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.columns.iter().find(|c| c.0 == name).map(|c| c.2)
    }
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let k = v.len() as f64;
    let m = v.iter().sum::<f64>() / k;
    if v.len() < 2 {
        return (m, f64::NAN);
    }
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
    (m, (var / k).sqrt())
}

/// Summaries in grid order.
pub fn summarize(result: &ExperimentResult) -> Vec<GridSummary> {
    let names: Vec<&str> = SUMMARY_COLUMNS
        .iter()
        .chain(&["bound_expectation", "estimation_scale", "risk_rate_sqrt", "gamma"])
        .chain(&OPTIONAL_COLUMNS)
        .copied()
        .collect();
    result
        .spec
        .n_grid
        .iter()
        .enumerate()
        .map(|(g, &n)| {
            let recs: Vec<&RunRecord> = result.records.iter().filter(|r| r.grid_index == g).collect();
            let columns = names
                .iter()
                .filter_map(|name| {
                    let vals: Vec<f64> = recs.iter().filter_map(|r| column(r, name)).collect();
                    (vals.len() == recs.len() && !vals.is_empty()).then(|| {
                        let (m, se) = mean_se(&vals);
                        (name.to_string(), m, se)
                    })
                })
                .collect();
            GridSummary { n, n_replications: recs.len(), columns }
        })
        .collect()
}

/// OLS slope of `log y` on `log n`; `None` when fewer than two grid points
/// have positive values.
pub fn loglog_slope(summary: &[GridSummary], name: &str) -> Option<f64> {
    let pts: Vec<(f64, f64)> = summary
        .iter()
        .filter_map(|s| s.mean(name).filter(|v| *v > 0.0).map(|v| ((s.n as f64).ln(), v.ln())))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    Some(line_fit(&pts).1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub name: String,
    pub master_seed: u64,
    pub crate_version: String,
    pub spec: ExperimentSpec,
    pub design_stats: DesignSummary,
    /// `(column, slope)` of the per-grid means against `n` on log-log axes.
    pub slopes: Vec<(String, f64)>,
    pub total_seconds: f64,
    pub files: ReportFiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFiles {
    pub runs: PathBuf,
    pub summary: PathBuf,
    pub manifest: PathBuf,
    pub plots: Vec<PathBuf>,
}

fn writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn csv_fail(path: &Path, e: csv::Error) -> Error {
    Error::Parse(format!("{}: {e}", path.display()))
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

fn write_runs(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer(path)?);
    w.write_record([
        "n",
        "replication",
        "truth_seed",
        "data_seed",
        "chain_seed",
        "eval_seed",
        "acceptance_rate",
        "step_size",
        "renyi",
        "hellinger2",
        "tv2",
        "kl",
        "weighted_error",
        "l2_error",
        "excess_risk",
        "mean_weighted_error",
        "mean_l2_error",
        "epsilon_n",
        "bound_hellinger2",
        "bound_expectation",
        "estimation_scale",
        "risk_rate_sqrt",
        "gamma",
        "risk_rate_gamma",
        "kl_star",
        "theta_star_support",
        "r_n",
        "oracle_bound",
    ])
    .map_err(|e| csv_fail(path, e))?;
    for r in records {
        let mut row = vec![
            r.n.to_string(),
            r.replication.to_string(),
            r.truth_seed.to_string(),
            r.data_seed.to_string(),
            r.chain_seed.to_string(),
            r.eval_seed.to_string(),
        ];
        row.extend(
            [
                r.acceptance_rate,
                r.step_size,
                r.renyi,
                r.hellinger2,
                r.tv2,
                r.kl,
                r.weighted_error,
                r.l2_error,
                r.excess_risk,
                r.mean_weighted_error,
                r.mean_l2_error,
                r.epsilon_n,
                r.bound_hellinger2,
                r.bound_expectation,
                r.estimation_scale,
                r.risk_rate_sqrt,
            ]
            .map(fmt_real),
        );
        row.extend([opt(r.gamma), opt(r.risk_rate_gamma), opt(r.kl_star)]);
        row.push(r.theta_star_support.map(|s| s.to_string()).unwrap_or_default());
        row.extend([opt(r.r_n), opt(r.oracle_bound)]);
        w.write_record(&row).map_err(|e| csv_fail(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_summary(path: &Path, summary: &[GridSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer(path)?);
    w.write_record(["n", "n_replications", "column", "mean", "std_error"]).map_err(|e| csv_fail(path, e))?;
    for s in summary {
        for (name, m, se) in &s.columns {
            w.write_record([s.n.to_string(), s.n_replications.to_string(), name.clone(), fmt_real(*m), fmt_real(*se)])
                .map_err(|e| csv_fail(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_dat(path: &Path, summary: &[GridSummary], name: &str) -> Result<bool> {
    let rows: Vec<(usize, f64)> = summary.iter().filter_map(|s| s.mean(name).map(|m| (s.n, m))).collect();
    if rows.is_empty() {
        return Ok(false);
    }
    let mut w = writer(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "# n {name}").map_err(io)?;
    for (n, m) in rows {
        writeln!(w, "{n} {}", fmt_real(m)).map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(true)
}

/// Write runs, summary, manifest and plot files to `dir` (or the experiment's
/// `output_dir`, or the working directory).
pub fn emit_rate_report(result: &ExperimentResult, dir: Option<&Path>) -> Result<RunManifest> {
    let dir = dir
        .map(Path::to_path_buf)
        .or_else(|| result.spec.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let name = &result.spec.name;
    let summary = summarize(result);

    let runs = dir.join(format!("{name}_runs.csv"));
    write_runs(&runs, &result.records)?;
    let summary_path = dir.join(format!("{name}_summary.csv"));
    write_summary(&summary_path, &summary)?;

    let mut plots = Vec::new();
    let mut slopes = Vec::new();
    for col in SUMMARY_COLUMNS.iter().chain(&["bound_expectation", "estimation_scale", "risk_rate_sqrt"]).chain(&OPTIONAL_COLUMNS) {
        let p = dir.join(format!("{name}_{col}.dat"));
        if write_dat(&p, &summary, col)? {
            plots.push(p);
        }
        if let Some(s) = loglog_slope(&summary, col) {
            slopes.push((col.to_string(), s));
        }
    }

    let manifest_path = dir.join(format!("{name}_manifest.json"));
    let manifest = RunManifest {
        name: name.clone(),
        master_seed: result.spec.master_seed,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        spec: result.spec.clone(),
        design_stats: result.design_stats,
        slopes,
        total_seconds: result.elapsed.iter().sum(),
        files: ReportFiles { runs, summary: summary_path, manifest: manifest_path.clone(), plots },
    };
    write_json(&manifest_path, &manifest)?;
    Ok(manifest)
}
