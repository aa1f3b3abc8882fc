//! CSV and JSON writers. CSV numbers carry 17 significant digits so binary64
//! values round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use nlcl::diagnostics::DiagnosticsRecord;
use nlcl::harness::{EntropyTable, StudyResult, TvSeries};
use nlcl::scheme::{GridSpec, RunResult};

/// 17 significant digits: exact round-trip for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn snapshots_csv(result: &RunResult<f64>, grid: &GridSpec<f64>) -> String {
    let mut out = String::from("t,x_center,rho,W\n");
    for snap in &result.snapshots {
        for j in 0..grid.num_cells() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(snap.t),
                fmt_f64(grid.cell_center(j)),
                fmt_f64(snap.rho[j]),
                fmt_f64(snap.w[j]),
            );
        }
    }
    out
}

pub const DIAGNOSTICS_HEADER: &str =
    "n,t,rho_min,rho_max,mass,tv_rho,tv_W,tv_time_increment,entropy_pos_rho,entropy_pos_W";

pub fn diagnostics_csv(records: &[DiagnosticsRecord<f64>]) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            fmt_f64(r.t),
            fmt_f64(r.rho_min),
            fmt_f64(r.rho_max),
            fmt_f64(r.mass),
            fmt_f64(r.tv_rho),
            fmt_f64(r.tv_w),
            fmt_f64(r.tv_time_increment),
            fmt_f64(r.entropy_pos_rho),
            fmt_f64(r.entropy_pos_w),
        );
    }
    out
}

pub fn study_csv(result: &StudyResult<f64>) -> String {
    let mut out = String::from("h,epsilon,tau,l1_error,wall_time_s\n");
    for row in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(row.h),
            fmt_f64(row.epsilon),
            fmt_f64(row.tau),
            fmt_f64(row.l1_error),
            fmt_f64(row.wall_time_s),
        );
    }
    out
}

pub fn tv_series_csv(series: &TvSeries<f64>) -> String {
    let mut out = String::from("t,tv_rho,tv_W\n");
    for i in 0..series.times.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(series.times[i]),
            fmt_f64(series.tv_rho[i]),
            fmt_f64(series.tv_w[i]),
        );
    }
    out
}

/// Table layout mirroring the published one: one row per (ε, metric), one
/// column per (data, kernel) pair.
pub fn entropy_table_csv(table: &EntropyTable<f64>) -> String {
    let mut out = String::from("epsilon,metric");
    for data in &table.data {
        for kernel in &table.kernels {
            let _ = write!(out, ",{data}:{kernel}");
        }
    }
    out.push('\n');
    for (ei, &eps) in table.epsilons.iter().enumerate() {
        for (metric, pick) in [
            ("E_rho", true),
            ("E_w", false),
        ] {
            let _ = write!(out, "{},{metric}", fmt_f64(eps));
            for di in 0..table.data.len() {
                for ki in 0..table.kernels.len() {
                    let entry = table.get(ei, ki, di);
                    let value = if pick { entry.e_rho } else { entry.e_w };
                    let _ = write!(out, ",{}", fmt_f64(value));
                }
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)
}
