//! `nlcl` — command-line front end: single runs, parameter sweeps, weight
//! inspection, and diagnostics recomputation.
//!
//! Exit codes: 0 success, 2 validation failure (every problem is printed as
//! one `error: <code>: <detail>` line on stderr), 1 runtime failure.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use nlcl::diagnostics::{entropy_step_positive, tv, DiagnosticsRecord};
use nlcl::harness::{
    run_convergence_study, run_entropy_table, run_quadrature_comparison, run_tv_study,
};
use nlcl::kernels::Kernel;
use nlcl::quadrature::{QuadratureWeights, DEFAULT_TAIL_TOL};
use nlcl::scheme::{run, RunOptions, VelocityModel};

use config::{Problem, RunConfigFile, SweepConfigFile};
use output::fmt_f64;

#[derive(Parser)]
#[command(name = "nlcl", version, about = "Nonlocal LWR solver laboratory")]
struct Cli {
    /// Parallelism cap for sweeps (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one simulation and write snapshots, diagnostics and manifest
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output_dir` in the config)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a parameter study (convergence, quadrature-comparison, tv-study,
    /// entropy-table)
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print a weight family as CSV `k,weight` plus a JSON condition report
    Weights {
        /// exponential | linear | constant | custom-table
        #[arg(long)]
        kernel: String,
        /// Path to the CSV table for custom-table kernels
        #[arg(long)]
        kernel_csv: Option<PathBuf>,
        /// exact | riemann | normalized-riemann | geometric
        #[arg(long)]
        family: String,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        gamma0: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
        tail_tol: f64,
        /// Moment constant for the condition report (default: the family's
        /// analytic constant)
        #[arg(long)]
        c_gamma: Option<f64>,
    },
    /// Recompute diagnostics from a snapshots CSV
    Diagnose {
        #[arg(long)]
        snapshots: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "greenshields")]
        velocity: String,
        #[arg(long, default_value_t = 0.5)]
        entropy_c: f64,
    },
}

/// A failed command: exit code plus the error lines to print.
struct Failure {
    exit: u8,
    lines: Vec<String>,
}

impl Failure {
    fn validation(problems: Vec<Problem>) -> Self {
        Failure {
            exit: 2,
            lines: problems
                .into_iter()
                .map(|p| format!("error: {}: {}", p.code, p.detail))
                .collect(),
        }
    }

    fn validation_one(code: &str, detail: impl std::fmt::Display) -> Self {
        Failure {
            exit: 2,
            lines: vec![format!("error: {code}: {detail}")],
        }
    }

    fn runtime(detail: impl std::fmt::Display) -> Self {
        Failure {
            exit: 1,
            lines: vec![format!("error: io-error: {detail}")],
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // ignore failure: the pool may already be initialized in tests
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    let outcome = match cli.command {
        Command::Run { config, output } => cmd_run(&config, output),
        Command::Sweep { config, output } => cmd_sweep(&config, output),
        Command::Weights {
            kernel,
            kernel_csv,
            family,
            epsilon,
            h,
            gamma0,
            tail_tol,
            c_gamma,
        } => cmd_weights(
            &kernel, kernel_csv, &family, epsilon, h, gamma0, tail_tol, c_gamma,
        ),
        Command::Diagnose {
            snapshots,
            output,
            velocity,
            entropy_c,
        } => cmd_diagnose(&snapshots, output, &velocity, entropy_c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            for line in &failure.lines {
                eprintln!("{line}");
            }
            ExitCode::from(failure.exit)
        }
    }
}

/// Print to stdout, treating a closed pipe (e.g. `| head`) as success.
fn emit(text: &str) -> Result<(), Failure> {
    use std::io::Write;
    match std::io::stdout().write_all(text.as_bytes()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(Failure::runtime(e)),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::validation_one("config-read", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::validation_one("config-parse", format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct RunManifestDoc {
    run: nlcl::scheme::RunManifest,
    kernel_family: String,
    initial_data: String,
    requested_snapshots: Vec<f64>,
    snapshot_steps: Vec<usize>,
    files: Vec<&'static str>,
}

fn cmd_run(config_path: &Path, output: Option<PathBuf>) -> Result<(), Failure> {
    let file: RunConfigFile = read_json(config_path)?;
    let validated = file.validate().map_err(Failure::validation)?;
    let out_dir = output
        .or_else(|| validated.output_dir.clone())
        .ok_or_else(|| {
            Failure::validation_one("missing-field:output_dir", "no output directory given")
        })?;

    let opts = RunOptions {
        entropy_c: validated.diagnostics.entropy_c,
        record_diagnostics: validated.diagnostics.enabled,
    };
    let result = run(
        &validated.config,
        &validated.initial,
        validated.t_final,
        &validated.snapshots,
        &opts,
    );

    let manifest = RunManifestDoc {
        run: result.manifest.clone(),
        kernel_family: validated.kernel.family().to_string(),
        initial_data: validated.initial_data.name().to_string(),
        requested_snapshots: validated.snapshots.clone(),
        snapshot_steps: result.snapshots.iter().map(|s| s.n).collect(),
        files: vec!["snapshots.csv", "diagnostics.csv", "manifest.json"],
    };
    let manifest_json =
        serde_json::to_string_pretty(&manifest).map_err(Failure::runtime)?;

    output::write_file(
        &out_dir,
        "snapshots.csv",
        &output::snapshots_csv(&result, &validated.config.grid),
    )
    .map_err(Failure::runtime)?;
    output::write_file(
        &out_dir,
        "diagnostics.csv",
        &output::diagnostics_csv(&result.diagnostics),
    )
    .map_err(Failure::runtime)?;
    output::write_file(&out_dir, "manifest.json", &manifest_json).map_err(Failure::runtime)?;
    Ok(())
}

#[derive(Serialize)]
struct StudyDoc {
    slope: f64,
    fit_points: Option<usize>,
    spec: nlcl::harness::StudyManifest,
}

fn cmd_sweep(config_path: &Path, output: Option<PathBuf>) -> Result<(), Failure> {
    let file: SweepConfigFile = read_json(config_path)?;
    let out_dir = output.ok_or_else(|| {
        Failure::validation_one("missing-field:output", "sweep needs --output <dir>")
    })?;
    match file {
        SweepConfigFile::Convergence(section) => {
            let spec = section.to_spec().map_err(Failure::validation)?;
            let result = run_convergence_study(&spec)
                .map_err(|e| Failure::validation_one(e.code(), e))?;
            let doc = StudyDoc {
                slope: result.fitted_slope,
                fit_points: spec.fit_points,
                spec: result.manifest.clone(),
            };
            output::write_file(&out_dir, "study.csv", &output::study_csv(&result))
                .map_err(Failure::runtime)?;
            output::write_file(
                &out_dir,
                "study.json",
                &serde_json::to_string_pretty(&doc).map_err(Failure::runtime)?,
            )
            .map_err(Failure::runtime)?;
        }
        SweepConfigFile::QuadratureComparison { families, base } => {
            let spec = base.to_spec().map_err(Failure::validation)?;
            let results = run_quadrature_comparison(&spec, &families)
                .map_err(|e| Failure::validation_one(e.code(), e))?;
            for result in &results {
                let name = &result.manifest.weight_family;
                let doc = StudyDoc {
                    slope: result.fitted_slope,
                    fit_points: spec.fit_points,
                    spec: result.manifest.clone(),
                };
                output::write_file(
                    &out_dir,
                    &format!("study_{name}.csv"),
                    &output::study_csv(result),
                )
                .map_err(Failure::runtime)?;
                output::write_file(
                    &out_dir,
                    &format!("study_{name}.json"),
                    &serde_json::to_string_pretty(&doc).map_err(Failure::runtime)?,
                )
                .map_err(Failure::runtime)?;
            }
        }
        SweepConfigFile::TvStudy {
            epsilons,
            h,
            kernel,
            t_final,
        } => {
            let kernel = kernel.build().map_err(|p| Failure::validation(vec![p]))?;
            let series = run_tv_study(&epsilons, h, &kernel, t_final)
                .map_err(|e| Failure::validation_one(e.code(), e))?;
            for s in &series {
                output::write_file(
                    &out_dir,
                    &format!("tv_eps_{}.csv", s.epsilon),
                    &output::tv_series_csv(s),
                )
                .map_err(Failure::runtime)?;
            }
            let summary: Vec<_> = series
                .iter()
                .map(|s| {
                    serde_json::json!({
                        "epsilon": s.epsilon,
                        "delta": s.delta,
                        "first_tv_increase": s.first_tv_increase,
                        "settled_below": s.settled_below,
                        "max_tv_w_step_increase": s.max_tv_w_step_increase,
                    })
                })
                .collect();
            output::write_file(
                &out_dir,
                "tv_study.json",
                &serde_json::to_string_pretty(&summary).map_err(Failure::runtime)?,
            )
            .map_err(Failure::runtime)?;
        }
        SweepConfigFile::EntropyTable {
            epsilons,
            h,
            kernels,
            data_list,
            c,
            t_final,
        } => {
            let kernels: Vec<Kernel<f64>> = kernels
                .iter()
                .map(|k| k.build())
                .collect::<Result<_, _>>()
                .map_err(|p| Failure::validation(vec![p]))?;
            let table = run_entropy_table(&epsilons, h, &kernels, &data_list, c, t_final)
                .map_err(|e| Failure::validation_one(e.code(), e))?;
            output::write_file(
                &out_dir,
                "entropy_table.csv",
                &output::entropy_table_csv(&table),
            )
            .map_err(Failure::runtime)?;
            output::write_file(
                &out_dir,
                "entropy_table.json",
                &serde_json::to_string_pretty(&table).map_err(Failure::runtime)?,
            )
            .map_err(Failure::runtime)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_weights(
    kernel_name: &str,
    kernel_csv: Option<PathBuf>,
    family: &str,
    epsilon: f64,
    h: f64,
    gamma0: Option<f64>,
    tail_tol: f64,
    c_gamma: Option<f64>,
) -> Result<(), Failure> {
    let section = config::KernelSection {
        family: kernel_name.to_string(),
        csv_path: kernel_csv,
    };
    let kernel = section.build().map_err(|p| Failure::validation(vec![p]))?;

    let (weights, default_c) = match family {
        "exact" => {
            let w = QuadratureWeights::exact(&kernel, epsilon, h, tail_tol)
                .map_err(|e| Failure::validation_one(e.code(), e))?;
            let c = kernel.first_moment().unwrap_or(f64::INFINITY);
            (w, c)
        }
        "riemann" => {
            let w = QuadratureWeights::riemann(&kernel, epsilon, h, tail_tol)
                .map_err(|e| Failure::validation_one(e.code(), e))?;
            let c = 2.0 * kernel.first_moment().unwrap_or(f64::INFINITY);
            (w, c)
        }
        "normalized-riemann" => {
            let w = QuadratureWeights::normalized_riemann(&kernel, epsilon, h, tail_tol)
                .map_err(|e| Failure::validation_one(e.code(), e))?;
            let c = 2.0 * kernel.first_moment().unwrap_or(f64::INFINITY);
            (w, c)
        }
        "geometric" => {
            let g = gamma0.ok_or_else(|| {
                Failure::validation_one("missing-field:gamma0", "geometric weights need --gamma0")
            })?;
            let w = QuadratureWeights::geometric_scaled(g, epsilon, h, tail_tol)
                .map_err(|e| Failure::validation_one(e.code(), e))?;
            let c = (1.0 - g) / g * (h / epsilon);
            (w, c)
        }
        other => {
            return Err(Failure::validation_one(
                "out-of-range:family",
                format!("unknown weight family `{other}`"),
            ))
        }
    };

    let mut csv = String::from("k,weight\n");
    for (k, w) in weights.weights().iter().enumerate() {
        csv.push_str(&format!("{k},{}\n", fmt_f64(*w)));
    }
    emit(&csv)?;
    let report = weights.verify_conditions(c_gamma.unwrap_or(default_c));
    let doc = serde_json::json!({
        "family": weights.family().to_string(),
        "epsilon": weights.epsilon(),
        "h": weights.h(),
        "count": weights.len(),
        "tail_mass": weights.tail_mass(),
        "gamma0_parameter": weights.gamma0_parameter(),
        "c_gamma": c_gamma.unwrap_or(default_c),
        "report": report,
    });
    let json = serde_json::to_string_pretty(&doc).map_err(Failure::runtime)?;
    emit(&json)?;
    emit("\n")?;
    Ok(())
}

fn parse_velocity(name: &str) -> Result<VelocityModel<f64>, Failure> {
    let family = match name {
        "greenshields" => nlcl::scheme::VelocityFamily::Greenshields,
        "krystek" => nlcl::scheme::VelocityFamily::Krystek,
        "underwood" => nlcl::scheme::VelocityFamily::Underwood,
        "clipped-greenshields" => nlcl::scheme::VelocityFamily::ClippedGreenshields,
        other => {
            return Err(Failure::validation_one(
                "out-of-range:velocity",
                format!("unknown velocity `{other}`"),
            ))
        }
    };
    Ok(VelocityModel::from_family(family))
}

/// Recompute diagnostics from a snapshots CSV. Temporal columns are
/// between-snapshot quantities; they match the per-step ones when snapshots
/// were taken every step.
fn cmd_diagnose(
    snapshots_path: &Path,
    output: Option<PathBuf>,
    velocity: &str,
    entropy_c: f64,
) -> Result<(), Failure> {
    let velocity = parse_velocity(velocity)?;
    let text = std::fs::read_to_string(snapshots_path).map_err(|e| {
        Failure::validation_one("config-read", format!("{}: {e}", snapshots_path.display()))
    })?;

    // parse and group rows by their (exact) time field
    type SnapshotGroup = (f64, Vec<f64>, Vec<f64>, Vec<f64>);
    let mut groups: Vec<SnapshotGroup> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line.trim() != "t,x_center,rho,W" {
                return Err(Failure::validation_one(
                    "config-parse",
                    format!("expected header `t,x_center,rho,W`, got `{line}`"),
                ));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Failure::validation_one(
                "config-parse",
                format!("line {}: expected 4 fields", idx + 1),
            ));
        }
        let mut values = [0.0f64; 4];
        for (slot, field) in values.iter_mut().zip(&fields) {
            *slot = field.trim().parse().map_err(|e| {
                Failure::validation_one("config-parse", format!("line {}: {e}", idx + 1))
            })?;
        }
        let [t, x, rho, w] = values;
        match groups.last_mut() {
            Some(g) if g.0 == t => {
                g.1.push(x);
                g.2.push(rho);
                g.3.push(w);
            }
            _ => groups.push((t, vec![x], vec![rho], vec![w])),
        }
    }
    if groups.is_empty() {
        return Err(Failure::validation_one("config-parse", "no snapshot rows"));
    }
    let h = if groups[0].1.len() >= 2 {
        groups[0].1[1] - groups[0].1[0]
    } else {
        return Err(Failure::validation_one(
            "config-parse",
            "need at least two cells to infer h",
        ));
    };

    let mut records: Vec<DiagnosticsRecord<f64>> = Vec::new();
    for (n, group) in groups.iter().enumerate() {
        let (t, _, rho, w) = group;
        let mass = rho.iter().sum::<f64>() * h;
        let (tv_time_increment, entropy_pos_rho, entropy_pos_w) = if n == 0 {
            (0.0, 0.0, 0.0)
        } else {
            let prev = &groups[n - 1];
            let dt = t - prev.0;
            let inc = prev
                .3
                .iter()
                .zip(w)
                .map(|(a, b)| (b - a).abs())
                .sum::<f64>();
            if dt > 0.0 {
                let lambda_eff = dt / h;
                (
                    inc,
                    entropy_step_positive(&prev.2, rho, &velocity, lambda_eff, h, entropy_c, None),
                    entropy_step_positive(&prev.3, w, &velocity, lambda_eff, h, entropy_c, None),
                )
            } else {
                (inc, 0.0, 0.0)
            }
        };
        records.push(DiagnosticsRecord {
            n,
            t: *t,
            rho_min: rho.iter().cloned().fold(f64::INFINITY, f64::min),
            rho_max: rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            mass,
            tv_rho: tv(rho, 0..rho.len()).map_err(|e| Failure::validation_one(e.code(), e))?,
            tv_w: tv(w, 0..w.len()).map_err(|e| Failure::validation_one(e.code(), e))?,
            tv_time_increment,
            entropy_pos_rho,
            entropy_pos_w,
        });
    }

    let csv = output::diagnostics_csv(&records);
    match output {
        Some(dir) => output::write_file(&dir, "diagnostics.csv", &csv).map_err(Failure::runtime)?,
        None => emit(&csv)?,
    }
    Ok(())
}
