//! Experiment orchestration: convergence studies along limiting paths,
//! quadrature-family comparisons, the TV-increase study, the entropy-
//! violation table, and log-log rate fitting.
//!
//! Sweep cells are pure functions of their parameters and run in parallel;
//! results are gathered in input order, so the numeric outputs do not depend
//! on the degree of parallelism.

use std::ops::Range;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::initial::InitialData;
use crate::kernels::Kernel;
use crate::quadrature::{QuadratureWeights, WeightFamily, DEFAULT_TAIL_TOL};
use crate::reference::reference_solution;
use crate::scalar::Real;
use crate::scheme::{
    discretize_initial, run, CflVariant, GridSpec, RunOptions, SchemeConfig, VelocityModel,
};

/// Default mesh sweep for rate studies.
pub const DEFAULT_H_LIST: [f64; 5] = [4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4];
/// Default domain for shock / rarefaction / bell studies: waves (max speed
/// ‖V‖ = 1) stay away from the boundaries through T = 1 plus the ε-halo.
pub const DEFAULT_DOMAIN: (f64, f64) = (-2.0, 2.0);
/// Default domain and horizon for the TV-increase study at T = 1.6.
pub const TV_STUDY_DOMAIN: (f64, f64) = (-1.5, 2.5);
/// tv_rho is considered settled once it drops below 1 + this tolerance.
pub const TV_SETTLE_TOL: f64 = 0.05;

/// Joint limit path selecting ε for each mesh size h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LimitPath<R> {
    EpsEqualsH,
    EpsEquals5h,
    EpsEqualsSqrtH,
    FixedEps { value: R },
}

impl<R: Real> LimitPath<R> {
    pub fn eps_for(&self, h: R) -> R {
        match self {
            LimitPath::EpsEqualsH => h,
            LimitPath::EpsEquals5h => R::of(5.0) * h,
            LimitPath::EpsEqualsSqrtH => h.sqrt(),
            LimitPath::FixedEps { value } => *value,
        }
    }

    pub fn name(&self) -> String {
        match self {
            LimitPath::EpsEqualsH => "eps=h".into(),
            LimitPath::EpsEquals5h => "eps=5h".into(),
            LimitPath::EpsEqualsSqrtH => "eps=sqrt(h)".into(),
            LimitPath::FixedEps { value } => format!("eps={}", value),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetField {
    W,
    Rho,
}

/// A convergence-study description. `run_convergence_study` runs one cell
/// per mesh size and fits the error slope.
#[derive(Debug, Clone)]
pub struct StudySpec<R> {
    pub data: InitialData<R>,
    pub kernel: Kernel<R>,
    pub weight_family: WeightFamily,
    pub velocity: VelocityModel<R>,
    pub path: LimitPath<R>,
    pub h_list: Vec<R>,
    pub lambda: R,
    pub t_final: R,
    pub domain: (R, R),
    pub target_field: TargetField,
    pub cfl_variant: CflVariant,
    pub refine: usize,
    pub fit_points: Option<usize>,
    pub tail_tol: R,
}

impl<R: Real> StudySpec<R> {
    /// Study with the standard defaults: h sweep 4e-3 … 2.5e-4, λ = 0.25,
    /// T = 1 on [−2, 2], target W, exact weights, fine-mesh refine 8.
    pub fn new(
        data: InitialData<R>,
        kernel: Kernel<R>,
        velocity: VelocityModel<R>,
        path: LimitPath<R>,
    ) -> Self {
        StudySpec {
            data,
            kernel,
            weight_family: WeightFamily::Exact,
            velocity,
            path,
            h_list: DEFAULT_H_LIST.iter().map(|&h| R::of(h)).collect(),
            lambda: R::of(0.25),
            t_final: R::one(),
            domain: (R::of(DEFAULT_DOMAIN.0), R::of(DEFAULT_DOMAIN.1)),
            target_field: TargetField::W,
            cfl_variant: CflVariant::Main,
            refine: 8,
            fit_points: None,
            tail_tol: R::of(DEFAULT_TAIL_TOL),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.h_list.is_empty() {
            return Err(Error::InvalidSpec {
                field: "h_list",
                reason: "must be nonempty".into(),
            });
        }
        for pair in self.h_list.windows(2) {
            if !(pair[1] < pair[0]) {
                return Err(Error::InvalidSpec {
                    field: "h_list",
                    reason: "must be strictly decreasing".into(),
                });
            }
        }
        if self.h_list.iter().any(|&h| !(h > R::zero())) {
            return Err(Error::InvalidSpec {
                field: "h_list",
                reason: "entries must be positive".into(),
            });
        }
        self.data.validate()?;
        if !self.data.in_unit_interval() {
            return Err(Error::InvalidSpec {
                field: "data",
                reason: "initial data must take values in [0, 1]".into(),
            });
        }
        Ok(())
    }

    fn weights_for(&self, epsilon: R, h: R) -> Result<QuadratureWeights<R>> {
        match self.weight_family {
            WeightFamily::Exact => {
                QuadratureWeights::exact(&self.kernel, epsilon, h, self.tail_tol)
            }
            WeightFamily::Riemann => {
                QuadratureWeights::riemann(&self.kernel, epsilon, h, self.tail_tol)
            }
            WeightFamily::NormalizedRiemann => {
                QuadratureWeights::normalized_riemann(&self.kernel, epsilon, h, self.tail_tol)
            }
            // exponential-equivalent geometric weights
            WeightFamily::Geometric => QuadratureWeights::geometric_scaled(
                R::one() - (-h / epsilon).exp(),
                epsilon,
                h,
                self.tail_tol,
            ),
        }
    }
}

/// One sweep cell result.
#[derive(Debug, Clone, Serialize)]
pub struct StudyRow<R> {
    pub h: R,
    pub epsilon: R,
    pub tau: R,
    pub l1_error: R,
    pub wall_time_s: f64,
}

/// Provenance for re-running any cell of a study.
#[derive(Debug, Clone, Serialize)]
pub struct StudyManifest {
    pub data: String,
    pub kernel_family: String,
    pub kernel_table: Option<Vec<[f64; 3]>>,
    pub weight_family: String,
    pub velocity_family: String,
    pub cfl_variant: String,
    pub path: String,
    pub h_list: Vec<f64>,
    pub lambda: f64,
    pub t_final: f64,
    pub domain: [f64; 2],
    pub target_field: String,
    pub refine: usize,
    pub fit_points: Option<usize>,
    pub tail_tol: f64,
    pub reference: String,
    pub solver_version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyResult<R> {
    pub rows: Vec<StudyRow<R>>,
    pub fitted_slope: R,
    pub manifest: StudyManifest,
}

fn cell_error<R: Real>(spec: &StudySpec<R>, h: R) -> Result<(StudyRow<R>, String)> {
    let started = Instant::now();
    let epsilon = spec.path.eps_for(h);
    let grid = GridSpec::new(spec.domain.0, spec.domain.1, h)?;
    let weights = spec.weights_for(epsilon, h)?;
    let config = SchemeConfig::new(
        grid.clone(),
        weights,
        spec.velocity.clone(),
        spec.lambda,
        epsilon,
        spec.cfl_variant,
    )?;
    let initial = discretize_initial(&spec.data, &grid)?;
    let opts = RunOptions {
        record_diagnostics: false,
        ..RunOptions::default()
    };
    let result = run(&config, &initial, spec.t_final, &[], &opts);
    let t_end = R::of(result.manifest.num_steps as f64) * config.tau();

    let reference = reference_solution(&spec.data, &spec.velocity, &grid, spec.refine, spec.lambda)?;
    let field = match spec.target_field {
        TargetField::W => &result.final_field.w,
        TargetField::Rho => &result.final_field.rho,
    };
    let l1_error = diagnostics::l1_error(field, &reference, t_end, &grid, None);
    Ok((
        StudyRow {
            h,
            epsilon,
            tau: config.tau(),
            l1_error,
            wall_time_s: started.elapsed().as_secs_f64(),
        },
        reference.describe(),
    ))
}

/// Run one cell per mesh size (in parallel) and fit the log-log error slope.
pub fn run_convergence_study<R: Real>(spec: &StudySpec<R>) -> Result<StudyResult<R>> {
    spec.validate()?;
    let cells: Vec<(StudyRow<R>, String)> = spec
        .h_list
        .par_iter()
        .map(|&h| {
            cell_error(spec, h).map_err(|e| Error::InvalidSpec {
                field: "study-cell",
                reason: format!("h={}, eps={}: {}", h, spec.path.eps_for(h), e),
            })
        })
        .collect::<Result<_>>()?;
    let reference = cells
        .first()
        .map(|(_, r)| r.clone())
        .unwrap_or_default();
    let rows: Vec<StudyRow<R>> = cells.into_iter().map(|(row, _)| row).collect();

    let points: Vec<(R, R)> = rows.iter().map(|r| (r.h, r.l1_error)).collect();
    let fit_slice = match spec.fit_points {
        Some(m) if m >= 2 && m <= points.len() => &points[points.len() - m..],
        _ => &points[..],
    };
    let fitted_slope = fit_rate(fit_slice)?;

    Ok(StudyResult {
        rows,
        fitted_slope,
        manifest: StudyManifest {
            data: spec.data.name().to_string(),
            kernel_family: spec.kernel.family().to_string(),
            kernel_table: if spec.kernel.rows().is_empty() {
                None
            } else {
                Some(
                    spec.kernel
                        .rows()
                        .iter()
                        .map(|r| [r.z_left.as_f64(), r.z_right.as_f64(), r.value.as_f64()])
                        .collect(),
                )
            },
            weight_family: spec.weight_family.to_string(),
            velocity_family: spec.velocity.family().to_string(),
            cfl_variant: spec.cfl_variant.to_string(),
            path: spec.path.name(),
            h_list: spec.h_list.iter().map(|h| h.as_f64()).collect(),
            lambda: spec.lambda.as_f64(),
            t_final: spec.t_final.as_f64(),
            domain: [spec.domain.0.as_f64(), spec.domain.1.as_f64()],
            target_field: match spec.target_field {
                TargetField::W => "w".into(),
                TargetField::Rho => "rho".into(),
            },
            refine: spec.refine,
            fit_points: spec.fit_points,
            tail_tol: spec.tail_tol.as_f64(),
            reference,
            solver_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

/// One study per weight family, all other parameters shared. Families are
/// restricted to exact / Riemann / normalized Riemann.
pub fn run_quadrature_comparison<R: Real>(
    spec: &StudySpec<R>,
    families: &[WeightFamily],
) -> Result<Vec<StudyResult<R>>> {
    if families.contains(&WeightFamily::Geometric) {
        return Err(Error::InvalidSpec {
            field: "families",
            reason: "quadrature comparison covers exact, riemann, normalized-riemann".into(),
        });
    }
    families
        .iter()
        .map(|&family| {
            let mut cell = spec.clone();
            cell.weight_family = family;
            run_convergence_study(&cell)
        })
        .collect()
}

/// Time series of spatial total variation for one TV-increase run.
#[derive(Debug, Clone, Serialize)]
pub struct TvSeries<R> {
    pub epsilon: R,
    pub delta: R,
    pub times: Vec<R>,
    pub tv_rho: Vec<R>,
    pub tv_w: Vec<R>,
    /// First time tv_rho exceeds its initial value.
    pub first_tv_increase: Option<R>,
    /// First time tv_rho returns below 1 + [`TV_SETTLE_TOL`].
    pub settled_below: Option<R>,
    /// max over steps of tv_w(n+1) − tv_w(n); TVD means this is ≤ 0 up to
    /// rounding.
    pub max_tv_w_step_increase: R,
}

/// TV-increase study: datum 0.5·1_{(−δ,−δ/2)} + 1_{[0,∞)} with δ = ε, run on
/// [−1.5, 2.5] with Greenshields velocity, λ = 0.25, exact weights.
pub fn run_tv_study<R: Real>(
    epsilons: &[R],
    h: R,
    kernel: &Kernel<R>,
    t_final: R,
) -> Result<Vec<TvSeries<R>>> {
    epsilons
        .par_iter()
        .map(|&eps| -> Result<TvSeries<R>> {
            let grid = GridSpec::new(R::of(TV_STUDY_DOMAIN.0), R::of(TV_STUDY_DOMAIN.1), h)?;
            let weights = QuadratureWeights::exact(kernel, eps, h, R::of(DEFAULT_TAIL_TOL))?;
            let config = SchemeConfig::new(
                grid.clone(),
                weights,
                VelocityModel::greenshields(),
                R::of(0.25),
                eps,
                CflVariant::Main,
            )?;
            let data = InitialData::TvIncrease { delta: eps };
            let initial = discretize_initial(&data, &grid)?;
            let result = run(&config, &initial, t_final, &[], &RunOptions::default());

            let times: Vec<R> = result.diagnostics.iter().map(|d| d.t).collect();
            let tv_rho: Vec<R> = result.diagnostics.iter().map(|d| d.tv_rho).collect();
            let tv_w: Vec<R> = result.diagnostics.iter().map(|d| d.tv_w).collect();

            let initial_tv = tv_rho[0];
            let first_tv_increase = times
                .iter()
                .zip(&tv_rho)
                .find(|(_, &tv)| tv > initial_tv)
                .map(|(&t, _)| t);
            let settle_level = R::one() + R::of(TV_SETTLE_TOL);
            let settled_below = match first_tv_increase {
                None => None,
                Some(t0) => times
                    .iter()
                    .zip(&tv_rho)
                    .find(|(&t, &tv)| t > t0 && tv < settle_level)
                    .map(|(&t, _)| t),
            };
            let mut max_inc = R::neg_infinity();
            for pair in tv_w.windows(2) {
                let inc = pair[1] - pair[0];
                if inc > max_inc {
                    max_inc = inc;
                }
            }
            Ok(TvSeries {
                epsilon: eps,
                delta: eps,
                times,
                tv_rho,
                tv_w,
                first_tv_increase,
                settled_below,
                max_tv_w_step_increase: max_inc,
            })
        })
        .collect()
}

/// Entropy-violation table entry for one (ε, kernel, data) cell.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyEntry<R> {
    pub epsilon: R,
    pub kernel: String,
    pub data: String,
    pub e_rho: R,
    pub e_w: R,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyTable<R> {
    pub epsilons: Vec<R>,
    pub kernels: Vec<String>,
    pub data: Vec<String>,
    pub entries: Vec<EntropyEntry<R>>,
}

impl<R: Real> EntropyTable<R> {
    pub fn get(&self, eps_idx: usize, kernel_idx: usize, data_idx: usize) -> &EntropyEntry<R> {
        let idx = eps_idx * self.kernels.len() * self.data.len()
            + kernel_idx * self.data.len()
            + data_idx;
        &self.entries[idx]
    }
}

/// Aggregated local entropy violations 𝓔^ρ, 𝓔^W per (ε, kernel, data) over
/// [0, T], on [−2, 2] with Greenshields velocity, λ = 0.25, exact weights.
pub fn run_entropy_table<R: Real>(
    epsilons: &[R],
    h: R,
    kernels: &[Kernel<R>],
    data_list: &[InitialData<R>],
    c: R,
    t_final: R,
) -> Result<EntropyTable<R>> {
    if !(c >= R::zero() && c <= R::one()) {
        return Err(Error::OutOfRange {
            field: "c",
            value: c.as_f64(),
            expected: "[0, 1]",
        });
    }
    let mut cells = Vec::new();
    for &eps in epsilons {
        for kernel in kernels {
            for data in data_list {
                cells.push((eps, kernel.clone(), data.clone()));
            }
        }
    }
    let entries: Vec<EntropyEntry<R>> = cells
        .into_par_iter()
        .map(|(eps, kernel, data)| -> Result<EntropyEntry<R>> {
            let grid = GridSpec::new(R::of(DEFAULT_DOMAIN.0), R::of(DEFAULT_DOMAIN.1), h)?;
            let weights = QuadratureWeights::exact(&kernel, eps, h, R::of(DEFAULT_TAIL_TOL))?;
            let config = SchemeConfig::new(
                grid.clone(),
                weights,
                VelocityModel::greenshields(),
                R::of(0.25),
                eps,
                CflVariant::Main,
            )?;
            let initial = discretize_initial(&data, &grid)?;
            let opts = RunOptions {
                entropy_c: c,
                record_diagnostics: true,
            };
            let result = run(&config, &initial, t_final, &[], &opts);
            let e_rho = result
                .diagnostics
                .iter()
                .map(|d| d.entropy_pos_rho)
                .sum::<R>();
            let e_w = result
                .diagnostics
                .iter()
                .map(|d| d.entropy_pos_w)
                .sum::<R>();
            Ok(EntropyEntry {
                epsilon: eps,
                kernel: kernel.family().to_string(),
                data: data.name().to_string(),
                e_rho,
                e_w,
            })
        })
        .collect::<Result<_>>()?;
    Ok(EntropyTable {
        epsilons: epsilons.to_vec(),
        kernels: kernels.iter().map(|k| k.family().to_string()).collect(),
        data: data_list.iter().map(|d| d.name().to_string()).collect(),
        entries,
    })
}

/// Least-squares slope of log e against log h.
pub fn fit_rate<R: Real>(points: &[(R, R)]) -> Result<R> {
    if points.len() < 2 {
        return Err(Error::InsufficientPoints);
    }
    let mut logs = Vec::with_capacity(points.len());
    for &(h, e) in points {
        if !(h > R::zero()) || !(e > R::zero()) {
            return Err(Error::NonpositiveError {
                value: e.min(h).as_f64(),
            });
        }
        logs.push((h.ln(), e.ln()));
    }
    let n = R::of(logs.len() as f64);
    let mean_h = logs.iter().map(|&(lh, _)| lh).sum::<R>() / n;
    let mean_e = logs.iter().map(|&(_, le)| le).sum::<R>() / n;
    let mut cov = R::zero();
    let mut var = R::zero();
    for &(lh, le) in &logs {
        cov = cov + (lh - mean_h) * (le - mean_e);
        var = var + (lh - mean_h) * (lh - mean_h);
    }
    Ok(cov / var)
}

/// Convenience: window over the interior of a study grid, used by property
/// suites that must stay clear of the boundary-extension halo.
pub fn interior_window<R: Real>(
    grid: &GridSpec<R>,
    epsilon: R,
    velocity: &VelocityModel<R>,
    t_final: R,
) -> Result<Range<usize>> {
    diagnostics::boundary_safe_window(grid, epsilon, velocity.sup_norm(), t_final)
}
