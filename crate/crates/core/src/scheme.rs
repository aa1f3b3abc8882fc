//! The Godunov-type scheme for the nonlocal conservation law
//!
//!   ρ_j^{n+1} = ρ_j^n + λ (ρ_{j−1}^n V(W_j^n) − ρ_j^n V(W_{j+1}^n)),
//!   W_j^n     = Σ_k γ_k ρ_{j+k}^n,
//!
//! on a uniform grid with constant extension outside the computational
//! domain: out-of-range cell lookups clamp to the nearest boundary cell, and
//! the truncation tail of the weights is folded into the right extension so
//! the effective weights sum to the analytic total. W is recomputed from ρ
//! every step; the incremental W update is algebraically identical on the
//! infinite grid but drifts at truncated boundaries.

use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::initial::InitialData;
use crate::quadrature::{QuadratureWeights, WeightFamily};
use crate::scalar::Real;

/// Uniform grid over [x_min, x_max]; cell j spans
/// [x_min + j·h, x_min + (j+1)·h) with center x_min + (j+1/2)·h.
#[derive(Debug, Clone)]
pub struct GridSpec<R> {
    x_min: R,
    x_max: R,
    h: R,
    num_cells: usize,
}

impl<R: Real> GridSpec<R> {
    pub fn new(x_min: R, x_max: R, h: R) -> Result<Self> {
        if !(h > R::zero() && h.is_finite()) {
            return Err(Error::OutOfRange {
                field: "h",
                value: h.as_f64(),
                expected: "(0, inf)",
            });
        }
        if !(x_min < x_max) {
            return Err(Error::OutOfRange {
                field: "x_max",
                value: x_max.as_f64(),
                expected: "(x_min, inf)",
            });
        }
        let ratio = (x_max - x_min) / h;
        let rounded = ratio.round();
        if (ratio - rounded).abs() > R::of(1e-9) * rounded.max(R::one()) {
            return Err(Error::GridIndivisible {
                ratio: ratio.as_f64(),
            });
        }
        Ok(GridSpec {
            x_min,
            x_max,
            h,
            num_cells: rounded.as_f64() as usize,
        })
    }

    pub fn x_min(&self) -> R {
        self.x_min
    }

    pub fn x_max(&self) -> R {
        self.x_max
    }

    pub fn h(&self) -> R {
        self.h
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn cell_left(&self, j: usize) -> R {
        self.x_min + R::of(j as f64) * self.h
    }

    pub fn cell_right(&self, j: usize) -> R {
        self.x_min + R::of((j + 1) as f64) * self.h
    }

    pub fn cell_center(&self, j: usize) -> R {
        self.x_min + (R::of(j as f64) + R::of(0.5)) * self.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VelocityFamily {
    Greenshields,
    Krystek,
    Underwood,
    ClippedGreenshields,
}

impl std::fmt::Display for VelocityFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VelocityFamily::Greenshields => "greenshields",
            VelocityFamily::Krystek => "krystek",
            VelocityFamily::Underwood => "underwood",
            VelocityFamily::ClippedGreenshields => "clipped-greenshields",
        };
        f.write_str(s)
    }
}

/// Nonincreasing velocity model V on [0, 1] with its analytic norms.
#[derive(Debug, Clone)]
pub struct VelocityModel<R> {
    family: VelocityFamily,
    sup_norm: R,
    lip_norm: R,
}

impl<R: Real> VelocityModel<R> {
    /// V(ξ) = 1 − ξ.
    pub fn greenshields() -> Self {
        VelocityModel {
            family: VelocityFamily::Greenshields,
            sup_norm: R::one(),
            lip_norm: R::one(),
        }
    }

    /// V(ξ) = (1 − ξ)^4; |V'| peaks at 4.
    pub fn krystek() -> Self {
        VelocityModel {
            family: VelocityFamily::Krystek,
            sup_norm: R::one(),
            lip_norm: R::of(4.0),
        }
    }

    /// V(ξ) = e^{−ξ}.
    pub fn underwood() -> Self {
        VelocityModel {
            family: VelocityFamily::Underwood,
            sup_norm: R::one(),
            lip_norm: R::one(),
        }
    }

    /// V(ξ) = (1 − ξ)⁺, for runs whose W may leave [0, 1] (unnormalized
    /// Riemann weights).
    pub fn clipped_greenshields() -> Self {
        VelocityModel {
            family: VelocityFamily::ClippedGreenshields,
            sup_norm: R::one(),
            lip_norm: R::one(),
        }
    }

    pub fn from_family(family: VelocityFamily) -> Self {
        match family {
            VelocityFamily::Greenshields => Self::greenshields(),
            VelocityFamily::Krystek => Self::krystek(),
            VelocityFamily::Underwood => Self::underwood(),
            VelocityFamily::ClippedGreenshields => Self::clipped_greenshields(),
        }
    }

    pub fn family(&self) -> VelocityFamily {
        self.family
    }

    /// max of V on [0, 1].
    pub fn sup_norm(&self) -> R {
        self.sup_norm
    }

    /// max of |V'| on [0, 1].
    pub fn lip_norm(&self) -> R {
        self.lip_norm
    }

    pub fn nonincreasing(&self) -> bool {
        true
    }

    pub fn eval(&self, xi: R) -> R {
        match self.family {
            VelocityFamily::Greenshields => R::one() - xi,
            VelocityFamily::Krystek => {
                let u = R::one() - xi;
                u * u * u * u
            }
            VelocityFamily::Underwood => (-xi).exp(),
            VelocityFamily::ClippedGreenshields => (R::one() - xi).max(R::zero()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CflVariant {
    /// λ(‖V‖ + 2‖V'‖) ≤ 1, required by the TVD estimate.
    Main,
    /// λ(‖V‖ + ‖V'‖) ≤ 1, enough for the maximum principle.
    MaxPrinciple,
    /// No check; for deliberate counterexample runs.
    Unchecked,
}

impl std::fmt::Display for CflVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CflVariant::Main => "main",
            CflVariant::MaxPrinciple => "max-principle",
            CflVariant::Unchecked => "unchecked",
        };
        f.write_str(s)
    }
}

/// Largest admissible CFL ratio λ for the given variant.
pub fn max_cfl_ratio<R: Real>(velocity: &VelocityModel<R>, variant: CflVariant) -> R {
    match variant {
        CflVariant::Main => R::one() / (velocity.sup_norm() + R::of(2.0) * velocity.lip_norm()),
        CflVariant::MaxPrinciple => R::one() / (velocity.sup_norm() + velocity.lip_norm()),
        CflVariant::Unchecked => R::infinity(),
    }
}

/// Validated scheme configuration. CFL admissibility is checked here, never
/// at step time.
#[derive(Debug, Clone)]
pub struct SchemeConfig<R> {
    pub grid: GridSpec<R>,
    pub weights: QuadratureWeights<R>,
    pub velocity: VelocityModel<R>,
    pub lambda: R,
    pub epsilon: R,
    pub cfl_variant: CflVariant,
}

impl<R: Real> SchemeConfig<R> {
    pub fn new(
        grid: GridSpec<R>,
        weights: QuadratureWeights<R>,
        velocity: VelocityModel<R>,
        lambda: R,
        epsilon: R,
        cfl_variant: CflVariant,
    ) -> Result<Self> {
        if !(lambda > R::zero() && lambda.is_finite()) {
            return Err(Error::OutOfRange {
                field: "lambda",
                value: lambda.as_f64(),
                expected: "(0, inf)",
            });
        }
        if !(epsilon > R::zero() && epsilon.is_finite()) {
            return Err(Error::OutOfRange {
                field: "epsilon",
                value: epsilon.as_f64(),
                expected: "(0, inf)",
            });
        }
        let max_ratio = max_cfl_ratio(&velocity, cfl_variant);
        if lambda > max_ratio * (R::one() + R::of(1e-12)) {
            return Err(Error::CflViolation {
                lambda: lambda.as_f64(),
                max_ratio: max_ratio.as_f64(),
                velocity: velocity.family().to_string(),
                variant: cfl_variant.to_string(),
            });
        }
        // Geometric weights carry a conventional unit scale; all other
        // families must have been built for this grid and horizon.
        if weights.family() != WeightFamily::Geometric {
            let tol = R::of(1e-9);
            if (weights.h() - grid.h()).abs() > tol * grid.h() {
                return Err(Error::GridIncompatible {
                    weights_h: weights.h().as_f64(),
                    grid_h: grid.h().as_f64(),
                });
            }
            if (weights.epsilon() - epsilon).abs() > tol * epsilon {
                return Err(Error::GridIncompatible {
                    weights_h: weights.epsilon().as_f64(),
                    grid_h: epsilon.as_f64(),
                });
            }
        }
        Ok(SchemeConfig {
            grid,
            weights,
            velocity,
            lambda,
            epsilon,
            cfl_variant,
        })
    }

    /// Time step τ = λ·h.
    pub fn tau(&self) -> R {
        self.lambda * self.grid.h()
    }
}

/// Discrete state at one time index: cell averages ρ_j and nonlocal impact
/// W_j on the same grid.
#[derive(Debug, Clone)]
pub struct SolutionField<R> {
    pub time_index: usize,
    pub t: R,
    pub rho: Vec<R>,
    pub w: Vec<R>,
}

impl<R: Real> SolutionField<R> {
    pub fn initial(config: &SchemeConfig<R>, rho: Vec<R>) -> Self {
        assert_eq!(
            rho.len(),
            config.grid.num_cells(),
            "initial data length must match the grid"
        );
        let w = compute_w(&rho, &config.weights);
        SolutionField {
            time_index: 0,
            t: R::zero(),
            rho,
            w,
        }
    }
}

/// Exact cell averages of the initial profile.
pub fn discretize_initial<R: Real>(data: &InitialData<R>, grid: &GridSpec<R>) -> Result<Vec<R>> {
    data.validate()?;
    let tol = R::of(1e-12);
    let mut averages = Vec::with_capacity(grid.num_cells());
    for j in 0..grid.num_cells() {
        let avg = data.cell_average(grid.cell_left(j), grid.cell_right(j));
        if avg < -tol || avg > R::one() + tol {
            return Err(Error::DataOutOfRange {
                cell: j,
                value: avg.as_f64(),
            });
        }
        averages.push(avg);
    }
    Ok(averages)
}

// Below this many weight-cell products the rayon dispatch overhead is not
// worth paying.
const PAR_WORK_THRESHOLD: usize = 1 << 17;

/// Nonlocal impact W_j = Σ_k γ_k ρ_{j+k}, with ρ beyond the right boundary
/// replaced by the last cell value and the truncation tail folded into that
/// extension. Each cell accumulates in ascending k, so results are
/// deterministic and independent of the parallel split.
pub fn compute_w<R: Real>(rho: &[R], weights: &QuadratureWeights<R>) -> Vec<R> {
    let n = rho.len();
    assert!(n > 0, "compute_w needs a nonempty field");
    let last = rho[n - 1];
    let w = weights.weights();
    let tail = weights.tail_mass();
    let cell = |j: usize| {
        let mut acc = R::zero();
        if j + w.len() <= n {
            for (&wk, &rk) in w.iter().zip(&rho[j..]) {
                acc = acc + wk * rk;
            }
        } else {
            let m = n - j;
            for (&wk, &rk) in w[..m].iter().zip(&rho[j..]) {
                acc = acc + wk * rk;
            }
            for &wk in &w[m..] {
                acc = acc + wk * last;
            }
        }
        acc + tail * last
    };
    if n.saturating_mul(w.len()) >= PAR_WORK_THRESHOLD {
        (0..n).into_par_iter().map(cell).collect()
    } else {
        (0..n).map(cell).collect()
    }
}

/// One explicit step: upwind update of ρ from the time-n data, then W
/// recomputed from the new ρ.
pub fn step<R: Real>(field: &SolutionField<R>, config: &SchemeConfig<R>) -> SolutionField<R> {
    let rho = &field.rho;
    let w = &field.w;
    let n = rho.len();
    let jl = n - 1;
    let lambda = config.lambda;

    let vel: Vec<R> = w.iter().map(|&x| config.velocity.eval(x)).collect();
    let mut rho_new = Vec::with_capacity(n);
    for j in 0..n {
        let upstream = rho[j.saturating_sub(1)];
        let v_in = vel[j];
        let v_out = vel[(j + 1).min(jl)];
        rho_new.push(rho[j] + lambda * (upstream * v_in - rho[j] * v_out));
    }
    let w_new = compute_w(&rho_new, &config.weights);
    let next_index = field.time_index + 1;
    SolutionField {
        time_index: next_index,
        t: R::of(next_index as f64) * config.tau(),
        rho: rho_new,
        w: w_new,
    }
}

/// Options for [`run`].
#[derive(Debug, Clone)]
pub struct RunOptions<R> {
    /// Kruzhkov constant for the per-step entropy residual columns.
    pub entropy_c: R,
    /// Disable to skip per-step diagnostics (rate sweeps only need the final
    /// field).
    pub record_diagnostics: bool,
}

impl<R: Real> Default for RunOptions<R> {
    fn default() -> Self {
        RunOptions {
            entropy_c: R::of(0.5),
            record_diagnostics: true,
        }
    }
}

/// Field snapshot taken at the nearest step time at or before the request.
#[derive(Debug, Clone)]
pub struct Snapshot<R> {
    pub requested_t: R,
    pub n: usize,
    pub t: R,
    pub rho: Vec<R>,
    pub w: Vec<R>,
}

/// Reproducibility record for one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub solver_version: String,
    pub num_cells: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
    pub lambda: f64,
    pub tau: f64,
    pub epsilon: f64,
    pub weight_family: String,
    pub weight_count: usize,
    pub tail_mass: f64,
    pub gamma0_parameter: Option<f64>,
    pub velocity_family: String,
    pub cfl_variant: String,
    pub requested_t_final: f64,
    pub num_steps: usize,
    pub final_time: f64,
    pub entropy_c: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult<R> {
    pub snapshots: Vec<Snapshot<R>>,
    pub diagnostics: Vec<DiagnosticsRecord<R>>,
    pub final_field: SolutionField<R>,
    pub manifest: RunManifest,
}

/// Advance N = ⌊T/τ⌋ steps from the given cell averages, recording snapshots
/// and per-step diagnostics. The actual final time N·τ goes into the
/// manifest.
pub fn run<R: Real>(
    config: &SchemeConfig<R>,
    initial: &[R],
    t_final: R,
    snapshot_times: &[R],
    opts: &RunOptions<R>,
) -> RunResult<R> {
    let started = std::time::Instant::now();
    let tau = config.tau();
    let num_steps = ((t_final / tau) + R::of(1e-9)).floor().as_f64() as usize;

    let snap_indices: Vec<usize> = snapshot_times
        .iter()
        .map(|&s| {
            let idx = ((s.max(R::zero()) / tau) + R::of(1e-9)).floor().as_f64() as usize;
            idx.min(num_steps)
        })
        .collect();

    let mut field = SolutionField::initial(config, initial.to_vec());
    let mut snapshots: Vec<Option<Snapshot<R>>> = vec![None; snapshot_times.len()];
    let mut diagnostics = Vec::new();

    let h = config.grid.h();
    let record = |field: &SolutionField<R>,
                      prev: Option<&SolutionField<R>>,
                      diagnostics: &mut Vec<DiagnosticsRecord<R>>| {
        if !opts.record_diagnostics {
            return;
        }
        diagnostics.push(diagnostics::record_step(
            field,
            prev,
            &config.velocity,
            config.lambda,
            h,
            opts.entropy_c,
        ));
    };

    let capture = |field: &SolutionField<R>, snapshots: &mut Vec<Option<Snapshot<R>>>| {
        for (slot, (&idx, &req)) in snapshots
            .iter_mut()
            .zip(snap_indices.iter().zip(snapshot_times))
        {
            if idx == field.time_index && slot.is_none() {
                *slot = Some(Snapshot {
                    requested_t: req,
                    n: field.time_index,
                    t: field.t,
                    rho: field.rho.clone(),
                    w: field.w.clone(),
                });
            }
        }
    };

    capture(&field, &mut snapshots);
    record(&field, None, &mut diagnostics);

    for _ in 0..num_steps {
        let next = step(&field, config);
        record(&next, Some(&field), &mut diagnostics);
        field = next;
        capture(&field, &mut snapshots);
    }

    let manifest = RunManifest {
        solver_version: env!("CARGO_PKG_VERSION").to_string(),
        num_cells: config.grid.num_cells(),
        x_min: config.grid.x_min().as_f64(),
        x_max: config.grid.x_max().as_f64(),
        h: h.as_f64(),
        lambda: config.lambda.as_f64(),
        tau: tau.as_f64(),
        epsilon: config.epsilon.as_f64(),
        weight_family: config.weights.family().to_string(),
        weight_count: config.weights.len(),
        tail_mass: config.weights.tail_mass().as_f64(),
        gamma0_parameter: config.weights.gamma0_parameter().map(|g| g.as_f64()),
        velocity_family: config.velocity.family().to_string(),
        cfl_variant: config.cfl_variant.to_string(),
        requested_t_final: t_final.as_f64(),
        num_steps,
        final_time: (R::of(num_steps as f64) * tau).as_f64(),
        entropy_c: opts.entropy_c.as_f64(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };

    RunResult {
        snapshots: snapshots.into_iter().map(Option::unwrap).collect(),
        diagnostics,
        final_field: field,
        manifest,
    }
}
