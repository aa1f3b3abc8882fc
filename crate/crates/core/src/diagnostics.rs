//! Runtime stability metrics: extrema, mass, spatial/temporal total
//! variation, Kruzhkov entropy residuals (local and nonlocal form), L¹
//! errors against reference solutions, and the W−ρ deviation.
//!
//! Entropy aggregates use positive parts, 𝓔 = τh Σ max(E, 0): a scheme that
//! satisfies the discrete entropy inequality everywhere scores exactly zero,
//! and any positive score measures the violation.

use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{QuadratureWeights, LOCALIZATION_RADIUS};
use crate::reference::ReferenceSolution;
use crate::scalar::Real;
use crate::scheme::{GridSpec, SolutionField, VelocityModel};

/// Per-step stability record. `tv_time_increment` and the entropy columns
/// describe the transition into step `n` and are zero at `n = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsRecord<R> {
    pub n: usize,
    pub t: R,
    pub rho_min: R,
    pub rho_max: R,
    pub mass: R,
    pub tv_rho: R,
    pub tv_w: R,
    pub tv_time_increment: R,
    pub entropy_pos_rho: R,
    pub entropy_pos_w: R,
}

/// Kruzhkov constant and optional cell window for entropy residuals.
#[derive(Debug, Clone)]
pub struct EntropyResidualConfig<R> {
    pub c: R,
    /// `None` means the full grid.
    pub window: Option<Range<usize>>,
}

impl<R: Real> Default for EntropyResidualConfig<R> {
    fn default() -> Self {
        EntropyResidualConfig {
            c: R::of(0.5),
            window: None,
        }
    }
}

/// Σ |u_{j+1} − u_j| over consecutive pairs inside the window.
pub fn tv<R: Real>(values: &[R], window: Range<usize>) -> Result<R> {
    if window.start >= window.end || window.end > values.len() {
        return Err(Error::EmptyWindow);
    }
    Ok(tv_unchecked(&values[window]))
}

fn tv_unchecked<R: Real>(values: &[R]) -> R {
    let mut acc = R::zero();
    for pair in values.windows(2) {
        acc = acc + (pair[1] - pair[0]).abs();
    }
    acc
}

/// Numerical Kruzhkov entropy flux Ψ_c(u, w) = (u∨c)V(w∨c) − (u∧c)V(w∧c).
pub fn kruzhkov_flux<R: Real>(u: R, w: R, c: R, velocity: &VelocityModel<R>) -> R {
    u.max(c) * velocity.eval(w.max(c)) - u.min(c) * velocity.eval(w.min(c))
}

/// τh Σ_j max(E_j, 0) for one transition u → u_next over the window, where
/// E_j = (|u⁺_j−c| − |u_j−c|)/τ + (Ψ_c(u_j,u_{j+1}) − Ψ_c(u_{j−1},u_j))/h.
/// Neighbor lookups clamp at the array ends (constant extension).
pub fn entropy_step_positive<R: Real>(
    u: &[R],
    u_next: &[R],
    velocity: &VelocityModel<R>,
    lambda: R,
    h: R,
    c: R,
    window: Option<Range<usize>>,
) -> R {
    let n = u.len();
    let tau = lambda * h;
    let range = window.unwrap_or(0..n);
    let mut acc = R::zero();
    for j in range {
        let e = entropy_residual_at(u, u_next, velocity, tau, h, c, j);
        if e > R::zero() {
            acc = acc + e;
        }
    }
    acc * tau * h
}

fn entropy_residual_at<R: Real>(
    u: &[R],
    u_next: &[R],
    velocity: &VelocityModel<R>,
    tau: R,
    h: R,
    c: R,
    j: usize,
) -> R {
    let jl = u.len() - 1;
    let left = u[j.saturating_sub(1)];
    let right = u[(j + 1).min(jl)];
    let time_part = ((u_next[j] - c).abs() - (u[j] - c).abs()) / tau;
    let flux_out = kruzhkov_flux(u[j], right, c, velocity);
    let flux_in = kruzhkov_flux(left, u[j], c, velocity);
    time_part + (flux_out - flux_in) / h
}

/// Residual field and aggregate for a stored trajectory of one field.
#[derive(Debug, Clone)]
pub struct EntropyResidual<R> {
    /// E_{j,n} for each transition n (rows) and window cell j (columns).
    pub field: Vec<Vec<R>>,
    /// 𝓔 = τh Σ max(E, 0).
    pub aggregate: R,
    pub max_residual: R,
}

/// Local Kruzhkov entropy residuals over a trajectory (at least two levels).
pub fn entropy_residual_local<R: Real>(
    traj: &[Vec<R>],
    velocity: &VelocityModel<R>,
    lambda: R,
    h: R,
    cfg: &EntropyResidualConfig<R>,
) -> EntropyResidual<R> {
    assert!(traj.len() >= 2, "need at least two time levels");
    let n_cells = traj[0].len();
    let tau = lambda * h;
    let range = cfg.window.clone().unwrap_or(0..n_cells);
    let mut field = Vec::with_capacity(traj.len() - 1);
    let mut aggregate = R::zero();
    let mut max_residual = R::neg_infinity();
    for pair in traj.windows(2) {
        let mut row = Vec::with_capacity(range.len());
        for j in range.clone() {
            let e = entropy_residual_at(&pair[0], &pair[1], velocity, tau, h, cfg.c, j);
            if e > R::zero() {
                aggregate = aggregate + e;
            }
            if e > max_residual {
                max_residual = e;
            }
            row.push(e);
        }
        field.push(row);
    }
    EntropyResidual {
        field,
        aggregate: aggregate * tau * h,
        max_residual,
    }
}

/// Aggregate of the nonlocal-form entropy residual for W,
///
///   (|W_j^{n+1}−c| − |W_j^n−c|)/τ + (Ψ_{j+1/2} − Ψ_{j−1/2})/h,
///   Ψ_{j−1/2} = |W_{j−1}−c| V(c) − Σ_k γ_k ρ_{j+k−1} |V(W_{j+k}) − V(c)|,
///
/// which the scheme satisfies pointwise (≤ 0) under the max-principle CFL.
#[derive(Debug, Clone, Copy)]
pub struct NonlocalEntropyResidual<R> {
    pub aggregate: R,
    pub max_residual: R,
}

#[allow(clippy::too_many_arguments)]
pub fn nonlocal_entropy_residual_w<R: Real>(
    rho_traj: &[Vec<R>],
    w_traj: &[Vec<R>],
    weights: &QuadratureWeights<R>,
    velocity: &VelocityModel<R>,
    lambda: R,
    h: R,
    c: R,
    window: Option<Range<usize>>,
) -> NonlocalEntropyResidual<R> {
    assert!(rho_traj.len() >= 2 && rho_traj.len() == w_traj.len());
    let n = rho_traj[0].len();
    let jl = n - 1;
    let tau = lambda * h;
    let v_c = velocity.eval(c);
    let wk = weights.weights();
    let tail = weights.tail_mass();
    let range = window.unwrap_or(0..n);

    let mut aggregate = R::zero();
    let mut max_residual = R::neg_infinity();
    for step in 0..rho_traj.len() - 1 {
        let rho = &rho_traj[step];
        let w = &w_traj[step];
        let w_next = &w_traj[step + 1];
        let vdiff: Vec<R> = w
            .iter()
            .map(|&x| (velocity.eval(x) - v_c).abs())
            .collect();
        // interface flux Ψ_{i−1/2} for i = 0..=n
        let psi = |i: usize| {
            let mut sum = R::zero();
            for (k, &g) in wk.iter().enumerate() {
                let rho_idx = (i + k).saturating_sub(1).min(jl);
                let w_idx = (i + k).min(jl);
                sum = sum + g * rho[rho_idx] * vdiff[w_idx];
            }
            sum = sum + tail * rho[jl] * vdiff[jl];
            (w[i.saturating_sub(1).min(jl)] - c).abs() * v_c - sum
        };
        let mut psi_left = psi(range.start);
        for j in range.clone() {
            let psi_right = psi(j + 1);
            let e = ((w_next[j] - c).abs() - (w[j] - c).abs()) / tau
                + (psi_right - psi_left) / h;
            if e > R::zero() {
                aggregate = aggregate + e;
            }
            if e > max_residual {
                max_residual = e;
            }
            psi_left = psi_right;
        }
    }
    NonlocalEntropyResidual {
        aggregate: aggregate * tau * h,
        max_residual,
    }
}

/// Σ_j |u_j − ref_j| h over the window, both sides as cell averages.
pub fn l1_error<R: Real>(
    field: &[R],
    reference: &ReferenceSolution<R>,
    t: R,
    grid: &GridSpec<R>,
    window: Option<Range<usize>>,
) -> R {
    let refs = reference.cell_averages(t, grid);
    l1_error_vs(field, &refs, grid.h(), window)
}

/// Same as [`l1_error`] with precomputed reference averages.
pub fn l1_error_vs<R: Real>(
    field: &[R],
    reference: &[R],
    h: R,
    window: Option<Range<usize>>,
) -> R {
    let range = window.unwrap_or(0..field.len());
    let mut acc = R::zero();
    for j in range {
        acc = acc + (field[j] - reference[j]).abs();
    }
    acc * h
}

/// Σ_j |W_j − ρ_j| h; callers compare against c·ε·TV(W).
pub fn w_rho_deviation<R: Real>(rho: &[R], w: &[R], h: R) -> R {
    debug_assert_eq!(rho.len(), w.len());
    let mut acc = R::zero();
    for (&r, &x) in rho.iter().zip(w) {
        acc = acc + (x - r).abs();
    }
    acc * h
}

/// Window excluding the ceil((Rε + ‖V‖T)/h) cells nearest each boundary,
/// with the localization proxy radius R. The stability lemmas are proved on
/// the infinite grid; constant extension contaminates boundary cells.
pub fn boundary_safe_window<R: Real>(
    grid: &GridSpec<R>,
    epsilon: R,
    sup_velocity: R,
    t_final: R,
) -> Result<Range<usize>> {
    let reach = R::of(LOCALIZATION_RADIUS) * epsilon + sup_velocity * t_final;
    let margin = (reach / grid.h()).ceil().as_f64() as usize;
    let n = grid.num_cells();
    if 2 * margin >= n {
        return Err(Error::EmptyWindow);
    }
    Ok(margin..n - margin)
}

/// Build the per-step record used by `scheme::run`.
pub(crate) fn record_step<R: Real>(
    field: &SolutionField<R>,
    prev: Option<&SolutionField<R>>,
    velocity: &VelocityModel<R>,
    lambda: R,
    h: R,
    entropy_c: R,
) -> DiagnosticsRecord<R> {
    let mut rho_min = R::infinity();
    let mut rho_max = R::neg_infinity();
    let mut mass = R::zero();
    for &r in &field.rho {
        rho_min = rho_min.min(r);
        rho_max = rho_max.max(r);
        mass = mass + r;
    }
    mass = mass * h;

    let (tv_time_increment, entropy_pos_rho, entropy_pos_w) = match prev {
        None => (R::zero(), R::zero(), R::zero()),
        Some(p) => {
            let mut inc = R::zero();
            for (&a, &b) in p.w.iter().zip(&field.w) {
                inc = inc + (b - a).abs();
            }
            let e_rho =
                entropy_step_positive(&p.rho, &field.rho, velocity, lambda, h, entropy_c, None);
            let e_w = entropy_step_positive(&p.w, &field.w, velocity, lambda, h, entropy_c, None);
            (inc, e_rho, e_w)
        }
    };

    DiagnosticsRecord {
        n: field.time_index,
        t: field.t,
        rho_min,
        rho_max,
        mass,
        tv_rho: tv_unchecked(&field.rho),
        tv_w: tv_unchecked(&field.w),
        tv_time_increment,
        entropy_pos_rho,
        entropy_pos_w,
    }
}
