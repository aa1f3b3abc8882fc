//! Quadrature weight families {γ_k} approximating the rescaled kernel γ_ε on
//! the mesh, plus runtime checks of the conditions the stability estimates
//! require: nonnegative monotone weights, normalization, discrete convexity,
//! localization, and the first-moment bound Σ k γ_k ≤ c_γ ε/h.
//!
//! Weight sequences are truncated deterministically: compact-support kernels
//! are covered exactly (zero tail); for the exponential kernel the truncation
//! index is the smallest K with closed-form tail e^{−(K+1)h/ε} ≤ `tail_tol`.
//! The retained tail mass is folded into the constant right extension when W
//! is computed, so the effective weights always sum to the analytic total.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelFamily};
use crate::scalar::Real;

/// Default certified truncation tolerance for infinite-support kernels.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Proxy radius for the localization condition: the report sums the weight
/// mass beyond k·h/ε ≥ R and compares against [`LOCALIZATION_TOL`].
pub const LOCALIZATION_RADIUS: f64 = 40.0;
pub const LOCALIZATION_TOL: f64 = 1e-12;

const NORMALIZATION_TOL: f64 = 1e-12;
const CONVEXITY_TOL: f64 = 1e-14;
const MONOTONICITY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightFamily {
    Exact,
    Riemann,
    NormalizedRiemann,
    Geometric,
}

impl std::fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            WeightFamily::Exact => "exact",
            WeightFamily::Riemann => "riemann",
            WeightFamily::NormalizedRiemann => "normalized-riemann",
            WeightFamily::Geometric => "geometric",
        };
        f.write_str(s)
    }
}

/// A truncated weight sequence w_0..w_K with its certified tail mass.
#[derive(Debug, Clone)]
pub struct QuadratureWeights<R> {
    weights: Vec<R>,
    tail_mass: R,
    epsilon: R,
    h: R,
    family: WeightFamily,
    gamma0_parameter: Option<R>,
}

/// Outcome of checking the five weight conditions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeightConditionReport<R> {
    pub nonneg_monotone: bool,
    pub normalized: bool,
    pub convex: bool,
    pub localized_proxy: bool,
    pub moment_bounded: bool,
    /// Σ k w_k · h/ε, to compare against c_γ.
    pub measured_moment_ratio: R,
    /// Most negative discrete second difference w_{k−1}+w_{k+1}−2w_k.
    pub worst_convexity_defect: R,
}

impl<R: Real> WeightConditionReport<R> {
    pub fn all(&self) -> bool {
        self.nonneg_monotone
            && self.normalized
            && self.convex
            && self.localized_proxy
            && self.moment_bounded
    }
}

fn check_positive<R: Real>(field: &'static str, value: R) -> Result<()> {
    if value > R::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            field,
            value: value.as_f64(),
            expected: "(0, inf)",
        })
    }
}

impl<R: Real> QuadratureWeights<R> {
    /// Exact weights w_k = ∫_{−(k+1)h/ε}^{−kh/ε} γ(z) dz. For the exponential
    /// kernel this is the closed form e^{−kh/ε}(1 − e^{−h/ε}).
    pub fn exact(kernel: &Kernel<R>, epsilon: R, h: R, tail_tol: R) -> Result<Self> {
        check_positive("epsilon", epsilon)?;
        check_positive("h", h)?;
        check_positive("tail_tol", tail_tol)?;
        let x = h / epsilon;
        let (weights, tail_mass) = match kernel.support_left() {
            None => {
                debug_assert_eq!(kernel.family(), KernelFamily::Exponential);
                let count = exponential_cell_count(x, tail_tol);
                let factor = R::one() - (-x).exp();
                let weights: Vec<R> = (0..count)
                    .map(|k| (-x * R::of(k as f64)).exp() * factor)
                    .collect();
                let tail = (-x * R::of(count as f64)).exp();
                (weights, tail)
            }
            Some(left) => {
                let span = -left;
                let count = covering_cell_count(span / x);
                let mut weights = Vec::with_capacity(count);
                for k in 0..count {
                    let a = -R::of((k + 1) as f64) * x;
                    let b = -R::of(k as f64) * x;
                    weights.push(kernel.interval_mass(a, b)?);
                }
                (weights, R::zero())
            }
        };
        Ok(QuadratureWeights {
            weights,
            tail_mass,
            epsilon,
            h,
            family: WeightFamily::Exact,
            gamma0_parameter: None,
        })
    }

    /// Unnormalized Riemann weights w̃_k = (h/ε) γ(−kh/ε), with γ(0) taken as
    /// the left limit at k = 0. Their total generally exceeds 1; truncation
    /// tails are kept as-is (no folding into the weights).
    pub fn riemann(kernel: &Kernel<R>, epsilon: R, h: R, tail_tol: R) -> Result<Self> {
        check_positive("epsilon", epsilon)?;
        check_positive("h", h)?;
        check_positive("tail_tol", tail_tol)?;
        let x = h / epsilon;
        let (weights, tail_mass) = match kernel.support_left() {
            None => {
                debug_assert_eq!(kernel.family(), KernelFamily::Exponential);
                let q = (-x).exp();
                // tail after K: (h/ε) q^{K+1} / (1 − q)
                let mut count = exponential_cell_count(x, tail_tol);
                let tail_at = |c: usize| x * (-x * R::of(c as f64)).exp() / (R::one() - q);
                while tail_at(count) > tail_tol {
                    count += 1;
                }
                let weights: Vec<R> =
                    (0..count).map(|k| x * (-x * R::of(k as f64)).exp()).collect();
                (weights, tail_at(count))
            }
            Some(left) => {
                // include the sample at the support boundary (value 0 there)
                let span = -left;
                let last = (span / x + R::of(1e-9)).floor().as_f64() as usize;
                let weights: Vec<R> = (0..=last)
                    .map(|k| x * kernel.evaluate(-R::of(k as f64) * x))
                    .collect();
                (weights, R::zero())
            }
        };
        Ok(QuadratureWeights {
            weights,
            tail_mass,
            epsilon,
            h,
            family: WeightFamily::Riemann,
            gamma0_parameter: None,
        })
    }

    /// Riemann weights divided by their tail-corrected total, so that
    /// Σ w_k + tail_mass = 1.
    pub fn normalized_riemann(kernel: &Kernel<R>, epsilon: R, h: R, tail_tol: R) -> Result<Self> {
        let raw = Self::riemann(kernel, epsilon, h, tail_tol)?;
        let total = raw.total();
        if !(total > R::zero()) {
            return Err(Error::DegenerateKernel);
        }
        Ok(QuadratureWeights {
            weights: raw.weights.iter().map(|&w| w / total).collect(),
            tail_mass: raw.tail_mass / total,
            epsilon,
            h,
            family: WeightFamily::NormalizedRiemann,
            gamma0_parameter: None,
        })
    }

    /// Geometric weights w_k = γ₀ (1−γ₀)^k with unit ε and h; with
    /// γ₀ = 1 − e^{−h/ε} these reproduce the exact exponential weights.
    pub fn geometric(gamma0: R, tail_tol: R) -> Result<Self> {
        Self::geometric_scaled(gamma0, R::one(), R::one(), tail_tol)
    }

    /// Geometric weights carrying an explicit (ε, h) scale for condition
    /// reports and deviation bounds.
    pub fn geometric_scaled(gamma0: R, epsilon: R, h: R, tail_tol: R) -> Result<Self> {
        if !(gamma0 > R::zero() && gamma0 < R::one()) {
            return Err(Error::OutOfRange {
                field: "gamma0",
                value: gamma0.as_f64(),
                expected: "(0, 1)",
            });
        }
        check_positive("epsilon", epsilon)?;
        check_positive("h", h)?;
        check_positive("tail_tol", tail_tol)?;
        let q = R::one() - gamma0;
        let mut count = 1usize.max((tail_tol.ln() / q.ln()).ceil().as_f64() as usize);
        while q.powi(count as i32) > tail_tol {
            count += 1;
        }
        while count > 1 && q.powi(count as i32 - 1) <= tail_tol {
            count -= 1;
        }
        // successive multiplication keeps the recursion w_{k+1} = q w_k exact
        let mut weights = Vec::with_capacity(count);
        let mut w = gamma0;
        for _ in 0..count {
            weights.push(w);
            w = w * q;
        }
        Ok(QuadratureWeights {
            weights,
            tail_mass: q.powi(count as i32),
            epsilon,
            h,
            family: WeightFamily::Geometric,
            gamma0_parameter: Some(gamma0),
        })
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn tail_mass(&self) -> R {
        self.tail_mass
    }

    pub fn epsilon(&self) -> R {
        self.epsilon
    }

    pub fn h(&self) -> R {
        self.h
    }

    pub fn family(&self) -> WeightFamily {
        self.family
    }

    pub fn gamma0_parameter(&self) -> Option<R> {
        self.gamma0_parameter
    }

    /// Σ w_k + tail_mass, accumulated in ascending k.
    pub fn total(&self) -> R {
        self.weights.iter().copied().sum::<R>() + self.tail_mass
    }

    /// Check the five weight conditions against the supplied moment constant.
    pub fn verify_conditions(&self, c_gamma: R) -> WeightConditionReport<R> {
        let w = &self.weights;
        let tol_mono = R::of(MONOTONICITY_TOL);

        let mut nonneg_monotone = w.iter().all(|&x| x >= -tol_mono);
        for pair in w.windows(2) {
            if pair[1] - pair[0] > tol_mono {
                nonneg_monotone = false;
            }
        }
        // the sequence continues with zeros once the support is covered
        if self.tail_mass == R::zero() {
            if let Some(&last) = w.last() {
                if -last > tol_mono {
                    nonneg_monotone = false;
                }
            }
        }

        let normalized = (self.total() - R::one()).abs() <= R::of(NORMALIZATION_TOL);

        // Convexity of the infinite sequence: when the tail is exactly zero,
        // extend by two zero entries so the boundary mismatch at the support
        // edge is visible; a positive tail means the sequence keeps decaying
        // and only the stored interior is checked.
        let mut extended: Vec<R> = w.clone();
        if self.tail_mass == R::zero() {
            extended.push(R::zero());
            extended.push(R::zero());
        }
        let mut worst_convexity_defect = R::infinity();
        for t in extended.windows(3) {
            let d = t[0] + t[2] - R::of(2.0) * t[1];
            if d < worst_convexity_defect {
                worst_convexity_defect = d;
            }
        }
        if !worst_convexity_defect.is_finite() {
            worst_convexity_defect = R::zero();
        }
        let convex = worst_convexity_defect >= -R::of(CONVEXITY_TOL);

        let ratio_scale = self.h / self.epsilon;
        let measured_moment_ratio = w
            .iter()
            .enumerate()
            .map(|(k, &x)| R::of(k as f64) * x)
            .sum::<R>()
            * ratio_scale;
        let moment_bounded = measured_moment_ratio <= c_gamma + R::of(NORMALIZATION_TOL);

        let radius = R::of(LOCALIZATION_RADIUS);
        let far_mass = w
            .iter()
            .enumerate()
            .filter(|(k, _)| R::of(*k as f64) * ratio_scale >= radius)
            .map(|(_, &x)| x)
            .sum::<R>()
            + self.tail_mass;
        let localized_proxy = far_mass <= R::of(LOCALIZATION_TOL);

        WeightConditionReport {
            nonneg_monotone,
            normalized,
            convex,
            localized_proxy,
            moment_bounded,
            measured_moment_ratio,
            worst_convexity_defect,
        }
    }
}

/// Number of cells needed to cover `span_cells` mesh cells of kernel support,
/// robust to floating-point ties.
fn covering_cell_count<R: Real>(span_cells: R) -> usize {
    1usize.max((span_cells - R::of(1e-9)).ceil().as_f64() as usize)
}

/// Smallest count with e^{−count·x} ≤ tail_tol.
fn exponential_cell_count<R: Real>(x: R, tail_tol: R) -> usize {
    let mut count = 1usize.max((-tail_tol.ln() / x).ceil().as_f64() as usize);
    while (-x * R::of(count as f64)).exp() > tail_tol {
        count += 1;
    }
    while count > 1 && (-x * R::of((count - 1) as f64)).exp() <= tail_tol {
        count -= 1;
    }
    count
}
