//! Solver laboratory for nonlocal conservation laws of LWR-traffic type,
//!
//!   ∂t ρ + ∂x (ρ V(W)) = 0,   W = ρ ∗ γ_ε,
//!
//! discretized with an upwind Godunov-type finite-volume scheme whose nonlocal
//! impact W_j = Σ_k γ_k ρ_{j+k} uses quadrature weights built from a one-sided
//! kernel γ supported in (−∞, 0].
//!
//! The crate provides:
//! - [`kernels`]: kernel families with exact interval masses and moments;
//! - [`quadrature`]: weight families (exact, Riemann, normalized Riemann,
//!   geometric) and checks of the weight conditions the stability theory needs;
//! - [`scheme`]: grids, velocity models, CFL handling, the time stepper;
//! - [`reference`]: local-limit monotone scheme and exact Riemann solutions;
//! - [`diagnostics`]: maximum-principle / TV / entropy-residual metrics;
//! - [`harness`]: convergence-rate sweeps, the TV-increase study, and the
//!   entropy-violation table.
//!
//! All numerics are generic over the scalar type through [`scalar::Real`];
//! `f64` aliases are re-exported at the crate root.

// Validation guards are written as `!(x > lo)` on purpose: the negated form
// rejects NaN, which `x <= lo` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod initial;
pub mod kernels;
pub mod quadrature;
pub mod reference;
pub mod scalar;
pub mod scheme;

pub use error::Error;
pub use scalar::Real;

/// `f64` aliases for the main domain types.
pub type Kernel64 = kernels::Kernel<f64>;
pub type QuadratureWeights64 = quadrature::QuadratureWeights<f64>;
pub type GridSpec64 = scheme::GridSpec<f64>;
pub type VelocityModel64 = scheme::VelocityModel<f64>;
pub type SchemeConfig64 = scheme::SchemeConfig<f64>;
pub type SolutionField64 = scheme::SolutionField<f64>;
pub type InitialData64 = initial::InitialData<f64>;
pub type ReferenceSolution64 = reference::ReferenceSolution<f64>;
pub type StudySpec64 = harness::StudySpec<f64>;
pub type StudyResult64 = harness::StudyResult<f64>;
