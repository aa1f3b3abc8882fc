//! Reference entropy solutions of the local law ∂t ρ + ∂x(ρ V(ρ)) = 0:
//! the local monotone upwind scheme on refined meshes, and closed-form
//! Riemann solutions for the Greenshields flux f(ρ) = ρ(1 − ρ).

use crate::error::{Error, Result};
use crate::initial::InitialData;
use crate::scalar::Real;
use crate::scheme::{
    discretize_initial, max_cfl_ratio, CflVariant, GridSpec, VelocityFamily, VelocityModel,
};

/// The local limit of the nonlocal scheme:
/// ρ_j^{n+1} = ρ_j^n + λ (ρ_{j−1}^n V(ρ_j^n) − ρ_j^n V(ρ_{j+1}^n)),
/// a monotone scheme under the max-principle CFL (validated at construction).
#[derive(Debug, Clone)]
pub struct LocalScheme<R> {
    velocity: VelocityModel<R>,
    lambda: R,
}

impl<R: Real> LocalScheme<R> {
    pub fn new(velocity: VelocityModel<R>, lambda: R) -> Result<Self> {
        let max_ratio = max_cfl_ratio(&velocity, CflVariant::MaxPrinciple);
        if !(lambda > R::zero()) || lambda > max_ratio * (R::one() + R::of(1e-12)) {
            return Err(Error::CflViolation {
                lambda: lambda.as_f64(),
                max_ratio: max_ratio.as_f64(),
                velocity: velocity.family().to_string(),
                variant: CflVariant::MaxPrinciple.to_string(),
            });
        }
        Ok(LocalScheme { velocity, lambda })
    }

    pub fn velocity(&self) -> &VelocityModel<R> {
        &self.velocity
    }

    pub fn lambda(&self) -> R {
        self.lambda
    }

    /// One step with constant extension at both boundaries. The arithmetic
    /// mirrors `scheme::step` exactly so the local limit is bit-identical.
    pub fn step(&self, rho: &[R]) -> Vec<R> {
        let n = rho.len();
        let jl = n - 1;
        let vel: Vec<R> = rho.iter().map(|&r| self.velocity.eval(r)).collect();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let upstream = rho[j.saturating_sub(1)];
            let v_in = vel[j];
            let v_out = vel[(j + 1).min(jl)];
            out.push(rho[j] + self.lambda * (upstream * v_in - rho[j] * v_out));
        }
        out
    }
}

/// Self-similar entropy solution of the Riemann problem for f(ρ) = ρ(1 − ρ):
/// a shock at speed 1 − ρ_L − ρ_R when ρ_L < ρ_R, a centered rarefaction fan
/// ρ = (1 − x/t)/2 when ρ_L > ρ_R.
#[derive(Debug, Clone, Copy)]
pub struct ExactRiemann<R> {
    rho_l: R,
    rho_r: R,
}

impl<R: Real> ExactRiemann<R> {
    pub fn new(rho_l: R, rho_r: R) -> Result<Self> {
        for (field, v) in [("rho_l", rho_l), ("rho_r", rho_r)] {
            if !(v >= R::zero() && v <= R::one()) {
                return Err(Error::OutOfRange {
                    field,
                    value: v.as_f64(),
                    expected: "[0, 1]",
                });
            }
        }
        Ok(ExactRiemann { rho_l, rho_r })
    }

    pub fn states(&self) -> (R, R) {
        (self.rho_l, self.rho_r)
    }

    /// Rankine-Hugoniot speed for the shock case.
    pub fn shock_speed(&self) -> R {
        R::one() - self.rho_l - self.rho_r
    }

    pub fn value(&self, t: R, x: R) -> R {
        let (l, r) = (self.rho_l, self.rho_r);
        if l == r {
            return l;
        }
        if t <= R::zero() {
            return if x < R::zero() { l } else { r };
        }
        if l < r {
            if x < self.shock_speed() * t {
                l
            } else {
                r
            }
        } else {
            let xi = x / t;
            let edge_l = R::one() - R::of(2.0) * l;
            let edge_r = R::one() - R::of(2.0) * r;
            if xi <= edge_l {
                l
            } else if xi >= edge_r {
                r
            } else {
                (R::one() - xi) / R::of(2.0)
            }
        }
    }

    /// Exact average of ρ(t, ·) over [a, b] by closed-form integration of the
    /// piecewise profile.
    pub fn cell_average(&self, t: R, a: R, b: R) -> R {
        let (l, r) = (self.rho_l, self.rho_r);
        let width = b - a;
        if l == r {
            return l;
        }
        if t <= R::zero() || l < r {
            // jump profile: at x = st for the shock, at x = 0 initially
            let p = if t <= R::zero() {
                R::zero()
            } else {
                self.shock_speed() * t
            };
            let p = p.max(a).min(b);
            return (l * (p - a) + r * (b - p)) / width;
        }
        // rarefaction fan between the characteristic speeds
        let edge_l = (R::one() - R::of(2.0) * l) * t;
        let edge_r = (R::one() - R::of(2.0) * r) * t;
        let half = R::of(0.5);
        // antiderivative of (1 − x/t)/2
        let fan = |x: R| half * (x - x * x / (R::of(2.0) * t));
        let lo = a.max(edge_l).min(edge_r).max(a).min(b);
        let hi = b.min(edge_r).max(edge_l).max(a).min(b);
        let mut acc = R::zero();
        if lo > a {
            acc = acc + l * (lo - a);
        }
        if hi > lo {
            acc = acc + fan(hi) - fan(lo);
        }
        if b > hi {
            acc = acc + r * (b - hi);
        }
        acc / width
    }
}

/// Fine-mesh numerical reference: the local scheme run at h/refine, block
/// averaged back onto the target grid.
#[derive(Debug, Clone)]
pub struct FineMeshReference<R> {
    data: InitialData<R>,
    scheme: LocalScheme<R>,
    fine_grid: GridSpec<R>,
    refine: usize,
}

impl<R: Real> FineMeshReference<R> {
    pub fn refine(&self) -> usize {
        self.refine
    }

    pub fn h_ref(&self) -> R {
        self.fine_grid.h()
    }

    fn averages(&self, t: R, target: &GridSpec<R>) -> Vec<R> {
        assert_eq!(
            target.num_cells() * self.refine,
            self.fine_grid.num_cells(),
            "fine-mesh reference built for a different target grid"
        );
        let mut rho = discretize_initial(&self.data, &self.fine_grid)
            .expect("reference initial data validated at construction");
        let tau = self.scheme.lambda() * self.fine_grid.h();
        let steps = ((t / tau) + R::of(1e-9)).floor().as_f64() as usize;
        for _ in 0..steps {
            rho = self.scheme.step(&rho);
        }
        let scale = R::of(self.refine as f64);
        (0..target.num_cells())
            .map(|j| {
                rho[j * self.refine..(j + 1) * self.refine]
                    .iter()
                    .copied()
                    .sum::<R>()
                    / scale
            })
            .collect()
    }
}

/// A reference entropy solution, exact or numerically refined.
#[derive(Debug, Clone)]
pub enum ReferenceSolution<R> {
    ExactRiemann(ExactRiemann<R>),
    FineMesh(FineMeshReference<R>),
}

impl<R: Real> ReferenceSolution<R> {
    /// Cell averages of ρ(t, ·) on the target grid.
    pub fn cell_averages(&self, t: R, grid: &GridSpec<R>) -> Vec<R> {
        match self {
            ReferenceSolution::ExactRiemann(er) => (0..grid.num_cells())
                .map(|j| er.cell_average(t, grid.cell_left(j), grid.cell_right(j)))
                .collect(),
            ReferenceSolution::FineMesh(fm) => fm.averages(t, grid),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ReferenceSolution::ExactRiemann(_) => "exact-riemann",
            ReferenceSolution::FineMesh(_) => "fine-mesh",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ReferenceSolution::ExactRiemann(er) => {
                let (l, r) = er.states();
                format!("exact-riemann(rho_l={}, rho_r={})", l, r)
            }
            ReferenceSolution::FineMesh(fm) => {
                format!("fine-mesh(refine={}, h_ref={})", fm.refine(), fm.h_ref())
            }
        }
    }
}

/// Pick the reference for the given data and velocity: the closed-form
/// Riemann solution for Riemann data with the (possibly clipped) Greenshields
/// velocity — clipping never activates on [0, 1] where the entropy solution
/// lives — and the fine-mesh scheme otherwise.
pub fn reference_solution<R: Real>(
    data: &InitialData<R>,
    velocity: &VelocityModel<R>,
    grid: &GridSpec<R>,
    refine: usize,
    lambda: R,
) -> Result<ReferenceSolution<R>> {
    if refine < 2 {
        return Err(Error::OutOfRange {
            field: "refine",
            value: refine as f64,
            expected: "[2, inf)",
        });
    }
    let greenshields = matches!(
        velocity.family(),
        VelocityFamily::Greenshields | VelocityFamily::ClippedGreenshields
    );
    let riemann_states = match data {
        InitialData::RiemannShock => Some((R::zero(), R::of(0.7))),
        InitialData::RiemannRarefaction => Some((R::of(0.65), R::of(0.35))),
        _ => None,
    };
    if let (true, Some((l, r))) = (greenshields, riemann_states) {
        return Ok(ReferenceSolution::ExactRiemann(ExactRiemann::new(l, r)?));
    }
    let fine_grid = GridSpec::new(grid.x_min(), grid.x_max(), grid.h() / R::of(refine as f64))?;
    Ok(ReferenceSolution::FineMesh(FineMeshReference {
        data: data.clone(),
        scheme: LocalScheme::new(velocity.clone(), lambda)?,
        fine_grid,
        refine,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;
    use crate::quadrature::QuadratureWeights;
    use crate::scheme::{self, CflVariant, SchemeConfig, SolutionField};

    #[test]
    fn local_step_constant_and_perturbed() {
        let scheme = LocalScheme::new(VelocityModel::<f64>::greenshields(), 0.25).unwrap();
        let constant = vec![0.4f64; 12];
        assert_eq!(scheme.step(&constant), constant);

        let mut rho = vec![0.4f64; 12];
        rho[6] = 0.6;
        let next = scheme.step(&rho);
        assert!((next[6] - 0.55).abs() < 1e-15);
    }

    #[test]
    fn local_step_rejects_bad_cfl() {
        let err = LocalScheme::new(VelocityModel::<f64>::krystek(), 0.25).unwrap_err();
        assert_eq!(err.code(), "cfl-violation");
    }

    #[test]
    fn local_limit_matches_nonlocal_scheme_exactly() {
        // ε ≤ h with a compactly supported kernel: W_j = ρ_j and the two
        // schemes produce identical bits
        let grid = GridSpec::new(-1.0, 1.0, 0.02).unwrap();
        let weights = QuadratureWeights::exact(&Kernel::linear(), 0.02, 0.02, 1e-12).unwrap();
        let config = SchemeConfig::new(
            grid,
            weights,
            VelocityModel::greenshields(),
            0.25,
            0.02,
            CflVariant::Main,
        )
        .unwrap();
        let local = LocalScheme::new(VelocityModel::<f64>::greenshields(), 0.25).unwrap();

        let mut rho: Vec<f64> = (0..100)
            .map(|j| 0.5 + 0.5 * ((j as f64) * 0.37).sin().powi(2))
            .collect();
        let mut field = SolutionField::initial(&config, rho.clone());
        for _ in 0..50 {
            field = scheme::step(&field, &config);
            rho = local.step(&rho);
            assert_eq!(field.rho, rho);
        }
    }

    #[test]
    fn exact_riemann_wave_structure() {
        let shock = ExactRiemann::new(0.0f64, 0.7).unwrap();
        assert!((shock.shock_speed() - 0.3).abs() < 1e-15);
        assert_eq!(shock.value(1.0, 0.29), 0.0);
        assert_eq!(shock.value(1.0, 0.31), 0.7);

        let fan = ExactRiemann::new(0.65f64, 0.35).unwrap();
        assert!((fan.value(1.0, 0.0) - 0.5).abs() < 1e-15);
        assert_eq!(fan.value(1.0, -0.31), 0.65);
        assert_eq!(fan.value(1.0, 0.31), 0.35);
        assert!((fan.value(2.0, 0.2) - 0.45).abs() < 1e-15);

        let flat = ExactRiemann::new(0.3f64, 0.3).unwrap();
        assert_eq!(flat.value(0.5, -3.0), 0.3);

        assert!(ExactRiemann::new(-0.1f64, 0.5).is_err());
        assert!(ExactRiemann::new(0.1f64, 1.5).is_err());
    }

    #[test]
    fn exact_riemann_averages_match_brute_force() {
        // cells of width 0.1 align with the shock at x = 0.3 and the fan
        // edges at ±0.3, so midpoint sampling resolves every cell
        let samples = 10_000;
        for er in [
            ExactRiemann::new(0.0f64, 0.7).unwrap(),
            ExactRiemann::new(0.65f64, 0.35).unwrap(),
        ] {
            for j in 0..20 {
                let a = -1.0 + 0.1 * j as f64;
                let b = a + 0.1;
                let closed = er.cell_average(1.0, a, b);
                let mut brute = 0.0;
                let w = (b - a) / samples as f64;
                for i in 0..samples {
                    brute += er.value(1.0, a + (i as f64 + 0.5) * w);
                }
                brute /= samples as f64;
                assert!(
                    (closed - brute).abs() < 1e-8,
                    "cell [{a},{b}]: {closed} vs {brute}"
                );
            }
        }
    }

    #[test]
    fn exact_riemann_average_at_time_zero() {
        let er = ExactRiemann::new(0.0f64, 0.7).unwrap();
        assert!((er.cell_average(0.0, -0.05, 0.05) - 0.35).abs() < 1e-15);
    }

    #[test]
    fn dispatch_rules() {
        let grid = GridSpec::new(-1.0, 1.0, 0.1).unwrap();
        let shock = InitialData::RiemannShock;
        let green = VelocityModel::<f64>::greenshields();
        let clipped = VelocityModel::<f64>::clipped_greenshields();
        let krystek = VelocityModel::<f64>::krystek();

        let r = reference_solution(&shock, &green, &grid, 8, 0.25).unwrap();
        assert_eq!(r.kind(), "exact-riemann");
        let r = reference_solution(&shock, &clipped, &grid, 8, 0.25).unwrap();
        assert_eq!(r.kind(), "exact-riemann");
        let r = reference_solution(&InitialData::BellShaped, &green, &grid, 8, 0.25).unwrap();
        assert_eq!(r.kind(), "fine-mesh");
        let r = reference_solution(&shock, &krystek, &grid, 8, 0.1).unwrap();
        assert_eq!(r.kind(), "fine-mesh");

        assert!(reference_solution(&shock, &green, &grid, 1, 0.25).is_err());
    }

    #[test]
    fn fine_mesh_reference_converges_under_refinement() {
        // smooth regime (bell data before shock formation): halving h_ref
        // should roughly halve the reference change
        let grid = GridSpec::new(-1.0, 1.0, 0.01).unwrap();
        let green = VelocityModel::<f64>::greenshields();
        let data = InitialData::BellShaped;
        let t = 0.05;
        let averages: Vec<Vec<f64>> = [2usize, 4, 8]
            .iter()
            .map(|&refine| {
                reference_solution(&data, &green, &grid, refine, 0.25)
                    .unwrap()
                    .cell_averages(t, &grid)
            })
            .collect();
        let d = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() * 0.01
        };
        let d24 = d(&averages[0], &averages[1]);
        let d48 = d(&averages[1], &averages[2]);
        assert!(
            d24 / d48 >= 1.5,
            "refinement ratio too small: {d24} / {d48}"
        );
    }
}
