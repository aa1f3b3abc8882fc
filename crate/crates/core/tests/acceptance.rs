//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `--nocapture` to see them).
//!
//! Criterion 9 is implemented exactly as stated and is expected to fail: the
//! measured shock error decays at rate h while the theoretical envelope
//! decays at rate sqrt(h), so the per-cell envelope constant cannot be
//! stable. See the test body for the numbers.

use std::ops::Range;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nlcl::diagnostics::{nonlocal_entropy_residual_w, tv, w_rho_deviation};
use nlcl::harness::{
    run_convergence_study, run_entropy_table, run_quadrature_comparison, run_tv_study, LimitPath,
    StudyResult, StudySpec,
};
use nlcl::initial::InitialData;
use nlcl::kernels::Kernel;
use nlcl::quadrature::{QuadratureWeights, WeightFamily, DEFAULT_TAIL_TOL};
use nlcl::reference::LocalScheme;
use nlcl::scheme::{
    discretize_initial, step, CflVariant, GridSpec, SchemeConfig, SolutionField, VelocityModel,
};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion} [{}] {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn exact_weights(kernel: &Kernel<f64>, eps: f64, h: f64) -> QuadratureWeights<f64> {
    QuadratureWeights::exact(kernel, eps, h, DEFAULT_TAIL_TOL).unwrap()
}

#[test]
fn criterion_1_local_limit_equivalence() {
    let started = Instant::now();
    let grid = GridSpec::new(-2.0, 2.0, 1e-3).unwrap();
    let initial = discretize_initial(&InitialData::RiemannShock, &grid).unwrap();
    let local = LocalScheme::new(VelocityModel::<f64>::greenshields(), 0.25).unwrap();

    let mut worst: f64 = 0.0;
    for kernel in [Kernel::constant(), Kernel::linear()] {
        let eps = 5e-4; // ε ≤ h: the nonlocal scheme degenerates to the local one
        let config = SchemeConfig::new(
            grid.clone(),
            exact_weights(&kernel, eps, 1e-3),
            VelocityModel::greenshields(),
            0.25,
            eps,
            CflVariant::Main,
        )
        .unwrap();
        let mut field = SolutionField::initial(&config, initial.clone());
        let mut rho = initial.clone();
        for _ in 0..4000 {
            field = step(&field, &config);
            rho = local.step(&rho);
        }
        let diff = field
            .rho
            .iter()
            .zip(&rho)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        worst = worst.max(diff);
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst <= 1e-14 && elapsed < 10.0;
    report(
        "1 local-limit-equivalence",
        pass,
        &format!("max elementwise diff {worst:.2e} over 4000 steps in {elapsed:.2}s"),
    );
    assert!(pass, "diff {worst:.2e}, elapsed {elapsed:.2}s");
}

static SHOCK_STUDY: OnceLock<StudyResult<f64>> = OnceLock::new();

/// Criterion-2 sweep, shared with criterion 9: Riemann shock, Greenshields,
/// linear kernel, exact weights, λ = 0.25, ε = h, T = 1, target W.
fn shock_study() -> &'static StudyResult<f64> {
    SHOCK_STUDY.get_or_init(|| {
        let spec = StudySpec::new(
            InitialData::RiemannShock,
            Kernel::linear(),
            VelocityModel::greenshields(),
            LimitPath::EpsEqualsH,
        );
        run_convergence_study(&spec).unwrap()
    })
}

#[test]
fn criterion_2_shock_convergence_rate() {
    let result = shock_study();
    let slope = result.fitted_slope;
    let pass = (0.85..=1.15).contains(&slope);
    report(
        "2 shock-rate-eps=h",
        pass,
        &format!("fitted slope {slope:.4} (target [0.85, 1.15])"),
    );
    assert!(pass, "slope {slope}");
}

#[test]
fn criterion_3_sqrt_path_rate() {
    let spec = StudySpec::new(
        InitialData::RiemannShock,
        Kernel::linear(),
        VelocityModel::greenshields(),
        LimitPath::EpsEqualsSqrtH,
    );
    let result = run_convergence_study(&spec).unwrap();
    let slope = result.fitted_slope;
    let pass = (0.35..=0.65).contains(&slope);
    report(
        "3 shock-rate-eps=sqrt(h)",
        pass,
        &format!("fitted slope {slope:.4} (target [0.35, 0.65])"),
    );
    assert!(pass, "slope {slope}");
}

#[test]
fn criterion_4_rarefaction_rate_bracket() {
    let spec = StudySpec::new(
        InitialData::RiemannRarefaction,
        Kernel::linear(),
        VelocityModel::greenshields(),
        LimitPath::EpsEqualsH,
    );
    let result = run_convergence_study(&spec).unwrap();
    let slope = result.fitted_slope;
    let pass = (0.4..=1.1).contains(&slope);
    report(
        "4 rarefaction-rate-eps=h",
        pass,
        &format!("fitted slope {slope:.4} (target [0.4, 1.1])"),
    );
    assert!(pass, "slope {slope}");
}

#[test]
fn criterion_5_normalization_failure() {
    let spec = StudySpec::new(
        InitialData::RiemannShock,
        Kernel::linear(),
        VelocityModel::clipped_greenshields(),
        LimitPath::EpsEqualsH,
    );
    let results = run_quadrature_comparison(
        &spec,
        &[
            WeightFamily::Exact,
            WeightFamily::Riemann,
            WeightFamily::NormalizedRiemann,
        ],
    )
    .unwrap();
    let errors = |i: usize| -> Vec<f64> { results[i].rows.iter().map(|r| r.l1_error).collect() };
    let riemann = errors(1);
    let stagnates = riemann.last().unwrap() >= &(0.5 * riemann[0]);
    let slope_gap = (results[2].fitted_slope - results[0].fitted_slope).abs();
    let aligned = slope_gap <= 0.1;
    let pass = stagnates && aligned;
    report(
        "5 normalization-failure",
        pass,
        &format!(
            "riemann errors {:.3e} -> {:.3e} (stagnation), normalized vs exact slope gap {slope_gap:.2e}",
            riemann[0],
            riemann.last().unwrap()
        ),
    );
    assert!(pass, "stagnates={stagnates}, slope gap {slope_gap}");
}

#[test]
fn criterion_6_entropy_table() {
    let epsilons = [2e-1f64, 2e-2, 2e-3];
    let kernels = [Kernel::exponential(), Kernel::linear(), Kernel::constant()];
    let data = [
        InitialData::RiemannShock,
        InitialData::RiemannRarefaction,
        InitialData::BellShaped,
    ];
    let table = run_entropy_table(&epsilons, 2e-3, &kernels, &data, 0.5, 1.0).unwrap();

    // local limit row: ε = h = 2e-3 with compact kernels gives exact zeros
    let mut zeros_ok = true;
    for (ki, _) in kernels.iter().enumerate().skip(1) {
        for di in 0..data.len() {
            let entry = table.get(2, ki, di);
            if entry.e_rho.abs() > 1e-12 || entry.e_w.abs() > 1e-12 {
                zeros_ok = false;
            }
        }
    }

    // published anchors for the exponential kernel, shock data, ε = 0.2
    let anchor = table.get(0, 0, 0);
    let rho_ok = (anchor.e_rho - 8.3e-3).abs() <= 0.2 * 8.3e-3;
    let w_ok = (anchor.e_w - 2.2e-2).abs() <= 0.2 * 2.2e-2;

    // every column nonincreasing as ε decreases
    let mut monotone = true;
    for ki in 0..kernels.len() {
        for di in 0..data.len() {
            for ei in 1..epsilons.len() {
                let prev = table.get(ei - 1, ki, di);
                let cur = table.get(ei, ki, di);
                if cur.e_rho > prev.e_rho + 1e-12 || cur.e_w > prev.e_w + 1e-12 {
                    monotone = false;
                }
            }
        }
    }

    let pass = zeros_ok && rho_ok && w_ok && monotone;
    report(
        "6 entropy-table",
        pass,
        &format!(
            "exp/shock ε=0.2: E_rho {:.3e} (ref 8.3e-3), E_w {:.3e} (ref 2.2e-2); \
             local-limit zeros {}; columns monotone {}",
            anchor.e_rho, anchor.e_w, zeros_ok, monotone
        ),
    );
    assert!(pass, "zeros={zeros_ok} rho={rho_ok} w={w_ok} monotone={monotone}");
}

#[test]
fn criterion_7_tv_behavior() {
    let mut pass = true;
    let mut details = Vec::new();
    for kernel in [Kernel::linear(), Kernel::constant(), Kernel::exponential()] {
        let series = run_tv_study(&[0.2], 2e-3, &kernel, 1.6).unwrap();
        let s = &series[0];
        let tv_max = s.tv_rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let tv_final = *s.tv_rho.last().unwrap();
        let rose = tv_max > 2.0;
        let settled = tv_final < 1.05;
        // The compact kernels satisfy the strict per-step TVD bound; the
        // exponential kernel's unbounded support leaks an e^{-dist/ε}-sized
        // boundary term on this domain (margin ≈ 6.5ε), so only a
        // halo-limited bound is meaningful there.
        let tvd_bound = if kernel.support_left().is_some() {
            1e-10
        } else {
            1e-6
        };
        let tvd = s.max_tv_w_step_increase <= tvd_bound;
        pass &= rose && settled && tvd;
        details.push(format!(
            "{}: max {:.3}, final {:.3}, max W-step-inc {:.1e}",
            kernel.family(),
            tv_max,
            tv_final,
            s.max_tv_w_step_increase
        ));
    }
    report("7 tv-behavior", pass, &details.join("; "));
    assert!(pass, "{details:?}");
}

/// Random BV profile in [0, 1]: a few dozen plateaus of random heights.
fn random_bv_profile(rng: &mut ChaCha8Rng, cells: usize) -> Vec<f64> {
    let mut value: f64 = rng.gen_range(0.0..=1.0);
    (0..cells)
        .map(|_| {
            if rng.gen_bool(0.3) {
                value = rng.gen_range(0.0..=1.0);
            }
            value
        })
        .collect()
}

#[test]
fn criterion_8a_maximum_principle_and_w_bounds() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let grid = GridSpec::new(0.0, 0.6, 0.01).unwrap();
    let kernels = [Kernel::exponential(), Kernel::linear(), Kernel::constant()];
    let velocity = VelocityModel::greenshields();

    let mut worst_rho: f64 = 0.0;
    let mut worst_w: f64 = 0.0;
    for trial in 0..1000 {
        let kernel = &kernels[trial % kernels.len()];
        let eps = 0.01 * rng.gen_range(1.0..20.0);
        let config = SchemeConfig::new(
            grid.clone(),
            exact_weights(kernel, eps, 0.01),
            velocity.clone(),
            0.45,
            eps,
            CflVariant::MaxPrinciple,
        )
        .unwrap();
        let rho0 = random_bv_profile(&mut rng, grid.num_cells());
        let lo = rho0.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = rho0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut field = SolutionField::initial(&config, rho0);
        for _ in 0..5 {
            field = step(&field, &config);
            for &r in &field.rho {
                worst_rho = worst_rho.max((lo - r).max(r - hi));
            }
            for &w in &field.w {
                worst_w = worst_w.max((lo - w).max(w - hi));
            }
        }
    }
    let pass = worst_rho <= 1e-12 && worst_w <= 1e-12;
    report(
        "8a maximum-principle+w-bounds",
        pass,
        &format!(
            "1000 random BV data: worst rho excursion {worst_rho:.2e}, worst W excursion \
             {worst_w:.2e} in {:.1}s",
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(pass, "rho {worst_rho:.2e}, W {worst_w:.2e}");
    assert!(started.elapsed().as_secs_f64() < 60.0);
}

/// Random data that varies only inside the central region, used by the TVD
/// suites so the boundary halo stays dead.
fn centered_profile(rng: &mut ChaCha8Rng, cells: usize, active: Range<usize>) -> Vec<f64> {
    let baseline = 0.3;
    let mut value = baseline;
    (0..cells)
        .map(|j| {
            if active.contains(&j) {
                if rng.gen_bool(0.25) {
                    value = rng.gen_range(0.0..=1.0);
                }
                value
            } else {
                value = baseline;
                baseline
            }
        })
        .collect()
}

#[test]
fn criterion_8cd_spatial_tvd_and_temporal_bound() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = GridSpec::new(0.0, 4.0, 0.01).unwrap();
    let cells = grid.num_cells();
    let velocity = VelocityModel::<f64>::greenshields();
    let lambda = 0.3; // Main CFL for Greenshields: λ ≤ 1/3
    let steps = 20;

    let mut worst_tvd: f64 = f64::NEG_INFINITY;
    let mut worst_temporal: f64 = f64::NEG_INFINITY;
    for trial in 0..50 {
        // convex kernels only; margin 150 cells ≥ 40ε + ‖V‖T
        let kernel = if trial % 2 == 0 {
            Kernel::exponential()
        } else {
            Kernel::linear()
        };
        let eps = 0.01 * rng.gen_range(1.0..3.0);
        let config = SchemeConfig::new(
            grid.clone(),
            exact_weights(&kernel, eps, 0.01),
            velocity.clone(),
            lambda,
            eps,
            CflVariant::Main,
        )
        .unwrap();
        let rho0 = centered_profile(&mut rng, cells, 150..250);
        let tv0 = tv(&rho0, 0..cells).unwrap();
        let mut field = SolutionField::initial(&config, rho0);
        let mut tv_w_prev = tv(&field.w, 0..cells).unwrap();
        worst_tvd = worst_tvd.max(tv_w_prev - tv0);
        let temporal_bound = lambda * (velocity.sup_norm() + velocity.lip_norm()) * tv0;
        for _ in 0..steps {
            let next = step(&field, &config);
            let tv_w = tv(&next.w, 0..cells).unwrap();
            worst_tvd = worst_tvd.max(tv_w - tv_w_prev);
            let increment: f64 = next
                .w
                .iter()
                .zip(&field.w)
                .map(|(a, b)| (a - b).abs())
                .sum();
            worst_temporal = worst_temporal.max(increment - temporal_bound);
            tv_w_prev = tv_w;
            field = next;
        }
    }
    let tvd_pass = worst_tvd <= 1e-12;
    let temporal_pass = worst_temporal <= 1e-12;
    report(
        "8c spatial-tvd",
        tvd_pass,
        &format!("worst per-step TV(W) increase {worst_tvd:.2e} over 50 random runs"),
    );
    report(
        "8d temporal-tv-bound",
        temporal_pass,
        &format!("worst excess over λ(‖V‖+‖V'‖)TV(ρ⁰): {worst_temporal:.2e}"),
    );
    assert!(tvd_pass && temporal_pass);
    assert!(started.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn criterion_8e_nonlocal_entropy_residual() {
    let started = Instant::now();
    let velocity = VelocityModel::<f64>::greenshields();
    let grid = GridSpec::new(-2.0, 2.0, 0.01).unwrap();
    let mut worst: f64 = f64::NEG_INFINITY;
    for (kernel, data) in [
        (Kernel::exponential(), InitialData::RiemannShock),
        (Kernel::exponential(), InitialData::BellShaped),
        (Kernel::linear(), InitialData::RiemannRarefaction),
    ] {
        let eps = 0.04;
        let weights = exact_weights(&kernel, eps, 0.01);
        let config = SchemeConfig::new(
            grid.clone(),
            weights.clone(),
            velocity.clone(),
            0.25,
            eps,
            CflVariant::MaxPrinciple,
        )
        .unwrap();
        let rho0 = discretize_initial(&data, &grid).unwrap();
        let mut field = SolutionField::initial(&config, rho0);
        let mut rho_traj = vec![field.rho.clone()];
        let mut w_traj = vec![field.w.clone()];
        for _ in 0..30 {
            field = step(&field, &config);
            rho_traj.push(field.rho.clone());
            w_traj.push(field.w.clone());
        }
        for c in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let res = nonlocal_entropy_residual_w(
                &rho_traj, &w_traj, &weights, &velocity, 0.25, 0.01, c, None,
            );
            worst = worst.max(res.aggregate).max(res.max_residual);
        }
    }
    let admissible_pass = worst <= 1e-10;

    // Deliberate CFL violation (λ = 1.5, unchecked) on a bump profile with
    // empty road downstream: the inequality fails and the aggregate is a
    // frozen regression anchor.
    let data = InitialData::PiecewiseConstant {
        breakpoints: vec![-0.5, 0.0],
        values: vec![0.0, 0.9, 0.0],
    };
    let eps = 0.04;
    let weights = exact_weights(&Kernel::exponential(), eps, 0.01);
    let config = SchemeConfig::new(
        grid.clone(),
        weights.clone(),
        velocity.clone(),
        1.5,
        eps,
        CflVariant::Unchecked,
    )
    .unwrap();
    let rho0 = discretize_initial(&data, &grid).unwrap();
    let mut field = SolutionField::initial(&config, rho0);
    let mut rho_traj = vec![field.rho.clone()];
    let mut w_traj = vec![field.w.clone()];
    for _ in 0..10 {
        field = step(&field, &config);
        rho_traj.push(field.rho.clone());
        w_traj.push(field.w.clone());
    }
    let violated =
        nonlocal_entropy_residual_w(&rho_traj, &w_traj, &weights, &velocity, 1.5, 0.01, 0.5, None);
    let anchor = 1.8444345289085258;
    let anchor_pass =
        violated.aggregate > 1e-3 && (violated.aggregate / anchor - 1.0).abs() < 1e-6;

    let pass = admissible_pass && anchor_pass;
    report(
        "8e nonlocal-entropy-residual",
        pass,
        &format!(
            "admissible runs worst {worst:.2e} (≤ 1e-10); violated-CFL aggregate {:.6e} \
             (anchor {anchor:.6e}) in {:.1}s",
            violated.aggregate,
            started.elapsed().as_secs_f64()
        ),
    );
    assert!(pass, "worst {worst:.2e}, violated {:.6e}", violated.aggregate);
    assert!(started.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn criterion_8fg_geometric_identity_and_deviation_bound() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = GridSpec::new(0.0, 1.2, 0.01).unwrap();
    let cells = grid.num_cells();
    let velocity = VelocityModel::<f64>::greenshields();

    let mut worst_identity: f64 = 0.0;
    let mut worst_deviation: f64 = f64::NEG_INFINITY;
    for trial in 0..30 {
        let (gamma0, eps, h) = if trial % 2 == 0 {
            // exponential-equivalent scale
            let eps = rng.gen_range(0.02..0.2);
            (1.0 - (-0.01f64 / eps).exp(), eps, 0.01)
        } else {
            (rng.gen_range(0.05..0.95), 1.0, 1.0)
        };
        let weights = QuadratureWeights::geometric_scaled(gamma0, eps, h, 1e-14).unwrap();
        let config = SchemeConfig::new(
            grid.clone(),
            weights.clone(),
            velocity.clone(),
            0.45,
            eps,
            CflVariant::MaxPrinciple,
        )
        .unwrap();
        let rho0 = random_bv_profile(&mut rng, cells);
        let factor = gamma0 / (1.0 - gamma0);
        let c_gamma = (1.0 - gamma0) / gamma0 * (h / eps);
        let mut field = SolutionField::initial(&config, rho0);
        for _ in 0..10 {
            for j in 0..cells - 1 {
                let lhs = field.w[j + 1] - field.w[j];
                let rhs = factor * (field.w[j] - field.rho[j]);
                worst_identity = worst_identity.max((lhs - rhs).abs());
            }
            let deviation = w_rho_deviation(&field.rho, &field.w, grid.h());
            let bound = c_gamma * eps * tv(&field.w, 0..cells).unwrap() / grid.h() * grid.h();
            worst_deviation = worst_deviation.max(deviation - bound * (1.0 + 1e-12) - 1e-15);
            field = step(&field, &config);
        }
    }
    let identity_pass = worst_identity <= 1e-12;
    let deviation_pass = worst_deviation <= 0.0;
    report(
        "8f geometric-identity",
        identity_pass,
        &format!("worst |ΔW − γ₀/(1−γ₀)(W−ρ)| = {worst_identity:.2e}"),
    );
    report(
        "8g w-rho-deviation-bound",
        deviation_pass,
        &format!("worst excess over c·ε·TV(W): {worst_deviation:.2e}"),
    );
    assert!(identity_pass && deviation_pass);
    assert!(started.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn criterion_9_kuznetsov_envelope_sanity() {
    let result = shock_study();
    let tv0 = InitialData::<f64>::RiemannShock.total_variation();
    let t_final = 1.0;
    let ratios: Vec<f64> = result
        .rows
        .iter()
        .map(|row| {
            let envelope = (row.epsilon
                + row.h
                + (row.epsilon * t_final).sqrt()
                + (row.h * t_final).sqrt())
                * tv0;
            row.l1_error / envelope
        })
        .collect();
    let k_min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let k_max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let variation = (k_max - k_min) / k_min;
    let pass = variation <= 0.25;
    report(
        "9 kuznetsov-envelope-sanity",
        pass,
        &format!(
            "per-cell K = {:?}, variation {:.0}% (target ≤ 25%). The error bound itself \
             holds with K = {k_max:.4} on every cell, but K cannot be stable: the measured \
             shock error decays at rate h (criterion 2) while the envelope decays at rate \
             sqrt(h), so K shrinks ∝ sqrt(h) across the sweep.",
            ratios.iter().map(|k| (k * 1e4).round() / 1e4).collect::<Vec<_>>(),
            variation * 100.0
        ),
    );
    assert!(
        pass,
        "per-cell envelope constants {ratios:?} vary by {:.0}%, incompatible with the \
         first-order shock convergence required by criterion 2; see the decisions ledger",
        variation * 100.0
    );
}
