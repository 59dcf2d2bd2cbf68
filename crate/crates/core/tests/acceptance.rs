//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (visible with --nocapture).

use actionlab_core::*;
use std::time::Instant;

const GRID_COORDS: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];
const GRID_TIMES: [f64; 3] = [0.5, 1.0, 2.0];
const FORCES: [f64; 2] = [0.0, 2.0];

fn model_1d(k: f64) -> ModelSpec {
    if k == 0.0 {
        ModelSpec::free(1.0, 1).unwrap()
    } else {
        ModelSpec::linear(1.0, vec![k]).unwrap()
    }
}

/// Criterion 1: closed-form boundary-value action. On the 5x5x3 grid of
/// (x0, x, t) for k in {0, 2}: shooting within 1e-6, direct minimization
/// (n = 256) within 1e-3, in under 10 s total.
#[test]
fn criterion_1_closed_form_el_action() {
    let start = Instant::now();
    let mut max_shoot = 0.0f64;
    let mut max_direct = 0.0f64;
    for &k in &FORCES {
        let spec = model_1d(k);
        for &x0 in &GRID_COORDS {
            for &x in &GRID_COORDS {
                for &t in &GRID_TIMES {
                    let exact = analytic_el_action_linear(&spec, &[x0], &[x], t).unwrap();
                    let shoot = solve_bvp_shooting(&spec, &[x0], &[x], t, 4096, 1e-10).unwrap();
                    max_shoot = max_shoot.max((shoot.action - exact).abs());
                    let direct = el_action_direct(&spec, &[x0], &[x], t, 256).unwrap();
                    assert!(!direct.stalled);
                    max_direct = max_direct.max((direct.action - exact).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(max_shoot <= 1e-6, "shooting error {max_shoot:e}");
    assert!(max_direct <= 1e-3, "direct error {max_direct:e}");
    assert!(elapsed.as_secs_f64() < 10.0, "runtime {elapsed:?}");
    println!(
        "criterion 1 (closed-form EL action): PASS  shooting err {max_shoot:.2e} <= 1e-6, direct err {max_direct:.2e} <= 1e-3, runtime {elapsed:.2?} < 10 s"
    );
}

/// Criterion 2: shooting initial velocity matches (x - x0)/t - k t/(2m)
/// within 1e-8 on the same grid; anchor (k=2, x0=0, x=1, t=1) -> 0.
#[test]
fn criterion_2_initial_velocity() {
    let mut max_err = 0.0f64;
    for &k in &FORCES {
        let spec = model_1d(k);
        for &x0 in &GRID_COORDS {
            for &x in &GRID_COORDS {
                for &t in &GRID_TIMES {
                    let sol = solve_bvp_shooting(&spec, &[x0], &[x], t, 1024, 1e-12).unwrap();
                    let expected = analytic_initial_velocity(&spec, &[x0], &[x], t).unwrap();
                    max_err = max_err.max((initial_velocity(&sol)[0] - expected[0]).abs());
                }
            }
        }
    }
    let spec = model_1d(2.0);
    let anchor = solve_bvp_shooting(&spec, &[0.0], &[1.0], 1.0, 1024, 1e-12).unwrap();
    let anchor_err = anchor.initial_velocity[0].abs();
    assert!(max_err <= 1e-8, "velocity error {max_err:e}");
    assert!(anchor_err <= 1e-8, "anchor v0 {anchor_err:e}");
    println!(
        "criterion 2 (initial velocity): PASS  max err {max_err:.2e} <= 1e-8, anchor |v0| {anchor_err:.2e}"
    );
}

/// Criterion 3: min-plus value vs the closed form at 25 probes within 1e-8;
/// anchor 17/6 at (k=1, v0=1, x=2, t=1); under 5 s.
#[test]
fn criterion_3_hopf_lax_vs_closed_form() {
    let start = Instant::now();
    let spec = ModelSpec::linear(1.0, vec![1.0]).unwrap();
    let s0 = InitialAction::LinearForm {
        v0: vec![1.0],
        mass: 1.0,
    };
    let mut max_err = 0.0f64;
    for &x in &GRID_COORDS {
        for &t in &[0.2, 0.6, 1.0, 1.4, 1.8] {
            let r = hj_action_hopf_lax(&spec, &s0, &[x], t, &[(-12.0, 12.0)], 33).unwrap();
            let exact = analytic_hj_action_linear(&spec, &[1.0], &[x], t).unwrap();
            max_err = max_err.max((r.value - exact).abs());
        }
    }
    let anchor = hj_action_hopf_lax(&spec, &s0, &[2.0], 1.0, &[(-12.0, 12.0)], 33).unwrap();
    let anchor_err = (anchor.value - 17.0 / 6.0).abs();
    let elapsed = start.elapsed();
    assert!(max_err <= 1e-8, "hopf-lax error {max_err:e}");
    assert!(anchor_err <= 1e-8, "anchor error {anchor_err:e}");
    assert!(elapsed.as_secs_f64() < 5.0, "runtime {elapsed:?}");
    println!(
        "criterion 3 (Hopf-Lax vs closed form): PASS  max err {max_err:.2e} <= 1e-8 at 25 probes, anchor |S - 17/6| {anchor_err:.2e}, runtime {elapsed:.2?} < 5 s"
    );
}

/// Criterion 4: the singular initial condition reduces the field action to
/// the boundary-value action: bitwise equality with the closed form (same
/// expression path) and agreement with shooting within 1e-6.
#[test]
fn criterion_4_singular_reduction() {
    let spec = ModelSpec::linear(1.0, vec![2.0]).unwrap();
    let mut max_shoot = 0.0f64;
    let mut checked = 0usize;
    for &x0 in &[-1.0, 0.0, 1.0] {
        for &x in &[-2.0, 0.0, 1.5] {
            for &t in &[0.5, 1.0] {
                let s0 = InitialAction::SingularAt { x0: vec![x0] };
                let hl = hj_action_hopf_lax(&spec, &s0, &[x], t, &[(-10.0, 10.0)], 17).unwrap();
                let exact = analytic_el_action_linear(&spec, &[x0], &[x], t).unwrap();
                assert_eq!(
                    hl.value.to_bits(),
                    exact.to_bits(),
                    "not the same floating-point value at x0={x0}, x={x}, t={t}"
                );
                let shoot = solve_bvp_shooting(&spec, &[x0], &[x], t, 4096, 1e-10).unwrap();
                max_shoot = max_shoot.max((hl.value - shoot.action).abs());
                checked += 1;
            }
        }
    }
    assert!(max_shoot <= 1e-6, "singular vs shooting {max_shoot:e}");
    println!(
        "criterion 4 (singular reduction): PASS  {checked} points bitwise-equal to the closed form, max |hopf-lax - shooting| {max_shoot:.2e} <= 1e-6"
    );
}

/// Criterion 5: grid-solver convergence. 1D runs at n in {129, 257, 513}
/// with linear initial data and k in {0, 1}: max interior error against the
/// closed form decreasing with order >= 0.9 (or at machine floor when the
/// scheme is exact), absolute error at n = 513 <= 5e-3; under 60 s.
#[test]
fn criterion_5_pde_convergence() {
    let start = Instant::now();
    let t_final = 1.0;
    let cfl = 0.25;
    const FLOOR: f64 = 1e-12;
    for &k in &[0.0, 1.0] {
        let spec = model_1d(k);
        let s0 = InitialAction::LinearForm {
            v0: vec![1.0],
            mass: 1.0,
        };
        let mut errors = Vec::new();
        for n in [129usize, 257, 513] {
            let grid = SpatialGrid::new(-8.0, 8.0, n).unwrap();
            let samples = sample_initial_action(&spec, &s0, &grid, 1e4).unwrap();
            let field = solve_hj_pde(&spec, &grid, &samples, t_final, cfl, &[t_final]).unwrap();
            let (_, snap) = field.snapshot(field.times.len() - 1);
            let mut max_err = 0.0f64;
            for i in 0..n {
                let x = grid.x(i);
                if x.abs() <= 3.5 {
                    let exact = analytic_hj_action_linear(&spec, &[1.0], &[x], t_final).unwrap();
                    max_err = max_err.max((snap[i] - exact).abs());
                }
            }
            errors.push(max_err);
        }
        let at_floor = errors.iter().all(|&e| e <= FLOOR);
        if at_floor {
            println!(
                "criterion 5 (PDE convergence, k={k}): exact to machine precision at all grids ({errors:?}), order clause vacuous"
            );
        } else {
            for w in errors.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!(order >= 0.9, "k={k}: order {order} ({errors:?})");
            }
        }
        assert!(
            errors[2] <= 5e-3,
            "k={k}: error at n=513 is {:e}",
            errors[2]
        );
        println!("criterion 5 (PDE convergence, k={k}): PASS  errors {errors:?}, n=513 err <= 5e-3");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "runtime {elapsed:?}");
    println!("criterion 5 (PDE convergence): PASS  runtime {elapsed:.2?} < 60 s");
}

/// Criterion 6: velocity field. Grid-derived v deviates from v0 + k t / m
/// by at most C dx (C reported), the analytic view deviates by exactly
/// zero, and the anchor v(., 2) = 3 for v0 = 1, k = 1.
#[test]
fn criterion_6_velocity_field() {
    let spec = ModelSpec::linear(1.0, vec![1.0]).unwrap();
    let s0 = InitialAction::LinearForm {
        v0: vec![1.0],
        mass: 1.0,
    };
    let grid = SpatialGrid::new(-8.0, 8.0, 513).unwrap();
    let dx = grid.dx();
    let samples = sample_initial_action(&spec, &s0, &grid, 1e4).unwrap();
    let times: Vec<f64> = (0..=16).map(|j| j as f64 / 16.0).collect();
    let field = solve_hj_pde(&spec, &grid, &samples, 1.0, 0.5, &times).unwrap();
    let view = VelocityFieldView::from_action_field(field).unwrap();

    let mut max_dev = 0.0f64;
    for i in 0..20 {
        let x = -4.0 + 0.4 * i as f64;
        let t = 0.5;
        let v = velocity_field(&view, &[x], t).unwrap();
        max_dev = max_dev.max((v[0] - (1.0 + t)).abs());
    }
    let c = max_dev / dx;
    assert!(max_dev <= 0.5 * dx, "grid deviation {max_dev:e} (C = {c:.3})");

    let aview = VelocityFieldView::analytic_linear(vec![1.0], spec).unwrap();
    let reference = velocity_field(&aview, &[0.0], 2.0).unwrap();
    assert_eq!(reference, vec![3.0]);
    for &x in &[-5.0, -1.0, 0.3, 2.0, 7.0] {
        assert_eq!(velocity_field(&aview, &[x], 2.0).unwrap(), reference);
    }
    println!(
        "criterion 6 (velocity field): PASS  grid deviation {max_dev:.2e} = {c:.4} * dx, analytic deviation exactly 0, anchor v(., 2) = 3"
    );
}

/// Criterion 7: a particle started at the min-plus argmin and transported
/// by the field arrives at the probe: within 1e-2 for the n = 513 grid
/// field, 1e-6 for the analytic field.
#[test]
fn criterion_7_pilot_consistency() {
    let spec = ModelSpec::linear(1.0, vec![1.0]).unwrap();
    let s0 = InitialAction::LinearForm {
        v0: vec![1.0],
        mass: 1.0,
    };
    let (x_probe, t_probe) = (2.0, 1.0);
    let hl = hj_action_hopf_lax(&spec, &s0, &[x_probe], t_probe, &[(-10.0, 10.0)], 33).unwrap();

    let aview = VelocityFieldView::analytic_linear(vec![1.0], spec.clone()).unwrap();
    let tr = integrate_pilot_trajectory(&aview, &hl.argmin_x0, 0.0, t_probe, None).unwrap();
    let analytic_err = (tr.end_position()[0] - x_probe).abs();
    assert!(analytic_err <= 1e-6, "analytic endpoint error {analytic_err:e}");

    let grid = SpatialGrid::new(-8.0, 8.0, 513).unwrap();
    let samples = sample_initial_action(&spec, &s0, &grid, 1e4).unwrap();
    let times: Vec<f64> = (0..=32).map(|j| j as f64 / 32.0).collect();
    let field = solve_hj_pde(&spec, &grid, &samples, 1.0, 0.5, &times).unwrap();
    let gview = VelocityFieldView::from_action_field(field).unwrap();
    let tr = integrate_pilot_trajectory(&gview, &hl.argmin_x0, 0.0, t_probe, None).unwrap();
    let grid_err = (tr.end_position()[0] - x_probe).abs();
    assert!(grid_err <= 1e-2, "grid endpoint error {grid_err:e}");
    println!(
        "criterion 7 (pilot consistency): PASS  analytic endpoint err {analytic_err:.2e} <= 1e-6, n=513 field err {grid_err:.2e} <= 1e-2"
    );
}

/// Criterion 8: least-action property of the trajectory family. Every
/// perturbed path has a strictly larger action; the free-particle
/// half-sine increase equals a^2 pi^2 / 4 within 1e-6.
#[test]
fn criterion_8_least_action_family() {
    let spec = ModelSpec::linear(1.0, vec![2.0]).unwrap();
    let fam = trajectory_family(&spec, &[0.0], &[1.0], 1.0, &[-0.4, -0.2, 0.2, 0.4, 0.6]).unwrap();
    let optimum = fam[0].action;
    for member in &fam[1..] {
        assert!(
            member.action > optimum,
            "amplitude {}: action {} not above {optimum}",
            member.amplitude,
            member.action
        );
    }

    let free = ModelSpec::free(1.0, 1).unwrap();
    let a = 0.3;
    let fam = trajectory_family(&free, &[0.0], &[1.0], 1.0, &[a]).unwrap();
    let increase = fam[1].action - fam[0].action;
    let expected = a * a * std::f64::consts::PI * std::f64::consts::PI / 4.0;
    let err = (increase - expected).abs();
    assert!(err <= 1e-6, "half-sine increase error {err:e}");
    println!(
        "criterion 8 (least action): PASS  5/5 perturbed actions strictly above optimum, half-sine increase err {err:.2e} <= 1e-6"
    );
}
