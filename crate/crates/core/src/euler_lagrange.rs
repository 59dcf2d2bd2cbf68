//! The boundary-value action computed two independent ways: shooting on the
//! Euler-Lagrange equations (an ODE boundary-value problem in the initial
//! velocity) and direct minimization of the discretized action integral over
//! interior path nodes.

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::trajectory::Trajectory;
use crate::vecmath as vm;

/// Newton iteration cap for the shooting solver.
const NEWTON_MAX_ITERS: usize = 50;
/// Finite-difference step for the endpoint-map Jacobian.
const JACOBIAN_FD_STEP: f64 = 1e-6;
/// Smallest Newton damping factor before giving up on an iteration.
const MIN_DAMPING: f64 = 1e-12;

/// Iteration cap for the direct action minimization.
const DIRECT_MAX_ITERS: usize = 500;
/// Relative gradient 2-norm at which the direct minimization is converged.
const DIRECT_GRAD_TOL: f64 = 1e-10;
/// Armijo sufficient-decrease constant for the backtracking line search.
const ARMIJO_C1: f64 = 1e-4;

/// Converged solution of the endpoint boundary-value problem.
#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub trajectory: Trajectory,
    /// Composite-trapezoid integral of the Lagrangian along the solution.
    pub action: f64,
    /// Initial velocity that steers the path onto the target endpoint.
    pub initial_velocity: Vec<f64>,
    /// Endpoint miss distance |x(t) - x|.
    pub residual: f64,
}

/// One RK4 step of the second-order system m x'' = -grad V.
fn rk4_step(spec: &ModelSpec, x: &mut Vec<f64>, v: &mut Vec<f64>, h: f64) {
    let accel = |pos: &[f64]| -> Vec<f64> {
        let g = spec
            .grad_potential(pos)
            .expect("dimension checked by caller");
        vm::scale(&g, -1.0 / spec.mass)
    };
    let k1x = v.clone();
    let k1v = accel(x);
    let k2x = vm::add_scaled(v, h / 2.0, &k1v);
    let k2v = accel(&vm::add_scaled(x, h / 2.0, &k1x));
    let k3x = vm::add_scaled(v, h / 2.0, &k2v);
    let k3v = accel(&vm::add_scaled(x, h / 2.0, &k2x));
    let k4x = vm::add_scaled(v, h, &k3v);
    let k4v = accel(&vm::add_scaled(x, h, &k3x));
    for i in 0..x.len() {
        x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
        v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }
}

/// Integrate from (x0, v0) to time t and return only the endpoint position.
fn integrate_endpoint(spec: &ModelSpec, x0: &[f64], v0: &[f64], t: f64, n_steps: usize) -> Vec<f64> {
    let h = t / n_steps as f64;
    let mut x = x0.to_vec();
    let mut v = v0.to_vec();
    for _ in 0..n_steps {
        rk4_step(spec, &mut x, &mut v, h);
    }
    x
}

/// Integrate from (x0, v0) storing every sample.
fn integrate_full(
    spec: &ModelSpec,
    x0: &[f64],
    v0: &[f64],
    t: f64,
    n_steps: usize,
) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let h = t / n_steps as f64;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut positions = Vec::with_capacity(n_steps + 1);
    let mut velocities = Vec::with_capacity(n_steps + 1);
    let mut x = x0.to_vec();
    let mut v = v0.to_vec();
    times.push(0.0);
    positions.push(x.clone());
    velocities.push(v.clone());
    for k in 1..=n_steps {
        rk4_step(spec, &mut x, &mut v, h);
        times.push(if k == n_steps { t } else { k as f64 * h });
        positions.push(x.clone());
        velocities.push(v.clone());
    }
    (times, positions, velocities)
}

/// Composite-trapezoid integral of the Lagrangian along sampled states.
fn trapezoid_action(
    spec: &ModelSpec,
    times: &[f64],
    positions: &[Vec<f64>],
    velocities: &[Vec<f64>],
) -> f64 {
    let mut lagr = Vec::with_capacity(times.len());
    for i in 0..times.len() {
        lagr.push(
            spec.eval_lagrangian(&positions[i], &velocities[i], times[i])
                .expect("dimensions checked by caller"),
        );
    }
    let mut action = 0.0;
    for i in 0..times.len() - 1 {
        action += 0.5 * (lagr[i] + lagr[i + 1]) * (times[i + 1] - times[i]);
    }
    action
}

/// Solve the endpoint boundary-value problem by shooting: integrate the
/// equations of motion from (x0, v0) with a fixed-step RK4 scheme and adjust
/// v0 by damped Newton on the endpoint map until |x(t) - x| <= tol.
pub fn solve_bvp_shooting(
    spec: &ModelSpec,
    x0: &[f64],
    x: &[f64],
    t: f64,
    n_steps: usize,
    tol: f64,
) -> Result<BvpSolution> {
    spec.check_dim(x0)?;
    spec.check_dim(x)?;
    if !(t > 0.0) {
        return Err(Error::invalid(format!("shooting requires t > 0, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if n_steps < 2 {
        return Err(Error::invalid(format!("n_steps must be >= 2, got {n_steps}")));
    }
    let dim = spec.dimension;

    // Straight-line initial guess for the unknown initial velocity.
    let mut v0 = vm::scale(&vm::sub(x, x0), 1.0 / t);
    let miss = |v: &[f64]| -> Vec<f64> { vm::sub(&integrate_endpoint(spec, x0, v, t, n_steps), x) };

    let mut r = miss(&v0);
    let mut rnorm = vm::norm(&r);
    let mut best_residual = rnorm;
    let mut converged = rnorm <= tol;
    let mut iterations = 0;

    while !converged && iterations < NEWTON_MAX_ITERS {
        iterations += 1;
        // Finite-difference Jacobian of the endpoint map, one column per
        // velocity component.
        let mut jac = vec![vec![0.0; dim]; dim];
        for j in 0..dim {
            let mut vp = v0.clone();
            vp[j] += JACOBIAN_FD_STEP;
            let rp = miss(&vp);
            for i in 0..dim {
                jac[i][j] = (rp[i] - r[i]) / JACOBIAN_FD_STEP;
            }
        }
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = vm::solve_dense(&jac, &neg_r).ok_or(Error::NoConvergence {
            iterations,
            residual: best_residual,
        })?;

        // Damped update: halve the step until the residual decreases.
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= MIN_DAMPING {
            let v_new = vm::add_scaled(&v0, lambda, &delta);
            let r_new = miss(&v_new);
            let rn = vm::norm(&r_new);
            if rn < rnorm {
                v0 = v_new;
                r = r_new;
                rnorm = rn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        best_residual = best_residual.min(rnorm);
        if rnorm <= tol {
            converged = true;
        } else if !accepted {
            break;
        }
    }

    if !converged {
        return Err(Error::NoConvergence {
            iterations,
            residual: best_residual,
        });
    }

    let (times, positions, velocities) = integrate_full(spec, x0, &v0, t, n_steps);
    let residual = vm::dist(positions.last().unwrap(), x);
    let action = trapezoid_action(spec, &times, &positions, &velocities);
    Ok(BvpSolution {
        trajectory: Trajectory::new(times, positions, velocities)?,
        action,
        initial_velocity: v0,
        residual,
    })
}

/// Initial velocity of a converged boundary-value solution.
pub fn initial_velocity(sol: &BvpSolution) -> &[f64] {
    &sol.initial_velocity
}

/// Result of the direct discrete-action minimization.
#[derive(Debug, Clone)]
pub struct DirectMinimization {
    /// Value of the discrete action at the optimized path.
    pub action: f64,
    pub path: Trajectory,
    /// Set when the minimizer hit its iteration cap or the line search could
    /// no longer decrease the objective; the returned path is the best found.
    pub stalled: bool,
    pub iterations: usize,
}

/// Discrete action with midpoint-velocity discretization: each segment
/// contributes L((x_i + x_{i+1})/2, (x_{i+1} - x_i)/ds, s_mid) * ds.
fn discrete_action(spec: &ModelSpec, nodes: &[Vec<f64>], ds: f64) -> f64 {
    let m = spec.mass;
    let mut total = 0.0;
    for i in 0..nodes.len() - 1 {
        let mid: Vec<f64> = nodes[i]
            .iter()
            .zip(&nodes[i + 1])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let dx = vm::sub(&nodes[i + 1], &nodes[i]);
        let kinetic = 0.5 * m * vm::norm_sq(&dx) / (ds * ds);
        let pot = spec.eval_potential(&mid).expect("dimension checked");
        total += (kinetic - pot) * ds;
    }
    total
}

/// Gradient of the discrete action with respect to the interior nodes,
/// flattened node-major.
fn discrete_action_grad(spec: &ModelSpec, nodes: &[Vec<f64>], ds: f64, grad: &mut [f64]) {
    let dim = spec.dimension;
    let m = spec.mass;
    let n_interior = nodes.len() - 2;
    debug_assert_eq!(grad.len(), n_interior * dim);
    // Cache the potential gradient at each segment midpoint.
    let mut grad_v_mid: Vec<Vec<f64>> = Vec::with_capacity(nodes.len() - 1);
    for i in 0..nodes.len() - 1 {
        let mid: Vec<f64> = nodes[i]
            .iter()
            .zip(&nodes[i + 1])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        grad_v_mid.push(spec.grad_potential(&mid).expect("dimension checked"));
    }
    for j in 1..=n_interior {
        for c in 0..dim {
            let kinetic = m * ((nodes[j][c] - nodes[j - 1][c]) - (nodes[j + 1][c] - nodes[j][c])) / ds;
            let potential = -0.5 * ds * (grad_v_mid[j - 1][c] + grad_v_mid[j][c]);
            grad[(j - 1) * dim + c] = kinetic + potential;
        }
    }
}

fn apply_interior(nodes: &mut [Vec<f64>], interior: &[f64], dim: usize) {
    for (j, chunk) in interior.chunks(dim).enumerate() {
        nodes[j + 1].copy_from_slice(chunk);
    }
}

/// Solve (m/ds) * tridiag(-1, 2, -1) d = g by the Thomas algorithm, one
/// independent system per coordinate (the DOF layout is node-major).
fn solve_kinetic_tridiagonal(m_over_ds: f64, dim: usize, g: &[f64], d: &mut [f64]) {
    let rows = g.len() / dim;
    let a = -m_over_ds;
    let b = 2.0 * m_over_ds;
    let mut c = vec![0.0; rows];
    let mut rhs = vec![0.0; rows];
    for coord in 0..dim {
        c[0] = a / b;
        rhs[0] = g[coord] / b;
        for i in 1..rows {
            let denom = b - a * c[i - 1];
            c[i] = a / denom;
            rhs[i] = (g[i * dim + coord] - a * rhs[i - 1]) / denom;
        }
        d[(rows - 1) * dim + coord] = rhs[rows - 1];
        for i in (0..rows - 1).rev() {
            d[i * dim + coord] = rhs[i] - c[i] * d[(i + 1) * dim + coord];
        }
    }
}

/// Minimize the discretized action over the interior path nodes with the
/// endpoints pinned to x0 and x, starting from the straight line. The
/// descent direction is the gradient preconditioned by the kinetic
/// tridiagonal block (plain steepest descent needs O(n^2) iterations on
/// this objective and cannot reach dense resolutions); the step is chosen
/// by a backtracking Armijo line search from the unit step.
pub fn el_action_direct(
    spec: &ModelSpec,
    x0: &[f64],
    x: &[f64],
    t: f64,
    n_segments: usize,
) -> Result<DirectMinimization> {
    spec.check_dim(x0)?;
    spec.check_dim(x)?;
    if !(t > 0.0) {
        return Err(Error::invalid(format!(
            "direct minimization requires t > 0, got {t}"
        )));
    }
    if n_segments < 2 {
        return Err(Error::invalid(format!(
            "n_segments must be >= 2, got {n_segments}"
        )));
    }
    let dim = spec.dimension;
    let n = n_segments;
    let ds = t / n as f64;

    // Straight-line initialization, endpoints included.
    let mut nodes: Vec<Vec<f64>> = (0..=n)
        .map(|k| vm::add_scaled(x0, k as f64 / n as f64, &vm::sub(x, x0)))
        .collect();
    nodes[n].copy_from_slice(x);

    let n_dof = (n - 1) * dim;
    let mut interior: Vec<f64> = nodes[1..n].iter().flatten().copied().collect();
    let mut grad = vec![0.0; n_dof];
    let mut dir = vec![0.0; n_dof];
    let mut f = discrete_action(spec, &nodes, ds);
    discrete_action_grad(spec, &nodes, ds, &mut grad);

    let mut stalled = false;
    let mut iterations = 0;
    let mut trial_nodes = nodes.clone();
    loop {
        let gnorm = vm::norm_sq(&grad).sqrt();
        if gnorm <= DIRECT_GRAD_TOL * (1.0 + f.abs()) {
            break;
        }
        if iterations >= DIRECT_MAX_ITERS {
            stalled = true;
            break;
        }
        iterations += 1;

        solve_kinetic_tridiagonal(spec.mass / ds, dim, &grad, &mut dir);
        let slope = vm::dot(&grad, &dir);

        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = interior
                .iter()
                .zip(&dir)
                .map(|(xi, di)| xi - alpha * di)
                .collect();
            apply_interior(&mut trial_nodes, &trial, dim);
            let f_trial = discrete_action(spec, &trial_nodes, ds);
            if f_trial <= f - ARMIJO_C1 * alpha * slope {
                interior = trial;
                f = f_trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            stalled = true;
            break;
        }
        apply_interior(&mut nodes, &interior, dim);
        discrete_action_grad(spec, &nodes, ds, &mut grad);
    }

    // Node velocities for the returned path: centered differences in the
    // interior, second-order one-sided at the ends.
    let times: Vec<f64> = (0..=n)
        .map(|k| if k == n { t } else { k as f64 * ds })
        .collect();
    let mut velocities: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let v = if k == 0 {
            (0..dim)
                .map(|c| (-3.0 * nodes[0][c] + 4.0 * nodes[1][c] - nodes[2][c]) / (2.0 * ds))
                .collect()
        } else if k == n {
            (0..dim)
                .map(|c| (3.0 * nodes[n][c] - 4.0 * nodes[n - 1][c] + nodes[n - 2][c]) / (2.0 * ds))
                .collect()
        } else {
            (0..dim)
                .map(|c| (nodes[k + 1][c] - nodes[k - 1][c]) / (2.0 * ds))
                .collect()
        };
        velocities.push(v);
    }

    Ok(DirectMinimization {
        action: f,
        path: Trajectory::new(times, nodes, velocities)?,
        stalled,
        iterations,
    })
}

/// A path in a least-action trajectory family together with its action.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    /// Bump amplitude; 0 marks the optimal path.
    pub amplitude: f64,
    pub trajectory: Trajectory,
    pub action: f64,
}

/// Sample count for the family paths.
const FAMILY_STEPS: usize = 1000;

/// The optimal path between (x0, 0) and (x, t) plus half-sine bump
/// perturbations that vanish at both endpoints. The first member is the
/// optimal path (amplitude 0); every perturbed member has a strictly larger
/// action.
pub fn trajectory_family(
    spec: &ModelSpec,
    x0: &[f64],
    x: &[f64],
    t: f64,
    amplitudes: &[f64],
) -> Result<Vec<FamilyMember>> {
    let sol = solve_bvp_shooting(spec, x0, x, t, FAMILY_STEPS, 1e-10)?;
    let base = &sol.trajectory;
    let mut family = Vec::with_capacity(amplitudes.len() + 1);
    family.push(FamilyMember {
        amplitude: 0.0,
        trajectory: base.clone(),
        action: sol.action,
    });
    for &a in amplitudes {
        let mut positions = Vec::with_capacity(base.len());
        let mut velocities = Vec::with_capacity(base.len());
        for (k, &s) in base.times.iter().enumerate() {
            let bump = a * (std::f64::consts::PI * s / t).sin();
            let dbump = a * std::f64::consts::PI / t * (std::f64::consts::PI * s / t).cos();
            positions.push(base.positions[k].iter().map(|p| p + bump).collect());
            velocities.push(base.velocities[k].iter().map(|v| v + dbump).collect());
        }
        let action = trapezoid_action(spec, &base.times, &positions, &velocities);
        family.push(FamilyMember {
            amplitude: a,
            trajectory: Trajectory::new(base.times.clone(), positions, velocities)?,
            action,
        });
    }
    Ok(family)
}
