//! The field action S(x, t) from the min-plus principle: minimize
//! S0(y) + S_cl(x, t; y) over initial positions y, either with the
//! analytic/shooting boundary-value action (`hj_action_hopf_lax`) or with
//! the fully discretized control minimization inside (`hj_action_nested`).

use crate::error::{Error, Result};
use crate::euler_lagrange::{el_action_direct, solve_bvp_shooting};
use crate::model::{analytic_el_action_linear, ModelSpec, PotentialSpec};
use crate::trajectory::Trajectory;
use crate::vecmath as vm;

/// Relative bracket width at which golden-section refinement stops.
const GOLDEN_REL_TOL: f64 = 1e-10;
/// Two coarse candidates within this of each other count as tied; the
/// lexicographically smallest coordinate wins.
const TIE_EPS: f64 = 1e-12;
/// Internal shooting settings for potentials without a closed form.
const SHOOTING_STEPS: usize = 2000;
const SHOOTING_TOL: f64 = 1e-10;

/// Prescribed action values at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialAction {
    /// S0(x) = mass * v0 . x.
    LinearForm { v0: Vec<f64>, mass: f64 },
    /// 1D piecewise-linear table; extrapolates linearly beyond the ends.
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
    /// Zero at x0, unbounded elsewhere; handled as a constrained minimum.
    SingularAt { x0: Vec<f64> },
}

impl InitialAction {
    pub fn validate(&self, dimension: usize) -> Result<()> {
        match self {
            InitialAction::LinearForm { v0, mass } => {
                if v0.len() != dimension {
                    return Err(Error::DimensionMismatch {
                        expected: dimension,
                        got: v0.len(),
                    });
                }
                if !(*mass > 0.0) {
                    return Err(Error::invalid("initial-action mass must be positive"));
                }
            }
            InitialAction::Tabulated { grid, values } => {
                if dimension != 1 {
                    return Err(Error::invalid(
                        "tabulated initial action is one-dimensional",
                    ));
                }
                if grid.len() < 2 || grid.len() != values.len() {
                    return Err(Error::invalid(
                        "tabulated initial action needs matching grid/value lists of length >= 2",
                    ));
                }
                if grid.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::invalid(
                        "tabulated grid must be strictly increasing",
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("tabulated values must be finite"));
                }
            }
            InitialAction::SingularAt { x0 } => {
                if x0.len() != dimension {
                    return Err(Error::DimensionMismatch {
                        expected: dimension,
                        got: x0.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Pointwise value for the smooth variants; the singular variant has no
    /// finite pointwise values.
    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        match self {
            InitialAction::LinearForm { v0, mass } => {
                if v0.len() != y.len() {
                    return Err(Error::DimensionMismatch {
                        expected: v0.len(),
                        got: y.len(),
                    });
                }
                Ok(mass * vm::dot(v0, y))
            }
            InitialAction::Tabulated { grid, values } => {
                if y.len() != 1 {
                    return Err(Error::DimensionMismatch {
                        expected: 1,
                        got: y.len(),
                    });
                }
                Ok(interp_linear(grid, values, y[0]))
            }
            InitialAction::SingularAt { .. } => Err(Error::invalid(
                "singular initial action has no finite pointwise values",
            )),
        }
    }
}

/// Piecewise-linear interpolation with linear extrapolation from the end
/// segments.
fn interp_linear(grid: &[f64], values: &[f64], x: f64) -> f64 {
    let n = grid.len();
    let seg = if x <= grid[0] {
        0
    } else if x >= grid[n - 1] {
        n - 2
    } else {
        match grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
            Ok(i) => return values[i],
            Err(i) => i - 1,
        }
    };
    let w = (x - grid[seg]) / (grid[seg + 1] - grid[seg]);
    values[seg] + w * (values[seg + 1] - values[seg])
}

/// Result of a min-plus evaluation.
#[derive(Debug, Clone)]
pub struct HopfLaxResult {
    pub value: f64,
    pub argmin_x0: Vec<f64>,
    pub candidates_evaluated: usize,
    /// Set when the minimizer lies on the search-box boundary, meaning the
    /// true minimum may fall outside the box.
    pub boundary_warning: bool,
}

/// Like [`HopfLaxResult`] but with the inner boundary-value action computed
/// by discretized control minimization; carries the inner stall flag.
#[derive(Debug, Clone)]
pub struct NestedResult {
    pub value: f64,
    pub argmin_x0: Vec<f64>,
    pub candidates_evaluated: usize,
    pub boundary_warning: bool,
    /// Any inner minimization returned its best-found path without meeting
    /// its gradient tolerance.
    pub stalled: bool,
}

/// Boundary-value action S_cl(x, t; y): closed form for the free and
/// uniform-force potentials, shooting otherwise.
pub fn classical_action(spec: &ModelSpec, y: &[f64], x: &[f64], t: f64) -> Result<f64> {
    match spec.potential {
        PotentialSpec::Free | PotentialSpec::Linear { .. } => {
            analytic_el_action_linear(spec, y, x, t)
        }
        PotentialSpec::Harmonic { .. } => {
            Ok(solve_bvp_shooting(spec, y, x, t, SHOOTING_STEPS, SHOOTING_TOL)?.action)
        }
    }
}

fn validate_box(search_box: &[(f64, f64)], dimension: usize) -> Result<()> {
    if search_box.len() != dimension {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            got: search_box.len(),
        });
    }
    for &(lo, hi) in search_box {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid(format!(
                "search box interval [{lo}, {hi}] must be finite and nonempty"
            )));
        }
    }
    Ok(())
}

struct BoxMinimum {
    value: f64,
    argmin: Vec<f64>,
    evaluations: usize,
    boundary_warning: bool,
}

/// Coarse scan over the box followed by golden-section refinement (per axis,
/// coordinate descent in higher dimensions). Candidates are visited in
/// lexicographic order and ties within `TIE_EPS` keep the earlier candidate,
/// so the result does not depend on evaluation order.
fn minimize_over_box(
    g: &mut dyn FnMut(&[f64]) -> Result<f64>,
    search_box: &[(f64, f64)],
    coarse_n: usize,
) -> Result<BoxMinimum> {
    let dim = search_box.len();
    let n = coarse_n.max(2);
    let mut evaluations = 0;

    let coord = |axis: usize, idx: usize| -> f64 {
        let (lo, hi) = search_box[axis];
        lo + (hi - lo) * idx as f64 / (n - 1) as f64
    };

    // Lexicographic scan: axis 0 is the most significant index.
    let total = n.pow(dim as u32);
    let mut best_value = f64::INFINITY;
    let mut best_point = vec![0.0; dim];
    let mut point = vec![0.0; dim];
    for flat in 0..total {
        let mut rem = flat;
        for axis in (0..dim).rev() {
            point[axis] = coord(axis, rem % n);
            rem /= n;
        }
        let value = g(&point)?;
        evaluations += 1;
        if value < best_value - TIE_EPS {
            best_value = value;
            best_point.copy_from_slice(&point);
        }
    }

    // Refine the best cell.
    let cell: Vec<f64> = search_box
        .iter()
        .map(|&(lo, hi)| (hi - lo) / (n - 1) as f64)
        .collect();
    let mut current = best_point.clone();
    let mut current_value = best_value;
    let sweeps = if dim == 1 { 1 } else { 60 };
    for _ in 0..sweeps {
        let before = current_value;
        for axis in 0..dim {
            let (lo, hi) = search_box[axis];
            let a = (current[axis] - cell[axis]).max(lo);
            let b = (current[axis] + cell[axis]).min(hi);
            let (y, v, ev) = golden_section(
                &mut |ya| {
                    let mut p = current.clone();
                    p[axis] = ya;
                    g(&p)
                },
                a,
                b,
            )?;
            evaluations += ev;
            if v < current_value {
                current[axis] = y;
                current_value = v;
            }
        }
        if dim == 1 || (before - current_value).abs() <= 1e-12 * (1.0 + current_value.abs()) {
            break;
        }
    }

    let boundary_warning = current.iter().zip(search_box).any(|(&y, &(lo, hi))| {
        let w = 1e-9 * (hi - lo);
        y - lo <= w || hi - y <= w
    });

    Ok(BoxMinimum {
        value: current_value,
        argmin: current,
        evaluations,
        boundary_warning,
    })
}

/// Golden-section search on [a, b]; returns the best evaluated point, its
/// value, and the evaluation count.
fn golden_section(
    g: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
) -> Result<(f64, f64, usize)> {
    let invphi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut lo = a;
    let mut hi = b;
    let mut evals = 0;
    let mut x1 = hi - invphi * (hi - lo);
    let mut x2 = lo + invphi * (hi - lo);
    let mut f1 = g(x1)?;
    let mut f2 = g(x2)?;
    evals += 2;
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    while hi - lo > GOLDEN_REL_TOL * lo.abs().max(hi.abs()).max(1.0) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = g(x1)?;
            evals += 1;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = g(x2)?;
            evals += 1;
        }
        let (bx, bf) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        if bf < best.1 {
            best = (bx, bf);
        }
    }
    Ok((best.0, best.1, evals))
}

fn validate_query(spec: &ModelSpec, s0: &InitialAction, x: &[f64], t: f64) -> Result<()> {
    spec.check_dim(x)?;
    s0.validate(spec.dimension)?;
    if let InitialAction::LinearForm { mass, .. } = s0 {
        if *mass != spec.mass {
            return Err(Error::invalid(format!(
                "initial-action mass {mass} differs from the model mass {}",
                spec.mass
            )));
        }
    }
    if !(t > 0.0) {
        return Err(Error::invalid(format!("field action requires t > 0, got {t}")));
    }
    Ok(())
}

/// Field action S(x, t) = min over y of S0(y) + S_cl(x, t; y), searched on a
/// bounded box. The singular variant reduces exactly to the boundary-value
/// action from its anchor point.
pub fn hj_action_hopf_lax(
    spec: &ModelSpec,
    s0: &InitialAction,
    x: &[f64],
    t: f64,
    search_box: &[(f64, f64)],
    coarse_n: usize,
) -> Result<HopfLaxResult> {
    validate_query(spec, s0, x, t)?;
    if let InitialAction::SingularAt { x0 } = s0 {
        return Ok(HopfLaxResult {
            value: classical_action(spec, x0, x, t)?,
            argmin_x0: x0.clone(),
            candidates_evaluated: 1,
            boundary_warning: false,
        });
    }
    validate_box(search_box, spec.dimension)?;
    let mut g = |y: &[f64]| -> Result<f64> { Ok(s0.eval(y)? + classical_action(spec, y, x, t)?) };
    let min = minimize_over_box(&mut g, search_box, coarse_n)?;
    Ok(HopfLaxResult {
        value: min.value,
        argmin_x0: min.argmin,
        candidates_evaluated: min.evaluations,
        boundary_warning: min.boundary_warning,
    })
}

/// Same minimum as [`hj_action_hopf_lax`] but with the inner boundary-value
/// action computed by discretized control minimization; the initial data
/// never enters the inner minimization, only the outer one.
pub fn hj_action_nested(
    spec: &ModelSpec,
    s0: &InitialAction,
    x: &[f64],
    t: f64,
    search_box: &[(f64, f64)],
    coarse_n: usize,
    n_segments: usize,
) -> Result<NestedResult> {
    validate_query(spec, s0, x, t)?;
    let mut stalled = false;
    if let InitialAction::SingularAt { x0 } = s0 {
        let inner = el_action_direct(spec, x0, x, t, n_segments)?;
        return Ok(NestedResult {
            value: inner.action,
            argmin_x0: x0.clone(),
            candidates_evaluated: 1,
            boundary_warning: false,
            stalled: inner.stalled,
        });
    }
    validate_box(search_box, spec.dimension)?;
    let mut g = |y: &[f64]| -> Result<f64> {
        let inner = el_action_direct(spec, y, x, t, n_segments)?;
        stalled |= inner.stalled;
        Ok(s0.eval(y)? + inner.action)
    };
    let min = minimize_over_box(&mut g, search_box, coarse_n)?;
    Ok(NestedResult {
        value: min.value,
        argmin_x0: min.argmin,
        candidates_evaluated: min.evaluations,
        boundary_warning: min.boundary_warning,
        stalled,
    })
}

/// Classical path from the minimizing initial position to (x, t).
pub fn minimizing_trajectory(
    spec: &ModelSpec,
    s0: &InitialAction,
    x: &[f64],
    t: f64,
    search_box: &[(f64, f64)],
    coarse_n: usize,
    n_steps: usize,
) -> Result<Trajectory> {
    let result = hj_action_hopf_lax(spec, s0, x, t, search_box, coarse_n)?;
    Ok(solve_bvp_shooting(spec, &result.argmin_x0, x, t, n_steps, SHOOTING_TOL)?.trajectory)
}
