//! Velocity field v(x, t) = grad S / m read from an action field (or from
//! the closed form of the uniform-force family) and trajectories of
//! particles transported along it.

use crate::error::{Error, Result};
use crate::hj_pde::ActionField;
use crate::model::{ModelSpec, PotentialSpec};
use crate::trajectory::Trajectory;

/// Gradient jumps above this multiple of the field-typical gradient refuse
/// the query instead of guessing a value.
const KINK_FACTOR: f64 = 10.0;
const KINK_FLOOR: f64 = 1e-9;
/// Default integrator step count over [t0, t1].
const DEFAULT_PILOT_STEPS: usize = 1000;

/// Immutable view of a velocity field. Grid-backed views precompute the
/// per-snapshot node gradients so queries stay cheap and deterministic.
#[derive(Debug, Clone)]
pub struct VelocityFieldView {
    inner: ViewInner,
}

#[derive(Debug, Clone)]
enum ViewInner {
    Analytic {
        v0: Vec<f64>,
        model: ModelSpec,
    },
    Grid {
        field: ActionField,
        /// Centered-difference gradient of S at every grid node, one array
        /// per snapshot (one-sided at the two boundary nodes).
        grads: Vec<Vec<f64>>,
        /// Median interior gradient magnitude over all snapshots.
        typical_grad: f64,
    },
}

impl VelocityFieldView {
    /// Closed-form view for the free / uniform-force family:
    /// v(x, t) = v0 + k t / m, independent of x.
    pub fn analytic_linear(v0: Vec<f64>, model: ModelSpec) -> Result<Self> {
        model.check_dim(&v0)?;
        if matches!(model.potential, PotentialSpec::Harmonic { .. }) {
            return Err(Error::UnsupportedOracle(
                "the analytic velocity field covers only the free and uniform-force potentials",
            ));
        }
        Ok(Self {
            inner: ViewInner::Analytic { v0, model },
        })
    }

    /// Grid-backed view; requires at least two snapshots for time
    /// interpolation.
    pub fn from_action_field(field: ActionField) -> Result<Self> {
        if field.times.len() < 2 {
            return Err(Error::invalid(
                "a grid velocity field needs at least 2 snapshots",
            ));
        }
        let n = field.grid.n;
        let dx = field.grid.dx();
        let mut grads = Vec::with_capacity(field.times.len());
        let mut interior_mags = Vec::new();
        for snap in &field.values {
            let mut g = vec![0.0; n];
            g[0] = (snap[1] - snap[0]) / dx;
            g[n - 1] = (snap[n - 1] - snap[n - 2]) / dx;
            for i in 1..n - 1 {
                g[i] = (snap[i + 1] - snap[i - 1]) / (2.0 * dx);
                interior_mags.push(g[i].abs());
            }
            grads.push(g);
        }
        interior_mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let typical_grad = interior_mags[interior_mags.len() / 2];
        Ok(Self {
            inner: ViewInner::Grid {
                field,
                grads,
                typical_grad,
            },
        })
    }

    pub fn dimension(&self) -> usize {
        match &self.inner {
            ViewInner::Analytic { v0, .. } => v0.len(),
            ViewInner::Grid { .. } => 1,
        }
    }
}

/// Velocity at (x, t). Grid views interpolate the node gradients linearly in
/// space and time (one-cell interior margin required); the analytic view is
/// exactly independent of x.
pub fn velocity_field(view: &VelocityFieldView, x: &[f64], t: f64) -> Result<Vec<f64>> {
    match &view.inner {
        ViewInner::Analytic { v0, model } => {
            model.check_dim(x)?;
            let k = model
                .uniform_force()
                .expect("analytic views only hold free/uniform-force models");
            Ok(v0
                .iter()
                .zip(&k)
                .map(|(v, ki)| v + ki * t / model.mass)
                .collect())
        }
        ViewInner::Grid {
            field,
            grads,
            typical_grad,
        } => {
            if x.len() != 1 {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    got: x.len(),
                });
            }
            let xq = x[0];
            let grid = &field.grid;
            let dx = grid.dx();
            // One-cell interior margin in space.
            if xq < grid.x(1) || xq > grid.x(grid.n - 2) {
                return Err(Error::OutOfDomain {
                    what: "x",
                    value: xq,
                });
            }
            let (t0, t1) = (field.times[0], *field.times.last().unwrap());
            if t < t0 || t > t1 {
                return Err(Error::OutOfDomain { what: "t", value: t });
            }

            let pos = (xq - grid.lo) / dx;
            let i = (pos.floor() as usize).clamp(1, grid.n - 3);
            let w = pos - i as f64;
            let threshold = KINK_FACTOR * (typical_grad + KINK_FLOOR);

            let sample = |j: usize| -> Result<f64> {
                let g = &grads[j];
                if (g[i + 1] - g[i]).abs() > threshold {
                    return Err(Error::NonSmoothField { x: xq, t });
                }
                Ok(g[i] + w * (g[i + 1] - g[i]))
            };

            let j = match field
                .times
                .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
            {
                Ok(j) => return Ok(vec![sample(j)? / field.model.mass]),
                Err(j) => j - 1,
            };
            let wt = (t - field.times[j]) / (field.times[j + 1] - field.times[j]);
            let a = sample(j)?;
            let b = sample(j + 1)?;
            Ok(vec![(a + wt * (b - a)) / field.model.mass])
        }
    }
}

/// Integrate dx/dt = v(x, t) from `x_start` over [t0, t1] with a classical
/// RK4 scheme. The returned trajectory is parametrized by s = t - t0. If the
/// path leaves the field domain mid-integration the error carries the
/// partial trajectory and the exit time.
pub fn integrate_pilot_trajectory(
    view: &VelocityFieldView,
    x_start: &[f64],
    t0: f64,
    t1: f64,
    dt: Option<f64>,
) -> Result<Trajectory> {
    if x_start.len() != view.dimension() {
        return Err(Error::DimensionMismatch {
            expected: view.dimension(),
            got: x_start.len(),
        });
    }
    if !(t1 > t0) {
        return Err(Error::invalid(format!(
            "integration needs t1 > t0, got [{t0}, {t1}]"
        )));
    }
    let h_default = (t1 - t0) / DEFAULT_PILOT_STEPS as f64;
    let h = match dt {
        Some(v) if v > 0.0 => v,
        Some(v) => return Err(Error::invalid(format!("dt must be positive, got {v}"))),
        None => h_default,
    };

    let dim = x_start.len();
    let mut times = vec![0.0];
    let mut positions = vec![x_start.to_vec()];
    let mut velocities: Vec<Vec<f64>> = Vec::new();

    let exit = |s: f64, times: &[f64], pos: &[Vec<f64>], vel: &[Vec<f64>], e: Error| -> Error {
        if pos.len() >= 2 && vel.len() >= pos.len() - 1 {
            // velocity at the last stored node is unavailable; reuse the
            // previous one so the partial trajectory stays well-formed
            let mut vels = vel.to_vec();
            while vels.len() < pos.len() {
                vels.push(vels.last().unwrap().clone());
            }
            Error::DomainExit {
                exit_time: t0 + s,
                partial: Box::new(
                    Trajectory::new(times.to_vec(), pos.to_vec(), vels)
                        .expect("partial samples are well-formed"),
                ),
            }
        } else {
            e
        }
    };

    let mut s = 0.0;
    let dur = t1 - t0;
    while s < dur {
        let step = h.min(dur - s);
        let t_abs = t0 + s;
        let x = positions.last().unwrap().clone();

        let k1 = match velocity_field(view, &x, t_abs) {
            Ok(v) => v,
            Err(e) => return Err(exit(s, &times, &positions, &velocities, e)),
        };
        velocities.push(k1.clone());

        let stage = |xs: &[f64], ts: f64| velocity_field(view, xs, ts);
        let mid1: Vec<f64> = (0..dim).map(|c| x[c] + 0.5 * step * k1[c]).collect();
        let k2 = match stage(&mid1, t_abs + 0.5 * step) {
            Ok(v) => v,
            Err(e) => return Err(exit(s, &times, &positions, &velocities, e)),
        };
        let mid2: Vec<f64> = (0..dim).map(|c| x[c] + 0.5 * step * k2[c]).collect();
        let k3 = match stage(&mid2, t_abs + 0.5 * step) {
            Ok(v) => v,
            Err(e) => return Err(exit(s, &times, &positions, &velocities, e)),
        };
        let endp: Vec<f64> = (0..dim).map(|c| x[c] + step * k3[c]).collect();
        let k4 = match stage(&endp, t_abs + step) {
            Ok(v) => v,
            Err(e) => return Err(exit(s, &times, &positions, &velocities, e)),
        };

        let x_new: Vec<f64> = (0..dim)
            .map(|c| x[c] + step / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]))
            .collect();
        s = if dur - (s + step) < 1e-15 * dur { dur } else { s + step };
        times.push(s);
        positions.push(x_new);
    }

    // Velocity at the final node.
    let x_end = positions.last().unwrap().clone();
    match velocity_field(view, &x_end, t1) {
        Ok(v) => velocities.push(v),
        Err(e) => {
            return Err(exit(dur, &times, &positions, &velocities, e));
        }
    }

    Trajectory::new(times, positions, velocities)
}

/// Mean velocity over the probe points at time t and the largest deviation
/// from that mean; a constant field reports zero deviation.
pub fn field_constancy_report(
    view: &VelocityFieldView,
    t: f64,
    probe_xs: &[Vec<f64>],
) -> Result<(Vec<f64>, f64)> {
    if probe_xs.is_empty() {
        return Err(Error::invalid("constancy report needs at least one probe"));
    }
    let dim = view.dimension();
    let mut vs = Vec::with_capacity(probe_xs.len());
    for x in probe_xs {
        vs.push(velocity_field(view, x, t)?);
    }
    let mut mean = vec![0.0; dim];
    for v in &vs {
        for c in 0..dim {
            mean[c] += v[c];
        }
    }
    for c in 0..dim {
        mean[c] /= vs.len() as f64;
    }
    let mut max_dev = 0.0f64;
    for v in &vs {
        let dev: f64 = (0..dim)
            .map(|c| (v[c] - mean[c]) * (v[c] - mean[c]))
            .sum::<f64>()
            .sqrt();
        max_dev = max_dev.max(dev);
    }
    Ok((mean, max_dev))
}
