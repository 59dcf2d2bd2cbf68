//! Mechanical model: mass, potential, Lagrangian evaluation, and the exact
//! closed-form expressions for the free / uniform-force family that the
//! numerical routes are validated against.

use crate::error::{Error, Result};
use crate::vecmath as vm;

/// Potential energy family.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// V(x) = 0.
    Free,
    /// Uniform force field k: V(x) = -k . x.
    Linear { k: Vec<f64> },
    /// Isotropic oscillator: V(x) = m w^2 |x|^2 / 2.
    Harmonic { omega: f64 },
}

/// Mass, spatial dimension and potential of the mechanical system.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub mass: f64,
    pub dimension: usize,
    pub potential: PotentialSpec,
}

impl ModelSpec {
    pub fn new(mass: f64, dimension: usize, potential: PotentialSpec) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::invalid(format!("mass must be positive, got {mass}")));
        }
        if !(1..=3).contains(&dimension) {
            return Err(Error::invalid(format!(
                "dimension must be 1, 2 or 3, got {dimension}"
            )));
        }
        match &potential {
            PotentialSpec::Free => {}
            PotentialSpec::Linear { k } => {
                if k.len() != dimension {
                    return Err(Error::DimensionMismatch {
                        expected: dimension,
                        got: k.len(),
                    });
                }
                if k.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("force vector k must be finite"));
                }
            }
            PotentialSpec::Harmonic { omega } => {
                if !(*omega > 0.0) || !omega.is_finite() {
                    return Err(Error::invalid(format!(
                        "harmonic frequency must be positive, got {omega}"
                    )));
                }
            }
        }
        Ok(Self {
            mass,
            dimension,
            potential,
        })
    }

    pub fn free(mass: f64, dimension: usize) -> Result<Self> {
        Self::new(mass, dimension, PotentialSpec::Free)
    }

    pub fn linear(mass: f64, k: Vec<f64>) -> Result<Self> {
        let dim = k.len();
        Self::new(mass, dim, PotentialSpec::Linear { k })
    }

    pub fn harmonic(mass: f64, dimension: usize, omega: f64) -> Result<Self> {
        Self::new(mass, dimension, PotentialSpec::Harmonic { omega })
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Force vector of the uniform-force family: zeros for `Free`, `k` for
    /// `Linear`, `None` for potentials without a constant force.
    pub(crate) fn uniform_force(&self) -> Option<Vec<f64>> {
        match &self.potential {
            PotentialSpec::Free => Some(vec![0.0; self.dimension]),
            PotentialSpec::Linear { k } => Some(k.clone()),
            PotentialSpec::Harmonic { .. } => None,
        }
    }

    /// Potential energy V(x).
    pub fn eval_potential(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(match &self.potential {
            PotentialSpec::Free => 0.0,
            PotentialSpec::Linear { k } => -vm::dot(k, x),
            PotentialSpec::Harmonic { omega } => {
                0.5 * self.mass * omega * omega * vm::norm_sq(x)
            }
        })
    }

    /// Gradient of the potential at x.
    pub fn grad_potential(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(match &self.potential {
            PotentialSpec::Free => vec![0.0; self.dimension],
            PotentialSpec::Linear { k } => k.iter().map(|v| -v).collect(),
            PotentialSpec::Harmonic { omega } => {
                vm::scale(x, self.mass * omega * omega)
            }
        })
    }

    /// Lagrangian L(x, v, t) = m|v|^2/2 - V(x). The shipped potentials are
    /// time-independent, so `t` does not enter.
    pub fn eval_lagrangian(&self, x: &[f64], v: &[f64], _t: f64) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(v)?;
        Ok(0.5 * self.mass * vm::norm_sq(v) - self.eval_potential(x)?)
    }
}

fn require_uniform_force(spec: &ModelSpec) -> Result<Vec<f64>> {
    spec.uniform_force().ok_or(Error::UnsupportedOracle(
        "closed forms exist only for the free and uniform-force potentials",
    ))
}

/// Closed-form boundary-value action between (x0, 0) and (x, t) in a
/// uniform force field k (k = 0 for the free particle):
///
///   m |x - x0|^2 / (2 t) + k.(x + x0) t / 2 - |k|^2 t^3 / (24 m)
pub fn analytic_el_action_linear(spec: &ModelSpec, x0: &[f64], x: &[f64], t: f64) -> Result<f64> {
    spec.check_dim(x0)?;
    spec.check_dim(x)?;
    if !(t > 0.0) {
        return Err(Error::invalid(format!(
            "boundary-value action requires t > 0, got {t}"
        )));
    }
    let k = require_uniform_force(spec)?;
    let d = vm::sub(x, x0);
    Ok(spec.mass * vm::norm_sq(&d) / (2.0 * t) + vm::dot(&k, &vm::add(x, x0)) * t / 2.0
        - vm::norm_sq(&k) * t * t * t / (24.0 * spec.mass))
}

/// Position at path time `s` of the minimizing trajectory between (x0, 0)
/// and (x, t) in a uniform force field. The endpoints are reproduced
/// exactly.
pub fn analytic_optimal_trajectory_linear(
    spec: &ModelSpec,
    x0: &[f64],
    x: &[f64],
    t: f64,
    s: f64,
) -> Result<Vec<f64>> {
    spec.check_dim(x0)?;
    spec.check_dim(x)?;
    if !(t > 0.0) {
        return Err(Error::invalid(format!("trajectory requires t > 0, got {t}")));
    }
    if !(0.0..=t).contains(&s) {
        return Err(Error::invalid(format!("path time s = {s} outside [0, {t}]")));
    }
    let k = require_uniform_force(spec)?;
    if s == 0.0 {
        return Ok(x0.to_vec());
    }
    if s == t {
        return Ok(x.to_vec());
    }
    // x0 + (x - x0) s/t + k (s^2 - t s) / (2 m)
    let mut out = vm::add_scaled(x0, s / t, &vm::sub(x, x0));
    let c = (s * s - t * s) / (2.0 * spec.mass);
    out = vm::add_scaled(&out, c, &k);
    Ok(out)
}

/// Optimal initial velocity of the boundary-value problem in a uniform
/// force field: (x - x0)/t - k t / (2 m).
pub fn analytic_initial_velocity(spec: &ModelSpec, x0: &[f64], x: &[f64], t: f64) -> Result<Vec<f64>> {
    spec.check_dim(x0)?;
    spec.check_dim(x)?;
    if !(t > 0.0) {
        return Err(Error::invalid(format!(
            "initial velocity requires t > 0, got {t}"
        )));
    }
    let k = require_uniform_force(spec)?;
    Ok(vm::add_scaled(
        &vm::scale(&vm::sub(x, x0), 1.0 / t),
        -t / (2.0 * spec.mass),
        &k,
    ))
}

/// Closed-form field action for a uniform force field with the linear
/// initial data S0(x) = m v0 . x:
///
///   m v0.x - m|v0|^2 t / 2 + k.x t - k.v0 t^2 / 2 - |k|^2 t^3 / (6 m)
pub fn analytic_hj_action_linear(spec: &ModelSpec, v0: &[f64], x: &[f64], t: f64) -> Result<f64> {
    spec.check_dim(v0)?;
    spec.check_dim(x)?;
    if !(t >= 0.0) {
        return Err(Error::invalid(format!(
            "field action requires t >= 0, got {t}"
        )));
    }
    let k = require_uniform_force(spec)?;
    Ok(spec.mass * vm::dot(v0, x) - 0.5 * spec.mass * vm::norm_sq(v0) * t + vm::dot(&k, x) * t
        - 0.5 * vm::dot(&k, v0) * t * t
        - vm::norm_sq(&k) * t * t * t / (6.0 * spec.mass))
}
