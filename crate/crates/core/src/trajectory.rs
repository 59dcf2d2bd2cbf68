use crate::error::{Error, Result};

/// A time-sampled path `x(s)` with velocities, parametrized by the path time
/// `s` which runs from 0 to the duration of the motion.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Strictly increasing sample times, `times[0] == 0`.
    pub times: Vec<f64>,
    /// Position vector at each sample time.
    pub positions: Vec<Vec<f64>>,
    /// Velocity vector at each sample time.
    pub velocities: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, positions: Vec<Vec<f64>>, velocities: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::invalid("trajectory needs at least 2 samples"));
        }
        if positions.len() != times.len() || velocities.len() != times.len() {
            return Err(Error::invalid(format!(
                "trajectory sample counts differ: {} times, {} positions, {} velocities",
                times.len(),
                positions.len(),
                velocities.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::invalid("trajectory times must start at 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("trajectory times must be strictly increasing"));
        }
        let dim = positions[0].len();
        if dim == 0 {
            return Err(Error::invalid("trajectory positions must be non-empty vectors"));
        }
        if positions.iter().any(|p| p.len() != dim) || velocities.iter().any(|v| v.len() != dim) {
            return Err(Error::invalid("trajectory samples have inconsistent dimensions"));
        }
        Ok(Self {
            times,
            positions,
            velocities,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: at least 2 samples
    }

    pub fn dimension(&self) -> usize {
        self.positions[0].len()
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn start_position(&self) -> &[f64] {
        &self.positions[0]
    }

    pub fn end_position(&self) -> &[f64] {
        self.positions.last().unwrap()
    }

    pub fn initial_velocity(&self) -> &[f64] {
        &self.velocities[0]
    }
}
