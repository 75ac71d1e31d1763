//! Exactly solvable generators used as ground truth, plus noise injection.

pub mod dimer;
pub mod noise;
pub mod ssh;

pub use dimer::{dimer_greens, DimerModel, DimerSpec, Spin};
pub use noise::{add_noise, NoiseSpec, NoiseTarget};
pub use ssh::{ssh_greens, SshConvention, SshSpec};

use crate::error::{invalid, Result};

/// Uniform time grid `t_j = j * dt`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return invalid(format!("time step must be positive, got {dt}"));
        }
        if n == 0 {
            return invalid("time grid needs at least one point");
        }
        Ok(Self { dt, n })
    }

    /// Grid covering `[0, t_max]` with step `dt`.
    pub fn up_to(t_max: f64, dt: f64) -> Result<Self> {
        if !(t_max.is_finite() && t_max >= 0.0) {
            return invalid(format!("t_max must be nonnegative, got {t_max}"));
        }
        Self::new(dt, (t_max / dt).round() as usize + 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| j as f64 * self.dt)
    }
}
