//! Su-Schrieffer-Heeger chain: free fermions on a periodic ring with
//! alternating hopping.
//!
//! The measured quantity is the greater function of the empty chain,
//! `G_k(t) = <0| c_k(t) c_k^dagger |0>`, with `c_k = N^{-1/2} sum_j e^{ikj} c_j`
//! over all sites. It has at most two frequencies: the two bands at cell
//! momentum `2k`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::models::TimeGrid;
use crate::signal::SampledSignal;

/// How the alternation amplitude enters the bond hopping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SshConvention {
    /// Bond `i` hops with `vnn * (1 + (-1)^i delta)`.
    #[default]
    MainText,
    /// Bond `i` hops with `vnn + (-1)^i delta / 2`.
    Supplement,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SshSpec {
    pub n_sites: usize,
    pub delta: f64,
    pub mu: f64,
    pub vnn: f64,
    /// Site momentum; must be a multiple of `2 pi / n_sites`.
    pub k: f64,
    pub convention: SshConvention,
}

impl Default for SshSpec {
    fn default() -> Self {
        Self { n_sites: 8, delta: 0.4, mu: -3.0, vnn: 1.0, k: PI / 2.0, convention: SshConvention::MainText }
    }
}

impl SshSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 4 || !self.n_sites.is_multiple_of(2) {
            return invalid(format!("n_sites must be even and >= 4, got {}", self.n_sites));
        }
        if !(self.delta.is_finite() && self.delta.abs() < 2.0) {
            return invalid(format!("|delta| must be < 2, got {}", self.delta));
        }
        if !(self.mu.is_finite() && self.vnn.is_finite() && self.k.is_finite()) {
            return invalid("SSH parameters must be finite");
        }
        let m = self.k * self.n_sites as f64 / (2.0 * PI);
        if (m - m.round()).abs() > 1e-9 {
            return invalid(format!(
                "k = {} is not commensurate with {} sites (must be 2*pi*m/{})",
                self.k, self.n_sites, self.n_sites
            ));
        }
        Ok(())
    }

    /// Hopping amplitude of the bond between sites `i` and `i + 1`.
    pub fn hopping(&self, bond: usize) -> f64 {
        let sign = if bond.is_multiple_of(2) { 1.0 } else { -1.0 };
        match self.convention {
            SshConvention::MainText => self.vnn * (1.0 + sign * self.delta),
            SshConvention::Supplement => self.vnn + sign * self.delta / 2.0,
        }
    }

    /// Closed-form band energies at cell momentum `2k`, ascending.
    pub fn bloch_energies(&self) -> [f64; 2] {
        let big_k = 2.0 * self.k;
        let off = Complex64::new(self.hopping(0), 0.0) + Complex64::from_polar(self.hopping(1), big_k);
        [-self.mu - off.norm(), -self.mu + off.norm()]
    }
}

/// Real-space single-particle Hamiltonian of the ring.
pub fn single_particle_hamiltonian(spec: &SshSpec) -> DMatrix<f64> {
    let n = spec.n_sites;
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        let t = spec.hopping(i);
        h[(i, j)] -= t;
        h[(j, i)] -= t;
        h[(i, i)] -= spec.mu;
    }
    h
}

/// Energies and weights `|<band|k>|^2` of the single-particle eigenstates
/// that overlap the momentum state, degenerate energies merged.
pub fn ssh_poles(spec: &SshSpec) -> Result<Vec<(f64, f64)>> {
    spec.validate()?;
    let n = spec.n_sites;
    let h = single_particle_hamiltonian(spec);
    let e = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("SSH diagonalization failed".into()))?;
    let norm = 1.0 / (n as f64).sqrt();
    let mut raw: Vec<(f64, f64)> = (0..n)
        .map(|b| {
            let amp: Complex64 = (0..n)
                .map(|j| Complex64::from_polar(norm * e.eigenvectors[(j, b)], spec.k * j as f64))
                .sum();
            (e.eigenvalues[b], amp.norm_sqr())
        })
        .collect();
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (en, w) in raw {
        match merged.last_mut() {
            Some((e0, acc)) if (en - *e0).abs() <= 1e-9 * (1.0 + en.abs()) => *acc += w,
            _ => merged.push((en, w)),
        }
    }
    merged.retain(|&(_, w)| w > 1e-12);
    Ok(merged)
}

/// `G_k(t) = sum_b |<b|k>|^2 e^{-i E_b t}` on a grid.
pub fn ssh_greens(spec: &SshSpec, grid: &TimeGrid) -> Result<SampledSignal> {
    let poles = ssh_poles(spec)?;
    let values = grid
        .times()
        .map(|t| poles.iter().map(|&(en, w)| Complex64::from_polar(w, -en * t)).sum())
        .collect();
    SampledSignal::new(grid.dt, values)
}
