//! Two-site Hubbard model solved by exact diagonalization in the 16-state
//! Fock space.
//!
//! Modes are ordered `(site 1, up), (site 1, down), (site 2, up), (site 2, down)`
//! and fermionic signs follow the Jordan-Wigner string over lower-indexed modes.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::models::TimeGrid;
use crate::poles::{Pole, PoleModel};
use crate::signal::SampledSignal;

const N_MODES: usize = 4;
const DIM: usize = 1 << N_MODES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    Up,
    Down,
}

/// Parameters of the dimer and of the measured Green's function.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DimerSpec {
    /// On-site repulsion.
    pub u: f64,
    /// Level energy; `eps = 0` is half filling.
    pub eps: f64,
    /// Inter-site hopping.
    pub v: f64,
    /// Inverse temperature.
    pub beta: f64,
    /// Site of the measured orbital, 1 or 2.
    pub site: usize,
    pub spin: Spin,
}

impl Default for DimerSpec {
    fn default() -> Self {
        Self { u: 5.0, eps: 2.3, v: 1.0, beta: 10.0, site: 1, spin: Spin::Up }
    }
}

impl DimerSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return invalid(format!("beta must be positive, got {}", self.beta));
        }
        if ![self.u, self.eps, self.v].iter().all(|x| x.is_finite()) {
            return invalid("dimer parameters must be finite");
        }
        if !(self.site == 1 || self.site == 2) {
            return invalid(format!("site must be 1 or 2, got {}", self.site));
        }
        Ok(())
    }

    fn mode(&self) -> usize {
        2 * (self.site - 1) + if self.spin == Spin::Up { 0 } else { 1 }
    }
}

/// Creation operator for `mode` in the occupation basis.
pub(crate) fn creation(mode: usize) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(DIM, DIM);
    for s in 0..DIM {
        if s & (1 << mode) == 0 {
            let below = (s & ((1 << mode) - 1)).count_ones();
            let sign = if below.is_multiple_of(2) { 1.0 } else { -1.0 };
            c[(s | (1 << mode), s)] = sign;
        }
    }
    c
}

fn number(mode: usize) -> DMatrix<f64> {
    DMatrix::from_fn(DIM, DIM, |i, j| if i == j && i & (1 << mode) != 0 { 1.0 } else { 0.0 })
}

/// Many-body Hamiltonian `H_0 + H_I`.
pub fn hamiltonian(spec: &DimerSpec) -> DMatrix<f64> {
    let cd: Vec<_> = (0..N_MODES).map(creation).collect();
    let n: Vec<_> = (0..N_MODES).map(number).collect();
    let mut h = DMatrix::zeros(DIM, DIM);
    for nm in &n {
        h -= nm * spec.eps;
    }
    for s in 0..2 {
        let hop = &cd[s] * cd[2 + s].transpose() + &cd[2 + s] * cd[s].transpose();
        h -= hop * spec.v;
    }
    for site in [0, 2] {
        let pair = &n[site] * &n[site + 1];
        h += (pair - (&n[site] + &n[site + 1]) * 0.5) * spec.u;
    }
    h
}

/// Total particle number operator.
pub fn total_number() -> DMatrix<f64> {
    (0..N_MODES).map(number).fold(DMatrix::zeros(DIM, DIM), |acc, n| acc + n)
}

/// Diagonalized dimer at finite temperature.
#[derive(Debug, Clone)]
pub struct DimerModel {
    spec: DimerSpec,
    energies: Vec<f64>,
    states: DMatrix<f64>,
    /// Boltzmann weights `exp(-beta (E - E_min)) / Z'`, summing to one.
    occupations: Vec<f64>,
}

impl DimerModel {
    pub fn new(spec: DimerSpec) -> Result<Self> {
        spec.validate()?;
        let h = hamiltonian(&spec);
        let e = SymmetricEigen::try_new(h, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("dimer diagonalization failed".into()))?;
        let mut order: Vec<usize> = (0..DIM).collect();
        order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
        let energies: Vec<f64> = order.iter().map(|&k| e.eigenvalues[k]).collect();
        let states = DMatrix::from_fn(DIM, DIM, |i, j| e.eigenvectors[(i, order[j])]);
        let e_min = energies[0];
        let boltz: Vec<f64> = energies.iter().map(|&x| (-spec.beta * (x - e_min)).exp()).collect();
        let z: f64 = boltz.iter().sum();
        let occupations = boltz.iter().map(|w| w / z).collect();
        Ok(Self { spec, energies, states, occupations })
    }

    pub fn spec(&self) -> &DimerSpec {
        &self.spec
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Trace of the thermal density matrix.
    pub fn density_matrix_trace(&self) -> f64 {
        self.occupations.iter().sum()
    }

    /// Thermal density matrix in the occupation basis.
    pub fn density_matrix(&self) -> DMatrix<f64> {
        let w = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.occupations.clone()));
        &self.states * w * self.states.transpose()
    }

    /// `<n>` of the measured orbital.
    pub fn density(&self) -> f64 {
        let n = number(self.spec.mode());
        (self.density_matrix() * n).trace()
    }

    /// Lehmann poles of `G(t) = <c(t) c^dagger>`: frequencies `E_n - E_m`
    /// with weights `rho_m |<n|c^dagger|m>|^2`, degenerate frequencies merged.
    /// Poles with weight at or below `min_weight` are dropped.
    pub fn lehmann_poles(&self, min_weight: f64) -> Vec<(f64, f64)> {
        let cd = creation(self.spec.mode());
        let elem = self.states.transpose() * cd * &self.states;
        let mut raw: Vec<(f64, f64)> = Vec::new();
        for m in 0..DIM {
            for n in 0..DIM {
                let w = self.occupations[m] * elem[(n, m)].powi(2);
                if w > 0.0 {
                    raw.push((self.energies[n] - self.energies[m], w));
                }
            }
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (om, w) in raw {
            match merged.last_mut() {
                Some((o, acc)) if (om - *o).abs() <= 1e-9 * (1.0 + om.abs()) => *acc += w,
                _ => merged.push((om, w)),
            }
        }
        merged.retain(|&(_, w)| w > min_weight);
        merged
    }

    /// Lehmann representation as a [`PoleModel`] on time step `dt`.
    pub fn pole_model(&self, dt: f64, min_weight: f64) -> Result<PoleModel> {
        let poles = self
            .lehmann_poles(min_weight)
            .into_iter()
            .map(|(omega, weight)| Pole { omega, weight })
            .collect();
        PoleModel::new_unwrapped(poles, dt)
    }

    /// `G(t)` at a single time.
    pub fn greens_at(&self, t: f64) -> Complex64 {
        self.lehmann_poles(0.0)
            .iter()
            .map(|&(om, w)| Complex64::from_polar(w, -om * t))
            .sum()
    }

    /// `G(t) = Tr[e^{(-beta + it)H} c e^{-itH} c^dagger] / Z` on a grid.
    pub fn greens(&self, grid: &TimeGrid) -> Result<SampledSignal> {
        let poles = self.lehmann_poles(0.0);
        let values = grid
            .times()
            .map(|t| poles.iter().map(|&(om, w)| Complex64::from_polar(w, -om * t)).sum())
            .collect();
        SampledSignal::new(grid.dt, values)
    }
}

/// Convenience wrapper: sampled `G(t)` of a dimer spec.
pub fn dimer_greens(spec: &DimerSpec, grid: &TimeGrid) -> Result<SampledSignal> {
    DimerModel::new(spec.clone())?.greens(grid)
}
