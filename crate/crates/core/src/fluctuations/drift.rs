use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumState;
use crate::error::{Error, Result};
use crate::modes::ModeDecomposition;

/// Modes with |χ_α| at or below this value (units of κ) count as decoupled.
pub const DEFAULT_COUPLING_THRESHOLD: f64 = 1e-8;

/// Damping rate Γ̄ and bath occupation N̄ of one input channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub rate: f64,
    pub occupation: f64,
}

impl Channel {
    pub const fn new(rate: f64, occupation: f64) -> Self {
        Channel { rate, occupation }
    }

    fn diffusion(&self) -> f64 {
        self.rate * (2.0 * self.occupation + 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub cavity: Channel,
    /// Per-mode phonon baths; modes past the end of the list use `default_phonon`.
    pub phonons: Vec<Channel>,
    pub default_phonon: Channel,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel { cavity: Channel::new(1.0, 0.0), phonons: Vec::new(), default_phonon: Channel::new(0.0, 0.0) }
    }
}

impl NoiseModel {
    pub fn phonon(&self, alpha: usize) -> Channel {
        self.phonons.get(alpha).copied().unwrap_or(self.default_phonon)
    }
}

/// Linear drift and diffusion of the quadrature fluctuations, dX/dt = M X + noise.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSystem {
    pub matrix: DMatrix<f64>,
    /// Diagonal diffusion D̃ with entries Γ̄(2N̄ + 1).
    pub diffusion: DMatrix<f64>,
    pub noise: NoiseModel,
    pub delta_eff: f64,
    pub amplitude: Complex64,
    pub freqs: Vec<f64>,
    pub couplings: Vec<Complex64>,
    /// Index of each included phonon in the full mode decomposition.
    pub mode_labels: Vec<usize>,
}

impl DriftSystem {
    /// Assembles the system from mode data. `noise.phonon(α)` is looked up by
    /// position in `freqs`.
    pub fn from_parts(
        delta_eff: f64,
        amplitude: Complex64,
        freqs: &[f64],
        couplings: &[Complex64],
        noise: &NoiseModel,
    ) -> Result<Self> {
        let labels: Vec<usize> = (0..freqs.len()).collect();
        Self::assemble(delta_eff, amplitude, freqs, couplings, noise, labels)
    }

    fn assemble(
        delta_eff: f64,
        amplitude: Complex64,
        freqs: &[f64],
        couplings: &[Complex64],
        noise: &NoiseModel,
        mode_labels: Vec<usize>,
    ) -> Result<Self> {
        if freqs.len() != couplings.len() || freqs.len() != mode_labels.len() {
            return Err(Error::InvalidParameter("frequency and coupling lists differ in length".into()));
        }
        let kappa = noise.cavity.rate;
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter("cavity damping must be positive".into()));
        }
        let dim = 2 * (freqs.len() + 1);
        let mut m = DMatrix::zeros(dim, dim);
        let mut d = DMatrix::zeros(dim, dim);
        m[(0, 0)] = -kappa;
        m[(1, 1)] = -kappa;
        m[(0, 1)] = -delta_eff;
        m[(1, 0)] = delta_eff;
        d[(0, 0)] = noise.cavity.diffusion();
        d[(1, 1)] = noise.cavity.diffusion();
        for (k, ((&w, chi), &label)) in freqs.iter().zip(couplings).zip(&mode_labels).enumerate() {
            let i = 2 + 2 * k;
            let bath = noise.phonon(label);
            m[(i, i)] = -bath.rate;
            m[(i + 1, i + 1)] = -bath.rate;
            m[(i, i + 1)] = w;
            m[(i + 1, i)] = -w;
            m[(0, i)] = 2.0 * chi.im;
            m[(1, i)] = -2.0 * chi.re;
            m[(i + 1, 0)] = -2.0 * chi.re;
            m[(i + 1, 1)] = -2.0 * chi.im;
            d[(i, i)] = bath.diffusion();
            d[(i + 1, i + 1)] = bath.diffusion();
        }
        Ok(DriftSystem {
            matrix: m,
            diffusion: d,
            noise: noise.clone(),
            delta_eff,
            amplitude,
            freqs: freqs.to_vec(),
            couplings: couplings.to_vec(),
            mode_labels,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.freqs.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The subsystem made of the listed phonons (positions in this system).
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let freqs: Vec<f64> = keep.iter().map(|&k| self.freqs[k]).collect();
        let couplings: Vec<Complex64> = keep.iter().map(|&k| self.couplings[k]).collect();
        let labels: Vec<usize> = keep.iter().map(|&k| self.mode_labels[k]).collect();
        Self::assemble(self.delta_eff, self.amplitude, &freqs, &couplings, &self.noise, labels)
    }

    /// Drops phonons that neither couple to the cavity (|χ| ≤ threshold) nor
    /// to a bath; such modes are undamped and have no steady state. Returns
    /// the reduced system and the labels of the excluded modes.
    pub fn coupled_subsystem(&self, threshold: f64) -> Result<(Self, Vec<usize>)> {
        let mut keep = Vec::new();
        let mut excluded = Vec::new();
        for k in 0..self.n_modes() {
            let label = self.mode_labels[k];
            if self.couplings[k].norm() > threshold || self.noise.phonon(label).rate > 0.0 {
                keep.push(k);
            } else {
                excluded.push(label);
            }
        }
        Ok((self.restrict(&keep)?, excluded))
    }
}

/// Drift system of an equilibrium and its normal modes.
pub fn build_drift_system(state: &EquilibriumState, modes: &ModeDecomposition, noise: &NoiseModel) -> Result<DriftSystem> {
    let labels = (0..modes.len()).collect();
    DriftSystem::assemble(state.delta_eff(), state.field.amplitude, &modes.freqs, &modes.couplings, noise, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_coupling_matches_printed_block() {
        let chi = 0.3;
        let s = DriftSystem::from_parts(-2.0, Complex64::new(1.0, 0.0), &[4.0], &[Complex64::new(chi, 0.0)], &NoiseModel::default())
            .unwrap();
        let m = &s.matrix;
        // −χ(σx − iσy) rendered real: [[0, 0], [−2χ, 0]].
        assert_eq!((m[(0, 2)], m[(0, 3)], m[(1, 2)], m[(1, 3)]), (0.0, 0.0, -2.0 * chi, 0.0));
        assert_eq!((m[(2, 0)], m[(2, 1)], m[(3, 0)], m[(3, 1)]), (0.0, 0.0, -2.0 * chi, 0.0));
        assert_eq!((m[(0, 1)], m[(1, 0)]), (2.0, -2.0));
        assert_eq!((m[(2, 3)], m[(3, 2)]), (4.0, -4.0));
    }

    #[test]
    fn decoupled_modes_are_dropped() {
        let chis = [Complex64::new(0.0, 0.0), Complex64::new(0.1, 0.2), Complex64::new(1e-10, 0.0)];
        let s = DriftSystem::from_parts(-1.0, Complex64::new(1.0, 0.0), &[1.0, 2.0, 3.0], &chis, &NoiseModel::default()).unwrap();
        let (r, excluded) = s.coupled_subsystem(DEFAULT_COUPLING_THRESHOLD).unwrap();
        assert_eq!(excluded, vec![0, 2]);
        assert_eq!(r.mode_labels, vec![1]);
        assert_eq!(r.dim(), 4);
    }
}
