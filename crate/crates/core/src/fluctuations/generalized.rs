use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::drift::DriftSystem;
use crate::error::{Error, Result};
use crate::linalg::general_eigen;

/// Eigenvalues with real part at or above this value are treated as unstable.
pub const INSTABILITY_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Character {
    Photon,
    /// Phonon-dominated; holds the mode label.
    Phonon(usize),
}

/// One eigenmode of the coupled system, counting a conjugate pair once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedMode {
    /// Γ = −2 Re λ (for a pair of real eigenvalues, minus their sum).
    pub rate: f64,
    /// |Im λ|.
    pub freq: f64,
    /// Representative eigenvalue with non-negative imaginary part.
    pub eigenvalue: Complex64,
    pub photon_weight: f64,
    /// Weight on each included phonon, by position in the drift system.
    pub phonon_weights: Vec<f64>,
    pub dominant: Character,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedModes {
    pub eigenvalues: Vec<Complex64>,
    /// Column k is the right eigenvector of `eigenvalues[k]`.
    pub eigenvectors: DMatrix<Complex64>,
    /// Ordered by ascending frequency.
    pub modes: Vec<GeneralizedMode>,
}

impl GeneralizedModes {
    pub fn rate_sum(&self) -> f64 {
        self.modes.iter().map(|m| m.rate).sum()
    }

    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// The mode with the largest photon weight.
    pub fn photon_mode(&self) -> Option<&GeneralizedMode> {
        self.modes.iter().max_by(|a, b| a.photon_weight.total_cmp(&b.photon_weight))
    }
}

fn weights(v: &[Complex64], n_modes: usize) -> (f64, Vec<f64>) {
    let total: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let photon = (v[0].norm_sqr() + v[1].norm_sqr()) / total;
    let phonons = (0..n_modes).map(|k| (v[2 + 2 * k].norm_sqr() + v[3 + 2 * k].norm_sqr()) / total).collect();
    (photon, phonons)
}

fn dominant(photon: f64, phonons: &[f64], labels: &[usize]) -> Character {
    let best = phonons.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1));
    match best {
        Some((k, &w)) if w > photon => Character::Phonon(labels[k]),
        _ => Character::Photon,
    }
}

/// Eigen-decomposition of the drift matrix grouped into generalized modes.
pub fn eigen_rates(system: &DriftSystem) -> Result<GeneralizedModes> {
    let (values, vectors) = general_eigen(&system.matrix)?;
    let max_re = values.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re >= INSTABILITY_THRESHOLD {
        return Err(Error::Instability(max_re));
    }
    let n = system.n_modes();
    let scale = values.iter().map(|l| l.norm()).fold(1.0, f64::max);
    let tol = 1e-10 * scale;
    let column = |k: usize| -> Vec<Complex64> { vectors.column(k).iter().copied().collect() };
    let mut modes = Vec::new();
    let mut upper = 0;
    let mut lower = 0;
    let mut reals: Vec<usize> = Vec::new();
    for (k, l) in values.iter().enumerate() {
        if l.im > tol {
            upper += 1;
            let (photon_weight, phonon_weights) = weights(&column(k), n);
            let dominant = dominant(photon_weight, &phonon_weights, &system.mode_labels);
            modes.push(GeneralizedMode {
                rate: -2.0 * l.re,
                freq: l.im,
                eigenvalue: *l,
                photon_weight,
                phonon_weights,
                dominant,
            });
        } else if l.im < -tol {
            lower += 1;
        } else {
            reals.push(k);
        }
    }
    if upper != lower || !reals.len().is_multiple_of(2) {
        return Err(Error::Linalg("drift eigenvalues are not closed under conjugation".into()));
    }
    reals.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re));
    for pair in reals.chunks(2) {
        let (wa, pa) = weights(&column(pair[0]), n);
        let (wb, pb) = weights(&column(pair[1]), n);
        let photon_weight = 0.5 * (wa + wb);
        let phonon_weights: Vec<f64> = pa.iter().zip(&pb).map(|(a, b)| 0.5 * (a + b)).collect();
        let dominant = dominant(photon_weight, &phonon_weights, &system.mode_labels);
        modes.push(GeneralizedMode {
            rate: -(values[pair[0]].re + values[pair[1]].re),
            freq: 0.0,
            eigenvalue: Complex64::new(0.5 * (values[pair[0]].re + values[pair[1]].re), 0.0),
            photon_weight,
            phonon_weights,
            dominant,
        });
    }
    modes.sort_by(|a, b| a.freq.total_cmp(&b.freq).then(a.rate.total_cmp(&b.rate)));
    Ok(GeneralizedModes { eigenvalues: values, eigenvectors: vectors, modes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluctuations::NoiseModel;

    #[test]
    fn toy_eigenvalues_match_hand_built_matrix() {
        let s = DriftSystem::from_parts(-5.0, Complex64::new(1.0, 0.0), &[5.0], &[Complex64::new(0.2, 0.0)], &NoiseModel::default())
            .unwrap();
        let g = eigen_rates(&s).unwrap();
        let mut re: Vec<f64> = g.eigenvalues.iter().map(|l| l.re).collect();
        re.sort_by(f64::total_cmp);
        let expect = [-0.958621550089904, -0.958621550089904, -0.041378449910096, -0.041378449910096];
        for (a, b) in re.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        for l in &g.eigenvalues {
            assert!((l.im.abs() - 4.996031797957941).abs() < 1e-12);
        }
        assert!((g.rate_sum() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn decoupled_rates() {
        let s = DriftSystem::from_parts(
            -3.0,
            Complex64::new(1.0, 0.0),
            &[1.0, 2.0],
            &[Complex64::new(0.0, 0.0); 2],
            &NoiseModel::default(),
        )
        .unwrap();
        let g = eigen_rates(&s).unwrap();
        assert_eq!(g.modes.len(), 3);
        let photon = g.photon_mode().unwrap();
        assert!((photon.rate - 2.0).abs() < 1e-12);
        assert_eq!(photon.dominant, Character::Photon);
        assert!(g.modes.iter().filter(|m| m.dominant != Character::Photon).all(|m| m.rate.abs() < 1e-12));
    }

    #[test]
    fn heating_side_is_unstable() {
        let s = DriftSystem::from_parts(5.0, Complex64::new(1.0, 0.0), &[5.0], &[Complex64::new(2.0, 0.0)], &NoiseModel::default())
            .unwrap();
        assert!(matches!(eigen_rates(&s), Err(Error::Instability(_))));
    }
}
