use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::drift::DriftSystem;
use super::generalized::{eigen_rates, GeneralizedModes};
use crate::error::{Error, Result};
use crate::linalg::{min_hermitian_eigenvalue, solve_lyapunov, symplectic_eigenvalues, symplectic_form};

const PHYSICALITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceRoute {
    Eigenbasis,
    Lyapunov,
}

/// Bipartition of the cavity against a set of phonons. Mode indices are
/// positions in the covariance matrix (0 is the first phonon).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    CavityVsMode(usize),
    CavityVsModes(Vec<usize>),
    CavityVsAll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupations {
    pub phonons: Vec<f64>,
    pub photon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub covariance: DMatrix<f64>,
    /// Occupation of each included phonon, aligned with `mode_labels`.
    pub occupations: Vec<f64>,
    pub photon_fluctuation_number: f64,
    pub mode_labels: Vec<usize>,
    pub route: CovarianceRoute,
    /// Largest entry difference between the two covariance routes, when both succeed.
    pub route_discrepancy: Option<f64>,
    /// Keys use mode labels: `CavityVsMode(α)` refers to mode α of the decomposition.
    pub log_negativity: BTreeMap<Partition, f64>,
    pub generalized: GeneralizedModes,
}

impl SteadyState {
    pub fn occupation_of(&self, label: usize) -> Option<f64> {
        self.mode_labels.iter().position(|&l| l == label).map(|k| self.occupations[k])
    }
}

/// Σ = B S Bᵀ with S_γε = −2 (B⁻¹ D̃ B⁻ᵀ)_γε / (λ_γ + λ_ε).
pub fn steady_covariance_eigenbasis(system: &DriftSystem, modes: &GeneralizedModes) -> Result<DMatrix<f64>> {
    let b = &modes.eigenvectors;
    let binv = b.clone().try_inverse().ok_or(Error::Conditioning(0.0))?;
    let d = system.diffusion.map(|x| Complex64::new(x, 0.0));
    let core = &binv * d * binv.transpose();
    let n = b.nrows();
    let mut s = DMatrix::<Complex64>::zeros(n, n);
    for g in 0..n {
        for e in 0..n {
            let den = modes.eigenvalues[g] + modes.eigenvalues[e];
            if den.norm() < 1e-10 {
                return Err(Error::Conditioning(den.norm()));
            }
            s[(g, e)] = core[(g, e)] * (-2.0) / den;
        }
    }
    let sigma = b * s * b.transpose();
    let imag = sigma.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    let real = sigma.map(|z| z.re);
    if imag > 1e-6 * real.amax().max(1.0) {
        return Err(Error::Conditioning(imag));
    }
    Ok(0.5 * (&real + real.transpose()))
}

/// Solves M Σ + Σ Mᵀ + 2D̃ = 0 directly.
pub fn steady_covariance_lyapunov(system: &DriftSystem) -> Result<DMatrix<f64>> {
    solve_lyapunov(&system.matrix, &(&system.diffusion * 2.0))
}

fn check_physical(cov: &DMatrix<f64>) -> Result<()> {
    let om = symplectic_form(cov.nrows() / 2);
    let l = min_hermitian_eigenvalue(cov, &om);
    if l < -PHYSICALITY_TOLERANCE {
        return Err(Error::Unphysical(format!("Sigma + i Omega has eigenvalue {l:e}")));
    }
    Ok(())
}

fn occupation(cov: &DMatrix<f64>, i: usize) -> Result<f64> {
    let n = 0.5 * (cov[(i, i)] / 2.0 + cov[(i + 1, i + 1)] / 2.0 - 1.0);
    if n < -PHYSICALITY_TOLERANCE {
        Err(Error::Unphysical(format!("negative occupation {n:e}")))
    } else {
        Ok(n.max(0.0))
    }
}

/// Phonon occupations n = ½(⟨2Q²⟩/2 + ⟨2P²⟩/2 − 1) and the cavity analogue.
pub fn mode_occupations(cov: &DMatrix<f64>) -> Result<Occupations> {
    let modes = cov.nrows() / 2;
    let phonons = (1..modes).map(|k| occupation(cov, 2 * k)).collect::<Result<Vec<_>>>()?;
    Ok(Occupations { phonons, photon: occupation(cov, 0)? })
}

/// Logarithmic negativity max{0, −ln 2ν₋} of the cavity against the chosen
/// phonons, with the partial transpose flipping the cavity momentum.
pub fn log_negativity(cov: &DMatrix<f64>, partition: &Partition) -> Result<f64> {
    let n_modes = cov.nrows() / 2 - 1;
    let chosen: Vec<usize> = match partition {
        Partition::CavityVsMode(k) => vec![*k],
        Partition::CavityVsModes(ks) => ks.clone(),
        Partition::CavityVsAll => (0..n_modes).collect(),
    };
    if let Some(k) = chosen.iter().find(|&&k| k >= n_modes) {
        return Err(Error::InvalidParameter(format!("mode {k} is not part of the covariance")));
    }
    let mut idx = vec![0, 1];
    for k in &chosen {
        idx.extend([2 + 2 * k, 3 + 2 * k]);
    }
    let reduced = DMatrix::from_fn(idx.len(), idx.len(), |i, j| cov[(idx[i], idx[j])]);
    check_physical(&reduced)?;
    let mut v = reduced * 0.5;
    for j in 0..idx.len() {
        v[(1, j)] = -v[(1, j)];
        v[(j, 1)] = -v[(j, 1)];
    }
    let nu = symplectic_eigenvalues(&v).into_iter().fold(f64::INFINITY, f64::min);
    Ok((-(2.0 * nu).ln()).max(0.0))
}

/// Steady state of a stable system: covariance by the eigenbasis formula with
/// the Lyapunov solve as cross-check and fallback, occupations and the
/// cavity-vs-mode and cavity-vs-all log-negativities.
pub fn steady_state(system: &DriftSystem) -> Result<SteadyState> {
    let generalized = eigen_rates(system)?;
    let max_re = generalized.max_real_part();
    if max_re >= 0.0 {
        return Err(Error::Instability(max_re));
    }
    let eig = steady_covariance_eigenbasis(system, &generalized);
    let lyap = steady_covariance_lyapunov(system);
    let (covariance, route, route_discrepancy) = match (eig, lyap) {
        (Ok(e), Ok(l)) => {
            let diff = (&e - &l).amax();
            log::debug!("covariance routes differ by {diff:e}");
            (e, CovarianceRoute::Eigenbasis, Some(diff))
        }
        (Ok(e), Err(err)) => {
            log::warn!("Lyapunov route failed ({err}); using eigenbasis result");
            (e, CovarianceRoute::Eigenbasis, None)
        }
        (Err(err), Ok(l)) => {
            log::warn!("eigenbasis route failed ({err}); using Lyapunov result");
            (l, CovarianceRoute::Lyapunov, None)
        }
        (Err(err), Err(_)) => return Err(err),
    };
    check_physical(&covariance)?;
    let occ = mode_occupations(&covariance)?;
    let mut log_neg = BTreeMap::new();
    log_neg.insert(Partition::CavityVsAll, log_negativity(&covariance, &Partition::CavityVsAll)?);
    for (k, &label) in system.mode_labels.iter().enumerate() {
        log_neg.insert(Partition::CavityVsMode(label), log_negativity(&covariance, &Partition::CavityVsMode(k))?);
    }
    Ok(SteadyState {
        covariance,
        occupations: occ.phonons,
        photon_fluctuation_number: occ.photon,
        mode_labels: system.mode_labels.clone(),
        route,
        route_discrepancy,
        log_negativity: log_neg,
        generalized,
    })
}

/// Phonon decay rates below this fraction of the largest drift eigenvalue
/// modulus are beneath double-precision resolution.
pub const RATE_RESOLUTION: f64 = 1e-9;

/// [`steady_state`], retried without the slowest phonon while the solve
/// fails and that phonon decays slower than [`RATE_RESOLUTION`]. Returns the
/// solved subsystem and the labels that were dropped.
pub fn resolvable_steady_state(system: &DriftSystem) -> Result<(SteadyState, DriftSystem, Vec<usize>)> {
    let mut current = system.clone();
    let mut dropped = Vec::new();
    loop {
        let err = match steady_state(&current) {
            Ok(s) => return Ok((s, current, dropped)),
            Err(e) => e,
        };
        let Ok(g) = eigen_rates(&current) else { return Err(err) };
        let scale = g.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
        let slowest = (0..current.n_modes())
            .map(|k| {
                let rate = g
                    .modes
                    .iter()
                    .max_by(|a, b| a.phonon_weights[k].total_cmp(&b.phonon_weights[k]))
                    .map_or(0.0, |m| m.rate);
                (k, rate)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match slowest {
            Some((k, rate)) if rate <= RATE_RESOLUTION * scale => {
                dropped.push(current.mode_labels[k]);
                let keep: Vec<usize> = (0..current.n_modes()).filter(|&j| j != k).collect();
                current = current.restrict(&keep)?;
            }
            _ => return Err(err),
        }
    }
}

/// Row-major textual dump of a covariance matrix at full precision.
pub fn write_covariance<W: std::io::Write>(cov: &DMatrix<f64>, mut out: W) -> std::io::Result<()> {
    for i in 0..cov.nrows() {
        let row: Vec<String> = (0..cov.ncols()).map(|j| format!("{:.16e}", cov[(i, j)])).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluctuations::{Channel, NoiseModel};

    fn toy(chi: f64) -> DriftSystem {
        DriftSystem::from_parts(-5.0, Complex64::new(1.0, 0.0), &[5.0], &[Complex64::new(chi, 0.03)], &NoiseModel::default())
            .unwrap()
    }

    #[test]
    fn routes_agree() {
        let s = toy(0.4);
        let g = eigen_rates(&s).unwrap();
        let a = steady_covariance_eigenbasis(&s, &g).unwrap();
        let b = steady_covariance_lyapunov(&s).unwrap();
        assert!((&a - &b).amax() < 1e-10);
    }

    #[test]
    fn decoupled_cavity_is_vacuum() {
        let s = DriftSystem::from_parts(-2.0, Complex64::new(1.0, 0.0), &[], &[], &NoiseModel::default()).unwrap();
        let g = eigen_rates(&s).unwrap();
        let a = steady_covariance_eigenbasis(&s, &g).unwrap();
        assert!((a - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn thermal_phonon() {
        let noise = NoiseModel { phonons: vec![Channel::new(0.1, 3.0)], ..NoiseModel::default() };
        let s = DriftSystem::from_parts(-2.0, Complex64::new(1.0, 0.0), &[1.5], &[Complex64::new(0.0, 0.0)], &noise).unwrap();
        let st = steady_state(&s).unwrap();
        assert!((st.covariance[(2, 2)] - 7.0).abs() < 1e-10);
        assert!((st.occupations[0] - 3.0).abs() < 1e-10);
        assert_eq!(st.log_negativity[&Partition::CavityVsAll], 0.0);
    }

    #[test]
    fn negativity_of_vacuum_is_zero() {
        let id = DMatrix::identity(4, 4);
        assert_eq!(log_negativity(&id, &Partition::CavityVsAll).unwrap(), 0.0);
        assert!(log_negativity(&(id * 0.5), &Partition::CavityVsAll).is_err());
    }
}
