//! Normal modes of the chain around an equilibrium and their coupling to the
//! cavity field fluctuations.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::equilibrium::EquilibriumState;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Lamb-Dicke parameters above this value trigger a warning.
pub const LAMB_DICKE_WARNING: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDecomposition {
    /// Ascending mode frequencies ω_α in units of κ.
    pub freqs: Vec<f64>,
    /// Column α holds the normalized displacement pattern M_jα.
    pub mode_matrix: DMatrix<f64>,
    /// Lamb-Dicke parameters k·σ_α = sqrt(ω_R/ω_α).
    pub widths: Vec<f64>,
    /// Photon-phonon couplings χ_α in units of κ.
    pub couplings: Vec<Complex64>,
}

impl ModeDecomposition {
    pub fn compute(params: &ModelParams, state: &EquilibriumState) -> Result<Self> {
        let (freqs, mode_matrix) = normal_modes(&hessian(params, state), params.omega_r)?;
        let widths: Vec<f64> = freqs.iter().map(|w| (params.omega_r / w).sqrt()).collect();
        let worst = widths.iter().copied().fold(0.0, f64::max);
        if worst > LAMB_DICKE_WARNING {
            log::warn!("Lamb-Dicke parameter {worst:.3} exceeds {LAMB_DICKE_WARNING}");
        }
        let couplings = coupling_coefficients(params, state, &freqs, &mode_matrix);
        Ok(ModeDecomposition { freqs, mode_matrix, widths, couplings })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn lamb_dicke_max(&self) -> f64 {
        self.widths.iter().copied().fold(0.0, f64::max)
    }

    /// Writes `alpha,j,M_jalpha,omega_alpha` rows (one-based indices).
    pub fn write_shape_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "alpha,j,M_jalpha,omega_alpha")?;
        for (a, w) in self.freqs.iter().enumerate() {
            for j in 0..self.mode_matrix.nrows() {
                writeln!(out, "{},{},{:.16e},{:.16e}", a + 1, j + 1, self.mode_matrix[(j, a)], w)?;
            }
        }
        Ok(())
    }
}

/// Hessian of the potential with the cavity amplitude frozen at its mean value.
pub fn hessian(params: &ModelParams, state: &EquilibriumState) -> DMatrix<f64> {
    params.hessian_at(&state.config, false)
}

/// Frequencies ω_α = sqrt(2ω_R λ_α) and orthonormal eigenvectors of a Hessian
/// (the ion mass is 1/(2ω_R) in internal units). Each eigenvector has its
/// largest-magnitude component positive; degenerate clusters are resolved
/// into index-reversal eigenvectors.
pub fn normal_modes(hessian: &DMatrix<f64>, omega_r: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = hessian.nrows();
    if hessian.ncols() != n {
        return Err(Error::InvalidParameter("Hessian must be square".into()));
    }
    let sym = 0.5 * (hessian + hessian.transpose());
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if let Some(&l) = values.first() {
        if l <= 0.0 {
            return Err(Error::UnstableEquilibrium(l));
        }
    }
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(k));
    }
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[end] - values[end - 1]) < 1e-8 * values[end - 1].abs() {
            end += 1;
        }
        if end - start > 1 {
            resolve_cluster(&mut vectors, start, end);
        }
        start = end;
    }
    for c in 0..n {
        let mut col = vectors.column(c).clone_owned();
        let (mut kmax, mut vmax) = (0, 0.0);
        for (j, v) in col.iter().enumerate() {
            if v.abs() > vmax + 1e-12 {
                kmax = j;
                vmax = v.abs();
            }
        }
        if col[kmax] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(c, &col);
    }
    let freqs = values.iter().map(|l| (2.0 * omega_r * l).sqrt()).collect();
    Ok((freqs, vectors))
}

fn resolve_cluster(vectors: &mut DMatrix<f64>, start: usize, end: usize) {
    let n = vectors.nrows();
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    for parity in [1.0, -1.0] {
        for c in start..end {
            let v = vectors.column(c);
            candidates.push(DVector::from_fn(n, |j, _| 0.5 * (v[j] + parity * v[n - 1 - j])));
        }
    }
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for mut v in candidates {
        for b in &basis {
            let overlap = b.dot(&v);
            v -= b * overlap;
        }
        let norm = v.norm();
        if norm > 1e-6 && basis.len() < end - start {
            basis.push(v / norm);
        }
    }
    if basis.len() == end - start {
        for (c, v) in (start..end).zip(basis) {
            vectors.set_column(c, &v);
        }
    }
}

/// χ_α = sqrt(ω_R/ω_α)·ā·U₀·Σ_j sin(2θ_j)·M_jα.
pub fn coupling_coefficients(
    params: &ModelParams,
    state: &EquilibriumState,
    freqs: &[f64],
    mode_matrix: &DMatrix<f64>,
) -> Vec<Complex64> {
    let s = params.lattice_slopes(&state.config);
    let a = state.field.amplitude;
    freqs
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let overlap: f64 = s.iter().enumerate().map(|(j, sj)| sj * mode_matrix[(j, k)]).sum();
            a * ((params.omega_r / w).sqrt() * params.u0 * overlap)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_ion_spectrum() {
        let h = DMatrix::from_row_slice(2, 2, &[3.0, -1.0, -1.0, 3.0]);
        let (f, m) = normal_modes(&h, 0.5).unwrap();
        assert!((f[0] - 2.0_f64.sqrt()).abs() < 1e-12);
        assert!((f[1] - 2.0).abs() < 1e-12);
        assert!(m.column(0).iter().all(|v| *v > 0.0));
    }

    #[test]
    fn negative_curvature_is_rejected() {
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 2.0]);
        assert!(matches!(normal_modes(&h, 1.0), Err(Error::UnstableEquilibrium(_))));
    }

    #[test]
    fn degenerate_cluster_splits_by_parity() {
        let h = DMatrix::<f64>::identity(4, 4) * 2.0;
        let (_, m) = normal_modes(&h, 1.0).unwrap();
        for c in 0..4 {
            let v = m.column(c);
            let even = (0..4).all(|j| (v[j] - v[3 - j]).abs() < 1e-12);
            let odd = (0..4).all(|j| (v[j] + v[3 - j]).abs() < 1e-12);
            assert!(even || odd);
        }
        assert!((m.transpose() * &m - DMatrix::identity(4, 4)).amax() < 1e-12);
    }
}
