use nalgebra::DMatrix;
use num_complex::Complex64;

use super::drift::DriftSystem;
use super::generalized::INSTABILITY_THRESHOLD;
use crate::error::{Error, Result};
use crate::linalg::general_eigen;

fn check_stable(system: &DriftSystem) -> Result<()> {
    let (values, _) = general_eigen(&system.matrix)?;
    let max_re = values.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    if max_re >= INSTABILITY_THRESHOLD {
        return Err(Error::Instability(max_re));
    }
    Ok(())
}

fn resolvent(system: &DriftSystem, nu: f64) -> Result<DMatrix<Complex64>> {
    let n = system.dim();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { Complex64::new(0.0, -nu) } else { Complex64::new(0.0, 0.0) };
        diag - system.matrix[(i, j)]
    });
    a.try_inverse().ok_or_else(|| Error::Linalg(format!("resolvent is singular at nu = {nu}")))
}

/// Normally ordered output spectrum S(ν) = ⟨δã†δã⟩(ν)/|ā|² for vacuum input
/// through the cavity port, sampled on `nu_grid` (offsets from the pump).
/// Modes with χ = 0 do not reach the output port and are left out; with no
/// coupled mode the cavity stays in vacuum and the spectrum is zero.
pub fn output_spectrum(system: &DriftSystem, nu_grid: &[f64]) -> Result<Vec<f64>> {
    let norm = system.amplitude.norm_sqr();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("spectrum normalization needs a non-zero mean field".into()));
    }
    let coupled: Vec<usize> = (0..system.n_modes()).filter(|&k| system.couplings[k].norm() > 0.0).collect();
    if coupled.is_empty() {
        return Ok(vec![0.0; nu_grid.len()]);
    }
    let system = &system.restrict(&coupled)?;
    check_stable(system)?;
    let kappa = system.noise.cavity.rate;
    let i = Complex64::i();
    nu_grid
        .iter()
        .map(|&nu| {
            let t = resolvent(system, nu)?;
            let k = (t[(0, 0)] + i * t[(0, 1)] + i * t[(1, 0)] - t[(1, 1)]) * 0.5;
            Ok(2.0 * kappa * k.norm_sqr() / norm)
        })
        .collect()
}

/// Symmetrized quadrature spectral matrix T(ν)·2D̃·T(ν)†, whose integral
/// over dν/2π is the steady covariance.
pub fn quadrature_spectral_matrix(system: &DriftSystem, nu: f64) -> Result<DMatrix<Complex64>> {
    let t = resolvent(system, nu)?;
    let d = system.diffusion.map(|x| Complex64::new(2.0 * x, 0.0));
    Ok(&t * d * t.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluctuations::NoiseModel;

    #[test]
    fn decoupled_spectrum_vanishes() {
        let s = DriftSystem::from_parts(-3.0, Complex64::new(2.0, 1.0), &[2.0], &[Complex64::new(0.0, 0.0)], &NoiseModel::default())
            .unwrap();
        let spec = output_spectrum(&s, &[-5.0, -1.0, 0.3, 4.0]).unwrap();
        assert!(spec.iter().all(|v| *v == 0.0));
    }
}
