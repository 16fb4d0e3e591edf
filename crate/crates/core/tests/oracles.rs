//! Worked examples checked against independently computed reference values.

use num_complex::Complex64;

use optochain::equilibrium::{bare_chain_equilibrium, solve_equilibrium, SolverOptions};
use optochain::fluctuations::{eigen_rates, steady_state, DriftSystem, NoiseModel, Partition};
use optochain::model::{nondimensionalize, PhysicalConfig};
use optochain::rates::chain_scales;

fn central_spacing(cfg: &PhysicalConfig) -> f64 {
    let p = nondimensionalize(cfg).unwrap().with_eta(0.0);
    let s = solve_equilibrium(&p, &bare_chain_equilibrium(&p).unwrap(), &SolverOptions::default()).unwrap();
    let th = s.phases();
    let mid = th.len() / 2;
    0.5 * (th[mid + 1] - th[mid - 1]) / cfg.wavenumber()
}

#[test]
fn central_spacing_is_near_the_logarithmic_estimate() {
    let cfg = PhysicalConfig::ytterbium_chain();
    let spacing = central_spacing(&cfg);
    let d0 = chain_scales(&cfg).unwrap().d0;
    let rel = (spacing - d0).abs() / spacing;
    assert!(rel < 0.25, "central spacing {spacing:e} m vs estimate {d0:e} m: {:.1}%", 100.0 * rel);
}

#[test]
fn central_spacing_matches_the_working_distance() {
    let spacing = central_spacing(&PhysicalConfig::ytterbium_chain());
    assert!((spacing / 6.8e-6 - 1.0).abs() < 0.01, "spacing = {spacing:e} m");
}

/// Single mode at resonance, χ = 0.1, Δ = −ω = −2, κ = 1. Reference values
/// from a separate dense Lyapunov solve of the same 4×4 system.
#[test]
fn resonant_single_mode() {
    let s = DriftSystem::from_parts(
        -2.0,
        Complex64::new(1.0, 0.0),
        &[2.0],
        &[Complex64::new(0.1, 0.0)],
        &NoiseModel::default(),
    )
    .unwrap();
    let g = eigen_rates(&s).unwrap();
    assert!((g.rate_sum() - 2.0).abs() < 1e-12);
    let slow = g.modes.iter().map(|m| m.rate).fold(f64::INFINITY, f64::min);
    assert!((slow - 2.0 * 0.0095234).abs() < 1e-6);
    let st = steady_state(&s).unwrap();
    assert!((st.occupations[0] / 6.376_008_064_517_014e-2 - 1.0).abs() < 1e-10);
    assert!((st.photon_fluctuation_number / 1.260_080_645_161_254_5e-3 - 1.0).abs() < 1e-9);
    assert!((st.covariance[(3, 3)] - 1.125).abs() < 1e-12);
    assert!(st.log_negativity[&Partition::CavityVsAll] >= 0.0);
}
