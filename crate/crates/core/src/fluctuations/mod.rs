//! Linearized photon–phonon fluctuations around a mean-field equilibrium.
//!
//! Quadratures are ordered `(Q_a, P_a, Q_1, P_1, …, Q_N, P_N)` with vacuum
//! variance `⟨2Q²⟩ = 1`, and covariances are symmetrized second moments
//! `Σ_mn = ⟨X_m X_n + X_n X_m⟩`.

mod covariance;
mod drift;
mod generalized;
mod spectrum;

pub use covariance::{
    log_negativity, mode_occupations, resolvable_steady_state, steady_covariance_eigenbasis, steady_covariance_lyapunov, steady_state,
    write_covariance, CovarianceRoute, Occupations, RATE_RESOLUTION, Partition, SteadyState,
};
pub use drift::{build_drift_system, Channel, DriftSystem, NoiseModel, DEFAULT_COUPLING_THRESHOLD};
pub use generalized::{eigen_rates, Character, GeneralizedMode, GeneralizedModes, INSTABILITY_THRESHOLD};
pub use spectrum::{output_spectrum, quadrature_spectral_matrix};
