//! Closed-form sideband cooling theory, chain length scales and the
//! mode–cavity resonance search.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::equilibrium::{bare_chain_equilibrium, log_grid, solve_equilibrium, Axis, EquilibriumState, Phase, SolverOptions};
use crate::error::{Error, Result};
use crate::model::{IonConfiguration, ModelParams, PhysicalConfig, VACUUM_PERMITTIVITY};
use crate::modes::ModeDecomposition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoolingStatus {
    Cooling,
    /// Δ_eff ≥ 0: heating dominates and no thermal steady state exists.
    NoSteadyState,
    /// χ = 0: the mode does not exchange energy with the cavity.
    Decoupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandRates {
    pub a_plus: f64,
    pub a_minus: f64,
    pub w_cool: f64,
    /// Steady occupation, defined only when `status` is `Cooling`.
    pub n_analytic: Option<f64>,
    pub status: CoolingStatus,
    /// False when κ ≤ |χ|, outside the perturbative regime.
    pub perturbative_valid: bool,
}

/// A_± = (χ²/κ)/(1 + (Δ_eff ∓ ω)²/κ²), W = A₋ − A₊ and
/// n = ((Δ_eff + ω)² + κ²)/(−4ωΔ_eff).
pub fn sideband_rates(chi_abs: f64, omega: f64, delta_eff: f64, kappa: f64) -> Result<SidebandRates> {
    if !(omega > 0.0) || !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!("need omega > 0 and kappa > 0, got {omega}, {kappa}")));
    }
    let lorentz = |d: f64| chi_abs * chi_abs / kappa / (1.0 + d * d / (kappa * kappa));
    let a_plus = lorentz(delta_eff - omega);
    let a_minus = lorentz(delta_eff + omega);
    let (status, n_analytic) = if chi_abs == 0.0 {
        (CoolingStatus::Decoupled, None)
    } else if delta_eff < 0.0 {
        let s = delta_eff + omega;
        (CoolingStatus::Cooling, Some((s * s + kappa * kappa) / (-4.0 * omega * delta_eff)))
    } else {
        (CoolingStatus::NoSteadyState, None)
    };
    Ok(SidebandRates {
        a_plus,
        a_minus,
        w_cool: a_minus - a_plus,
        n_analytic,
        status,
        perturbative_valid: kappa > chi_abs,
    })
}

/// W_bulk = (ω_R/ω_t)(U₀²|ā|²/κ)[Σ_j sin 2θ_j]²/N, the centre-of-mass cooling rate.
pub fn bulk_rate_estimate(params: &ModelParams, state: &EquilibriumState) -> f64 {
    let s: f64 = params.lattice_slopes(&state.config).iter().sum();
    let n = state.phases().len() as f64;
    params.omega_r / params.omega_t * params.u0 * params.u0 * state.photons() * s * s / n
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainScales {
    /// Approximate central inter-ion distance (m).
    pub d0: f64,
    /// Coulomb frequency scale at distance d0 (rad/s).
    pub omega0: f64,
    /// Single-ion length (q²/(4πε₀mω_t²))^{1/3} (m).
    pub ell: f64,
}

pub fn chain_scales(config: &PhysicalConfig) -> Result<ChainScales> {
    config.validate()?;
    if config.n_ions < 2 {
        return Err(Error::InvalidParameter("chain scales need at least two ions".into()));
    }
    let q = config.charge_coulomb();
    let coulomb = q * q / (4.0 * PI * VACUUM_PERMITTIVITY * config.mass_kg());
    let ell3 = coulomb / (config.trap_freq * config.trap_freq);
    let n = config.n_ions as f64;
    let d0 = (ell3 * 3.0 * n.ln() / (n * n)).cbrt();
    Ok(ChainScales { d0, omega0: (coulomb / (d0 * d0 * d0)).sqrt(), ell: ell3.cbrt() })
}

/// Which mode frequency enters the resonance condition Δ_eff + ω = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSelector {
    Index(usize),
    Lowest,
    /// The median mode of the band.
    BandCenter,
    /// The lowest mode, only where the chain is pinned.
    Kink,
}

impl ModeSelector {
    fn frequency(self, state: &EquilibriumState, modes: &ModeDecomposition) -> Option<f64> {
        match self {
            ModeSelector::Index(k) => modes.freqs.get(k).copied(),
            ModeSelector::Lowest => modes.freqs.first().copied(),
            ModeSelector::BandCenter => modes.freqs.get(modes.len() / 2).copied(),
            ModeSelector::Kink => (state.phase == Phase::Pinned).then(|| modes.freqs[0]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Resonance {
    Found { value: f64, bracket: (f64, f64) },
    NotFound,
}

impl Resonance {
    pub fn value(&self) -> Option<f64> {
        match self {
            Resonance::Found { value, .. } => Some(*value),
            Resonance::NotFound => None,
        }
    }
}

/// Bisects the first sign change of `f` over `grid`. `f` receives the state
/// returned at the nearest point on the low side of the bracket, so branch
/// continuation can seed each evaluation. Points where `f` yields `None`
/// break the bracket.
pub fn bisect_sign_change<S: Clone, F>(grid: &[f64], start: S, rel_width: f64, mut f: F) -> Result<Resonance>
where
    F: FnMut(f64, &S) -> Result<Option<(f64, S)>>,
{
    let mut seed = start;
    let mut prev: Option<(f64, f64, S)> = None;
    for &v in grid {
        let Some((fv, state)) = f(v, &seed)? else {
            prev = None;
            continue;
        };
        if let Some((a, fa, sa)) = prev.take() {
            if fa == 0.0 {
                return Ok(Resonance::Found { value: a, bracket: (a, a) });
            }
            if fa.signum() != fv.signum() {
                let (mut lo, mut hi, mut flo, mut slo) = (a, v, fa, sa);
                while (hi - lo).abs() > rel_width * hi.abs().max(lo.abs()) {
                    let mid = 0.5 * (lo + hi);
                    match f(mid, &slo)? {
                        Some((fm, sm)) if fm.signum() == flo.signum() => {
                            lo = mid;
                            flo = fm;
                            slo = sm;
                        }
                        Some(_) => hi = mid,
                        None => break,
                    }
                }
                return Ok(Resonance::Found { value: 0.5 * (lo + hi), bracket: (lo, hi) });
            }
        }
        seed = state.clone();
        prev = Some((v, fv, state));
    }
    Ok(Resonance::NotFound)
}

/// Initial configuration for a branch along `axis` at the parameters in
/// `params`: the bare chain for pump continuation, otherwise the result of a
/// pump ramp from the bare chain up to `params.eta`.
pub fn branch_seed(params: &ModelParams, axis: Axis, opts: &SolverOptions) -> Result<IonConfiguration> {
    let mut cfg = bare_chain_equilibrium(params)?;
    if axis == Axis::Eta || params.eta <= 0.0 {
        return Ok(cfg);
    }
    for eta in log_grid(1.0_f64.min(params.eta), params.eta, 120) {
        cfg = solve_equilibrium(&params.with_eta(eta), &cfg, opts)?.config;
    }
    Ok(cfg)
}

/// Root of Δ_eff(v) + ω_selected(v) = 0 along the continuation branch over
/// `grid`, bisected to relative width `rel_width`.
pub fn resonance_finder(
    params: &ModelParams,
    selector: ModeSelector,
    axis: Axis,
    grid: &[f64],
    rel_width: f64,
    opts: &SolverOptions,
) -> Result<Resonance> {
    let first = axis.apply(*params, grid.first().copied().unwrap_or(0.0));
    let start = branch_seed(&first, axis, opts)?;
    bisect_sign_change(grid, start, rel_width, |v, seed| {
        let p = axis.apply(*params, v);
        let Ok(state) = solve_equilibrium(&p, seed, opts) else { return Ok(None) };
        let Ok(modes) = ModeDecomposition::compute(&p, &state) else { return Ok(None) };
        let config = state.config.clone();
        Ok(selector.frequency(&state, &modes).map(|w| (state.delta_eff() + w, config)))
    })
}
