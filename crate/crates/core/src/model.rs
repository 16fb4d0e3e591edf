//! Physical inputs, the internal unit system and the mean-field potential.
//!
//! Internally every frequency is measured in units of the cavity half-linewidth
//! κ, ion positions are optical phases θ = k·x and energies are in units of ħκ.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Reduced Planck constant (J s), CODATA 2018.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge (C), CODATA 2018.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity (F/m), CODATA 2018.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
/// Unified atomic mass unit (kg), CODATA 2018.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Experimental inputs in SI units. Angular frequencies are in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    /// Ion mass in atomic mass units.
    pub ion_mass: f64,
    /// Ion charge as a multiple of the elementary charge.
    pub ion_charge: u32,
    /// Cavity wavelength in metres.
    pub wavelength: f64,
    /// Cavity amplitude decay rate (half-linewidth).
    pub kappa: f64,
    /// Axial trap frequency.
    pub trap_freq: f64,
    /// Pump strength η.
    pub pump_strength: f64,
    /// Pump minus cavity frequency.
    pub cavity_detuning: f64,
    /// Pump minus atomic transition frequency.
    pub atom_detuning: f64,
    /// Single-ion vacuum Rabi frequency g.
    pub vacuum_rabi: f64,
    pub n_ions: usize,
    /// Phase offset of the cavity standing wave relative to the trap centre.
    #[serde(default)]
    pub lattice_phase: f64,
}

impl PhysicalConfig {
    /// Ytterbium-174 ions in a 369 nm cavity with κ = 2π×0.2 MHz, U₀ = 0.5κ,
    /// Δ_d = 2π×12 GHz, ω_t = 2π×100 kHz, Δ_c = −8.5κ, η = 250κ and N = 11.
    pub fn ytterbium_chain() -> Self {
        let kappa = 2.0 * PI * 0.2e6;
        let atom_detuning = 2.0 * PI * 12e9;
        PhysicalConfig {
            ion_mass: 174.0,
            ion_charge: 1,
            wavelength: 369e-9,
            kappa,
            trap_freq: 2.0 * PI * 100e3,
            pump_strength: 250.0 * kappa,
            cavity_detuning: -8.5 * kappa,
            atom_detuning,
            vacuum_rabi: (0.5 * kappa * atom_detuning).sqrt(),
            n_ions: 11,
            lattice_phase: 0.0,
        }
    }

    /// The stiff-trap variant used for kink spectroscopy: ω_t = 2π×700 kHz,
    /// Δ_c = −1.8κ, η = 200κ.
    pub fn ytterbium_kink() -> Self {
        let mut cfg = Self::ytterbium_chain();
        cfg.trap_freq = 2.0 * PI * 700e3;
        cfg.cavity_detuning = -1.8 * cfg.kappa;
        cfg.pump_strength = 200.0 * cfg.kappa;
        cfg
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn mass_kg(&self) -> f64 {
        self.ion_mass * ATOMIC_MASS_UNIT
    }

    pub fn charge_coulomb(&self) -> f64 {
        self.ion_charge as f64 * ELEMENTARY_CHARGE
    }

    /// Light shift per photon U₀ = g²/Δ_d in rad/s.
    pub fn u0(&self) -> f64 {
        self.vacuum_rabi * self.vacuum_rabi / self.atom_detuning
    }

    /// Recoil frequency ħk²/(2m) in rad/s.
    pub fn recoil_frequency(&self) -> f64 {
        let k = self.wavenumber();
        HBAR * k * k / (2.0 * self.mass_kg())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("ion_mass", self.ion_mass),
            ("wavelength", self.wavelength),
            ("kappa", self.kappa),
            ("trap_freq", self.trap_freq),
            ("vacuum_rabi", self.vacuum_rabi),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.pump_strength.is_finite() && self.pump_strength >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pump_strength must be non-negative, got {}",
                self.pump_strength
            )));
        }
        if self.ion_charge == 0 {
            return Err(Error::InvalidParameter("ion_charge must be at least 1".into()));
        }
        if self.atom_detuning == 0.0 || !self.atom_detuning.is_finite() {
            return Err(Error::InvalidParameter("atom_detuning must be finite and non-zero".into()));
        }
        if !self.cavity_detuning.is_finite() || !self.lattice_phase.is_finite() {
            return Err(Error::InvalidParameter("cavity_detuning and lattice_phase must be finite".into()));
        }
        if self.n_ions == 0 {
            return Err(Error::InvalidParameter("n_ions must be at least 1".into()));
        }
        if !self.u0().is_finite() {
            return Err(Error::InvalidParameter("U0 = g^2/Delta_d is not finite".into()));
        }
        Ok(())
    }
}

/// Dimensionless parameters: frequencies over κ, Coulomb constant in phase units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub u0: f64,
    pub eta: f64,
    pub delta_c: f64,
    pub omega_t: f64,
    pub omega_r: f64,
    /// C = q²k/(4πε₀ħκ).
    pub coulomb: f64,
    pub n_ions: usize,
    /// Standing-wave offset φ: the lattice is cos²(θ + φ).
    #[serde(default)]
    pub lattice_phase: f64,
}

/// The SI quantities that the dimensionless parameters do not retain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitAnchor {
    pub kappa: f64,
    pub wavelength: f64,
    pub atom_detuning: f64,
}

impl From<&PhysicalConfig> for UnitAnchor {
    fn from(c: &PhysicalConfig) -> Self {
        UnitAnchor { kappa: c.kappa, wavelength: c.wavelength, atom_detuning: c.atom_detuning }
    }
}

/// Converts SI inputs to internal units.
pub fn nondimensionalize(config: &PhysicalConfig) -> Result<ModelParams> {
    config.validate()?;
    let kappa = config.kappa;
    let q = config.charge_coulomb();
    let coulomb = q * q * config.wavenumber() / (4.0 * PI * VACUUM_PERMITTIVITY * HBAR * kappa);
    let params = ModelParams {
        u0: config.u0() / kappa,
        eta: config.pump_strength / kappa,
        delta_c: config.cavity_detuning / kappa,
        omega_t: config.trap_freq / kappa,
        omega_r: config.recoil_frequency() / kappa,
        coulomb,
        n_ions: config.n_ions,
        lattice_phase: config.lattice_phase,
    };
    params.validate()?;
    Ok(params)
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [("coulomb", self.coulomb), ("omega_r", self.omega_r), ("omega_t", self.omega_t)];
        for (name, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::InvalidParameter(format!("eta must be non-negative, got {}", self.eta)));
        }
        if !self.u0.is_finite() || !self.delta_c.is_finite() {
            return Err(Error::InvalidParameter("u0 and delta_c must be finite".into()));
        }
        if self.n_ions == 0 {
            return Err(Error::InvalidParameter("n_ions must be at least 1".into()));
        }
        Ok(())
    }

    /// Recovers the SI description given the quantities lost by scaling.
    pub fn redimensionalize(&self, anchor: &UnitAnchor) -> PhysicalConfig {
        let kappa = anchor.kappa;
        let k = 2.0 * PI / anchor.wavelength;
        let mass_kg = HBAR * k * k / (2.0 * self.omega_r * kappa);
        let q2 = self.coulomb * 4.0 * PI * VACUUM_PERMITTIVITY * HBAR * kappa / k;
        let charge = (q2.sqrt() / ELEMENTARY_CHARGE).round().max(1.0) as u32;
        PhysicalConfig {
            ion_mass: mass_kg / ATOMIC_MASS_UNIT,
            ion_charge: charge,
            wavelength: anchor.wavelength,
            kappa,
            trap_freq: self.omega_t * kappa,
            pump_strength: self.eta * kappa,
            cavity_detuning: self.delta_c * kappa,
            atom_detuning: anchor.atom_detuning,
            vacuum_rabi: (self.u0 * kappa * anchor.atom_detuning).abs().sqrt(),
            n_ions: self.n_ions,
            lattice_phase: self.lattice_phase,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_delta_c(mut self, delta_c: f64) -> Self {
        self.delta_c = delta_c;
        self
    }

    /// Coefficient a of the trap energy a·Σθ², equal to ω_t²/(4ω_R).
    pub fn trap_coefficient(&self) -> f64 {
        self.omega_t * self.omega_t / (4.0 * self.omega_r)
    }

    /// Single-ion length scale (q²/(4πε₀mω_t²))^{1/3} in phase units.
    pub fn length_scale(&self) -> f64 {
        (self.coulomb / (2.0 * self.trap_coefficient())).cbrt()
    }

    /// Δ_eff = Δ_c − U₀ Σ cos²(θ_j + φ).
    pub fn effective_detuning(&self, cfg: &IonConfiguration) -> f64 {
        self.detuning_at(cfg)
    }

    pub fn cavity_amplitude(&self, cfg: &IonConfiguration) -> CavityField {
        CavityField::new(self.eta, self.effective_detuning(cfg))
    }

    /// V_tot in units of ħκ.
    pub fn total_potential(&self, cfg: &IonConfiguration) -> Result<f64> {
        check_distinct(cfg)?;
        Ok(self.potential_at(cfg))
    }

    pub fn total_gradient(&self, cfg: &IonConfiguration) -> Result<DVector<f64>> {
        check_distinct(cfg)?;
        Ok(self.gradient_at(cfg))
    }

    /// Full Hessian of V_tot, including the response of the adiabatic field.
    pub fn total_hessian(&self, cfg: &IonConfiguration) -> Result<DMatrix<f64>> {
        check_distinct(cfg)?;
        Ok(self.hessian_at(cfg, true))
    }

    fn lattice_sum<F: Fn(f64) -> f64>(&self, cfg: &IonConfiguration, f: F) -> f64 {
        cfg.offsets.iter().map(|o| f(o + self.lattice_phase)).sum()
    }

    pub(crate) fn detuning_at(&self, cfg: &IonConfiguration) -> f64 {
        self.delta_c - self.u0 * self.lattice_sum(cfg, |x| x.cos().powi(2))
    }

    pub(crate) fn photons_at(&self, cfg: &IonConfiguration) -> f64 {
        let d = self.detuning_at(cfg);
        self.eta * self.eta / (1.0 + d * d)
    }

    /// sin(2(θ_j + φ)) for every ion.
    pub(crate) fn lattice_slopes(&self, cfg: &IonConfiguration) -> Vec<f64> {
        cfg.offsets.iter().map(|o| (2.0 * (o + self.lattice_phase)).sin()).collect()
    }

    pub(crate) fn potential_at(&self, cfg: &IonConfiguration) -> f64 {
        let a = self.trap_coefficient();
        let trap: f64 = cfg.phases.iter().map(|t| t * t).sum::<f64>() * a;
        let n = cfg.len();
        let mut coulomb = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                coulomb += 1.0 / cfg.separation(i, j).abs();
            }
        }
        let light = self.eta * self.eta * (-self.detuning_at(cfg)).atan();
        trap + self.coulomb * coulomb + light
    }

    pub(crate) fn gradient_at(&self, cfg: &IonConfiguration) -> DVector<f64> {
        let n = cfg.len();
        let a2 = 2.0 * self.trap_coefficient();
        let nbar = self.photons_at(cfg);
        let slopes = self.lattice_slopes(cfg);
        DVector::from_fn(n, |j, _| {
            let mut f = 0.0;
            for i in 0..n {
                if i != j {
                    let d = cfg.separation(i, j);
                    f -= d.signum() / (d * d);
                }
            }
            a2 * cfg.phases[j] + self.coulomb * f - self.u0 * nbar * slopes[j]
        })
    }

    /// Hessian of V_tot. With `field_response = false` the cavity amplitude is
    /// held fixed and only the lattice curvature −2U₀n̄cos2θ_j enters.
    pub(crate) fn hessian_at(&self, cfg: &IonConfiguration, field_response: bool) -> DMatrix<f64> {
        let n = cfg.len();
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = cfg.separation(i, j).abs();
                let v = -2.0 * self.coulomb / (d * d * d);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let d = self.detuning_at(cfg);
        let nbar = self.eta * self.eta / (1.0 + d * d);
        let a2 = 2.0 * self.trap_coefficient();
        for j in 0..n {
            let off: f64 = (0..n).filter(|&i| i != j).map(|i| h[(j, i)]).sum();
            let curvature = (2.0 * (cfg.offsets[j] + self.lattice_phase)).cos();
            h[(j, j)] = -off + a2 - 2.0 * self.u0 * nbar * curvature;
        }
        if field_response && nbar > 0.0 {
            let c = 2.0 * d * self.u0 * self.u0 * nbar / (1.0 + d * d);
            let s = self.lattice_slopes(cfg);
            for i in 0..n {
                for j in 0..n {
                    h[(i, j)] += c * s[i] * s[j];
                }
            }
        }
        h
    }
}

/// Mean intracavity field ā = η/(κ − iΔ_eff) and its photon number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityField {
    pub amplitude: Complex64,
    pub photons: f64,
    pub delta_eff: f64,
}

impl CavityField {
    pub fn new(eta: f64, delta_eff: f64) -> Self {
        let amplitude = Complex64::new(eta, 0.0) / Complex64::new(1.0, -delta_eff);
        CavityField { amplitude, photons: eta * eta / (1.0 + delta_eff * delta_eff), delta_eff }
    }
}

/// Ion positions as optical phases, strictly increasing.
///
/// Each phase is stored as a lattice well index plus an offset within the
/// well, θ_j = w_j·π + o_j with |o_j| ≤ π/2, so that lattice terms keep full
/// precision far from the trap centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonConfiguration {
    wells: Vec<i64>,
    offsets: Vec<f64>,
    phases: Vec<f64>,
}

impl IonConfiguration {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidParameter("configuration must contain at least one ion".into()));
        }
        if let Some(i) = phases.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidParameter(format!("phase {i} is not finite")));
        }
        for (j, w) in phases.windows(2).enumerate() {
            if w[1] == w[0] {
                return Err(Error::CoincidentIons(j, j + 1));
            }
            if w[1] < w[0] {
                return Err(Error::Unordered(j));
            }
        }
        let wells: Vec<i64> = phases.iter().map(|t| (t / PI).round() as i64).collect();
        let offsets = phases.iter().zip(&wells).map(|(t, &w)| t - w as f64 * PI).collect();
        Ok(IonConfiguration { wells, offsets, phases })
    }

    fn from_parts(mut wells: Vec<i64>, mut offsets: Vec<f64>) -> Self {
        for (w, o) in wells.iter_mut().zip(offsets.iter_mut()) {
            let k = (*o / PI).round();
            if k != 0.0 {
                *w += k as i64;
                *o -= k * PI;
            }
        }
        let phases = wells.iter().zip(&offsets).map(|(&w, o)| w as f64 * PI + o).collect();
        IonConfiguration { wells, offsets, phases }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// θ_j − θ_i evaluated from the split representation.
    pub fn separation(&self, i: usize, j: usize) -> f64 {
        (self.wells[j] - self.wells[i]) as f64 * PI + (self.offsets[j] - self.offsets[i])
    }

    /// Displaced copy, or `None` if the displacement reorders the ions.
    pub fn shifted(&self, delta: &[f64]) -> Option<Self> {
        let offsets = self.offsets.iter().zip(delta).map(|(o, d)| o + d).collect();
        let moved = Self::from_parts(self.wells.clone(), offsets);
        (0..moved.len().saturating_sub(1)).all(|j| moved.separation(j, j + 1) > 0.0).then_some(moved)
    }

    /// The configuration reflected through the trap centre.
    pub fn mirrored(&self) -> Self {
        let wells = self.wells.iter().rev().map(|w| -w).collect();
        let offsets = self.offsets.iter().rev().map(|o| -o).collect();
        Self::from_parts(wells, offsets)
    }

    /// Largest violation of θ_j = −θ_{N+1−j}, halved.
    pub fn mirror_asymmetry(&self) -> f64 {
        let n = self.len();
        (0..n / 2 + n % 2)
            .map(|j| {
                let k = n - 1 - j;
                0.5 * ((self.wells[j] + self.wells[k]) as f64 * PI + self.offsets[j] + self.offsets[k]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Nearest exactly mirror-symmetric configuration.
    pub fn symmetrized(&self) -> Result<Self> {
        let n = self.len();
        let mut phases = vec![0.0; n];
        for j in 0..n / 2 {
            let u = 0.5 * self.separation(j, n - 1 - j);
            phases[j] = -u;
            phases[n - 1 - j] = u;
        }
        Self::new(phases)
    }

    pub fn into_phases(self) -> Vec<f64> {
        self.phases
    }
}

fn check_distinct(cfg: &IonConfiguration) -> Result<()> {
    for j in 0..cfg.len().saturating_sub(1) {
        if cfg.separation(j, j + 1) <= 0.0 {
            return Err(Error::CoincidentIons(j, j + 1));
        }
    }
    Ok(())
}
