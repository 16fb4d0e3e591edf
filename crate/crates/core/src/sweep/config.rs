//! Scenario configuration files.
//!
//! Configurations are TOML documents. Every physical quantity is a string
//! holding a number followed by a unit:
//!
//! | kind | accepted units |
//! |------|----------------|
//! | frequency | `Hz`, `kHz`, `MHz`, `GHz` (cyclic, multiplied by 2π), `rad/s`, `kappa` |
//! | length | `m`, `mm`, `um`, `nm` |
//! | mass | `u`, `kg` |
//! | angle | `rad`, `deg` |
//!
//! A document may start from a bundled preset (`preset = "sec3c"` or
//! `"sec4"`); its own keys then override the preset's. See `README.md` for
//! the full schema.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::equilibrium::{linear_grid, log_grid};
use crate::error::{Error, Result};
use crate::fluctuations::{Channel, NoiseModel, DEFAULT_COUPLING_THRESHOLD};
use crate::model::PhysicalConfig;

const SEC3C: &str = r#"
seed = 0

[physical]
ion_mass = "174 u"
ion_charge = 1
wavelength = "369 nm"
kappa = "0.2 MHz"
trap_freq = "100 kHz"
pump_strength = "250 kappa"
cavity_detuning = "-8.5 kappa"
atom_detuning = "12 GHz"
light_shift = "0.5 kappa"
n_ions = 11

[sweep.eta]
min = "1 kappa"
max = "400 kappa"
count = 200
spacing = "log"

[sweep.delta_c]
min = "-14 kappa"
max = "-2 kappa"
count = 25
spacing = "linear"

[scaling]
n_ions = [11, 51, 81]
hold = "eta"

[spectrum]
min = "-15 kappa"
max = "15 kappa"
count = 601

[output]
dir = "out"
format = "csv"
"#;

const SEC4: &str = r#"
seed = 0

[physical]
ion_mass = "174 u"
ion_charge = 1
wavelength = "369 nm"
kappa = "0.2 MHz"
trap_freq = "700 kHz"
pump_strength = "200 kappa"
cavity_detuning = "-1.8 kappa"
atom_detuning = "12 GHz"
light_shift = "0.5 kappa"
n_ions = 11

[sweep.eta]
min = "1 kappa"
max = "400 kappa"
count = 200
spacing = "log"

[sweep.delta_c]
min = "-4.5 kappa"
max = "-1.5 kappa"
count = 200
spacing = "linear"

[scaling]
n_ions = [11, 51, 81]
hold = "eta"

[spectrum]
min = "-8 kappa"
max = "8 kappa"
count = 401

[output]
dir = "out"
format = "csv"
"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Sec3c,
    Sec4,
}

impl Preset {
    fn source(self) -> &'static str {
        match self {
            Preset::Sec3c => SEC3C,
            Preset::Sec4 => SEC4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    EquilibriumBranch,
    CoolingMap,
    ResonanceAnalysis,
    ScalingStudy,
    KinkSpectroscopy,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::EquilibriumBranch => "equilibrium-branch",
            ScenarioKind::CoolingMap => "cooling-map",
            ScenarioKind::ResonanceAnalysis => "resonance-analysis",
            ScenarioKind::ScalingStudy => "scaling-study",
            ScenarioKind::KinkSpectroscopy => "kink-spectroscopy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

/// Quantity held fixed across chain lengths in a scaling study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hold {
    /// Keep the pump strength η.
    Eta,
    /// Keep the lattice depth U₀|ā|² of the reference chain.
    Depth,
}

/// A sampled axis in units of κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl AxisSpec {
    pub fn grid(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Linear => linear_grid(self.min, self.max, self.count),
            Spacing::Log => log_grid(self.min, self.max, self.count),
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.count < 2 {
            return Err(Error::Config(format!("{name}: count must be at least 2, got {}", self.count)));
        }
        if !self.min.is_finite() || !self.max.is_finite() || self.min >= self.max {
            return Err(Error::Config(format!("{name}: need finite min < max, got {} and {}", self.min, self.max)));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(Error::Config(format!("{name}: log spacing needs a positive range")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub n_ions: Vec<usize>,
    pub hold: Hold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub format: Format,
}

/// Fully resolved scenario description in SI units (axes in units of κ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Option<ScenarioKind>,
    pub physical: PhysicalConfig,
    pub eta: Option<AxisSpec>,
    pub delta_c: Option<AxisSpec>,
    pub scaling: Option<ScalingSpec>,
    /// Offsets ν from the pump at which output spectra are sampled.
    pub spectrum: Option<AxisSpec>,
    pub noise: NoiseModel,
    /// |χ| threshold (units of κ) below which a mode counts as decoupled.
    pub coupling_threshold: f64,
    pub seed: u64,
    pub output: OutputSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    scenario: Option<ScenarioKind>,
    #[serde(default)]
    seed: u64,
    physical: RawPhysical,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    scaling: Option<ScalingSpec>,
    #[serde(default)]
    spectrum: Option<RawAxis>,
    #[serde(default)]
    noise: Option<RawNoise>,
    #[serde(default)]
    coupling_threshold: Option<f64>,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysical {
    ion_mass: String,
    ion_charge: u32,
    wavelength: String,
    kappa: String,
    trap_freq: String,
    pump_strength: String,
    cavity_detuning: String,
    atom_detuning: String,
    vacuum_rabi: Option<String>,
    light_shift: Option<String>,
    n_ions: usize,
    lattice_phase: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    eta: Option<RawAxis>,
    delta_c: Option<RawAxis>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    min: String,
    max: String,
    count: usize,
    #[serde(default = "linear")]
    spacing: Spacing,
}

fn linear() -> Spacing {
    Spacing::Linear
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    phonon_rate: String,
    #[serde(default)]
    phonon_occupation: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Clone, Copy)]
enum Dimension {
    Frequency,
    Length,
    Mass,
    Angle,
}

/// Parses `"<number> <unit>"`. `kappa` resolves `kappa`-relative frequencies.
fn parse_quantity(text: &str, dim: Dimension, kappa: Option<f64>) -> Result<f64> {
    let text = text.trim();
    let split = text
        .find(|c: char| c.is_whitespace())
        .ok_or_else(|| Error::Config(format!("quantity '{text}' lacks a unit suffix")))?;
    let (num, unit) = text.split_at(split);
    let value: f64 = num.parse().map_err(|_| Error::Config(format!("'{num}' is not a number")))?;
    let unit = unit.trim();
    let scale = match (dim, unit) {
        (Dimension::Frequency, "Hz") => 2.0 * PI,
        (Dimension::Frequency, "kHz") => 2.0 * PI * 1e3,
        (Dimension::Frequency, "MHz") => 2.0 * PI * 1e6,
        (Dimension::Frequency, "GHz") => 2.0 * PI * 1e9,
        (Dimension::Frequency, "rad/s") => 1.0,
        (Dimension::Frequency, "kappa") => {
            kappa.ok_or_else(|| Error::Config("kappa cannot be expressed in units of itself".into()))?
        }
        (Dimension::Length, "m") => 1.0,
        (Dimension::Length, "mm") => 1e-3,
        (Dimension::Length, "um") => 1e-6,
        (Dimension::Length, "nm") => 1e-9,
        (Dimension::Mass, "u") => 1.0,
        (Dimension::Mass, "kg") => 1.0 / crate::model::ATOMIC_MASS_UNIT,
        (Dimension::Angle, "rad") => 1.0,
        (Dimension::Angle, "deg") => PI / 180.0,
        _ => return Err(Error::Config(format!("unit '{unit}' is not valid for '{text}'"))),
    };
    let v = value * scale;
    if !v.is_finite() {
        return Err(Error::Config(format!("quantity '{text}' is not finite")));
    }
    Ok(v)
}

fn in_kappa(text: &str, kappa: f64) -> Result<f64> {
    Ok(parse_quantity(text, Dimension::Frequency, Some(kappa))? / kappa)
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                if key == "physical" {
                    for pair in [("vacuum_rabi", "light_shift"), ("light_shift", "vacuum_rabi")] {
                        if o.contains_key(pair.0) {
                            b.remove(pair.1);
                        }
                    }
                }
                merge(b, o);
            }
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| Error::Config(e.to_string()))
}

impl ScenarioConfig {
    /// Builds a configuration from an optional base preset and an optional
    /// TOML document; the document may name its own preset.
    pub fn load(preset: Option<Preset>, document: Option<&str>) -> Result<Self> {
        let mut user = document.map(parse_table).transpose()?;
        let named = match user.as_mut().and_then(|t| t.remove("preset")) {
            Some(v) => Some(v.try_into::<Preset>().map_err(|e| Error::Config(format!("preset: {e}")))?),
            None => None,
        };
        let mut table = match named.or(preset) {
            Some(p) => parse_table(p.source())?,
            None => toml::Table::new(),
        };
        if let Some(user) = user {
            merge(&mut table, user);
        }
        let raw: RawConfig = toml::Value::Table(table).try_into().map_err(|e| Error::Config(e.to_string()))?;
        Self::resolve(raw)
    }

    pub fn from_preset(preset: Preset) -> Result<Self> {
        Self::load(Some(preset), None)
    }

    pub fn from_file(path: &Path, preset: Option<Preset>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::load(preset, Some(&text))
    }

    fn resolve(raw: RawConfig) -> Result<Self> {
        let p = &raw.physical;
        let kappa = parse_quantity(&p.kappa, Dimension::Frequency, None)?;
        let freq = |s: &str| parse_quantity(s, Dimension::Frequency, Some(kappa));
        let atom_detuning = freq(&p.atom_detuning)?;
        let vacuum_rabi = match (&p.vacuum_rabi, &p.light_shift) {
            (Some(g), None) => freq(g)?,
            (None, Some(u0)) => {
                let u = freq(u0)?;
                if u * atom_detuning <= 0.0 {
                    return Err(Error::Config("light_shift must have the sign of atom_detuning".into()));
                }
                (u * atom_detuning).sqrt()
            }
            _ => return Err(Error::Config("give exactly one of physical.vacuum_rabi and physical.light_shift".into())),
        };
        let physical = PhysicalConfig {
            ion_mass: parse_quantity(&p.ion_mass, Dimension::Mass, None)?,
            ion_charge: p.ion_charge,
            wavelength: parse_quantity(&p.wavelength, Dimension::Length, None)?,
            kappa,
            trap_freq: freq(&p.trap_freq)?,
            pump_strength: freq(&p.pump_strength)?,
            cavity_detuning: freq(&p.cavity_detuning)?,
            atom_detuning,
            vacuum_rabi,
            n_ions: p.n_ions,
            lattice_phase: p.lattice_phase.as_deref().map(|s| parse_quantity(s, Dimension::Angle, None)).transpose()?.unwrap_or(0.0),
        };
        physical.validate().map_err(|e| Error::Config(e.to_string()))?;
        let axis = |a: &RawAxis| -> Result<AxisSpec> {
            Ok(AxisSpec { min: in_kappa(&a.min, kappa)?, max: in_kappa(&a.max, kappa)?, count: a.count, spacing: a.spacing })
        };
        let noise = match &raw.noise {
            Some(n) => {
                let rate = in_kappa(&n.phonon_rate, kappa)?;
                if rate < 0.0 || n.phonon_occupation < 0.0 {
                    return Err(Error::Config("noise rate and occupation must be non-negative".into()));
                }
                NoiseModel { default_phonon: Channel::new(rate, n.phonon_occupation), ..NoiseModel::default() }
            }
            None => NoiseModel::default(),
        };
        let cfg = ScenarioConfig {
            scenario: raw.scenario,
            physical,
            eta: raw.sweep.eta.as_ref().map(axis).transpose()?,
            delta_c: raw.sweep.delta_c.as_ref().map(axis).transpose()?,
            scaling: raw.scaling,
            spectrum: raw.spectrum.as_ref().map(axis).transpose()?,
            noise,
            coupling_threshold: raw.coupling_threshold.unwrap_or(DEFAULT_COUPLING_THRESHOLD),
            seed: raw.seed,
            output: OutputSpec {
                dir: raw.output.dir.unwrap_or_else(|| PathBuf::from("out")),
                format: raw.output.format.unwrap_or(Format::Csv),
            },
        };
        cfg.validate_fields()?;
        Ok(cfg)
    }

    fn validate_fields(&self) -> Result<()> {
        for (name, a) in [("sweep.eta", &self.eta), ("sweep.delta_c", &self.delta_c), ("spectrum", &self.spectrum)] {
            if let Some(a) = a {
                a.validate(name)?;
            }
        }
        if let Some(eta) = &self.eta {
            if eta.min < 0.0 {
                return Err(Error::Config("sweep.eta must be non-negative".into()));
            }
        }
        if let Some(s) = &self.scaling {
            if s.n_ions.is_empty() || s.n_ions.iter().any(|&n| n < 2) {
                return Err(Error::Config("scaling.n_ions needs chain lengths of at least 2".into()));
            }
        }
        if !(self.coupling_threshold.is_finite() && self.coupling_threshold >= 0.0) {
            return Err(Error::Config("coupling_threshold must be non-negative".into()));
        }
        Ok(())
    }

    /// Checks that everything `kind` needs is present.
    pub fn validate_for(&self, kind: ScenarioKind) -> Result<()> {
        if let Some(s) = self.scenario {
            if s != kind {
                return Err(Error::Config(format!("config is for scenario '{}', not '{}'", s.name(), kind.name())));
            }
        }
        let need = |present: bool, what: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!("scenario '{}' requires {what}", kind.name())))
            }
        };
        match kind {
            ScenarioKind::EquilibriumBranch | ScenarioKind::ResonanceAnalysis => need(self.eta.is_some(), "sweep.eta"),
            ScenarioKind::CoolingMap => {
                need(self.eta.is_some(), "sweep.eta")?;
                need(self.delta_c.is_some(), "sweep.delta_c")
            }
            ScenarioKind::ScalingStudy => need(self.scaling.is_some(), "a [scaling] section"),
            ScenarioKind::KinkSpectroscopy => need(self.delta_c.is_some(), "sweep.delta_c"),
        }
    }

    /// Creates the output directory and checks that it accepts files.
    pub fn check_output_dir(&self) -> Result<()> {
        let dir = &self.output.dir;
        std::fs::create_dir_all(dir).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?;
        let probe = dir.join(".write-probe");
        std::fs::write(&probe, b"").map_err(|e| Error::Config(format!("{} is not writable: {e}", dir.display())))?;
        let _ = std::fs::remove_file(probe);
        Ok(())
    }

    /// SHA-256 over everything that determines the numbers of a run (the
    /// output location and format are excluded).
    pub fn hash(&self, kind: ScenarioKind) -> String {
        let key = serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "scenario": kind,
            "physical": self.physical,
            "eta": self.eta,
            "delta_c": self.delta_c,
            "scaling": self.scaling,
            "spectrum": self.spectrum,
            "noise": self.noise,
            "coupling_threshold": self.coupling_threshold,
            "seed": self.seed,
        });
        hex::encode(Sha256::digest(key.to_string().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units() {
        let k = 2.0 * PI * 0.2e6;
        let close = |text: &str, dim: Dimension, kappa: Option<f64>, want: f64| {
            let got = parse_quantity(text, dim, kappa).unwrap();
            assert!((got / want - 1.0).abs() < 1e-15, "{text}: {got:e} vs {want:e}");
        };
        close("100 kHz", Dimension::Frequency, None, 2.0 * PI * 1e5);
        close("-8.5 kappa", Dimension::Frequency, Some(k), -8.5 * k);
        close("369 nm", Dimension::Length, None, 369e-9);
        assert!(parse_quantity("369", Dimension::Length, None).is_err());
        assert!(parse_quantity("3 MHz", Dimension::Length, None).is_err());
        assert!(parse_quantity("1 kappa", Dimension::Frequency, None).is_err());
    }

    #[test]
    fn preset_matches_builtin_chain() {
        let cfg = ScenarioConfig::from_preset(Preset::Sec3c).unwrap();
        let reference = PhysicalConfig::ytterbium_chain();
        assert!((cfg.physical.u0() / reference.u0() - 1.0).abs() < 1e-12);
        assert!((cfg.physical.kappa / reference.kappa - 1.0).abs() < 1e-15);
        assert_eq!(cfg.eta.unwrap().count, 200);
    }

    #[test]
    fn overrides_and_rejections() {
        let cfg = ScenarioConfig::load(Some(Preset::Sec4), Some("[physical]\nn_ions = 7\n")).unwrap();
        assert_eq!(cfg.physical.n_ions, 7);
        let bad = ScenarioConfig::load(Some(Preset::Sec4), Some("[sweep.eta]\nmin = \"1 kappa\"\nmax = \"2 kappa\"\ncount = 1\n"));
        assert!(matches!(bad, Err(Error::Config(_))));
        assert!(ScenarioConfig::load(None, Some("seed = 1\n")).is_err());
        assert!(ScenarioConfig::load(Some(Preset::Sec3c), Some("typo = 1\n")).is_err());
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = ScenarioConfig::from_preset(Preset::Sec3c).unwrap();
        let mut b = a.clone();
        b.output.dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(ScenarioKind::CoolingMap), b.hash(ScenarioKind::CoolingMap));
        b.seed = 3;
        assert_ne!(a.hash(ScenarioKind::CoolingMap), b.hash(ScenarioKind::CoolingMap));
    }
}
