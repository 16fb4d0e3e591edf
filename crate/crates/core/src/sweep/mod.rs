//! End-to-end scenarios: parameter sweeps, chain-length scaling and kink
//! spectroscopy, with figure-ready table export and resumable execution.
//!
//! A scenario is split into row-tasks. Each row is a sequential continuation
//! chain; rows run concurrently on a dedicated worker pool and are cached on
//! disk as they complete, keyed by the configuration hash and row index.

mod config;
mod dataset;

pub use config::{AxisSpec, Format, Hold, OutputSpec, Preset, ScalingSpec, ScenarioConfig, ScenarioKind, Spacing};
pub use dataset::{export_dataset, Cell, Column, PointStatus, RowCache, RowOutput, SweepDataset, Table};

use rayon::prelude::*;
use std::path::PathBuf;

use crate::equilibrium::{
    bare_chain_equilibrium, continuation_sweep, continue_from, locate_transition, solve_equilibrium, Axis, BranchPoint,
    EquilibriumState, Phase, SolverOptions,
};
use crate::error::{Error, Result};
use crate::fluctuations::{build_drift_system, output_spectrum, resolvable_steady_state, Character, DriftSystem, Partition, SteadyState};
use crate::model::{nondimensionalize, ModelParams, PhysicalConfig};
use crate::modes::ModeDecomposition;
use crate::rates::{branch_seed, resonance_finder, sideband_rates, ModeSelector, Resonance};

/// Execution settings that do not affect the numbers produced.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 lets the pool choose.
    pub workers: usize,
    /// Root directory of the resume cache; `None` disables caching.
    pub cache_root: Option<PathBuf>,
}

/// Everything computed at one equilibrium.
struct Analysis {
    modes: ModeDecomposition,
    system: DriftSystem,
    excluded: Vec<usize>,
    steady: SteadyState,
}

fn analyze(params: &ModelParams, state: &EquilibriumState, cfg: &ScenarioConfig) -> std::result::Result<Analysis, (Option<ModeDecomposition>, Error)> {
    let modes = ModeDecomposition::compute(params, state).map_err(|e| (None, e))?;
    let coupled = build_drift_system(state, &modes, &cfg.noise).and_then(|s| s.coupled_subsystem(cfg.coupling_threshold));
    let (system, mut excluded) = match coupled {
        Ok(v) => v,
        Err(e) => return Err((Some(modes), e)),
    };
    match resolvable_steady_state(&system) {
        Ok((steady, system, dropped)) => {
            excluded.extend(dropped);
            excluded.sort_unstable();
            Ok(Analysis { modes, system, excluded, steady })
        }
        Err(e) => Err((Some(modes), e)),
    }
}

impl Analysis {
    /// Decay rate of the generalized mode carrying most of each included phonon.
    fn phonon_rates(&self) -> Vec<f64> {
        let modes = &self.steady.generalized.modes;
        (0..self.steady.mode_labels.len())
            .map(|k| {
                modes
                    .iter()
                    .max_by(|a, b| a.phonon_weights[k].total_cmp(&b.phonon_weights[k]))
                    .map_or(f64::NAN, |m| m.rate)
            })
            .collect()
    }

    fn mean_occupation(&self) -> Option<f64> {
        mean(&self.steady.occupations)
    }

    fn mean_rate(&self) -> Option<f64> {
        mean(&self.phonon_rates())
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn status(analysis: Option<&Analysis>, branch_jump: bool) -> PointStatus {
    match analysis {
        None => PointStatus::Unstable,
        Some(_) if branch_jump => PointStatus::BranchJumpFlagged,
        Some(a) if !a.excluded.is_empty() => PointStatus::DecoupledModesExcluded,
        Some(_) => PointStatus::Ok,
    }
}

fn phase_cell(state: Option<&EquilibriumState>) -> Cell {
    state.map_or(Cell::Missing, |s| Cell::Text(s.phase.to_string()))
}

const STEADY_COLUMNS: &[(&str, &str)] = &[
    ("delta_c", "cavity detuning (kappa)"),
    ("eta", "pump strength (kappa)"),
    ("alpha", "mode index, 1 = lowest frequency"),
    ("omega_alpha", "mode frequency (kappa)"),
    ("chi_abs", "photon-phonon coupling |chi_alpha| (kappa)"),
    ("n_steady", "steady-state phonon occupation from the covariance; empty for excluded modes"),
    ("gamma_rate", "decay rate of the generalized mode dominated by this phonon (kappa)"),
];

const ANALYTIC_COLUMNS: &[(&str, &str)] = &[
    ("delta_c", "cavity detuning (kappa)"),
    ("eta", "pump strength (kappa)"),
    ("alpha", "mode index, 1 = lowest frequency"),
    ("omega_alpha", "mode frequency (kappa)"),
    ("chi_abs", "|chi_alpha| (kappa)"),
    ("a_plus", "heating coefficient A+ (kappa)"),
    ("a_minus", "cooling coefficient A- (kappa)"),
    ("w_cool", "net cooling rate A- - A+ (kappa)"),
    ("n_analytic", "perturbative steady occupation; empty without a steady state"),
    ("perturbative_valid", "1 when kappa > |chi_alpha|"),
];

const GENERALIZED_COLUMNS: &[(&str, &str)] = &[
    ("delta_c", "cavity detuning (kappa)"),
    ("eta", "pump strength (kappa)"),
    ("index", "generalized mode index, by ascending frequency"),
    ("freq", "|Im lambda| (kappa)"),
    ("rate", "-2 Re lambda (kappa)"),
    ("photon_weight", "photonic weight of the eigenvector"),
    ("dominant", "photon or phonon-<alpha>"),
];

const SPECTRUM_COLUMNS: &[(&str, &str)] = &[
    ("delta_c", "cavity detuning (kappa)"),
    ("eta", "pump strength (kappa)"),
    ("nu", "offset from the pump frequency (kappa)"),
    ("S_nu", "normally ordered output spectrum over |a|^2 (1/kappa)"),
];

fn push_mode_rows(out: &mut RowOutput, dc: f64, eta: f64, a: &Analysis) {
    let rates = a.phonon_rates();
    for (alpha, (&w, chi)) in a.modes.freqs.iter().zip(&a.modes.couplings).enumerate() {
        let pos = a.steady.mode_labels.iter().position(|&l| l == alpha);
        out.push(
            "steady_state",
            vec![
                dc.into(),
                eta.into(),
                (alpha + 1).into(),
                w.into(),
                chi.norm().into(),
                Cell::opt(pos.map(|k| a.steady.occupations[k])),
                Cell::opt(pos.map(|k| rates[k])),
            ],
        );
    }
}

fn push_analytic_rows(out: &mut RowOutput, dc: f64, eta: f64, a: &Analysis) {
    for (alpha, (&w, chi)) in a.modes.freqs.iter().zip(&a.modes.couplings).enumerate() {
        let Ok(r) = sideband_rates(chi.norm(), w, a.system.delta_eff, 1.0) else { continue };
        out.push(
            "analytic_rates",
            vec![
                dc.into(),
                eta.into(),
                (alpha + 1).into(),
                w.into(),
                chi.norm().into(),
                r.a_plus.into(),
                r.a_minus.into(),
                r.w_cool.into(),
                Cell::opt(r.n_analytic),
                usize::from(r.perturbative_valid).into(),
            ],
        );
    }
}

fn push_generalized_rows(out: &mut RowOutput, dc: f64, eta: f64, a: &Analysis) {
    for (k, m) in a.steady.generalized.modes.iter().enumerate() {
        let dominant = match m.dominant {
            Character::Photon => "photon".to_string(),
            Character::Phonon(l) => format!("phonon-{}", l + 1),
        };
        out.push(
            "generalized_modes",
            vec![dc.into(), eta.into(), (k + 1).into(), m.freq.into(), m.rate.into(), m.photon_weight.into(), dominant.into()],
        );
    }
}

fn push_spectrum_rows(out: &mut RowOutput, dc: f64, eta: f64, a: &Analysis, cfg: &ScenarioConfig) {
    let Some(spec) = &cfg.spectrum else { return };
    let nu = spec.grid();
    if let Ok(s) = output_spectrum(&a.system, &nu) {
        for (v, sv) in nu.iter().zip(s) {
            out.push("spectrum", vec![dc.into(), eta.into(), (*v).into(), sv.into()]);
        }
    }
}

fn solver_options(cfg: &ScenarioConfig) -> SolverOptions {
    SolverOptions { seed: cfg.seed, ..SolverOptions::default() }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// Runs a scenario. Per-point failures are recorded as statuses; only an
/// invalid configuration or a cache I/O failure aborts.
pub fn run_scenario(cfg: &ScenarioConfig, kind: ScenarioKind, run: &RunOptions) -> Result<SweepDataset> {
    cfg.validate_for(kind)?;
    let params = nondimensionalize(&cfg.physical).map_err(config_error)?;
    if kind == ScenarioKind::ScalingStudy && cfg.physical.n_ions < 2 {
        return Err(Error::Config("the scaling reference chain needs at least two ions".into()));
    }
    let hash = cfg.hash(kind);
    let cache = run.cache_root.as_deref().map(|root| RowCache::new(root, &hash)).transpose()?;
    let n_rows = match kind {
        ScenarioKind::CoolingMap => cfg.delta_c.map_or(0, |a| a.count),
        ScenarioKind::ScalingStudy => cfg.scaling.as_ref().map_or(0, |s| s.n_ions.len()),
        _ => 1,
    };
    let depth_reference = match (kind, &cfg.scaling) {
        (ScenarioKind::ScalingStudy, Some(ScalingSpec { hold: Hold::Depth, .. })) => Some(lattice_depth(&params, cfg)?),
        _ => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let compute = |i: usize| -> RowOutput {
        match kind {
            ScenarioKind::EquilibriumBranch => branch_row(&params, cfg),
            ScenarioKind::CoolingMap => map_row(&params, cfg, i),
            ScenarioKind::ResonanceAnalysis => resonance_row(&params, cfg),
            ScenarioKind::ScalingStudy => scaling_row(cfg, i, depth_reference),
            ScenarioKind::KinkSpectroscopy => kink_row(&params, cfg),
        }
    };
    let rows: Vec<RowOutput> = pool.install(|| {
        (0..n_rows)
            .into_par_iter()
            .map(|i| {
                if let Some(hit) = cache.as_ref().and_then(|c| c.load(i)) {
                    return Ok(hit);
                }
                let row = compute(i);
                if let Some(c) = &cache {
                    c.store(i, &row)?;
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(assemble(kind, cfg, hash, rows))
}

fn schemas(kind: ScenarioKind, cfg: &ScenarioConfig) -> Vec<Table> {
    let mut tables = match kind {
        ScenarioKind::EquilibriumBranch => vec![
            Table::new(
                "equilibrium_branch",
                "Fig. 2: equilibrium and phase along the pump branch",
                &[
                    ("eta", "pump strength (kappa)"),
                    ("delta_c", "cavity detuning (kappa)"),
                    ("phase", "sliding or pinned"),
                    ("asymmetry", "symmetry-breaking measure (phase units)"),
                    ("delta_eff", "effective detuning (kappa)"),
                    ("photons", "mean intracavity photon number"),
                    ("potential", "total potential (hbar kappa)"),
                    ("residual", "max gradient component at the solution"),
                    ("min_curvature", "lowest Hessian eigenvalue"),
                    ("kink_center", "kink centre ion index (1-based); empty when sliding"),
                    ("status", "point status"),
                ],
            ),
            Table::new(
                "equilibrium_positions",
                "Fig. 2: ion positions",
                &[("eta", "pump strength (kappa)"), ("j", "ion index (1-based)"), ("theta", "position k x_j (rad)"), ("x_um", "position (micrometres)")],
            ),
            Table::new(
                "mode_frequencies",
                "Fig. 2: normal-mode spectrum and couplings",
                &[
                    ("eta", "pump strength (kappa)"),
                    ("alpha", "mode index, 1 = lowest frequency"),
                    ("omega_alpha", "mode frequency (kappa)"),
                    ("chi_abs", "|chi_alpha| (kappa)"),
                    ("lamb_dicke", "k sigma_alpha"),
                ],
            ),
        ],
        ScenarioKind::CoolingMap => vec![
            Table::new(
                "cooling_map",
                "Fig. 3: mean occupation over (delta_c, eta)",
                &[
                    ("delta_c", "cavity detuning (kappa)"),
                    ("eta", "pump strength (kappa)"),
                    ("mean_n", "mean occupation over coupled modes (uncapped)"),
                    ("n_coupled_modes", "number of modes above the coupling threshold"),
                    ("phase", "sliding or pinned"),
                    ("eta_critical_row", "sliding-pinned transition of this delta_c row (kappa)"),
                    ("mean_rate", "mean phonon decay rate (kappa)"),
                    ("photons", "mean intracavity photon number"),
                    ("status", "point status"),
                ],
            ),
            Table::new("steady_state", "Fig. 3: per-mode steady state", STEADY_COLUMNS),
        ],
        ScenarioKind::ResonanceAnalysis => vec![
            Table::new("steady_state", "Fig. 4(d,e): per-mode occupations and rates", STEADY_COLUMNS),
            Table::new("analytic_rates", "Fig. 4(d,e): perturbative overlay", ANALYTIC_COLUMNS),
            Table::new("generalized_modes", "Fig. 4(b,c): generalized-mode frequencies and rates", GENERALIZED_COLUMNS),
            Table::new(
                "resonance",
                "Fig. 4: mode-cavity resonance points",
                &[
                    ("selector", "which mode frequency enters the resonance condition"),
                    ("eta_root", "root of delta_eff + omega (kappa); empty when not found"),
                    ("bracket_lo", "bisection bracket, low side (kappa)"),
                    ("bracket_hi", "bisection bracket, high side (kappa)"),
                ],
            ),
            Table::new(
                "resonance_branch",
                "Fig. 4(a): branch summary",
                &[
                    ("eta", "pump strength (kappa)"),
                    ("delta_eff", "effective detuning (kappa)"),
                    ("phase", "sliding or pinned"),
                    ("mean_n", "mean occupation over coupled modes"),
                    ("photon_number", "photon fluctuation number"),
                    ("status", "point status"),
                ],
            ),
        ],
        ScenarioKind::ScalingStudy => vec![
            Table::new(
                "scaling",
                "Fig. 5: chain-length scaling",
                &[
                    ("n_ions", "number of ions"),
                    ("trap_freq_hz", "axial trap frequency (Hz, cyclic)"),
                    ("eta", "pump strength (kappa)"),
                    ("delta_c", "cavity detuning (kappa)"),
                    ("mean_n", "mean occupation over coupled modes"),
                    ("mean_rate", "mean phonon decay rate (kappa)"),
                    ("n_coupled_modes", "number of modes above the coupling threshold"),
                    ("phase", "sliding or pinned"),
                    ("status", "point status"),
                ],
            ),
            Table::new(
                "scaling_modes",
                "Fig. 5: per-mode data",
                &[
                    ("n_ions", "number of ions"),
                    ("alpha", "mode index, 1 = lowest frequency"),
                    ("omega_alpha", "mode frequency (kappa)"),
                    ("chi_abs", "|chi_alpha| (kappa)"),
                    ("n_steady", "steady-state occupation; empty for excluded modes"),
                    ("gamma_rate", "phonon decay rate (kappa)"),
                ],
            ),
        ],
        ScenarioKind::KinkSpectroscopy => vec![
            Table::new(
                "kink",
                "Figs. 6-7: kink cooling and entanglement along delta_c",
                &[
                    ("delta_c", "cavity detuning (kappa)"),
                    ("eta", "pump strength (kappa)"),
                    ("phase", "sliding or pinned"),
                    ("kink_center", "kink centre ion index (1-based)"),
                    ("delta_eff", "effective detuning (kappa)"),
                    ("omega_kink", "lowest mode frequency (kappa)"),
                    ("n_kink", "lowest mode occupation; empty when excluded"),
                    ("photon_number", "photon fluctuation number"),
                    ("en_kink", "log-negativity cavity vs lowest mode"),
                    ("en_all", "log-negativity cavity vs all modes"),
                    ("mean_n", "mean occupation over coupled modes"),
                    ("status", "point status"),
                ],
            ),
            Table::new("steady_state", "Fig. 6: per-mode steady state", STEADY_COLUMNS),
        ],
    };
    if cfg.spectrum.is_some() && matches!(kind, ScenarioKind::ResonanceAnalysis | ScenarioKind::KinkSpectroscopy) {
        tables.push(Table::new("spectrum", "Figs. 1(c), 7(d): output spectra", SPECTRUM_COLUMNS));
    }
    tables
}

fn assemble(kind: ScenarioKind, cfg: &ScenarioConfig, hash: String, rows: Vec<RowOutput>) -> SweepDataset {
    let mut tables = schemas(kind, cfg);
    let mut statuses = Vec::new();
    let mut row_meta = Vec::new();
    for row in rows {
        for t in &mut tables {
            if let Some(r) = row.tables.get(&t.name) {
                t.rows.extend(r.iter().cloned());
            }
        }
        statuses.extend(row.statuses);
        row_meta.push(row.metadata);
    }
    let metadata = serde_json::json!({
        "coupling_threshold_kappa": cfg.coupling_threshold,
        "seed": cfg.seed,
        "physical": cfg.physical,
        "eta_axis": cfg.eta,
        "delta_c_axis": cfg.delta_c,
        "scaling": cfg.scaling,
        "spectrum_axis": cfg.spectrum,
        "noise": cfg.noise,
        "rows": row_meta,
    });
    SweepDataset { scenario: kind.name().to_string(), config_hash: hash, tables, statuses, metadata }
}

fn branch_row(params: &ModelParams, cfg: &ScenarioConfig) -> RowOutput {
    let mut out = RowOutput::new();
    let grid = cfg.eta.map(|a| a.grid()).unwrap_or_default();
    let opts = solver_options(cfg);
    let um_per_rad = cfg.physical.wavelength / (2.0 * std::f64::consts::PI) * 1e6;
    let c = match continuation_sweep(params, &grid, &opts) {
        Ok(c) => c,
        Err(e) => {
            out.statuses = vec![PointStatus::Unstable; grid.len()];
            out.metadata = serde_json::json!({ "error": e.to_string() });
            return out;
        }
    };
    for BranchPoint { value: eta, outcome, branch_jump } in &c.points {
        let p = params.with_eta(*eta);
        let state = outcome.as_ref().ok();
        let modes = state.and_then(|s| ModeDecomposition::compute(&p, s).ok());
        let st = match (state, &modes) {
            (Some(_), Some(_)) if *branch_jump => PointStatus::BranchJumpFlagged,
            (Some(_), Some(m)) if m.couplings.iter().any(|c| c.norm() <= cfg.coupling_threshold) => PointStatus::DecoupledModesExcluded,
            (Some(_), Some(_)) => PointStatus::Ok,
            _ => PointStatus::Unstable,
        };
        out.statuses.push(st);
        let num = |f: fn(&EquilibriumState) -> f64| Cell::opt(state.map(f));
        out.push(
            "equilibrium_branch",
            vec![
                (*eta).into(),
                params.delta_c.into(),
                phase_cell(state),
                num(|s| s.asymmetry),
                num(|s| s.delta_eff()),
                num(|s| s.photons()),
                num(|s| s.potential),
                num(|s| s.residual),
                num(|s| s.min_curvature),
                state.and_then(|s| s.kink.as_ref()).map_or(Cell::Missing, |k| (k.center_index + 1).into()),
                st.as_str().into(),
            ],
        );
        if let Some(s) = state {
            for (j, &t) in s.phases().iter().enumerate() {
                out.push("equilibrium_positions", vec![(*eta).into(), (j + 1).into(), t.into(), (t * um_per_rad).into()]);
            }
        }
        if let Some(m) = &modes {
            for (a, (&w, chi)) in m.freqs.iter().zip(&m.couplings).enumerate() {
                out.push("mode_frequencies", vec![(*eta).into(), (a + 1).into(), w.into(), chi.norm().into(), m.widths[a].into()]);
            }
        }
    }
    out.metadata = serde_json::json!({ "transition": c.transition });
    out
}

fn map_row(params: &ModelParams, cfg: &ScenarioConfig, row: usize) -> RowOutput {
    let mut out = RowOutput::new();
    let dc = cfg.delta_c.map(|a| a.grid()[row]).unwrap_or(params.delta_c);
    let p = params.with_delta_c(dc);
    let grid = cfg.eta.map(|a| a.grid()).unwrap_or_default();
    let opts = solver_options(cfg);
    let transition = locate_transition(&p, &grid, &opts).ok().flatten();
    let eta_critical = Cell::opt(transition.as_ref().map(|t| t.eta_critical));
    let branch = bare_chain_equilibrium(&p.with_eta(grid[0])).and_then(|start| continue_from(&p, &start, Axis::Eta, &grid, &opts));
    let points = match branch {
        Ok(c) => c.points,
        Err(e) => {
            out.statuses = vec![PointStatus::Unstable; grid.len()];
            out.metadata = serde_json::json!({ "delta_c": dc, "error": e.to_string() });
            return out;
        }
    };
    for pt in &points {
        let pe = p.with_eta(pt.value);
        let state = pt.outcome.as_ref().ok();
        let analysis = state.and_then(|s| analyze(&pe, s, cfg).ok());
        let st = status(analysis.as_ref(), pt.branch_jump);
        out.statuses.push(st);
        out.push(
            "cooling_map",
            vec![
                dc.into(),
                pt.value.into(),
                Cell::opt(analysis.as_ref().and_then(Analysis::mean_occupation)),
                analysis.as_ref().map_or(Cell::Missing, |a| a.steady.mode_labels.len().into()),
                phase_cell(state),
                eta_critical.clone(),
                Cell::opt(analysis.as_ref().and_then(Analysis::mean_rate)),
                Cell::opt(state.map(|s| s.photons())),
                st.as_str().into(),
            ],
        );
        if let Some(a) = &analysis {
            push_mode_rows(&mut out, dc, pt.value, a);
        }
    }
    out.metadata = serde_json::json!({ "delta_c": dc, "transition": transition });
    out
}

fn resonance_row(params: &ModelParams, cfg: &ScenarioConfig) -> RowOutput {
    let mut out = RowOutput::new();
    let grid = cfg.eta.map(|a| a.grid()).unwrap_or_default();
    let opts = solver_options(cfg);
    let dc = params.delta_c;
    let selectors = [
        ("lowest", ModeSelector::Lowest),
        ("band-center", ModeSelector::BandCenter),
        ("highest", ModeSelector::Index(params.n_ions - 1)),
        ("kink", ModeSelector::Kink),
    ];
    for (name, sel) in selectors {
        let r = resonance_finder(params, sel, Axis::Eta, &grid, 1e-3, &opts).unwrap_or(Resonance::NotFound);
        let (lo, hi) = match r {
            Resonance::Found { bracket, .. } => (Cell::Float(bracket.0), Cell::Float(bracket.1)),
            Resonance::NotFound => (Cell::Missing, Cell::Missing),
        };
        out.push("resonance", vec![name.into(), Cell::opt(r.value()), lo, hi]);
    }
    let branch = bare_chain_equilibrium(&params.with_eta(grid[0])).and_then(|s| continue_from(params, &s, Axis::Eta, &grid, &opts));
    let points = match branch {
        Ok(c) => c.points,
        Err(e) => {
            out.statuses = vec![PointStatus::Unstable; grid.len()];
            out.metadata = serde_json::json!({ "error": e.to_string() });
            return out;
        }
    };
    for pt in &points {
        let pe = params.with_eta(pt.value);
        let state = pt.outcome.as_ref().ok();
        let analysis = state.and_then(|s| analyze(&pe, s, cfg).ok());
        let st = status(analysis.as_ref(), pt.branch_jump);
        out.statuses.push(st);
        out.push(
            "resonance_branch",
            vec![
                pt.value.into(),
                Cell::opt(state.map(|s| s.delta_eff())),
                phase_cell(state),
                Cell::opt(analysis.as_ref().and_then(Analysis::mean_occupation)),
                Cell::opt(analysis.as_ref().map(|a| a.steady.photon_fluctuation_number)),
                st.as_str().into(),
            ],
        );
        if let Some(a) = &analysis {
            push_mode_rows(&mut out, dc, pt.value, a);
            push_analytic_rows(&mut out, dc, pt.value, a);
            push_generalized_rows(&mut out, dc, pt.value, a);
            push_spectrum_rows(&mut out, dc, pt.value, a, cfg);
        }
    }
    out
}

/// Trap frequency keeping the central spacing of `reference` at `n` ions:
/// ω_N ∝ √(ln N)/N.
pub fn scaled_trap_frequency(reference: &PhysicalConfig, n: usize) -> f64 {
    let (n0, n) = (reference.n_ions as f64, n as f64);
    reference.trap_freq * (n.ln() / n0.ln()).sqrt() * n0 / n
}

/// Equilibrium at the working point reached by ramping the pump up from the bare chain.
fn working_point(params: &ModelParams, opts: &SolverOptions) -> Result<EquilibriumState> {
    let seed = branch_seed(params, Axis::DeltaC, opts)?;
    solve_equilibrium(params, &seed, opts)
}

fn lattice_depth(params: &ModelParams, cfg: &ScenarioConfig) -> Result<f64> {
    let s = working_point(params, &solver_options(cfg)).map_err(|e| Error::Config(format!("reference chain: {e}")))?;
    Ok(params.u0 * s.photons())
}

/// Adjusts η until U₀|ā|² equals `depth`.
fn solve_at_depth(params: &ModelParams, depth: f64, opts: &SolverOptions) -> Result<(ModelParams, EquilibriumState)> {
    let mut p = *params;
    let mut state = working_point(&p, opts)?;
    for _ in 0..60 {
        let current = p.u0 * state.photons();
        if ((current - depth) / depth).abs() < 1e-12 {
            return Ok((p, state));
        }
        p = p.with_eta(p.eta * (depth / current).sqrt());
        state = solve_equilibrium(&p, &state.config, opts)?;
    }
    Err(Error::NotConverged { iterations: 60, residual: (p.u0 * state.photons() - depth).abs() })
}

fn scaling_row(cfg: &ScenarioConfig, row: usize, depth: Option<f64>) -> RowOutput {
    let mut out = RowOutput::new();
    let n = cfg.scaling.as_ref().map_or(cfg.physical.n_ions, |s| s.n_ions[row]);
    let mut physical = cfg.physical.clone();
    physical.trap_freq = scaled_trap_frequency(&cfg.physical, n);
    physical.n_ions = n;
    let opts = solver_options(cfg);
    let solved = nondimensionalize(&physical).and_then(|p| match depth {
        Some(d) => solve_at_depth(&p, d, &opts),
        None => working_point(&p, &opts).map(|s| (p, s)),
    });
    let (p, state) = match solved {
        Ok(v) => (Some(v.0), Some(v.1)),
        Err(e) => {
            out.metadata = serde_json::json!({ "n_ions": n, "error": e.to_string() });
            (None, None)
        }
    };
    let analysis = match (&p, &state) {
        (Some(p), Some(s)) => analyze(p, s, cfg).ok(),
        _ => None,
    };
    let st = status(analysis.as_ref(), false);
    out.statuses.push(st);
    let trap_hz = physical.trap_freq / (2.0 * std::f64::consts::PI);
    out.push(
        "scaling",
        vec![
            n.into(),
            trap_hz.into(),
            Cell::opt(p.map(|p| p.eta)),
            Cell::opt(p.map(|p| p.delta_c)),
            Cell::opt(analysis.as_ref().and_then(Analysis::mean_occupation)),
            Cell::opt(analysis.as_ref().and_then(Analysis::mean_rate)),
            analysis.as_ref().map_or(Cell::Missing, |a| a.steady.mode_labels.len().into()),
            phase_cell(state.as_ref()),
            st.as_str().into(),
        ],
    );
    if let Some(a) = &analysis {
        let rates = a.phonon_rates();
        for (alpha, (&w, chi)) in a.modes.freqs.iter().zip(&a.modes.couplings).enumerate() {
            let pos = a.steady.mode_labels.iter().position(|&l| l == alpha);
            out.push(
                "scaling_modes",
                vec![
                    n.into(),
                    (alpha + 1).into(),
                    w.into(),
                    chi.norm().into(),
                    Cell::opt(pos.map(|k| a.steady.occupations[k])),
                    Cell::opt(pos.map(|k| rates[k])),
                ],
            );
        }
    }
    out
}

fn kink_row(params: &ModelParams, cfg: &ScenarioConfig) -> RowOutput {
    let mut out = RowOutput::new();
    let grid = cfg.delta_c.map(|a| a.grid()).unwrap_or_default();
    let opts = solver_options(cfg);
    let first = params.with_delta_c(grid[0]);
    let branch = branch_seed(&first, Axis::DeltaC, &opts).and_then(|s| continue_from(params, &s, Axis::DeltaC, &grid, &opts));
    let points = match branch {
        Ok(c) => c.points,
        Err(e) => {
            out.statuses = vec![PointStatus::Unstable; grid.len()];
            out.metadata = serde_json::json!({ "error": e.to_string() });
            return out;
        }
    };
    let eta = params.eta;
    for pt in &points {
        let pd = params.with_delta_c(pt.value);
        let state = pt.outcome.as_ref().ok();
        let analysis = state.and_then(|s| analyze(&pd, s, cfg).ok());
        let st = status(analysis.as_ref(), pt.branch_jump);
        out.statuses.push(st);
        let a = analysis.as_ref();
        let en = |part: Partition| Cell::opt(a.map(|a| a.steady.log_negativity.get(&part).copied().unwrap_or(0.0)));
        out.push(
            "kink",
            vec![
                pt.value.into(),
                eta.into(),
                phase_cell(state),
                state
                    .filter(|s| s.phase == Phase::Pinned)
                    .and_then(|s| s.kink.as_ref())
                    .map_or(Cell::Missing, |k| (k.center_index + 1).into()),
                Cell::opt(state.map(|s| s.delta_eff())),
                Cell::opt(a.map(|a| a.modes.freqs[0])),
                Cell::opt(a.and_then(|a| a.steady.occupation_of(0))),
                Cell::opt(a.map(|a| a.steady.photon_fluctuation_number)),
                en(Partition::CavityVsMode(0)),
                en(Partition::CavityVsAll),
                Cell::opt(a.and_then(Analysis::mean_occupation)),
                st.as_str().into(),
            ],
        );
        if let Some(a) = a {
            push_mode_rows(&mut out, pt.value, eta, a);
            push_spectrum_rows(&mut out, pt.value, eta, a, cfg);
        }
    }
    out
}
