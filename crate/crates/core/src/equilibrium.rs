//! Mean-field equilibria: Newton minimization of the total potential,
//! continuation in a control parameter, and sliding/pinned classification.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{CavityField, IonConfiguration, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Sliding,
    Pinned,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Sliding => "sliding",
            Phase::Pinned => "pinned",
        })
    }
}

/// Location and strength of the structural defect in a pinned chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinkDescriptor {
    /// Zero-based index of the ion nearest the defect.
    pub center_index: usize,
    /// Signed displacement of the chain centre from the trap centre (phase units).
    pub asymmetry: f64,
    /// Largest relative deviation of a central nearest-neighbour spacing from their mean.
    pub spacing_irregularity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumState {
    pub config: IonConfiguration,
    pub field: CavityField,
    pub potential: f64,
    pub phase: Phase,
    pub kink: Option<KinkDescriptor>,
    /// Raw symmetry-breaking measure used by the classifier.
    pub asymmetry: f64,
    pub converged: bool,
    /// Infinity norm of the gradient at `config`.
    pub residual: f64,
    /// Lowest eigenvalue of the full Hessian of the total potential.
    pub min_curvature: f64,
}

impl EquilibriumState {
    pub fn delta_eff(&self) -> f64 {
        self.field.delta_eff
    }

    pub fn photons(&self) -> f64 {
        self.field.photons
    }

    pub fn phases(&self) -> &[f64] {
        self.config.phases()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    /// Hessian eigenvalues below `-curvature_tolerance` mark a saddle.
    pub curvature_tolerance: f64,
    /// Central-ion displacement above which a chain counts as pinned.
    pub symmetry_threshold: f64,
    /// First perturbation applied when a solve lands on a saddle.
    pub seed_displacement: f64,
    /// Seed of the last-resort random perturbations.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            gradient_tolerance: 1e-10,
            max_iterations: 500,
            curvature_tolerance: 1e-8,
            symmetry_threshold: 1e-3,
            seed_displacement: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionPoint {
    pub eta_critical: f64,
    pub lowest_mode_freq_at_transition: f64,
    /// Final bisection bracket (stable side, unstable side).
    pub bracket: (f64, f64),
}

/// Parameter varied along a continuation branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Eta,
    DeltaC,
}

impl Axis {
    pub fn apply(self, params: ModelParams, value: f64) -> ModelParams {
        match self {
            Axis::Eta => params.with_eta(value),
            Axis::DeltaC => params.with_delta_c(value),
        }
    }

    pub fn value(self, params: &ModelParams) -> f64 {
        match self {
            Axis::Eta => params.eta,
            Axis::DeltaC => params.delta_c,
        }
    }

    /// dV_tot/dv along an equilibrium branch (only the explicit dependence survives).
    fn potential_slope(self, params: &ModelParams, state: &EquilibriumState) -> f64 {
        match self {
            Axis::Eta => 2.0 * params.eta * (-state.delta_eff()).atan(),
            Axis::DeltaC => -state.photons(),
        }
    }
}

#[derive(Debug)]
pub struct BranchPoint {
    pub value: f64,
    pub outcome: Result<EquilibriumState>,
    /// Set when the potential jumps by more than ten times the local trend.
    pub branch_jump: bool,
}

#[derive(Debug)]
pub struct Continuation {
    pub axis: Axis,
    pub points: Vec<BranchPoint>,
    pub transition: Option<TransitionPoint>,
}

impl Continuation {
    pub fn states(&self) -> impl Iterator<Item = (f64, &EquilibriumState)> {
        self.points.iter().filter_map(|p| p.outcome.as_ref().ok().map(|s| (p.value, s)))
    }
}

/// Coordinates in which Newton iterates: either all phases or the
/// mirror-symmetric subspace θ_j = −θ_{N−1−j}.
#[derive(Clone, Copy)]
enum Space {
    Full,
    Mirror,
}

impl Space {
    fn basis(self, n: usize) -> DMatrix<f64> {
        match self {
            Space::Full => DMatrix::identity(n, n),
            Space::Mirror => {
                let mut b = DMatrix::zeros(n, n / 2);
                for j in 0..n / 2 {
                    b[(j, j)] = -1.0;
                    b[(n - 1 - j, j)] = 1.0;
                }
                b
            }
        }
    }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn min_eigenvalue(h: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Damped Newton iteration. Indefinite Hessians are handled with the
/// absolute-eigenvalue step, a curvature-scaled descent direction.
fn newton(params: &ModelParams, start: &IonConfiguration, space: Space, opts: &SolverOptions) -> Result<(IonConfiguration, f64)> {
    let (cfg, residual, converged) = descend(params, start, space, opts)?;
    if converged {
        Ok((cfg, residual))
    } else {
        Err(Error::NotConverged { iterations: opts.max_iterations, residual })
    }
}

/// The Newton loop proper; returns the last iterate even without convergence.
fn descend(params: &ModelParams, start: &IonConfiguration, space: Space, opts: &SolverOptions) -> Result<(IonConfiguration, f64, bool)> {
    let n = start.len();
    let basis = space.basis(n);
    let mut cfg = match space {
        Space::Full => start.clone(),
        Space::Mirror => start.symmetrized()?,
    };
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let g_full = params.gradient_at(&cfg);
        residual = inf_norm(&g_full);
        if residual < opts.gradient_tolerance {
            return Ok((cfg, residual, true));
        }
        let g = basis.transpose() * &g_full;
        let h = basis.transpose() * params.hessian_at(&cfg, true) * &basis;
        let eig = SymmetricEigen::new(h);
        let lmax = eig.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        let definite = eig.eigenvalues.iter().all(|&l| l > 0.0);
        let floor = 1e-12 * lmax.max(1e-300);
        let mut step = DVector::zeros(g.len());
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            step -= v * (v.dot(&g) / l.abs().max(floor));
        }
        let full_step = &basis * step;
        let v0 = params.potential_at(&cfg);
        let slope = g_full.dot(&full_step);
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-16 {
            let delta: Vec<f64> = full_step.iter().map(|d| d * t).collect();
            if let Some(trial) = cfg.shifted(&delta) {
                let v1 = params.potential_at(&trial);
                let armijo = v1 <= v0 + 1e-4 * t * slope;
                let shrinks = definite && inf_norm(&params.gradient_at(&trial)) < residual;
                if armijo || shrinks {
                    accepted = Some(trial);
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some(next) => cfg = next,
            None => break,
        }
    }
    let residual = residual.min(inf_norm(&params.gradient_at(&cfg)));
    Ok((cfg, residual, residual < opts.gradient_tolerance))
}

fn initial_chain(params: &ModelParams) -> Result<IonConfiguration> {
    let n = params.n_ions;
    if n == 1 {
        return IonConfiguration::new(vec![0.0]);
    }
    let nf = n as f64;
    let spacing = params.length_scale() * (3.0 * nf.ln() / (nf * nf)).cbrt().max(0.1);
    IonConfiguration::new((0..n).map(|j| (j as f64 - 0.5 * (nf - 1.0)) * spacing).collect())
}

/// Minimizer of the trap plus Coulomb energy (no light), exactly mirror symmetric.
pub fn bare_chain_equilibrium(params: &ModelParams) -> Result<IonConfiguration> {
    params.validate()?;
    let dark = params.with_eta(0.0);
    let (cfg, _) = newton(&dark, &initial_chain(&dark)?, Space::Mirror, &SolverOptions::default())?;
    Ok(cfg)
}

/// Local minimizer of the total potential reached from `init`. Saddles are
/// escaped by a fixed schedule of perturbations, keeping the lowest minimum.
pub fn solve_equilibrium(params: &ModelParams, init: &IonConfiguration, opts: &SolverOptions) -> Result<EquilibriumState> {
    params.validate()?;
    if init.len() != params.n_ions {
        return Err(Error::InvalidParameter(format!(
            "initial configuration has {} ions, expected {}",
            init.len(),
            params.n_ions
        )));
    }
    let (cfg, residual, converged) = descend(params, init, Space::Full, opts)?;
    let eig = SymmetricEigen::new(params.hessian_at(&cfg, true));
    let (kmin, lmin) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |a, (k, l)| if l < a.1 { (k, l) } else { a });
    if converged && lmin >= -opts.curvature_tolerance {
        return build_state(params, cfg, opts);
    }
    let failure = if converged {
        Error::Saddle(lmin)
    } else {
        Error::NotConverged { iterations: opts.max_iterations, residual }
    };
    let soft: Vec<f64> = eig.eigenvectors.column(kmin).iter().copied().collect();
    let scale = soft.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let n = cfg.len();
    let along = |mag: f64| -> Vec<f64> { soft.iter().map(|v| mag * v / scale).collect() };
    let mut schedule: Vec<Vec<f64>> = Vec::new();
    for sign in [1.0, -1.0] {
        if n % 2 == 1 {
            let mut d = vec![0.0; n];
            d[n / 2] = sign * opts.seed_displacement;
            schedule.push(d);
        } else {
            schedule.push(along(sign * opts.seed_displacement));
        }
    }
    for mag in [1e-3, 1e-2, 1e-1] {
        for sign in [1.0, -1.0] {
            schedule.push(along(sign * mag));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..4 {
        schedule.push((0..n).map(|_| 1e-2 * rng.random_range(-1.0..1.0)).collect());
    }

    let mut best: Option<(f64, IonConfiguration)> = None;
    for (k, delta) in schedule.into_iter().enumerate() {
        if best.is_some() && k >= 2 {
            break;
        }
        let Some(start) = cfg.shifted(&delta) else { continue };
        let Ok((c, _)) = newton(params, &start, Space::Full, opts) else { continue };
        if min_eigenvalue(&params.hessian_at(&c, true)) < -opts.curvature_tolerance {
            continue;
        }
        let v = params.potential_at(&c);
        if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
            best = Some((v, c));
        }
    }
    match best {
        Some((_, c)) => build_state(params, c, opts),
        None => Err(failure),
    }
}

fn build_state(params: &ModelParams, config: IonConfiguration, opts: &SolverOptions) -> Result<EquilibriumState> {
    let residual = inf_norm(&params.gradient_at(&config));
    let min_curvature = min_eigenvalue(&params.hessian_at(&config, true));
    let potential = params.potential_at(&config);
    let field = CavityField::new(params.eta, params.detuning_at(&config));
    let (phase, kink, asymmetry) = classify(params, &config, opts.symmetry_threshold);
    Ok(EquilibriumState {
        config,
        field,
        potential,
        phase,
        kink,
        asymmetry,
        converged: residual < opts.gradient_tolerance,
        residual,
        min_curvature,
    })
}

fn classify(params: &ModelParams, config: &IonConfiguration, threshold: f64) -> (Phase, Option<KinkDescriptor>, f64) {
    let theta = config.phases();
    let n = theta.len();
    let signed = if n % 2 == 1 { theta[n / 2] } else { 0.5 * (theta[n / 2 - 1] + theta[n / 2]) };
    let measure = if n % 2 == 1 { signed.abs() } else { config.mirror_asymmetry() };
    if measure <= threshold {
        return (Phase::Sliding, None, measure);
    }
    let lo = n / 4;
    let hi = n - 1 - n / 4;
    let displacement = |t: f64| {
        let c = (t + params.lattice_phase).cos().powi(2);
        if params.u0 >= 0.0 { c } else { 1.0 - c }
    };
    let (mut wsum, mut jsum) = (0.0, 0.0);
    for (j, &t) in theta.iter().enumerate().take(hi + 1).skip(lo) {
        let w = displacement(t);
        wsum += w;
        jsum += w * j as f64;
    }
    let centroid = if wsum > 0.0 { jsum / wsum } else { 0.5 * (n as f64 - 1.0) };
    let spacings: Vec<f64> = (lo..hi).map(|j| config.separation(j, j + 1)).collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len().max(1) as f64;
    let spacing_irregularity = spacings.iter().fold(0.0_f64, |m, s| m.max(((s - mean) / mean).abs()));
    let kink = KinkDescriptor { center_index: centroid.round() as usize, asymmetry: signed, spacing_irregularity };
    (Phase::Pinned, Some(kink), measure)
}

/// Sliding/pinned label and kink descriptor of a configuration.
pub fn classify_phase(params: &ModelParams, state: &EquilibriumState, opts: &SolverOptions) -> (Phase, Option<KinkDescriptor>) {
    let (phase, kink, _) = classify(params, &state.config, opts.symmetry_threshold);
    (phase, kink)
}

/// Follows the equilibrium from the bare chain along ascending pump strengths
/// and locates the loss of stability of the mirror-symmetric branch.
pub fn continuation_sweep(params: &ModelParams, eta_grid: &[f64], opts: &SolverOptions) -> Result<Continuation> {
    let start = bare_chain_equilibrium(params)?;
    let mut c = continue_from(params, &start, Axis::Eta, eta_grid, opts)?;
    c.transition = locate_transition(params, eta_grid, opts)?;
    Ok(c)
}

/// Continuation along an arbitrary axis starting from a given configuration.
/// Each converged point seeds the next; failures are recorded, not fatal.
pub fn continue_from(
    params: &ModelParams,
    start: &IonConfiguration,
    axis: Axis,
    grid: &[f64],
    opts: &SolverOptions,
) -> Result<Continuation> {
    check_grid(grid)?;
    let mut seed = start.clone();
    let mut points: Vec<BranchPoint> = Vec::with_capacity(grid.len());
    let mut previous: Option<(f64, f64, f64)> = None;
    for &v in grid {
        let p = axis.apply(*params, v);
        let outcome = solve_equilibrium(&p, &seed, opts);
        let mut branch_jump = false;
        if let Ok(state) = &outcome {
            let slope = axis.potential_slope(&p, state);
            if let Some((v0, pot0, slope0)) = previous {
                let trend = slope.abs().max(slope0.abs()) * (v - v0).abs();
                let jump = (state.potential - pot0).abs();
                branch_jump = jump > 10.0 * trend && jump > 1e-9 * (1.0 + state.potential.abs());
            }
            previous = Some((v, state.potential, slope));
            seed = state.config.clone();
        }
        points.push(BranchPoint { value: v, outcome, branch_jump });
    }
    Ok(Continuation { axis, points, transition: None })
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("continuation grid is empty".into()));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("continuation grid must be finite and strictly ascending".into()));
    }
    Ok(())
}

/// Symmetric-branch solution and its lowest full-Hessian eigenvalue.
fn symmetric_point(params: &ModelParams, seed: &IonConfiguration, opts: &SolverOptions) -> Result<(IonConfiguration, f64)> {
    let (cfg, _) = newton(params, seed, Space::Mirror, opts)?;
    let lmin = min_eigenvalue(&params.hessian_at(&cfg, true));
    Ok((cfg, lmin))
}

/// Pump strength at which the mirror-symmetric equilibrium first loses
/// stability on `eta_grid`, refined by bisection. Returns `None` when the
/// lattice is offset from the trap centre or no crossing occurs.
pub fn locate_transition(params: &ModelParams, eta_grid: &[f64], opts: &SolverOptions) -> Result<Option<TransitionPoint>> {
    check_grid(eta_grid)?;
    if params.lattice_phase != 0.0 || params.n_ions < 2 {
        return Ok(None);
    }
    let mut cfg = bare_chain_equilibrium(params)?;
    let mut stable: Option<(f64, IonConfiguration)> = None;
    let mut bracket = None;
    for &eta in eta_grid {
        let (c, lmin) = symmetric_point(&params.with_eta(eta), &cfg, opts)?;
        if lmin <= 0.0 {
            bracket = Some(eta);
            break;
        }
        cfg = c.clone();
        stable = Some((eta, c));
    }
    let (Some(mut hi), Some((mut lo, mut clo))) = (bracket, stable) else { return Ok(None) };
    while (hi - lo) / hi > 1e-6 {
        let mid = 0.5 * (lo + hi);
        let (c, lmin) = symmetric_point(&params.with_eta(mid), &clo, opts)?;
        if lmin > 0.0 {
            lo = mid;
            clo = c;
        } else {
            hi = mid;
        }
    }
    let p = params.with_eta(lo);
    let lfrozen = min_eigenvalue(&p.hessian_at(&clo, false)).max(0.0);
    Ok(Some(TransitionPoint {
        eta_critical: 0.5 * (lo + hi),
        lowest_mode_freq_at_transition: (2.0 * p.omega_r * lfrozen).sqrt(),
        bracket: (lo, hi),
    }))
}

/// Logarithmically spaced grid including both end points.
pub fn log_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    let (a, b) = (min.ln(), max.ln());
    (0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect()
}

/// Uniformly spaced grid including both end points.
pub fn linear_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    (0..count).map(|k| min + (max - min) * k as f64 / (count - 1) as f64).collect()
}

/// Default pump grid: 200 log-spaced points from 1κ to 400κ.
pub fn default_eta_grid() -> Vec<f64> {
    log_grid(1.0, 400.0, 200)
}
