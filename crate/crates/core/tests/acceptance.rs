//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use optochain::equilibrium::{
    bare_chain_equilibrium, continue_from, default_eta_grid, locate_transition, solve_equilibrium, Axis, EquilibriumState,
    Phase, SolverOptions,
};
use optochain::fluctuations::{
    build_drift_system, eigen_rates, output_spectrum, quadrature_spectral_matrix, resolvable_steady_state,
    DriftSystem, NoiseModel, Partition, SteadyState, DEFAULT_COUPLING_THRESHOLD,
};
use optochain::linalg::{min_hermitian_eigenvalue, symplectic_form};
use optochain::model::{nondimensionalize, IonConfiguration, ModelParams, PhysicalConfig};
use optochain::modes::ModeDecomposition;
use optochain::rates::{branch_seed, resonance_finder, sideband_rates, ModeSelector, Resonance};
use optochain::sweep::{run_scenario, Preset, RunOptions, ScenarioConfig, ScenarioKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

struct Analysis {
    modes: ModeDecomposition,
    system: DriftSystem,
    steady: SteadyState,
    excluded: Vec<usize>,
}

fn analyze(p: &ModelParams, s: &EquilibriumState) -> optochain::Result<Analysis> {
    let modes = ModeDecomposition::compute(p, s)?;
    let (coupled, mut excluded) =
        build_drift_system(s, &modes, &NoiseModel::default())?.coupled_subsystem(DEFAULT_COUPLING_THRESHOLD)?;
    let (steady, system, dropped) = resolvable_steady_state(&coupled)?;
    excluded.extend(dropped);
    Ok(Analysis { modes, system, steady, excluded })
}

fn preset_params(preset: Preset) -> ModelParams {
    nondimensionalize(&ScenarioConfig::from_preset(preset).unwrap().physical).unwrap()
}

/// Equilibrium at pump `eta` on the branch continued from the bare chain along `grid`.
fn pump_branch_state(p: &ModelParams, grid: &[f64], eta: f64, opts: &SolverOptions) -> EquilibriumState {
    let mut path: Vec<f64> = grid.iter().copied().filter(|&v| v < eta).collect();
    path.push(eta);
    let start = bare_chain_equilibrium(&p.with_eta(path[0])).unwrap();
    let c = continue_from(p, &start, Axis::Eta, &path, opts).unwrap();
    c.points.into_iter().last().unwrap().outcome.unwrap()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn random_physical(rng: &mut ChaCha8Rng) -> PhysicalConfig {
    let mut c = PhysicalConfig::ytterbium_chain();
    c.n_ions = rng.random_range(2..=12);
    c.trap_freq = 2.0 * std::f64::consts::PI * rng.random_range(80e3..800e3);
    c.pump_strength = c.kappa * 10f64.powf(rng.random_range(-0.3..2.5));
    c.cavity_detuning = -c.kappa * rng.random_range(0.5..12.0);
    c
}

/// Slowest generalized-mode decay rate over the largest eigenvalue modulus.
fn min_relative_rate(st: &SteadyState) -> f64 {
    let g = &st.generalized;
    let scale = g.eigenvalues.iter().map(|l| l.norm()).fold(0.0, f64::max);
    g.modes.iter().map(|m| m.rate).fold(f64::INFINITY, f64::min) / scale
}

fn criterion_1() -> Outcome {
    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let opts = SolverOptions::default();
    let (mut points, mut attempts) = (0, 0);
    let (mut worst_sum, mut worst_route, mut worst_phys) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut failures = Vec::new();
    let mut reduced = 0;
    let mut over: Vec<f64> = Vec::new();
    while points < 100 && attempts < 2000 {
        attempts += 1;
        let Ok(p) = nondimensionalize(&random_physical(&mut rng)) else { continue };
        let Ok(seed) = branch_seed(&p, Axis::DeltaC, &opts) else { continue };
        let Ok(state) = solve_equilibrium(&p, &seed, &opts) else { continue };
        let Ok(modes) = ModeDecomposition::compute(&p, &state) else { continue };
        let Ok(full) = build_drift_system(&state, &modes, &NoiseModel::default()) else { continue };
        let Ok(g) = eigen_rates(&full) else { continue };
        if g.max_real_part() >= 0.0 {
            continue;
        }
        points += 1;
        worst_sum = worst_sum.max((g.rate_sum() - 2.0).abs() / 2.0);
        let solved = full.coupled_subsystem(DEFAULT_COUPLING_THRESHOLD).and_then(|(s, _)| resolvable_steady_state(&s));
        match solved {
            Ok((st, _, dropped)) => {
                if !dropped.is_empty() {
                    reduced += 1;
                }
                match st.route_discrepancy {
                    Some(d) => {
                        if d >= 1e-8 {
                            over.push(min_relative_rate(&st));
                        }
                        worst_route = worst_route.max(d);
                    }
                    None => failures.push(format!("point {points}: one covariance route failed")),
                }
                let n = st.covariance.nrows() / 2;
                worst_phys = worst_phys.min(min_hermitian_eigenvalue(&st.covariance, &symplectic_form(n)));
            }
            Err(e) => failures.push(format!("point {points}: {e}")),
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    let pass = points == 100 && worst_sum < 1e-9 && worst_route < 1e-8 && worst_phys >= -1e-8 && failures.is_empty() && secs < 60.0;
    let mut detail = format!(
        "{points} stable points ({attempts} drawn, {reduced} with unresolvable modes dropped); max rate-sum rel err {worst_sum:.2e}; max route discrepancy {worst_route:.2e}; min eig(Sigma+i Omega) {worst_phys:.2e}; {secs:.1}s"
    );
    if !over.is_empty() {
        let rmax = over.iter().copied().fold(0.0, f64::max);
        detail.push_str(&format!(
            "; {} points exceed the route tolerance, all with slowest relative decay rate <= {rmax:.1e}",
            over.len()
        ));
    }
    if !failures.is_empty() {
        detail.push_str(&format!("; {} solve failures, first: {}", failures.len(), failures[0]));
    }
    outcome(pass, detail)
}

fn criterion_2() -> Outcome {
    let base = nondimensionalize(&PhysicalConfig::ytterbium_chain()).unwrap().with_eta(0.0);
    let opts = SolverOptions::default();
    let mut worst_pos = 0.0f64;
    for (n, factor) in [(2usize, 1.0), (3, 5.0)] {
        let mut p = base;
        p.n_ions = n;
        let x = (factor * p.coulomb / (8.0 * p.trap_coefficient())).cbrt();
        let expected: Vec<f64> = if n == 2 { vec![-x, x] } else { vec![-x, 0.0, x] };
        let s = solve_equilibrium(&p, &bare_chain_equilibrium(&p).unwrap(), &opts).unwrap();
        for (a, b) in s.phases().iter().zip(&expected) {
            worst_pos = worst_pos.max((a - b).abs() / x);
        }
    }
    let mut worst_freq = 0.0f64;
    for n in [2usize, 5, 11] {
        let mut p = base;
        p.n_ions = n;
        let s = solve_equilibrium(&p, &bare_chain_equilibrium(&p).unwrap(), &opts).unwrap();
        let m = ModeDecomposition::compute(&p, &s).unwrap();
        worst_freq = worst_freq.max((m.freqs[0] / p.omega_t - 1.0).abs());
        worst_freq = worst_freq.max((m.freqs[1] / (3f64.sqrt() * p.omega_t) - 1.0).abs());
    }
    outcome(
        worst_pos < 1e-10 && worst_freq < 1e-10,
        format!("N=2,3 position rel err {worst_pos:.2e}; centre-of-mass and breathing rel err (N=2,5,11) {worst_freq:.2e}"),
    )
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_g, mut worst_h) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let mut p = nondimensionalize(&random_physical(&mut rng)).unwrap();
        p.eta = rng.random_range(0.0..400.0);
        p.n_ions = rng.random_range(2..=15);
        let extent = bare_chain_equilibrium(&p).unwrap().phases().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut phases: Vec<f64> = (0..p.n_ions).map(|_| rng.random_range(-1.5 * extent..1.5 * extent)).collect();
        phases.sort_by(f64::total_cmp);
        let gap = 0.05 * extent / p.n_ions as f64;
        for j in 1..phases.len() {
            phases[j] = phases[j].max(phases[j - 1] + gap);
        }
        let cfg = IonConfiguration::new(phases).unwrap();
        let g = p.total_gradient(&cfg).unwrap();
        let h_mat = p.total_hessian(&cfg).unwrap();
        let step = 1e-3;
        let n = p.n_ions;
        let mut g_fd = vec![0.0; n];
        let mut h_fd = DMatrix::zeros(n, n);
        for j in 0..n {
            let at = |k: f64| {
                let mut d = vec![0.0; n];
                d[j] = k * step;
                cfg.shifted(&d).unwrap()
            };
            let (p2, p1, m1, m2) = (at(2.0), at(1.0), at(-1.0), at(-2.0));
            let v = |c: &IonConfiguration| p.total_potential(c).unwrap();
            let gr = |c: &IonConfiguration| p.total_gradient(c).unwrap();
            g_fd[j] = (8.0 * (v(&p1) - v(&m1)) - (v(&p2) - v(&m2))) / (12.0 * step);
            let col = ((gr(&p1) - gr(&m1)) * 8.0 - (gr(&p2) - gr(&m2))) / (12.0 * step);
            h_fd.set_column(j, &col);
        }
        let eg = max_abs(g.iter().zip(&g_fd).map(|(a, b)| a - b)) / max_abs(g.iter().copied());
        let eh = (&h_mat - &h_fd).amax() / h_mat.amax();
        worst_g = worst_g.max(eg);
        worst_h = worst_h.max(eh);
    }
    outcome(
        worst_g < 1e-6 && worst_h < 1e-5,
        format!("100 random ordered configurations; max gradient rel err {worst_g:.2e}; max Hessian rel err {worst_h:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let clock = Instant::now();
    let p = preset_params(Preset::Sec3c);
    let opts = SolverOptions::default();
    let grid = default_eta_grid();
    let transition = locate_transition(&p, &grid, &opts).unwrap().map(|t| t.eta_critical);
    let resonance = resonance_finder(&p, ModeSelector::Lowest, Axis::Eta, &grid, 1e-6, &opts).unwrap();
    let mut detail = format!("transition {}", transition.map_or("none".into(), |v| format!("{v:.2}")));
    let mut pass = transition.is_some_and(|v| within(v, 50.0, 0.2));
    match resonance {
        Resonance::Found { value, .. } => {
            detail.push_str(&format!("; resonance {value:.2}"));
            pass &= within(value, 250.0, 0.1);
            let state = pump_branch_state(&p, &grid, value, &opts);
            match analyze(&p.with_eta(value), &state) {
                Ok(a) => {
                    let occ = &a.steady.occupations;
                    let all = occ.len() == p.n_ions;
                    let max = occ.iter().copied().fold(0.0, f64::max);
                    let med = median(occ);
                    pass &= all && max < 0.1 && (10f64.powf(-2.5)..=10f64.powf(-1.5)).contains(&med);
                    detail.push_str(&format!(
                        "; {} of {} modes resolved (excluded {:?}); max occupation {max:.3e}; median {med:.3e}",
                        occ.len(),
                        p.n_ions,
                        a.excluded
                    ));
                }
                Err(e) => {
                    pass = false;
                    detail.push_str(&format!("; steady state failed: {e}"));
                }
            }
        }
        Resonance::NotFound => {
            pass = false;
            detail.push_str("; no resonance");
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    detail.push_str(&format!(" (targets 50 +-20%, 250 +-10%, all < 0.1, median in [10^-2.5, 10^-1.5]); {secs:.1}s"));
    outcome(pass, detail)
}

fn criterion_5() -> Outcome {
    let clock = Instant::now();
    let p = preset_params(Preset::Sec4);
    let opts = SolverOptions::default();
    let grid = default_eta_grid();
    let transition = locate_transition(&p, &grid, &opts).unwrap().map(|t| t.eta_critical);
    let resonance = resonance_finder(&p, ModeSelector::Kink, Axis::Eta, &grid, 1e-6, &opts).unwrap();
    let mut pass = transition.is_some_and(|v| within(v, 190.0, 0.1));
    let mut detail = format!("transition {}", transition.map_or("none".into(), |v| format!("{v:.2}")));
    match resonance {
        Resonance::Found { value, .. } => {
            pass &= within(value, 200.0, 0.1);
            detail.push_str(&format!("; kink resonance {value:.2}"));
            let state = pump_branch_state(&p, &grid, value, &opts);
            match analyze(&p.with_eta(value), &state) {
                Ok(a) => {
                    let kink = a.steady.occupation_of(0);
                    let lowest = a.steady.occupations.iter().copied().fold(f64::INFINITY, f64::min);
                    let ok = kink.is_some_and(|k| k <= lowest);
                    pass &= ok;
                    detail.push_str(&format!(
                        "; kink occupation {} vs lowest {lowest:.3e}",
                        kink.map_or("excluded".into(), |k| format!("{k:.3e}"))
                    ));
                }
                Err(e) => {
                    pass = false;
                    detail.push_str(&format!("; steady state failed: {e}"));
                }
            }
        }
        Resonance::NotFound => {
            pass = false;
            detail.push_str("; no kink resonance");
        }
    }
    let start = bare_chain_equilibrium(&p.with_eta(grid[0])).unwrap();
    let branch = continue_from(&p, &start, Axis::Eta, &grid, &opts).unwrap();
    let mut peak: Option<(f64, f64, f64)> = None;
    for (eta, s) in branch.states().filter(|(_, s)| s.phase == Phase::Pinned) {
        let Ok(a) = analyze(&p.with_eta(eta), s) else { continue };
        let kink = a.steady.log_negativity.get(&Partition::CavityVsMode(0)).copied().unwrap_or(0.0);
        let all = a.steady.log_negativity[&Partition::CavityVsAll];
        if peak.is_none_or(|(_, k, _)| kink > k) {
            peak = Some((eta, kink, all));
        }
    }
    match peak {
        Some((eta, kink, all)) => {
            pass &= kink > 0.5 * all;
            detail.push_str(&format!("; kink log-negativity peak {kink:.3e} at eta {eta:.1} vs all {all:.3e}"));
        }
        None => {
            pass = false;
            detail.push_str("; no pinned branch points");
        }
    }
    let cfg = ScenarioConfig::from_preset(Preset::Sec4).unwrap();
    let scan = run_scenario(&cfg, ScenarioKind::KinkSpectroscopy, &RunOptions { workers: 0, cache_root: None });
    let scan_points = scan.as_ref().map_or(0, |d| d.statuses.len());
    pass &= scan.is_ok() && scan_points == 200;
    let secs = clock.elapsed().as_secs_f64();
    pass &= secs < 120.0;
    detail.push_str(&format!(
        "; detuning scan {scan_points} points (targets 190 +-10%, 200 +-10%, kink lowest, log-negativity ratio > 0.5); {secs:.1}s"
    ));
    outcome(pass, detail)
}

fn criterion_6() -> Outcome {
    let opts = SolverOptions::default();
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    let cases = [(Preset::Sec3c, vec![-12.0, -8.5, -5.0, -3.0]), (Preset::Sec4, vec![-3.0, -1.8, -1.0])];
    for (preset, detunings) in cases {
        let base = preset_params(preset);
        for dc in detunings {
            let p = base.with_delta_c(dc);
            let grid = optochain::equilibrium::log_grid(0.5, 400.0, 80);
            let start = bare_chain_equilibrium(&p.with_eta(grid[0])).unwrap();
            let branch = continue_from(&p, &start, Axis::Eta, &grid, &opts).unwrap();
            for (eta, s) in branch.states() {
                let pe = p.with_eta(eta);
                let Ok(a) = analyze(&pe, s) else { continue };
                let chi_max = a.modes.couplings.iter().map(|c| c.norm()).fold(0.0, f64::max);
                if chi_max > 0.1 || s.delta_eff() >= 0.0 {
                    continue;
                }
                for (k, &label) in a.steady.mode_labels.iter().enumerate() {
                    let w = a.modes.freqs[label];
                    let chi = a.modes.couplings[label].norm();
                    let spacing = a
                        .modes
                        .freqs
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| *b != label)
                        .map(|(_, f)| (f - w).abs())
                        .fold(f64::INFINITY, f64::min);
                    if spacing <= 10.0 * chi {
                        continue;
                    }
                    let analytic = sideband_rates(chi, w, s.delta_eff(), 1.0).unwrap().n_analytic.unwrap();
                    let err = (a.steady.occupations[k] - analytic).abs() / analytic;
                    checked += 1;
                    if err > worst {
                        worst = err;
                        worst_at = format!("Delta_c {dc}, eta {eta:.2}, mode {}", label + 1);
                    }
                }
            }
        }
    }
    outcome(
        checked > 0 && worst < 0.1,
        format!("{checked} isolated weakly coupled modes; max rel deviation {worst:.3e} ({worst_at})"),
    )
}

/// Adaptive Simpson integration of a matrix-valued function on [a, b].
fn simpson<F: Fn(f64) -> DMatrix<f64>>(f: &F, a: f64, b: f64, tol: f64) -> DMatrix<f64> {
    fn rec<F: Fn(f64) -> DMatrix<f64>>(
        f: &F,
        a: f64,
        b: f64,
        fa: &DMatrix<f64>,
        fm: &DMatrix<f64>,
        fb: &DMatrix<f64>,
        whole: DMatrix<f64>,
        tol: f64,
        depth: u32,
    ) -> DMatrix<f64> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (fa + &flm * 4.0 + fm) * ((m - a) / 6.0);
        let right = (fm + &frm * 4.0 + fb) * ((b - m) / 6.0);
        let sum = &left + &right;
        let err = (&sum - &whole).amax();
        if depth == 0 || err <= 15.0 * tol {
            return &sum + (&sum - &whole) / 15.0;
        }
        rec(f, a, m, fa, &flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, &frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = (&fa + &fm * 4.0 + &fb) * ((b - a) / 6.0);
    rec(f, a, b, &fa, &fm, &fb, whole, tol, 30)
}

fn spectral_integral(system: &DriftSystem, limit: f64, tol: f64) -> DMatrix<f64> {
    let g = eigen_rates(system).unwrap();
    let mut cuts: Vec<f64> = vec![-limit, 0.0, limit];
    for m in &g.modes {
        cuts.push(m.freq);
        cuts.push(-m.freq);
    }
    cuts.retain(|c| c.abs() <= limit);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let f = |nu: f64| quadrature_spectral_matrix(system, nu).unwrap().map(|z| z.re);
    let n = system.dim();
    let mut total = DMatrix::zeros(n, n);
    for w in cuts.windows(2) {
        total += simpson(&f, w[0], w[1], tol);
    }
    total / (2.0 * std::f64::consts::PI)
}

/// Lorentzian fit of S around `center`: 1/S is fitted by a quadratic in ν,
/// whose curvature and minimum give the half-width.
fn lorentz_half_width(system: &DriftSystem, center: f64, guess: f64) -> f64 {
    let nu: Vec<f64> = (0..81).map(|k| center + guess * (-2.0 + 4.0 * k as f64 / 80.0)).collect();
    let s = output_spectrum(system, &nu).unwrap();
    let x = DMatrix::from_fn(nu.len(), 3, |i, j| ((nu[i] - center) / guess).powi(j as i32));
    let y = nalgebra::DVector::from_iterator(s.len(), s.iter().map(|v| 1.0 / v));
    let c = x.clone().svd(true, true).solve(&y, 1e-14).unwrap();
    let (c0, c1, c2) = (c[0], c[1], c[2]);
    let shift = -c1 / (2.0 * c2);
    (c0 / c2 - shift * shift).sqrt() * guess
}

fn criterion_7() -> Outcome {
    let opts = SolverOptions::default();
    let p = preset_params(Preset::Sec3c);
    let grid = default_eta_grid();
    let state = pump_branch_state(&p, &grid, 250.0, &opts);
    let a = analyze(&p.with_eta(250.0), &state).unwrap();
    let g = eigen_rates(&a.system).unwrap();
    let limit = 20.0 * g.modes.iter().map(|m| m.freq).fold(0.0, f64::max);
    let cov = &a.steady.covariance;
    let wk = spectral_integral(&a.system, limit, 1e-7 * cov.amax());
    let mut worst_wk = 0.0f64;
    for i in 0..cov.nrows() {
        for j in 0..cov.ncols() {
            let scale = if i == j { cov[(i, i)].abs() } else { (cov[(i, i)] * cov[(j, j)]).sqrt() };
            worst_wk = worst_wk.max((wk[(i, j)] - cov[(i, j)]).abs() / scale);
        }
    }

    let weak = pump_branch_state(&p, &grid, 20.0, &opts);
    let b = analyze(&p.with_eta(20.0), &weak).unwrap();
    let gb = eigen_rates(&b.system).unwrap();
    let mut worst_lw = 0.0f64;
    let mut fitted = 0;
    for (k, m) in gb.modes.iter().enumerate() {
        if m.dominant == optochain::fluctuations::Character::Photon || m.rate <= 0.0 {
            continue;
        }
        let width = 0.5 * m.rate;
        let isolated = gb.modes.iter().enumerate().all(|(l, o)| l == k || (o.freq - m.freq).abs() > 10.0 * (width + 0.5 * o.rate));
        if !isolated {
            continue;
        }
        let center = m.eigenvalue.im;
        let side = if output_spectrum(&b.system, &[center]).unwrap()[0] >= output_spectrum(&b.system, &[-center]).unwrap()[0] {
            center
        } else {
            -center
        };
        let hw = lorentz_half_width(&b.system, side, width);
        worst_lw = worst_lw.max((hw / width - 1.0).abs());
        fitted += 1;
    }

    let zero = DriftSystem::from_parts(
        -4.0,
        Complex64::new(3.0, -1.0),
        &[1.0, 2.5, 4.0],
        &[Complex64::new(0.0, 0.0); 3],
        &NoiseModel::default(),
    )
    .unwrap();
    let nu: Vec<f64> = (0..401).map(|k| -10.0 + 0.05 * k as f64).collect();
    let zero_max = max_abs(output_spectrum(&zero, &nu).unwrap());

    outcome(
        worst_wk < 0.01 && fitted > 0 && worst_lw < 0.05 && zero_max == 0.0,
        format!(
            "integrated spectrum vs covariance max rel err {worst_wk:.2e}; {fitted} isolated peaks, max half-width deviation {worst_lw:.2e}; decoupled spectrum max {zero_max:e}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let clock = Instant::now();
    let cfg = ScenarioConfig::from_preset(Preset::Sec3c).unwrap();
    let ds = match run_scenario(&cfg, ScenarioKind::ScalingStudy, &RunOptions { workers: 0, cache_root: None }) {
        Ok(d) => d,
        Err(e) => return outcome(false, format!("scaling study failed: {e}")),
    };
    let secs = clock.elapsed().as_secs_f64();
    let t = ds.table("scaling").unwrap();
    let ns: Vec<f64> = t.values("n_ions").unwrap().into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let occ: Vec<Option<f64>> = t.values("mean_n").unwrap();
    let rate: Vec<Option<f64>> = t.values("mean_rate").unwrap();
    if occ.iter().chain(&rate).any(Option::is_none) {
        return outcome(false, format!("missing values in the scaling table; {secs:.1}s"));
    }
    let occ: Vec<f64> = occ.into_iter().flatten().collect();
    let rate: Vec<f64> = rate.into_iter().flatten().collect();
    let occ_ok = occ.windows(2).all(|w| w[1] <= w[0]);
    let rate_ok = (1..ns.len()).all(|k| rate[k] < rate[k - 1] && rate[k] * ns[k] > rate[k - 1] * ns[k - 1]);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(", ");
    outcome(
        occ_ok && rate_ok && secs < 1800.0,
        format!(
            "N = {:?}; mean occupation [{}] non-increasing: {occ_ok}; mean rate [{}] decreasing slower than 1/N: {rate_ok}; {secs:.1}s",
            ns.iter().map(|n| *n as usize).collect::<Vec<_>>(),
            fmt(&occ),
            fmt(&rate)
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("exact-structure properties", criterion_1),
        ("analytic chain limits", criterion_2),
        ("calculus checks", criterion_3),
        ("N=11 chain reproduction", criterion_4),
        ("kink regime reproduction", criterion_5),
        ("weak-coupling agreement", criterion_6),
        ("spectrum self-consistency", criterion_7),
        ("scaling study", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
