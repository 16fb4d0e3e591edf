//! Steady-state phonon occupations at the mode-cavity resonance.

use optochain::equilibrium::{solve_equilibrium, Axis, SolverOptions};
use optochain::fluctuations::{build_drift_system, steady_state, NoiseModel, DEFAULT_COUPLING_THRESHOLD};
use optochain::model::{nondimensionalize, PhysicalConfig};
use optochain::modes::ModeDecomposition;
use optochain::rates::branch_seed;

fn main() -> optochain::Result<()> {
    let params = nondimensionalize(&PhysicalConfig::ytterbium_chain())?;
    let opts = SolverOptions::default();
    let state = solve_equilibrium(&params, &branch_seed(&params, Axis::DeltaC, &opts)?, &opts)?;
    let modes = ModeDecomposition::compute(&params, &state)?;
    let (system, excluded) = build_drift_system(&state, &modes, &NoiseModel::default())?.coupled_subsystem(DEFAULT_COUPLING_THRESHOLD)?;
    let steady = steady_state(&system)?;
    println!("delta_eff = {:.4} kappa, excluded modes {:?}", state.delta_eff(), excluded);
    for (&label, n) in steady.mode_labels.iter().zip(&steady.occupations) {
        println!("mode {:2}: omega = {:8.4}  n = {:.4e}", label + 1, modes.freqs[label], n);
    }
    println!("photon fluctuation number {:.4e}", steady.photon_fluctuation_number);
    if let Some(d) = steady.route_discrepancy {
        println!("eigenbasis vs Lyapunov covariance: {d:.2e}");
    }
    Ok(())
}
