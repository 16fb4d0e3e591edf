//! Cavity output spectrum in the weak-pump regime, where each vibrational
//! mode gives its own sideband peak.

use optochain::equilibrium::{bare_chain_equilibrium, linear_grid, solve_equilibrium, SolverOptions};
use optochain::fluctuations::{build_drift_system, output_spectrum, NoiseModel, DEFAULT_COUPLING_THRESHOLD};
use optochain::model::{nondimensionalize, PhysicalConfig};
use optochain::modes::ModeDecomposition;

fn main() -> optochain::Result<()> {
    let params = nondimensionalize(&PhysicalConfig::ytterbium_chain())?.with_eta(1.5);
    let opts = SolverOptions::default();
    let state = solve_equilibrium(&params, &bare_chain_equilibrium(&params)?, &opts)?;
    let modes = ModeDecomposition::compute(&params, &state)?;
    let (system, _) = build_drift_system(&state, &modes, &NoiseModel::default())?.coupled_subsystem(DEFAULT_COUPLING_THRESHOLD)?;
    let nu = linear_grid(0.0, 4.0, 4001);
    let s = output_spectrum(&system, &nu)?;
    println!("coupled mode frequencies: {:?}", system.freqs);
    println!("local maxima of S(nu):");
    for k in 1..nu.len() - 1 {
        if s[k] > s[k - 1] && s[k] > s[k + 1] {
            println!("  nu = {:.4}  S = {:.4e}", nu[k], s[k]);
        }
    }
    Ok(())
}
