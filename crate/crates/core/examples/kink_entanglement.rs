//! Kink mode in the stiff trap: occupation and cavity entanglement along the
//! pump strength.

use optochain::equilibrium::{bare_chain_equilibrium, continue_from, log_grid, Axis, Phase, SolverOptions};
use optochain::fluctuations::{build_drift_system, steady_state, NoiseModel, Partition, DEFAULT_COUPLING_THRESHOLD};
use optochain::model::{nondimensionalize, PhysicalConfig};
use optochain::modes::ModeDecomposition;

fn main() -> optochain::Result<()> {
    let params = nondimensionalize(&PhysicalConfig::ytterbium_kink())?;
    let opts = SolverOptions::default();
    let grid = log_grid(100.0, 260.0, 33);
    let start = bare_chain_equilibrium(&params.with_eta(grid[0]))?;
    let branch = continue_from(&params, &start, Axis::Eta, &grid, &opts)?;
    for (eta, state) in branch.states() {
        let p = params.with_eta(eta);
        let modes = ModeDecomposition::compute(&p, state)?;
        let (system, _) = build_drift_system(state, &modes, &NoiseModel::default())?.coupled_subsystem(DEFAULT_COUPLING_THRESHOLD)?;
        let Ok(steady) = steady_state(&system) else { continue };
        let en_kink = steady.log_negativity.get(&Partition::CavityVsMode(0)).copied().unwrap_or(0.0);
        let en_all = steady.log_negativity[&Partition::CavityVsAll];
        let n_kink = steady.occupation_of(0).map_or("excluded".into(), |n| format!("{n:.3e}"));
        let centre = match (&state.phase, &state.kink) {
            (Phase::Pinned, Some(k)) => format!("kink at ion {}", k.center_index + 1),
            _ => "sliding".into(),
        };
        println!("eta {eta:7.2}  {centre:16}  omega_kink {:7.3}  n_kink {n_kink:>9}  E_N kink {en_kink:.3e}  all {en_all:.3e}", modes.freqs[0]);
    }
    Ok(())
}
