//! Continuation of the equilibrium in pump strength and the location of the
//! sliding-to-pinned transition.

use optochain::equilibrium::{continuation_sweep, default_eta_grid, SolverOptions};
use optochain::model::{nondimensionalize, PhysicalConfig};

fn main() -> optochain::Result<()> {
    let params = nondimensionalize(&PhysicalConfig::ytterbium_chain())?;
    let branch = continuation_sweep(&params, &default_eta_grid(), &SolverOptions::default())?;
    for (eta, state) in branch.states().step_by(20) {
        println!(
            "eta = {eta:8.3}  {:8}  asymmetry {:.3e}  delta_eff {:+.4}",
            state.phase.to_string(),
            state.asymmetry,
            state.delta_eff()
        );
    }
    match branch.transition {
        Some(t) => println!(
            "transition at eta = {:.6} kappa, lowest mode there {:.3e} kappa",
            t.eta_critical, t.lowest_mode_freq_at_transition
        ),
        None => println!("no transition on this grid"),
    }
    Ok(())
}
