//! Normal modes and cavity couplings in the pinned phase, written as CSV.

use optochain::equilibrium::{solve_equilibrium, Axis, SolverOptions};
use optochain::model::{nondimensionalize, PhysicalConfig};
use optochain::modes::ModeDecomposition;
use optochain::rates::branch_seed;

fn main() -> optochain::Result<()> {
    let params = nondimensionalize(&PhysicalConfig::ytterbium_chain())?.with_eta(120.0);
    let opts = SolverOptions::default();
    let seed = branch_seed(&params, Axis::DeltaC, &opts)?;
    let state = solve_equilibrium(&params, &seed, &opts)?;
    let modes = ModeDecomposition::compute(&params, &state)?;
    println!("phase {}, largest Lamb-Dicke parameter {:.3}", state.phase, modes.lamb_dicke_max());
    for (a, (w, chi)) in modes.freqs.iter().zip(&modes.couplings).enumerate() {
        println!("mode {:2}: omega = {w:9.4} kappa  |chi| = {:.4e} kappa", a + 1, chi.norm());
    }
    modes.write_shape_csv(std::io::stdout().lock()).expect("stdout");
    Ok(())
}
