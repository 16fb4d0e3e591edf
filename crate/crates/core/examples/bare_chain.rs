//! Equilibrium of the ion chain without light and its normal-mode spectrum.

use optochain::equilibrium::bare_chain_equilibrium;
use optochain::model::{nondimensionalize, PhysicalConfig};
use optochain::modes::normal_modes;

fn main() -> optochain::Result<()> {
    let physical = PhysicalConfig::ytterbium_chain();
    let params = nondimensionalize(&physical)?.with_eta(0.0);
    let chain = bare_chain_equilibrium(&params)?;
    let um = physical.wavelength / (2.0 * std::f64::consts::PI) * 1e6;
    println!("ion positions (um):");
    for (j, t) in chain.phases().iter().enumerate() {
        println!("  {:2}  {:+9.4}", j + 1, t * um);
    }
    let hessian = params.total_hessian(&chain)?;
    let (freqs, _) = normal_modes(&hessian, params.omega_r)?;
    println!("mode frequencies / trap frequency:");
    for (a, w) in freqs.iter().enumerate() {
        println!("  {:2}  {:.6}", a + 1, w / params.omega_t);
    }
    Ok(())
}
