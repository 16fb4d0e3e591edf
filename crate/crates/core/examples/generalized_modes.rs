//! Eigenmodes of the coupled photon-phonon drift matrix and the sum rule of
//! their decay rates.

use num_complex::Complex64;
use optochain::fluctuations::{eigen_rates, Character, DriftSystem, NoiseModel};

fn main() -> optochain::Result<()> {
    let freqs = [4.0, 4.6, 5.3];
    let couplings = [Complex64::new(0.3, 0.0), Complex64::new(0.2, 0.1), Complex64::new(0.4, 0.0)];
    let system = DriftSystem::from_parts(-4.6, Complex64::new(3.0, 1.0), &freqs, &couplings, &NoiseModel::default())?;
    let g = eigen_rates(&system)?;
    for m in &g.modes {
        let who = match m.dominant {
            Character::Photon => "photon".to_string(),
            Character::Phonon(l) => format!("phonon {}", l + 1),
        };
        println!("freq {:7.4}  rate {:.5e}  photon weight {:.3}  ({who})", m.freq, m.rate, m.photon_weight);
    }
    println!("sum of rates = {:.12} (2 kappa expected)", g.rate_sum());
    Ok(())
}
