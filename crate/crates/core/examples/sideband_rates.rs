//! Perturbative sideband rates and the analytic occupation.

use optochain::rates::sideband_rates;

fn main() -> optochain::Result<()> {
    let omega = 10.0;
    for delta_eff in [-20.0, -14.0, -10.0, -6.0, -2.0, 2.0] {
        let r = sideband_rates(0.1, omega, delta_eff, 1.0)?;
        let n = r.n_analytic.map_or("undefined".to_string(), |n| format!("{n:.4e}"));
        println!(
            "delta_eff {delta_eff:+6.1}: A+ {:.3e}  A- {:.3e}  W {:+.3e}  n {n}  ({:?})",
            r.a_plus, r.a_minus, r.w_cool, r.status
        );
    }
    Ok(())
}
