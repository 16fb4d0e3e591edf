//! Detuning scan at fixed pump in the stiff trap, exported as CSV tables.

use optochain::sweep::{export_dataset, run_scenario, AxisSpec, Format, Preset, RunOptions, ScenarioConfig, ScenarioKind, Spacing};

fn main() -> optochain::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "kink_out".into());
    let mut cfg = ScenarioConfig::from_preset(Preset::Sec4)?;
    cfg.delta_c = Some(AxisSpec { min: -4.5, max: -1.5, count: 61, spacing: Spacing::Linear });
    let ds = run_scenario(&cfg, ScenarioKind::KinkSpectroscopy, &RunOptions::default())?;
    for path in export_dataset(&ds, dir.as_ref(), Format::Csv)? {
        println!("wrote {}", path.display());
    }
    let kink = ds.table("kink").expect("kink table");
    let (dc, photons) = (kink.values("delta_c").unwrap(), kink.values("photon_number").unwrap());
    for k in (0..kink.rows.len()).step_by(10) {
        println!("delta_c {:6.3}  photon fluctuations {:?}", dc[k].unwrap(), photons[k]);
    }
    Ok(())
}
