//! Mean occupation and cooling rate against chain length with the trap
//! frequency scaled to keep the central spacing fixed.

use optochain::sweep::{run_scenario, Preset, RunOptions, ScalingSpec, ScenarioConfig, ScenarioKind, Hold};

fn main() -> optochain::Result<()> {
    let mut cfg = ScenarioConfig::from_preset(Preset::Sec3c)?;
    let hold = if std::env::args().any(|a| a == "--depth") { Hold::Depth } else { Hold::Eta };
    cfg.scaling = Some(ScalingSpec { n_ions: vec![11, 21, 31], hold });
    let ds = run_scenario(&cfg, ScenarioKind::ScalingStudy, &RunOptions::default())?;
    let mut out = std::io::stdout().lock();
    ds.table("scaling").expect("scaling table").write_csv(&mut out).expect("stdout");
    Ok(())
}
