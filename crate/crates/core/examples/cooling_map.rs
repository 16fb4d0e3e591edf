//! A coarse occupation map over detuning and pump strength through the
//! scenario runner, printed as a text table.

use optochain::sweep::{AxisSpec, Preset, RunOptions, ScenarioConfig, ScenarioKind, Spacing};

fn main() -> optochain::Result<()> {
    let mut cfg = ScenarioConfig::from_preset(Preset::Sec3c)?;
    cfg.delta_c = Some(AxisSpec { min: -12.0, max: -4.0, count: 5, spacing: Spacing::Linear });
    cfg.eta = Some(AxisSpec { min: 1.0, max: 400.0, count: 60, spacing: Spacing::Log });
    let ds = optochain::sweep::run_scenario(&cfg, ScenarioKind::CoolingMap, &RunOptions::default())?;
    let map = ds.table("cooling_map").expect("map table");
    let (dc, eta, n, crit) = (map.values("delta_c").unwrap(), map.values("eta").unwrap(), map.values("mean_n").unwrap(), map.values("eta_critical_row").unwrap());
    for k in (0..map.rows.len()).step_by(6) {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3e}"));
        println!("delta_c {:6.2}  eta {:8.3}  mean n {:>10}  transition {:>10}", dc[k].unwrap(), eta[k].unwrap(), show(n[k]), show(crit[k]));
    }
    println!("status counts {:?}", ds.status_counts());
    Ok(())
}
