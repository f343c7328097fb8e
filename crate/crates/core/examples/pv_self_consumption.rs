//! How much rooftop PV a scheduling home absorbs as the convenience penalty
//! rises. Each household is solved once per penalty with the ladder solver.
//!
//!     cargo run --release --example pv_self_consumption

use dsmsim::model::Household;
use dsmsim::scenario::pv_utilization;
use dsmsim::scheduler::{solve_penalty_ladder, SolverSettings};
use dsmsim::synth::{build_community, gen_price_profile, gen_pv_profile, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SynthConfig::default();
    let price = gen_price_profile(&config);
    let pv = gen_pv_profile(&config);
    let community = build_community(&config)?;
    let homes: Vec<Household> = community
        .smart_homes()
        .iter()
        .take(4)
        .map(|h| Household {
            pv_installed: true,
            ..h.clone()
        })
        .collect();

    let penalties = [0.0, 0.02, 0.05, 0.10, 0.20];
    let settings = SolverSettings::default();
    let ladders = homes
        .iter()
        .map(|h| solve_penalty_ladder(h, &price, &pv, &penalties, &settings))
        .collect::<Result<Vec<_>, _>>()?;

    let baseline: Vec<_> = homes.iter().map(|h| h.baseline_schedule()).collect();
    let before = pv_utilization(&homes, &baseline, &pv)?.unwrap_or(f64::NAN);
    println!("habitual schedules: {:.1}% of PV used on site", 100.0 * before);
    for (k, penalty) in penalties.iter().enumerate() {
        let schedules: Vec<_> = ladders.iter().map(|l| l[k].schedule.clone()).collect();
        let used = pv_utilization(&homes, &schedules, &pv)?.unwrap_or(f64::NAN);
        let bill: f64 = ladders.iter().map(|l| l[k].costs.objective()).sum();
        println!("penalty {penalty:.2} $/kWh: {:.1}% used, total objective {bill:.2} $", 100.0 * used);
    }
    Ok(())
}
