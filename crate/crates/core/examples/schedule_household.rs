//! Schedule one hand-built household against the default tariff with both
//! solvers, at zero and nonzero convenience penalty.
//!
//!     cargo run --release --example schedule_household

use dsmsim::model::{Appliance, Household};
use dsmsim::scheduler::{optimize_exact, optimize_heuristic, Problem, SolveBudget};
use dsmsim::synth::{clock, gen_price_profile, gen_pv_profile, SynthConfig};

fn appliance(id: &str, kw: f64, window: (usize, usize), interruptible: bool, habit: &[usize]) -> Appliance {
    Appliance {
        id: id.into(),
        rated_power_kw: kw,
        duration_slots: habit.len(),
        window_start: window.0,
        window_end: window.1,
        interruptible,
        baseline_on_slots: habit.to_vec(),
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SynthConfig::default();
    let price = gen_price_profile(&config);
    let pv = gen_pv_profile(&config);

    // Habits cluster in the 17:00-20:00 peak.
    let household = Household {
        index: 1,
        bus: 2,
        appliances: vec![
            appliance("ev_charger", 3.3, (0, 47), true, &[36, 37, 38, 39]),
            appliance("water_heater", 2.0, (0, 47), true, &[35, 36]),
            appliance("washing_machine", 0.5, (12, 44), false, &[36, 37, 38]),
            appliance("dishwasher", 1.2, (14, 46), false, &[39, 40]),
        ],
        md_kw: 7.0,
        pv_installed: false,
        base_load_kw: vec![0.4; 48],
        power_factor: 0.95,
    };

    for penalty in [0.0, 0.05] {
        let problem = Problem::new(&household, &price, &pv, penalty);
        let exact = optimize_exact(&problem, &SolveBudget::default())?;
        let heuristic = optimize_heuristic(&problem, &SolveBudget::default(), 7)?;
        println!("penalty {penalty:.2} $/kWh");
        println!(
            "  exact     {:>8.4} $ ({:?}, {} nodes)",
            exact.costs.objective(),
            exact.status,
            exact.nodes
        );
        println!("  heuristic {:>8.4} $", heuristic.costs.objective());
        for (i, a) in household.appliances.iter().enumerate() {
            let slots: Vec<String> = exact.schedule.on_slots(i).into_iter().map(clock).collect();
            println!("  {:<16} {}", a.id, slots.join(" "));
        }
    }
    Ok(())
}
