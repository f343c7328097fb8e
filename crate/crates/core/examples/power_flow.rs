//! Solve the default 31-bus feeder for a few loading levels and print the
//! voltage at every bus of the heaviest case.
//!
//!     cargo run --release --example power_flow

use dsmsim::feeder::{build_feeder, solve_power_flow, FeederSpec, InjectionFrame, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let feeder = build_feeder(FeederSpec::default_community())?;
    let pf = 0.95f64;
    let mut last = None;
    for kw_per_bus in [1.0, 3.0, 5.0, -4.0] {
        let mut frame = InjectionFrame::zeros(feeder.bus_count());
        for bus in 1..feeder.bus_count() {
            frame.load_kw[bus] = kw_per_bus;
            frame.load_kvar[bus] = kw_per_bus * pf.acos().tan();
        }
        let r = solve_power_flow(&feeder, &frame, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)?;
        println!(
            "{kw_per_bus:>5.1} kW/bus: end voltage {:.4} pu, head flow {:>7.2} kW, loss {:.3} kW, {} iterations",
            r.v_mag[feeder.end_bus()],
            r.slack_p_kw,
            r.total_loss_kw,
            r.iterations
        );
        if kw_per_bus == 5.0 {
            last = Some(r);
        }
    }
    let heavy = last.expect("5 kW case solved");
    println!("\nbus  |V| at 5 kW/bus");
    for (bus, v) in heavy.v_mag.iter().enumerate() {
        println!("{:>3}  {v:.4}", bus + 1);
    }
    Ok(())
}
