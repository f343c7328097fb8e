//! Compare reverse power flow with 16 PV homes, with and without scheduling.
//!
//!     cargo run --release --example reverse_flow

use dsmsim::config::RunConfig;
use dsmsim::scenario::{run_scenario, ScenarioSpec};
use dsmsim::synth::clock;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = RunConfig::paper_grid();
    let inputs = config.inputs()?;
    let head = inputs.community.feeder.head_branches();

    for dsm in [false, true] {
        let spec = ScenarioSpec {
            dsm_enabled: dsm,
            ..ScenarioSpec::new(16, 0.0, true)
        };
        let r = run_scenario(&spec, &inputs)?;
        println!(
            "{}: {} reverse-flow events, max at substation {:.2} kW",
            r.spec.label(),
            r.reverse_flows.len(),
            r.metrics.max_head_reverse_kw
        );
        for e in r.reverse_flows.iter().filter(|e| head.contains(&e.branch)) {
            println!("  {} substation branch {:>7.2} kW", clock(e.slot), e.flow_kw);
        }
    }
    Ok(())
}
