//! Print the synthetic community: tariff, PV curve and every household.
//!
//!     cargo run --release --example synth_community [seed]

use dsmsim::synth::{build_community, clock, gen_price_profile, gen_pv_profile, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = SynthConfig::default();
    if let Some(seed) = std::env::args().nth(1) {
        config.seed = seed.parse()?;
    }
    let price = gen_price_profile(&config);
    let pv = gen_pv_profile(&config);
    let community = build_community(&config)?;

    println!("slot  time   price   pv_kw");
    for t in 0..price.len() {
        println!("{t:>4}  {}  {:.3}  {:>6.3}", clock(t), price.price_per_kwh[t], pv.output_kw[t]);
    }

    println!("\nhome  bus  smart  appliances  md_kw  habitual_kwh  peak_at");
    for (i, h) in community.households.iter().enumerate() {
        let total: Vec<f64> = (0..48)
            .map(|t| {
                h.base_load_kw[t]
                    + h.appliances
                        .iter()
                        .filter(|a| a.baseline_on_slots.contains(&t))
                        .map(|a| a.rated_power_kw)
                        .sum::<f64>()
            })
            .collect();
        let peak = (0..48).max_by(|&a, &b| total[a].total_cmp(&total[b])).unwrap_or(0);
        println!(
            "{:>4}  {:>3}  {:>5}  {:>10}  {:>5.1}  {:>12.2}  {}",
            h.index,
            h.bus,
            i < community.smart_count,
            h.appliances.len(),
            h.md_kw,
            0.5 * total.iter().sum::<f64>(),
            clock(peak)
        );
    }
    Ok(())
}
