use serde::{Deserialize, Serialize};

use super::{Feeder, FeederError, PowerFlowResult};

/// Flows more negative than this count as reverse, kW.
pub const REVERSE_FLOW_EPS_KW: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseFlowEvent {
    pub slot: usize,
    pub branch: usize,
    pub flow_kw: f64,
}

fn require_converged(results: &[PowerFlowResult]) -> Result<(), FeederError> {
    match results.iter().position(|r| !r.converged) {
        Some(slot) => Err(FeederError::UnconvergedInput { slot }),
        None => Ok(()),
    }
}

/// Every (slot, branch) with real power flowing back toward the substation,
/// ordered by slot then branch.
pub fn reverse_flow_report(results: &[PowerFlowResult]) -> Result<Vec<ReverseFlowEvent>, FeederError> {
    require_converged(results)?;
    Ok(results
        .iter()
        .enumerate()
        .flat_map(|(slot, r)| {
            r.branch_p_kw
                .iter()
                .enumerate()
                .filter(|(_, &p)| p < -REVERSE_FLOW_EPS_KW)
                .map(move |(branch, &flow_kw)| ReverseFlowEvent { slot, branch, flow_kw })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoltageMetrics {
    /// Internal index of the monitored bus.
    pub end_bus: usize,
    pub end_voltage_pu: Vec<f64>,
    /// Largest |V - 1| at the end bus over the day.
    pub max_deviation_pu: f64,
    /// Population variance of the end-bus magnitude over the day.
    pub variance: f64,
}

/// Daily statistics of the voltage at the feeder's deepest bus.
pub fn voltage_metrics(feeder: &Feeder, results: &[PowerFlowResult]) -> Result<VoltageMetrics, FeederError> {
    require_converged(results)?;
    let end_bus = feeder.end_bus();
    let series: Vec<f64> = results.iter().map(|r| r.v_mag[end_bus]).collect();
    let n = series.len().max(1) as f64;
    let mean = series.iter().sum::<f64>() / n;
    let variance = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let max_deviation_pu = series.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    Ok(VoltageMetrics {
        end_bus,
        end_voltage_pu: series,
        max_deviation_pu,
        variance,
    })
}
