//! Community experiments: enroll the first smart homes, optimize each one on
//! its own, push the resulting bus demand through the feeder, and summarize
//! voltage, loss, PV self-consumption and reverse flow.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::feeder::{
    reverse_flow_report, solve_time_series, voltage_metrics, FeederError, InjectionFrame, PowerFlowResult,
    ReverseFlowEvent, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE,
};
use crate::model::{
    aggregate_power, net_billable_load, net_physical_load, Household, ModelError, PriceProfile, PvProfile, Schedule,
    SLOT_HOURS,
};
use crate::scheduler::{
    solve_penalty_ladder, total_cost, CostBreakdown, SchedulerError, SolveStatus, Solution, SolverSettings,
};
use crate::synth::{build_community, gen_price_profile, gen_pv_profile, Community, Span, SynthConfig, SynthError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("household {index}: {source}")]
    Household {
        index: usize,
        #[source]
        source: SchedulerError,
    },
    #[error(transparent)]
    PowerFlow(#[from] FeederError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("results were computed from different inputs")]
    IncomparableInputs,
}

/// Everything the scenarios of one grid share.
#[derive(Debug, Clone)]
pub struct ScenarioInputs {
    pub community: Community,
    pub price: PriceProfile,
    pub pv: PvProfile,
    /// Slots whose feeder losses count as peak-window losses.
    pub peak_window: Span,
}

impl ScenarioInputs {
    pub fn from_synth(c: &SynthConfig) -> Result<Self, ScenarioError> {
        Ok(Self {
            community: build_community(c)?,
            price: gen_price_profile(c),
            pv: gen_pv_profile(c),
            peak_window: c.evening_peak_window,
        })
    }

    /// FNV-1a fingerprint of the shared inputs.
    pub fn digest(&self) -> u64 {
        let text = serde_json::to_string(&(
            &self.community.households,
            self.community.feeder.spec(),
            &self.price,
            &self.pv,
            self.peak_window,
        ))
        .expect("inputs serialize");
        text.bytes()
            .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    /// Number of smart homes enrolled, taken in enrollment order.
    pub participation: usize,
    pub penalty_price: f64,
    /// Rooftop PV on the enrolled homes.
    pub pv_enabled: bool,
    /// When false, enrolled homes keep their baseline (PV still applies).
    pub dsm_enabled: bool,
    pub solver: SolverSettings,
}

impl ScenarioSpec {
    pub fn new(participation: usize, penalty_price: f64, pv_enabled: bool) -> Self {
        Self {
            participation,
            penalty_price,
            pv_enabled,
            dsm_enabled: true,
            solver: SolverSettings::default(),
        }
    }

    /// Directory-safe name, e.g. `p16_pp0.05_pv`.
    pub fn label(&self) -> String {
        format!(
            "p{:02}_pp{:.2}_{}{}",
            self.participation,
            self.penalty_price,
            if self.pv_enabled { "pv" } else { "nopv" },
            if self.dsm_enabled { "" } else { "_nodsm" }
        )
    }

    fn validate(&self, inputs: &ScenarioInputs) -> Result<(), ScenarioError> {
        if self.participation > inputs.community.smart_count {
            return Err(ScenarioError::InvalidSpec(format!(
                "participation {} exceeds the {} smart homes",
                self.participation, inputs.community.smart_count
            )));
        }
        if !(self.penalty_price.is_finite() && self.penalty_price >= 0.0) {
            return Err(ScenarioError::InvalidSpec(format!(
                "penalty price {} must be finite and non-negative",
                self.penalty_price
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HouseholdOutcome {
    pub index: usize,
    pub bus: usize,
    pub participating: bool,
    pub pv_installed: bool,
    pub schedule: Schedule,
    pub costs: CostBreakdown,
    /// Solver status for optimized homes.
    pub status: Option<SolveStatus>,
    pub gross_kw: Vec<f64>,
    pub billable_kw: Vec<f64>,
    /// Unclipped demand after PV; negative is export.
    pub physical_kw: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    pub pv_utilization: Option<f64>,
    pub end_voltage_variance: f64,
    pub end_voltage_max_deviation_pu: f64,
    pub total_loss_kwh: f64,
    pub peak_window_loss_kwh: f64,
    pub reverse_flow_events: usize,
    /// Largest reverse flow through a substation branch, kW (0 if none).
    pub max_head_reverse_kw: f64,
}

impl ScenarioMetrics {
    /// `(name, value)` rows; an undefined utilization is NaN.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("pv_utilization", self.pv_utilization.unwrap_or(f64::NAN)),
            ("end_voltage_variance", self.end_voltage_variance),
            ("end_voltage_max_deviation_pu", self.end_voltage_max_deviation_pu),
            ("total_loss_kwh", self.total_loss_kwh),
            ("peak_window_loss_kwh", self.peak_window_loss_kwh),
            ("reverse_flow_events", self.reverse_flow_events as f64),
            ("max_head_reverse_kw", self.max_head_reverse_kw),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub spec: ScenarioSpec,
    pub input_digest: u64,
    pub households: Vec<HouseholdOutcome>,
    pub community_gross_kw: Vec<f64>,
    pub community_net_kw: Vec<f64>,
    pub end_bus: usize,
    pub power_flow: Vec<PowerFlowResult>,
    pub reverse_flows: Vec<ReverseFlowEvent>,
    pub metrics: ScenarioMetrics,
}

/// Share of generated PV consumed by the homes that host it:
/// `Σ min(gross, pv) / (N_pv · Σ pv)`. `None` when nothing is generated.
pub fn pv_utilization(
    households: &[Household],
    schedules: &[Schedule],
    pv: &PvProfile,
) -> Result<Option<f64>, ModelError> {
    if households.len() != schedules.len() {
        return Err(ModelError::DimensionMismatch {
            expected: households.len(),
            found: schedules.len(),
        });
    }
    let generated: f64 = pv.output_kw.iter().sum();
    let mut hosts = 0usize;
    let mut used = 0.0;
    for (h, s) in households.iter().zip(schedules) {
        if !h.pv_installed {
            continue;
        }
        hosts += 1;
        let gross = aggregate_power(s, h)?;
        if gross.len() != pv.len() {
            return Err(ModelError::DimensionMismatch {
                expected: pv.len(),
                found: gross.len(),
            });
        }
        used += gross.iter().zip(&pv.output_kw).map(|(g, p)| g.min(*p)).sum::<f64>();
    }
    let denominator = hosts as f64 * generated;
    Ok((denominator > 0.0).then(|| used / denominator))
}

/// Households as a scenario sees them: PV only on enrolled homes.
fn staged(spec: &ScenarioSpec, inputs: &ScenarioInputs) -> Vec<Household> {
    inputs
        .community
        .households
        .iter()
        .enumerate()
        .map(|(k, h)| Household {
            pv_installed: spec.pv_enabled && k < spec.participation,
            ..h.clone()
        })
        .collect()
}

/// Key grouping solves that can share one penalty ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct LadderKey {
    household: usize,
    pv: bool,
    settings: usize,
}

type SolveTable = BTreeMap<(LadderKey, u64), Solution>;

fn solve_all(specs: &[ScenarioSpec], inputs: &ScenarioInputs) -> Result<(Vec<SolverSettings>, SolveTable), ScenarioError> {
    let mut settings: Vec<SolverSettings> = Vec::new();
    let mut ladders: BTreeMap<LadderKey, Vec<f64>> = BTreeMap::new();
    for spec in specs.iter().filter(|s| s.dsm_enabled) {
        let id = match settings.iter().position(|s| *s == spec.solver) {
            Some(i) => i,
            None => {
                settings.push(spec.solver);
                settings.len() - 1
            }
        };
        for household in 0..spec.participation {
            let prices = ladders
                .entry(LadderKey {
                    household,
                    pv: spec.pv_enabled,
                    settings: id,
                })
                .or_default();
            if !prices.iter().any(|p| p.to_bits() == spec.penalty_price.to_bits()) {
                prices.push(spec.penalty_price);
            }
        }
    }
    let jobs: Vec<(LadderKey, Vec<f64>)> = ladders.into_iter().collect();
    let solved: Vec<Vec<((LadderKey, u64), Solution)>> = jobs
        .par_iter()
        .map(|(key, prices)| {
            let household = Household {
                pv_installed: key.pv,
                ..inputs.community.households[key.household].clone()
            };
            let sols = solve_penalty_ladder(&household, &inputs.price, &inputs.pv, prices, &settings[key.settings])
                .map_err(|source| ScenarioError::Household {
                    index: household.index,
                    source,
                })?;
            Ok(prices.iter().map(|p| (*key, p.to_bits())).zip(sols).collect())
        })
        .collect::<Result<_, ScenarioError>>()?;
    Ok((settings, solved.into_iter().flatten().collect()))
}

fn assemble(
    spec: &ScenarioSpec,
    inputs: &ScenarioInputs,
    settings: &[SolverSettings],
    table: &SolveTable,
    digest: u64,
) -> Result<ScenarioResult, ScenarioError> {
    let households = staged(spec, inputs);
    let feeder = &inputs.community.feeder;
    let pv = &inputs.pv;
    let horizon = inputs.price.len();
    let mut outcomes = Vec::with_capacity(households.len());
    for (k, h) in households.iter().enumerate() {
        let participating = k < spec.participation;
        let (schedule, costs, status) = if participating && spec.dsm_enabled {
            let id = settings.iter().position(|s| *s == spec.solver).expect("settings registered");
            let key = LadderKey {
                household: k,
                pv: spec.pv_enabled,
                settings: id,
            };
            let sol = &table[&(key, spec.penalty_price.to_bits())];
            (sol.schedule.clone(), sol.costs.clone(), Some(sol.status))
        } else {
            let schedule = h.baseline_schedule();
            let costs = total_cost(&schedule, h, &inputs.price, pv, spec.penalty_price)
                .map_err(|source| ScenarioError::Household { index: h.index, source })?;
            (schedule, costs, None)
        };
        let gross_kw = aggregate_power(&schedule, h)?;
        let billable_kw = net_billable_load(&gross_kw, pv, h.pv_installed)?;
        let physical_kw = net_physical_load(&gross_kw, pv, h.pv_installed)?;
        outcomes.push(HouseholdOutcome {
            index: h.index,
            bus: h.bus,
            participating,
            pv_installed: h.pv_installed,
            schedule,
            costs,
            status,
            gross_kw,
            billable_kw,
            physical_kw,
        });
    }

    let mut frames = vec![InjectionFrame::zeros(feeder.bus_count()); horizon];
    let mut community_gross_kw = vec![0.0; horizon];
    let mut community_net_kw = vec![0.0; horizon];
    for (h, o) in households.iter().zip(&outcomes) {
        let bus = feeder
            .bus_index(h.bus)
            .filter(|&b| b != 0)
            .ok_or_else(|| ScenarioError::InvalidSpec(format!("household {} sits on bus {} outside the feeder load buses", h.index, h.bus)))?;
        let tan_phi = (1.0 / (h.power_factor * h.power_factor) - 1.0).max(0.0).sqrt();
        for t in 0..horizon {
            frames[t].load_kw[bus] += o.physical_kw[t];
            frames[t].load_kvar[bus] += o.gross_kw[t] * tan_phi;
            community_gross_kw[t] += o.gross_kw[t];
            community_net_kw[t] += o.physical_kw[t];
        }
    }
    let power_flow = solve_time_series(feeder, &frames, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)?;
    let voltage = voltage_metrics(feeder, &power_flow)?;
    let reverse_flows = reverse_flow_report(&power_flow)?;
    let heads = feeder.head_branches();
    let max_head_reverse_kw = power_flow
        .iter()
        .flat_map(|r| heads.iter().map(move |&b| -r.branch_p_kw[b]))
        .fold(0.0, f64::max);
    let schedules: Vec<Schedule> = outcomes.iter().map(|o| o.schedule.clone()).collect();
    let metrics = ScenarioMetrics {
        pv_utilization: pv_utilization(&households, &schedules, pv)?,
        end_voltage_variance: voltage.variance,
        end_voltage_max_deviation_pu: voltage.max_deviation_pu,
        total_loss_kwh: power_flow.iter().map(|r| r.total_loss_kw).sum::<f64>() * SLOT_HOURS,
        peak_window_loss_kwh: power_flow
            .iter()
            .enumerate()
            .filter(|(t, _)| inputs.peak_window.contains(*t))
            .map(|(_, r)| r.total_loss_kw)
            .sum::<f64>()
            * SLOT_HOURS,
        reverse_flow_events: reverse_flows.len(),
        max_head_reverse_kw,
    };
    Ok(ScenarioResult {
        spec: spec.clone(),
        input_digest: digest,
        households: outcomes,
        community_gross_kw,
        community_net_kw,
        end_bus: voltage.end_bus,
        power_flow,
        reverse_flows,
        metrics,
    })
}

/// Runs one scenario.
pub fn run_scenario(spec: &ScenarioSpec, inputs: &ScenarioInputs) -> Result<ScenarioResult, ScenarioError> {
    let mut results = run_grid(std::slice::from_ref(spec), inputs)?;
    Ok(results.remove(0))
}

/// Runs many scenarios over shared inputs, in input order.
///
/// A household's schedule depends only on its own data, the penalty price,
/// PV and solver settings, so each distinct solve happens once and is reused
/// by every scenario that enrolls the home.
pub fn run_grid(specs: &[ScenarioSpec], inputs: &ScenarioInputs) -> Result<Vec<ScenarioResult>, ScenarioError> {
    for spec in specs {
        spec.validate(inputs)?;
    }
    let digest = inputs.digest();
    let (settings, table) = solve_all(specs, inputs)?;
    specs
        .par_iter()
        .map(|spec| assemble(spec, inputs, &settings, &table, digest))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    pub id: String,
    pub subject: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub checks: Vec<TrendCheck>,
}

impl TrendReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, id: &str, subject: &str) -> Option<&TrendCheck> {
        self.checks.iter().find(|c| c.id == id && c.subject == subject)
    }
}

fn non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1e-12))
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(" -> ")
}

/// Checks the qualitative findings across a set of results:
///
/// * T1: end-of-feeder voltage variance does not grow with participation
///   (zero penalty, per PV setting).
/// * T2: peak-window losses with the most homes enrolled (zero penalty, no
///   PV) fall below the reference run.
/// * T3: PV utilization does not grow with the penalty price (per
///   participation level, PV on).
/// * T4: the largest reverse flow at the substation with DSM and PV is no
///   worse than with PV alone.
///
/// A trend is only reported when the results contain the cells it needs.
pub fn compare_scenarios(results: &[ScenarioResult]) -> Result<TrendReport, ScenarioError> {
    if results.windows(2).any(|w| w[0].input_digest != w[1].input_digest) {
        return Err(ScenarioError::IncomparableInputs);
    }
    let mut checks = Vec::new();
    let dsm = |r: &&ScenarioResult| r.spec.dsm_enabled || r.spec.participation == 0;

    for pv in [false, true] {
        let mut cells: Vec<&ScenarioResult> = results
            .iter()
            .filter(dsm)
            .filter(|r| r.spec.penalty_price == 0.0 && (r.spec.pv_enabled == pv || r.spec.participation == 0))
            .collect();
        cells.sort_by_key(|r| (r.spec.participation, r.spec.pv_enabled != pv));
        cells.dedup_by_key(|r| r.spec.participation);
        if cells.len() >= 2 {
            let v: Vec<f64> = cells.iter().map(|r| r.metrics.end_voltage_variance).collect();
            checks.push(TrendCheck {
                id: "T1".into(),
                subject: if pv { "pv on" } else { "pv off" }.into(),
                passed: non_increasing(&v),
                detail: format!(
                    "participation {:?}: variance {}",
                    cells.iter().map(|r| r.spec.participation).collect::<Vec<_>>(),
                    list(&v)
                ),
            });
        }
    }

    let reference = results.iter().find(|r| r.spec.participation == 0 && !r.spec.pv_enabled);
    let most = results
        .iter()
        .filter(dsm)
        .filter(|r| r.spec.participation > 0 && r.spec.penalty_price == 0.0 && !r.spec.pv_enabled)
        .max_by_key(|r| r.spec.participation);
    if let (Some(base), Some(full)) = (reference, most) {
        let (a, b) = (base.metrics.peak_window_loss_kwh, full.metrics.peak_window_loss_kwh);
        checks.push(TrendCheck {
            id: "T2".into(),
            subject: format!("{} homes", full.spec.participation),
            passed: b < a,
            detail: format!("peak-window loss {a:.6} kWh -> {b:.6} kWh"),
        });
    }

    let mut levels: Vec<usize> = results.iter().map(|r| r.spec.participation).filter(|&p| p > 0).collect();
    levels.sort_unstable();
    levels.dedup();
    for p in levels {
        let mut cells: Vec<&ScenarioResult> = results
            .iter()
            .filter(|r| r.spec.dsm_enabled && r.spec.pv_enabled && r.spec.participation == p)
            .collect();
        cells.sort_by(|a, b| a.spec.penalty_price.total_cmp(&b.spec.penalty_price));
        let u: Vec<f64> = cells.iter().filter_map(|r| r.metrics.pv_utilization).collect();
        if u.len() >= 2 {
            checks.push(TrendCheck {
                id: "T3".into(),
                subject: format!("{p} homes"),
                passed: non_increasing(&u),
                detail: format!(
                    "penalty {:?}: utilization {}",
                    cells.iter().map(|r| r.spec.penalty_price).collect::<Vec<_>>(),
                    list(&u)
                ),
            });
        }

        let with = results
            .iter()
            .find(|r| r.spec.dsm_enabled && r.spec.pv_enabled && r.spec.participation == p && r.spec.penalty_price == 0.0);
        let without = results
            .iter()
            .find(|r| !r.spec.dsm_enabled && r.spec.pv_enabled && r.spec.participation == p);
        if let (Some(w), Some(wo)) = (with, without) {
            let (a, b) = (wo.metrics.max_head_reverse_kw, w.metrics.max_head_reverse_kw);
            checks.push(TrendCheck {
                id: "T4".into(),
                subject: format!("{p} homes"),
                passed: b <= a + 1e-9,
                detail: format!("max substation reverse flow {a:.6} kW without DSM, {b:.6} kW with"),
            });
        }
    }
    Ok(TrendReport { checks })
}
