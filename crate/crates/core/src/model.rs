//! Shared domain types: the half-hour time grid, appliances, households,
//! price and PV series, binary schedules, and the two load netting rules
//! (billing and physical).

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of half-hour slots in the scheduling day.
pub const SLOTS_PER_DAY: usize = 48;

/// Length of one slot in hours. Converts slot power (kW) to energy (kWh).
pub const SLOT_HOURS: f64 = 0.5;

/// Slack allowed on the maximum-demand comparison, in kW.
pub const MD_TOLERANCE_KW: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("appliance `{id}`: window [{start}, {end}] cannot fit {duration} slots")]
    WindowTooSmall {
        id: String,
        start: usize,
        end: usize,
        duration: usize,
    },
    #[error("appliance `{id}`: baseline slot {slot} lies outside its window")]
    BaselineOutsideWindow { id: String, slot: usize },
    #[error("appliance `{id}`: uninterruptible baseline is not one contiguous block")]
    NonContiguousBaseline { id: String },
    #[error("appliance `{id}`: baseline has {found} on-slots, expected {expected} strictly increasing")]
    BadBaseline {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("appliance `{id}`: {reason}")]
    BadParameter { id: String, reason: String },
    #[error("appliance `{id}`: window end {end} is beyond the {horizon}-slot horizon")]
    WindowOutsideHorizon { id: String, end: usize, horizon: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("household {index}: maximum demand {md_kw} kW is below its baseline peak {peak_kw} kW")]
    MdBelowBaselinePeak {
        index: usize,
        md_kw: f64,
        peak_kw: f64,
    },
    #[error("household {index}: {reason}")]
    BadHousehold { index: usize, reason: String },
    #[error("invalid series `{name}`: {reason}")]
    BadSeries { name: &'static str, reason: String },
}

/// Day-ahead grid of equal slots. Slot `k` starts at `k * slot_hours`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub slot_count: usize,
    pub slot_hours: f64,
}

impl TimeGrid {
    pub const DAY: TimeGrid = TimeGrid {
        slot_count: SLOTS_PER_DAY,
        slot_hours: SLOT_HOURS,
    };

    /// Wall-clock label `HH:MM` of a slot's start.
    pub fn label(&self, slot: usize) -> String {
        let minutes = (slot as f64 * self.slot_hours * 60.0).round() as usize;
        format!("{:02}:{:02}", minutes / 60, minutes % 60)
    }

    /// Inverse of [`TimeGrid::label`].
    pub fn parse_label(&self, label: &str) -> Option<usize> {
        let (h, m) = label.split_once(':')?;
        let minutes = h.parse::<usize>().ok()? * 60 + m.parse::<usize>().ok()?;
        let slot_minutes = (self.slot_hours * 60.0).round() as usize;
        (minutes % slot_minutes == 0).then_some(minutes / slot_minutes)
    }

    /// First slot starting at or after `hours`.
    pub fn slot_at(&self, hours: f64) -> usize {
        (hours / self.slot_hours - 1e-9).ceil().max(0.0) as usize
    }

    /// Start time of a slot in hours.
    pub fn hours(&self, slot: usize) -> f64 {
        slot as f64 * self.slot_hours
    }

    /// Slots whose start lies in `[from_h, to_h)`.
    pub fn slots_between(&self, from_h: f64, to_h: f64) -> std::ops::Range<usize> {
        let a = self.slot_at(from_h).min(self.slot_count);
        let b = self.slot_at(to_h).min(self.slot_count);
        a..b.max(a)
    }
}

/// One schedulable device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Appliance {
    pub id: String,
    pub rated_power_kw: f64,
    pub duration_slots: usize,
    /// First allowed slot, inclusive.
    pub window_start: usize,
    /// Last allowed slot, inclusive.
    pub window_end: usize,
    pub interruptible: bool,
    /// Original on-slots, ascending. Shift distances are measured against these.
    pub baseline_on_slots: Vec<usize>,
}

impl Appliance {
    pub fn window_len(&self) -> usize {
        (self.window_end + 1).saturating_sub(self.window_start)
    }

    pub fn energy_kwh(&self) -> f64 {
        self.rated_power_kw * self.duration_slots as f64 * SLOT_HOURS
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let id = || self.id.clone();
        if !(self.rated_power_kw.is_finite() && self.rated_power_kw > 0.0) {
            return Err(ModelError::BadParameter {
                id: id(),
                reason: format!("rated power {} kW must be positive", self.rated_power_kw),
            });
        }
        if self.duration_slots == 0 {
            return Err(ModelError::BadParameter {
                id: id(),
                reason: "duration must be at least one slot".into(),
            });
        }
        if self.window_end < self.window_start || self.window_len() < self.duration_slots {
            return Err(ModelError::WindowTooSmall {
                id: id(),
                start: self.window_start,
                end: self.window_end,
                duration: self.duration_slots,
            });
        }
        let slots = &self.baseline_on_slots;
        if slots.len() != self.duration_slots || slots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModelError::BadBaseline {
                id: id(),
                expected: self.duration_slots,
                found: slots.len(),
            });
        }
        if let Some(&slot) = slots
            .iter()
            .find(|&&s| s < self.window_start || s > self.window_end)
        {
            return Err(ModelError::BaselineOutsideWindow { id: id(), slot });
        }
        if !self.interruptible && slots.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(ModelError::NonContiguousBaseline { id: id() });
        }
        Ok(())
    }
}

/// Consumes an appliance and hands it back only if every invariant holds.
pub fn validate_appliance(appliance: Appliance) -> Result<Appliance, ModelError> {
    appliance.validate().map(|()| appliance)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Household {
    pub index: usize,
    /// External (1-based) bus number.
    pub bus: usize,
    pub appliances: Vec<Appliance>,
    pub md_kw: f64,
    pub pv_installed: bool,
    /// Non-schedulable load per slot.
    pub base_load_kw: Vec<f64>,
    pub power_factor: f64,
}

impl Household {
    pub fn horizon(&self) -> usize {
        self.base_load_kw.len()
    }

    pub fn interruptible_count(&self) -> usize {
        self.appliances.iter().filter(|a| a.interruptible).count()
    }

    pub fn baseline_schedule(&self) -> Schedule {
        Schedule::from_on_slots(
            self.horizon(),
            self.appliances.iter().map(|a| a.baseline_on_slots.as_slice()),
        )
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |reason: String| ModelError::BadHousehold {
            index: self.index,
            reason,
        };
        let horizon = self.horizon();
        if horizon == 0 {
            return Err(bad("base load series is empty".into()));
        }
        if self.base_load_kw.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(bad("base load must be finite and non-negative".into()));
        }
        if !(self.power_factor > 0.0 && self.power_factor <= 1.0) {
            return Err(bad(format!("power factor {} outside (0, 1]", self.power_factor)));
        }
        if !(self.md_kw.is_finite() && self.md_kw > 0.0) {
            return Err(bad(format!("maximum demand {} kW must be positive", self.md_kw)));
        }
        for a in &self.appliances {
            a.validate()?;
            if a.window_end >= horizon {
                return Err(ModelError::WindowOutsideHorizon {
                    id: a.id.clone(),
                    end: a.window_end,
                    horizon,
                });
            }
        }
        let peak = peak(&aggregate_power(&self.baseline_schedule(), self)?);
        if peak > self.md_kw + MD_TOLERANCE_KW {
            return Err(ModelError::MdBelowBaselinePeak {
                index: self.index,
                md_kw: self.md_kw,
                peak_kw: peak,
            });
        }
        Ok(())
    }
}

/// Day-ahead energy price per slot, $/kWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceProfile {
    pub price_per_kwh: Vec<f64>,
}

impl PriceProfile {
    pub fn new(price_per_kwh: Vec<f64>) -> Result<Self, ModelError> {
        if price_per_kwh.is_empty() {
            return Err(ModelError::BadSeries {
                name: "price",
                reason: "empty".into(),
            });
        }
        if price_per_kwh.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(ModelError::BadSeries {
                name: "price",
                reason: "prices must be finite and non-negative".into(),
            });
        }
        Ok(Self { price_per_kwh })
    }

    pub fn len(&self) -> usize {
        self.price_per_kwh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.price_per_kwh.is_empty()
    }
}

/// Output of one rooftop PV installation. All homes share the same profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvProfile {
    pub output_kw: Vec<f64>,
    pub rated_kw: f64,
}

impl PvProfile {
    pub fn new(output_kw: Vec<f64>, rated_kw: f64) -> Result<Self, ModelError> {
        if output_kw
            .iter()
            .any(|p| !p.is_finite() || *p < 0.0 || *p > rated_kw + 1e-12)
        {
            return Err(ModelError::BadSeries {
                name: "pv",
                reason: format!("outputs must lie in [0, {rated_kw}] kW"),
            });
        }
        Ok(Self { output_kw, rated_kw })
    }

    pub fn zeros(len: usize, rated_kw: f64) -> Self {
        Self {
            output_kw: vec![0.0; len],
            rated_kw,
        }
    }

    pub fn len(&self) -> usize {
        self.output_kw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.output_kw.is_empty()
    }

    pub fn energy_kwh(&self) -> f64 {
        self.output_kw.iter().sum::<f64>() * SLOT_HOURS
    }
}

/// Binary on/off matrix, one row per appliance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schedule {
    pub on: Vec<Vec<bool>>,
}

impl Schedule {
    pub fn off(appliances: usize, horizon: usize) -> Self {
        Self {
            on: vec![vec![false; horizon]; appliances],
        }
    }

    pub fn from_on_slots<'a, I>(horizon: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = &'a [usize]>,
    {
        let on = rows
            .into_iter()
            .map(|slots| {
                let mut row = vec![false; horizon];
                for &s in slots {
                    row[s] = true;
                }
                row
            })
            .collect();
        Self { on }
    }

    pub fn appliance_count(&self) -> usize {
        self.on.len()
    }

    pub fn horizon(&self) -> usize {
        self.on.first().map_or(0, Vec::len)
    }

    /// Ascending on-slots of one appliance.
    pub fn on_slots(&self, appliance: usize) -> Vec<usize> {
        self.on[appliance]
            .iter()
            .enumerate()
            .filter_map(|(t, &on)| on.then_some(t))
            .collect()
    }
}

fn check_len(expected: usize, found: usize) -> Result<(), ModelError> {
    if expected == found {
        Ok(())
    } else {
        Err(ModelError::DimensionMismatch { expected, found })
    }
}

/// Gross household demand per slot: base load plus every running appliance.
pub fn aggregate_power(schedule: &Schedule, household: &Household) -> Result<Vec<f64>, ModelError> {
    check_len(household.appliances.len(), schedule.appliance_count())?;
    let horizon = household.horizon();
    let mut series = household.base_load_kw.clone();
    for (row, appliance) in schedule.on.iter().zip(&household.appliances) {
        check_len(horizon, row.len())?;
        for (total, &on) in series.iter_mut().zip(row) {
            if on {
                *total += appliance.rated_power_kw;
            }
        }
    }
    Ok(series)
}

/// Billable demand: gross load net of own PV, clipped at zero. Surplus export
/// earns nothing.
pub fn net_billable_load(gross_kw: &[f64], pv: &PvProfile, alpha: bool) -> Result<Vec<f64>, ModelError> {
    check_len(gross_kw.len(), pv.len())?;
    if !alpha {
        return Ok(gross_kw.to_vec());
    }
    Ok(gross_kw
        .iter()
        .zip(&pv.output_kw)
        .map(|(g, p)| (g - p).max(0.0))
        .collect())
}

/// Physical bus demand: gross load net of own PV, NOT clipped. Negative
/// values are exports into the feeder.
pub fn net_physical_load(gross_kw: &[f64], pv: &PvProfile, alpha: bool) -> Result<Vec<f64>, ModelError> {
    check_len(gross_kw.len(), pv.len())?;
    if !alpha {
        return Ok(gross_kw.to_vec());
    }
    Ok(gross_kw.iter().zip(&pv.output_kw).map(|(g, p)| g - p).collect())
}

pub(crate) fn peak(series: &[f64]) -> f64 {
    series.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
