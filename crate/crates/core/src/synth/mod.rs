//! Deterministic stand-ins for measured data: a three-level tariff, a
//! clear-sky PV curve, two-peak household demand, and the 30-home
//! community with its appliance inventories.

mod catalog;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{ApplianceType, Catalog, CommunityLayout, HouseholdClass, PeakBias, SmartHome, Span};

use crate::feeder::{build_feeder, Feeder, FeederError, FeederSpec};
use crate::model::{Appliance, Household, ModelError, PriceProfile, PvProfile, TimeGrid, SLOTS_PER_DAY};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("unknown household class `{0}`")]
    TemplateUnknown(String),
    #[error("invalid synthetic-data settings: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Feeder(#[from] FeederError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub morning_peak_window: Span,
    pub evening_peak_window: Span,
    /// Cheapest tariff band. May wrap past midnight (start after end).
    pub offpeak_window: Span,
    pub price_offpeak: f64,
    pub price_mid: f64,
    /// Charged inside the evening peak window.
    pub price_peak: f64,
    /// Sunrise to sunset.
    pub pv_daylight: Span,
    pub pv_rated_kw: f64,
    /// Exponent of the sine bell; 2 gives a smooth clear-sky hump.
    pub pv_shape_exponent: f64,
    /// Chance that an appliance's habitual run lands in its preferred peak.
    pub peak_bias: f64,
    /// Habitual runs stay inside these hours whenever the window allows.
    pub waking_hours: Span,
    /// Range, in hours, a household tolerates moving each appliance earlier
    /// or later than its habitual run. Drawn per appliance and side, then
    /// clipped to the catalog window.
    pub flex_hours: [f64; 2],
    /// Share of MD reserved for non-schedulable load when placing baselines.
    pub base_headroom: f64,
    pub catalog: Catalog,
    pub community: CommunityLayout,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            morning_peak_window: Span::new(14, 18),
            evening_peak_window: Span::new(34, 40),
            offpeak_window: Span::new(44, 14),
            price_offpeak: 0.06,
            price_mid: 0.12,
            price_peak: 0.30,
            pv_daylight: Span::new(16, 32),
            pv_rated_kw: 6.0,
            pv_shape_exponent: 2.0,
            peak_bias: 0.75,
            waking_hours: Span::new(12, 46),
            flex_hours: [1.0, 4.0],
            base_headroom: 0.35,
            catalog: Catalog::default(),
            community: CommunityLayout::default(),
        }
    }
}

fn in_wrapping(span: Span, slot: usize) -> bool {
    if span.start <= span.end {
        span.contains(slot)
    } else {
        slot >= span.start || slot < span.end
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidConfig(m));
        let day = SLOTS_PER_DAY;
        for (name, w) in [
            ("morning_peak_window", self.morning_peak_window),
            ("evening_peak_window", self.evening_peak_window),
            ("pv_daylight", self.pv_daylight),
            ("waking_hours", self.waking_hours),
        ] {
            if w.start >= w.end || w.end > day {
                return bad(format!("{name} must be a non-empty range inside the day"));
            }
        }
        if self.offpeak_window.start > day || self.offpeak_window.end > day {
            return bad("offpeak_window must lie inside the day".into());
        }
        let prices = [self.price_offpeak, self.price_mid, self.price_peak];
        if prices.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return bad("prices must be finite and non-negative".into());
        }
        if self.price_peak < self.price_offpeak {
            return bad("peak price must not undercut the off-peak price".into());
        }
        if !(self.pv_rated_kw.is_finite() && self.pv_rated_kw >= 0.0 && self.pv_shape_exponent > 0.0) {
            return bad("PV rating must be non-negative and the bell exponent positive".into());
        }
        let [flo, fhi] = self.flex_hours;
        if !(flo >= 0.0 && flo <= fhi && fhi.is_finite()) {
            return bad("flex_hours must be an increasing non-negative range".into());
        }
        if !(0.0..=1.0).contains(&self.peak_bias) || !(0.0..1.0).contains(&self.base_headroom) {
            return bad("peak_bias must lie in [0, 1] and base_headroom in [0, 1)".into());
        }
        for t in self.catalog.interruptible.iter().chain(&self.catalog.uninterruptible) {
            if t.window.end > day || t.window.len() < t.duration_slots || t.duration_slots == 0 {
                return bad(format!("catalog entry `{}` does not fit its window", t.id));
            }
            if !(t.rated_kw.is_finite() && t.rated_kw > 0.0) {
                return bad(format!("catalog entry `{}` needs a positive rating", t.id));
            }
        }
        let layout = &self.community;
        let [lo, hi] = layout.nonsmart_peak_kw;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad("nonsmart_peak_kw must be an increasing positive range".into());
        }
        if !(layout.power_factor > 0.0 && layout.power_factor <= 1.0) {
            return bad("power_factor must lie in (0, 1]".into());
        }
        if layout.smart_homes.len() > layout.household_count {
            return bad("more smart homes than households".into());
        }
        let mut seen = vec![false; layout.household_count + 2];
        for (k, home) in layout.smart_homes.iter().enumerate() {
            if home.index != k + 1 {
                return bad("smart homes must be listed as households 1, 2, 3, ...".into());
            }
            if !(2..=layout.household_count + 1).contains(&home.bus) || std::mem::replace(&mut seen[home.bus], true) {
                return bad(format!("smart home {} has a bad or repeated bus {}", home.index, home.bus));
            }
            if layout.class(&home.class).is_none() {
                return Err(SynthError::TemplateUnknown(home.class.clone()));
            }
        }
        Ok(())
    }
}

/// Step tariff: off-peak overnight, peak over the evening peak window, mid
/// elsewhere.
pub fn gen_price_profile(c: &SynthConfig) -> PriceProfile {
    let price_per_kwh = (0..SLOTS_PER_DAY)
        .map(|t| {
            if c.evening_peak_window.contains(t) {
                c.price_peak
            } else if in_wrapping(c.offpeak_window, t) {
                c.price_offpeak
            } else {
                c.price_mid
            }
        })
        .collect();
    PriceProfile { price_per_kwh }
}

/// One shared rooftop curve: `sin^n` between sunrise and sunset, scaled so
/// the largest sample equals the rated output.
pub fn gen_pv_profile(c: &SynthConfig) -> PvProfile {
    let Span { start, end } = c.pv_daylight;
    let raw: Vec<f64> = (0..SLOTS_PER_DAY)
        .map(|t| {
            if t < start || t > end || end <= start {
                return 0.0;
            }
            let x = (t - start) as f64 / (end - start) as f64;
            (std::f64::consts::PI * x).sin().max(0.0).powf(c.pv_shape_exponent)
        })
        .collect();
    let top = raw.iter().copied().fold(0.0, f64::max);
    let output_kw = raw
        .iter()
        .map(|v| if top > 0.0 { v / top * c.pv_rated_kw } else { 0.0 })
        .collect();
    PvProfile {
        output_kw,
        rated_kw: c.pv_rated_kw,
    }
}

/// A household's fixed demand and habitual appliance runs.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineLoad {
    pub base_load_kw: Vec<f64>,
    pub appliances: Vec<Appliance>,
    pub md_kw: f64,
}

impl BaselineLoad {
    /// Base load plus every appliance at its habitual slots.
    pub fn total_kw(&self) -> Vec<f64> {
        let mut total = self.base_load_kw.clone();
        for a in &self.appliances {
            for &s in &a.baseline_on_slots {
                total[s] += a.rated_power_kw;
            }
        }
        total
    }
}

/// Unit-peak two-hump daily shape with seeded floor and morning height.
fn demand_shape(c: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let floor = rng.gen_range(0.15..0.30);
    let morning = rng.gen_range(0.40..0.70);
    let bump = |w: Span, t: usize| {
        let centre = (w.start + w.end - 1) as f64 / 2.0;
        let sigma = (w.len() as f64 / 3.0).max(1.0);
        (-0.5 * ((t as f64 - centre) / sigma).powi(2)).exp()
    };
    let raw: Vec<f64> = (0..SLOTS_PER_DAY)
        .map(|t| floor + morning * bump(c.morning_peak_window, t) + bump(c.evening_peak_window, t))
        .collect();
    let top = raw.iter().copied().fold(0.0, f64::max);
    raw.into_iter().map(|v| v / top).collect()
}

/// Draws habitual runs for one household of the named class and sizes its
/// base load so the day's peak lands exactly on the class MD.
pub fn gen_baseline_load(c: &SynthConfig, template: &str, seed: u64) -> Result<BaselineLoad, SynthError> {
    let class = c
        .community
        .class(template)
        .ok_or_else(|| SynthError::TemplateUnknown(template.to_string()))?;
    let types = c.catalog.interruptible.iter().take(class.interruptible).map(|t| (t, true));
    let types = types.chain(c.catalog.uninterruptible.iter().take(class.uninterruptible).map(|t| (t, false)));
    if class.interruptible > c.catalog.interruptible.len() || class.uninterruptible > c.catalog.uninterruptible.len() {
        return Err(SynthError::InvalidConfig(format!(
            "class `{}` needs more appliances than the catalog lists",
            class.name
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = (1.0 - c.base_headroom) * class.md_kw;
    let mut load = vec![0.0; SLOTS_PER_DAY];
    let mut appliances = Vec::new();
    for (t, interruptible) in types {
        let d = t.duration_slots;
        let awake: Vec<usize> = (t.window.start..=t.window.end - d)
            .filter(|&s| c.waking_hours.contains(s) && c.waking_hours.contains(s + d - 1))
            .collect();
        let starts = if awake.is_empty() {
            (t.window.start..=t.window.end - d).collect()
        } else {
            awake
        };
        let target = match t.peak {
            PeakBias::Morning => Some(c.morning_peak_window),
            PeakBias::Evening => Some(c.evening_peak_window),
            PeakBias::Any => None,
        };
        let (mut near, mut far): (Vec<usize>, Vec<usize>) = match target {
            Some(w) if rng.gen_bool(c.peak_bias) => starts.iter().partition(|&&s| w.overlaps(s, d)),
            _ => (starts.clone(), Vec::new()),
        };
        near.shuffle(&mut rng);
        far.shuffle(&mut rng);
        let fits = |s: &usize| load[*s..*s + d].iter().all(|v| v + t.rated_kw <= cap + 1e-12);
        let start = near.iter().chain(&far).copied().find(fits).ok_or_else(|| {
            SynthError::InvalidConfig(format!(
                "appliance `{}` cannot be placed under {:.1} kW in class `{}`",
                t.id, cap, class.name
            ))
        })?;
        for v in &mut load[start..start + d] {
            *v += t.rated_kw;
        }
        let [flo, fhi] = c.flex_hours;
        let mut flex = || {
            let h = if fhi > flo { rng.gen_range(flo..=fhi) } else { flo };
            (h / TimeGrid::DAY.slot_hours).round() as usize
        };
        let (early, late) = (flex(), flex());
        appliances.push(Appliance {
            id: t.id.clone(),
            rated_power_kw: t.rated_kw,
            duration_slots: d,
            window_start: start.saturating_sub(early).max(t.window.start),
            window_end: (start + d - 1 + late).min(t.window.end - 1),
            interruptible,
            baseline_on_slots: (start..start + d).collect(),
        });
    }

    let shape = demand_shape(c, &mut rng);
    let scale = shape
        .iter()
        .zip(&load)
        .map(|(s, a)| (class.md_kw - a) / s)
        .fold(f64::INFINITY, f64::min);
    let mut base_load_kw: Vec<f64> = shape.iter().map(|s| s * scale).collect();
    // Pin the binding slot so base + appliances hits MD without rounding drift.
    if let Some(t) = (0..SLOTS_PER_DAY).min_by(|&i, &j| {
        let f = |k: usize| (class.md_kw - load[k]) / shape[k];
        f(i).total_cmp(&f(j))
    }) {
        base_load_kw[t] = class.md_kw - load[t];
    }
    Ok(BaselineLoad {
        base_load_kw,
        appliances,
        md_kw: class.md_kw,
    })
}

/// Seed for household `index` derived from the community seed.
pub fn household_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Debug, Clone)]
pub struct Community {
    /// Smart homes first, in enrollment order, then fixed-load homes.
    pub households: Vec<Household>,
    pub feeder: Feeder,
    pub smart_count: usize,
}

impl Community {
    pub fn smart_homes(&self) -> &[Household] {
        &self.households[..self.smart_count]
    }
}

/// Builds every household and the chain feeder they hang on.
pub fn build_community(c: &SynthConfig) -> Result<Community, SynthError> {
    c.validate()?;
    let layout = &c.community;
    let power_factor = layout.power_factor;
    let mut households = Vec::with_capacity(layout.household_count);
    for home in &layout.smart_homes {
        let load = gen_baseline_load(c, &home.class, household_seed(c.seed, home.index))?;
        households.push(Household {
            index: home.index,
            bus: home.bus,
            appliances: load.appliances,
            md_kw: load.md_kw,
            pv_installed: false,
            base_load_kw: load.base_load_kw,
            power_factor,
        });
    }
    let taken: Vec<usize> = layout.smart_homes.iter().map(|h| h.bus).collect();
    let free_buses = (2..=layout.household_count + 1).filter(|b| !taken.contains(b));
    for (k, bus) in free_buses.enumerate() {
        let index = layout.smart_homes.len() + k + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(household_seed(c.seed, index));
        let [lo, hi] = layout.nonsmart_peak_kw;
        let peak = if hi > lo { rng.gen_range(lo..hi) } else { lo };
        let base_load_kw: Vec<f64> = demand_shape(c, &mut rng).iter().map(|s| s * peak).collect();
        households.push(Household {
            index,
            bus,
            appliances: Vec::new(),
            md_kw: base_load_kw.iter().copied().fold(0.0, f64::max),
            pv_installed: false,
            base_load_kw,
            power_factor,
        });
    }
    for h in &households {
        h.validate()?;
    }
    let feeder = build_feeder(FeederSpec::uniform_chain(layout.household_count + 1))?;
    Ok(Community {
        households,
        feeder,
        smart_count: layout.smart_homes.len(),
    })
}

/// Wall-clock label for slot `t` on the daily grid.
pub fn clock(t: usize) -> String {
    TimeGrid::DAY.label(t)
}
