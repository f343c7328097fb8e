use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::model::TimeGrid;

/// Half-open slot range written as a pair of wall-clock labels,
/// e.g. `["17:00", "20:00"]`. `"24:00"` closes the day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, slot: usize) -> bool {
        (self.start..self.end).contains(&slot)
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn overlaps(&self, start: usize, len: usize) -> bool {
        start < self.end && self.start < start + len
    }
}

impl Serialize for Span {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let grid = TimeGrid::DAY;
        (grid.label(self.start), grid.label(self.end)).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Span {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (a, b) = <(String, String)>::deserialize(d)?;
        let grid = TimeGrid::DAY;
        let parse = |label: &str| {
            grid.parse_label(label)
                .ok_or_else(|| D::Error::custom(format!("`{label}` is not a half-hour HH:MM time")))
        };
        Ok(Span::new(parse(&a)?, parse(&b)?))
    }
}

/// Which demand peak an appliance's habitual run gravitates to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeakBias {
    Morning,
    Evening,
    Any,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplianceType {
    pub id: String,
    pub rated_kw: f64,
    pub duration_slots: usize,
    pub window: Span,
    pub peak: PeakBias,
}

/// Appliance inventory. A household with `n` interruptible and `m`
/// uninterruptible devices takes the first `n` and `m` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog {
    pub interruptible: Vec<ApplianceType>,
    pub uninterruptible: Vec<ApplianceType>,
}

impl Default for Catalog {
    fn default() -> Self {
        serde_json::from_str(include_str!("../../data/catalog.json")).expect("bundled catalog parses")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HouseholdClass {
    pub name: String,
    pub interruptible: usize,
    pub uninterruptible: usize,
    pub md_kw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmartHome {
    pub index: usize,
    pub bus: usize,
    pub class: String,
}

/// Who lives where. Smart homes are listed in enrollment order; every
/// other bus from 2 upward gets a fixed-load home.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommunityLayout {
    pub classes: Vec<HouseholdClass>,
    pub smart_homes: Vec<SmartHome>,
    pub household_count: usize,
    /// Range of evening peaks drawn for fixed-load homes, kW.
    pub nonsmart_peak_kw: [f64; 2],
    pub power_factor: f64,
}

impl Default for CommunityLayout {
    fn default() -> Self {
        serde_json::from_str(include_str!("../../data/community.json")).expect("bundled community parses")
    }
}

impl CommunityLayout {
    pub fn class(&self, name: &str) -> Option<&HouseholdClass> {
        self.classes.iter().find(|c| c.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_round_trips_through_labels() {
        let s: Span = serde_json::from_str(r#"["17:00", "24:00"]"#).unwrap();
        assert_eq!(s, Span::new(34, 48));
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"["17:00","24:00"]"#);
        assert!(serde_json::from_str::<Span>(r#"["17:10", "18:00"]"#).is_err());
    }

    #[test]
    fn bundled_data_matches_the_class_counts() {
        let catalog = Catalog::default();
        let layout = CommunityLayout::default();
        assert_eq!(layout.smart_homes.len(), 16);
        for class in &layout.classes {
            assert!(class.interruptible <= catalog.interruptible.len());
            assert!(class.uninterruptible <= catalog.uninterruptible.len());
        }
        for t in catalog.interruptible.iter().chain(&catalog.uninterruptible) {
            assert!((0.5..=4.0).contains(&t.rated_kw), "{}", t.id);
            assert!(t.window.len() >= t.duration_slots);
        }
    }
}
