use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, TimeWindow, VenueIdx};
use crate::geo::DEFAULT_RADIUS_M;
use crate::mobility::DEFAULT_MAX_GAP_S;

use super::FeatureError;

pub const DEFAULT_SPONSOR_PATTERN: &str = "McDonald";
pub const DEFAULT_HOTSPOT_PATTERNS: [&str; 2] = ["Live Site 2012", "Olympic Broadcast Compound"];
pub const DEFAULT_PRE_DAYS: i64 = 21;
pub const DEFAULT_PRIOR_DAYS: i64 = 91;
pub const DEFAULT_FOCUS_ROOT: &str = "Food";
pub const DEFAULT_MAX_HOTSPOT_DISTANCE_M: f64 = 1_000.0;
pub const DEFAULT_MIN_PRIOR_CHECKINS: usize = 5;

/// Event definition shared by the feature, labeling and scoping stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventConfig {
    /// Venue ids of the event hotspots.
    pub hotspots: Vec<String>,
    /// Specific types counted as stadiums; empty selects every type whose
    /// name contains "Stadium".
    #[serde(default)]
    pub stadium_types: BTreeSet<String>,
    /// Case-insensitive substring identifying sponsor venues by name.
    pub sponsor_pattern: String,
    pub radius_m: f64,
    pub event_window: TimeWindow,
    pub pre_window: TimeWindow,
    pub prior_window: TimeWindow,
    pub max_gap_s: i64,
    /// Root category of the prediction space.
    pub focus_root: String,
    pub max_hotspot_distance_m: f64,
    pub min_prior_checkins: usize,
}

impl EventConfig {
    /// Defaults: three-week pre window and 91-day prior window ending at
    /// the event start, 200 m radius, 24 h transition gap.
    pub fn new(event_window: TimeWindow, hotspots: Vec<String>) -> Self {
        Self {
            hotspots,
            stadium_types: BTreeSet::new(),
            sponsor_pattern: DEFAULT_SPONSOR_PATTERN.to_string(),
            radius_m: DEFAULT_RADIUS_M,
            pre_window: event_window.preceding_days(DEFAULT_PRE_DAYS).expect("positive length"),
            prior_window: event_window.preceding_days(DEFAULT_PRIOR_DAYS).expect("positive length"),
            event_window,
            max_gap_s: DEFAULT_MAX_GAP_S,
            focus_root: DEFAULT_FOCUS_ROOT.to_string(),
            max_hotspot_distance_m: DEFAULT_MAX_HOTSPOT_DISTANCE_M,
            min_prior_checkins: DEFAULT_MIN_PRIOR_CHECKINS,
        }
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |m: String| Err(FeatureError::InvalidConfig(m));
        if !(self.radius_m.is_finite() && self.radius_m > 0.0) {
            return bad(format!("radius must be positive, got {}", self.radius_m));
        }
        if self.pre_window.end() > self.event_window.start() {
            return bad(format!("pre window {} must end by the event start", self.pre_window));
        }
        if self.prior_window.end() > self.event_window.start() {
            return bad(format!("prior window {} must end by the event start", self.prior_window));
        }
        if self.max_gap_s <= 0 {
            return bad(format!("max gap must be positive, got {}", self.max_gap_s));
        }
        if self.max_hotspot_distance_m.is_nan() || self.max_hotspot_distance_m < 0.0 {
            return bad(format!(
                "hotspot distance threshold must be non-negative, got {}",
                self.max_hotspot_distance_m
            ));
        }
        Ok(())
    }

    pub fn resolve_hotspots(&self, corpus: &Corpus) -> Result<Vec<VenueIdx>, FeatureError> {
        let mut out = self
            .hotspots
            .iter()
            .map(|id| corpus.venue_index(id).map_err(FeatureError::from))
            .collect::<Result<Vec<_>, _>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Venues whose specific type counts as a stadium.
    pub fn stadium_venues(&self, corpus: &Corpus) -> Vec<VenueIdx> {
        let tax = corpus.taxonomy();
        corpus
            .venue_indices()
            .filter(|&v| {
                let name = tax.name(corpus.venue_type(v));
                if self.stadium_types.is_empty() {
                    crate::corpus::is_stadium_type(name)
                } else {
                    self.stadium_types.contains(name)
                }
            })
            .collect()
    }

    pub fn sponsor_venues(&self, corpus: &Corpus) -> Vec<VenueIdx> {
        corpus.venues_matching_name(std::slice::from_ref(&self.sponsor_pattern))
    }
}
