//! Abnormal-returns labeling and prediction-space scoping.
//!
//! A venue's expected event-window count is its prior-window count scaled
//! by window length. The abnormal return is the actual count minus that
//! expectation, and its sign is the binary label.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::VenueIdx;
use crate::features::{EventConfig, FeatureEngine, FeatureError, FeatureVector};

#[derive(Debug, Error)]
pub enum ReturnsError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("prior window ({prior_s} s) must be longer than the event window ({event_s} s)")]
    DegenerateWindows { prior_s: i64, event_s: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn sign(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn from_sign(s: i64) -> Option<Self> {
        match s {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sign())
    }
}

/// Actual, expected and abnormal event-window check-ins of one venue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Returns {
    pub actual: u64,
    pub expected: f64,
    pub abnormal: f64,
    pub label: Label,
}

impl Returns {
    /// From raw counts and window lengths in seconds.
    ///
    /// The label compares `actual * prior_len` against `prior_count * event_len`
    /// in integers, so it never depends on float rounding of `expected`.
    pub fn from_counts(actual: u64, prior_count: u64, event_len: i64, prior_len: i64) -> Self {
        let expected = prior_count as f64 * event_len as f64 / prior_len as f64;
        let lhs = actual as i128 * prior_len as i128;
        let rhs = prior_count as i128 * event_len as i128;
        let label = if lhs > rhs { Label::Positive } else { Label::Negative };
        Self { actual, expected, abnormal: actual as f64 - expected, label }
    }
}

fn check_windows(cfg: &EventConfig) -> Result<(), ReturnsError> {
    let (prior_s, event_s) = (cfg.prior_window.len_seconds(), cfg.event_window.len_seconds());
    if prior_s <= event_s {
        return Err(ReturnsError::DegenerateWindows { prior_s, event_s });
    }
    Ok(())
}

/// Prior-window count scaled to the event-window length.
pub fn expected_returns(engine: &FeatureEngine, v: VenueIdx) -> Result<f64, ReturnsError> {
    Ok(abnormal_returns(engine, v)?.expected)
}

pub fn abnormal_returns(engine: &FeatureEngine, v: VenueIdx) -> Result<Returns, ReturnsError> {
    let cfg = engine.config();
    check_windows(cfg)?;
    let corpus = engine.corpus();
    Ok(Returns::from_counts(
        corpus.checkin_count(v, cfg.event_window) as u64,
        corpus.checkin_count(v, cfg.prior_window) as u64,
        cfg.event_window.len_seconds(),
        cfg.prior_window.len_seconds(),
    ))
}

/// Focus-root venues within the hotspot distance threshold (inclusive)
/// and with enough prior check-ins, in venue-id order.
pub fn prediction_space(engine: &FeatureEngine) -> Result<Vec<VenueIdx>, ReturnsError> {
    let corpus = engine.corpus();
    let cfg = engine.config();
    let mut out = Vec::new();
    for v in corpus.venue_indices() {
        if corpus.venue(v).category.root != cfg.focus_root {
            continue;
        }
        if corpus.checkin_count(v, cfg.prior_window) < cfg.min_prior_checkins {
            continue;
        }
        if engine.olympic_distance(v)? <= cfg.max_hotspot_distance_m {
            out.push(v);
        }
    }
    // venue indices already follow venue-id order
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledInstance {
    pub venue_id: String,
    pub features: FeatureVector,
    pub returns: Returns,
}

impl LabeledInstance {
    pub fn label(&self) -> Label {
        self.returns.label
    }
}

pub fn label_instances(engine: &FeatureEngine) -> Result<Vec<LabeledInstance>, ReturnsError> {
    check_windows(engine.config())?;
    let space = prediction_space(engine)?;
    let matrix = engine.feature_matrix(&space)?;
    space
        .iter()
        .zip(matrix.rows)
        .map(|(&v, features)| {
            Ok(LabeledInstance { venue_id: features.venue_id.clone(), returns: abnormal_returns(engine, v)?, features })
        })
        .collect()
}
