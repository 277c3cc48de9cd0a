//! Per-venue geographic and mobility features.

mod config;
pub mod jensen;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{
    EventConfig, DEFAULT_FOCUS_ROOT, DEFAULT_HOTSPOT_PATTERNS, DEFAULT_MAX_HOTSPOT_DISTANCE_M,
    DEFAULT_MIN_PRIOR_CHECKINS, DEFAULT_PRE_DAYS, DEFAULT_PRIOR_DAYS, DEFAULT_SPONSOR_PATTERN,
};
pub use jensen::{JensenTable, TypeHistogram};

use crate::corpus::{Corpus, CorpusError, TypeIdx, UserIdx, VenueIdx};
use crate::geo::{nearest_of, GeoError, SpatialIndex};
use crate::mobility::{venue_event_flow_fraction, MobilityError, TransitionTable};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error("no hotspots configured")]
    NoHotspots,
    #[error("no stadium venues in corpus")]
    NoStadiums,
    #[error("unknown place type {0:?}")]
    UnknownType(String),
    #[error("invalid event config: {0}")]
    InvalidConfig(String),
    #[error("venue {venue:?}: {source}")]
    AtVenue {
        venue: String,
        #[source]
        source: Box<FeatureError>,
    },
}

/// The eight per-venue features, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    OlympicDistance,
    StadiumDistance,
    SponsorDistance,
    NearbyPlaceEntropy,
    JensenQuality,
    Popularity,
    EntertainmentFlow,
    SocialArea,
}

impl Feature {
    pub const ALL: [Feature; 8] = [
        Feature::OlympicDistance,
        Feature::StadiumDistance,
        Feature::SponsorDistance,
        Feature::NearbyPlaceEntropy,
        Feature::JensenQuality,
        Feature::Popularity,
        Feature::EntertainmentFlow,
        Feature::SocialArea,
    ];

    /// CSV column name.
    pub fn column(self) -> &'static str {
        match self {
            Feature::OlympicDistance => "olympic_distance",
            Feature::StadiumDistance => "stadium_distance",
            Feature::SponsorDistance => "sponsor_distance",
            Feature::NearbyPlaceEntropy => "nearby_place_entropy",
            Feature::JensenQuality => "jensen_quality",
            Feature::Popularity => "popularity",
            Feature::EntertainmentFlow => "entertainment_flow",
            Feature::SocialArea => "social_area",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Feature::OlympicDistance => "Olympic Distance",
            Feature::StadiumDistance => "Stadium Distance",
            Feature::SponsorDistance => "Sponsor Distance",
            Feature::NearbyPlaceEntropy => "Nearby Place Entropy",
            Feature::JensenQuality => "Jensen Quality",
            Feature::Popularity => "Popularity",
            Feature::EntertainmentFlow => "Entertainment Flow",
            Feature::SocialArea => "Social Area",
        }
    }

    pub fn from_column(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.column() == s || f.label() == s)
    }

    /// Distances rank ascending (closer is better); everything else descending.
    pub fn ascending(self) -> bool {
        matches!(self, Feature::OlympicDistance | Feature::StadiumDistance | Feature::SponsorDistance)
    }

    pub fn is_geographic(self) -> bool {
        matches!(
            self,
            Feature::OlympicDistance
                | Feature::StadiumDistance
                | Feature::SponsorDistance
                | Feature::NearbyPlaceEntropy
                | Feature::JensenQuality
        )
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub venue_id: String,
    pub olympic_distance: f64,
    pub stadium_distance: f64,
    /// `None` when the corpus has no sponsor venues.
    pub sponsor_distance: Option<f64>,
    pub nearby_place_entropy: f64,
    pub jensen_quality: f64,
    pub popularity: u64,
    pub entertainment_flow: f64,
    pub social_area: u64,
}

impl FeatureVector {
    pub fn get(&self, f: Feature) -> Option<f64> {
        match f {
            Feature::OlympicDistance => Some(self.olympic_distance),
            Feature::StadiumDistance => Some(self.stadium_distance),
            Feature::SponsorDistance => self.sponsor_distance,
            Feature::NearbyPlaceEntropy => Some(self.nearby_place_entropy),
            Feature::JensenQuality => Some(self.jensen_quality),
            Feature::Popularity => Some(self.popularity as f64),
            Feature::EntertainmentFlow => Some(self.entertainment_flow),
            Feature::SocialArea => Some(self.social_area as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: Vec<FeatureVector>,
    /// Columns with at least one absent value.
    pub absent: Vec<Feature>,
}

/// Precomputed spatial and mobility state for one corpus and event config.
#[derive(Debug)]
pub struct FeatureEngine<'a> {
    corpus: &'a Corpus,
    cfg: EventConfig,
    index: SpatialIndex,
    hotspots: Vec<VenueIdx>,
    stadiums: Vec<VenueIdx>,
    sponsors: Vec<VenueIdx>,
    neighborhoods: Vec<Vec<VenueIdx>>,
    histograms: Vec<TypeHistogram>,
    jensen: JensenTable,
    pre_transitions: TransitionTable,
}

impl<'a> FeatureEngine<'a> {
    pub fn new(corpus: &'a Corpus, cfg: EventConfig) -> Result<Self, FeatureError> {
        cfg.validate()?;
        let hotspots = cfg.resolve_hotspots(corpus)?;
        let stadiums = cfg.stadium_venues(corpus);
        let sponsors = cfg.sponsor_venues(corpus);
        let index = SpatialIndex::for_corpus(corpus, cfg.radius_m)?;
        let neighborhoods = corpus
            .venue_indices()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&v| index.neighborhood(v, cfg.radius_m).map(|n| n.members))
            .collect::<Result<Vec<_>, _>>()?;
        let histograms: Vec<TypeHistogram> =
            neighborhoods.iter().map(|m| jensen::histogram(m, |u| corpus.venue_type(u))).collect();
        let types: Vec<TypeIdx> = corpus.venue_indices().map(|v| corpus.venue_type(v)).collect();
        let jensen = JensenTable::build(corpus.taxonomy().len(), &types, &histograms);
        let pre_transitions = TransitionTable::extract(corpus, cfg.pre_window, cfg.max_gap_s)?;
        Ok(Self {
            corpus,
            cfg,
            index,
            hotspots,
            stadiums,
            sponsors,
            neighborhoods,
            histograms,
            jensen,
            pre_transitions,
        })
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    pub fn config(&self) -> &EventConfig {
        &self.cfg
    }

    pub fn index(&self) -> &SpatialIndex {
        &self.index
    }

    pub fn hotspots(&self) -> &[VenueIdx] {
        &self.hotspots
    }

    pub fn stadiums(&self) -> &[VenueIdx] {
        &self.stadiums
    }

    pub fn sponsors(&self) -> &[VenueIdx] {
        &self.sponsors
    }

    pub fn jensen_table(&self) -> &JensenTable {
        &self.jensen
    }

    pub fn pre_transitions(&self) -> &TransitionTable {
        &self.pre_transitions
    }

    /// `P(v, r)` at the configured radius, sorted, including `v`.
    pub fn neighborhood(&self, v: VenueIdx) -> &[VenueIdx] {
        &self.neighborhoods[v.get()]
    }

    pub fn type_histogram(&self, v: VenueIdx) -> &TypeHistogram {
        &self.histograms[v.get()]
    }

    pub fn olympic_distance(&self, v: VenueIdx) -> Result<f64, FeatureError> {
        if self.hotspots.is_empty() {
            return Err(FeatureError::NoHotspots);
        }
        Ok(nearest_of(self.corpus, v, &self.hotspots)?.1)
    }

    pub fn stadium_distance(&self, v: VenueIdx) -> Result<f64, FeatureError> {
        if self.stadiums.is_empty() {
            return Err(FeatureError::NoStadiums);
        }
        Ok(nearest_of(self.corpus, v, &self.stadiums)?.1)
    }

    /// `None` when no venue name matches the sponsor pattern.
    pub fn sponsor_distance(&self, v: VenueIdx) -> Option<f64> {
        nearest_of(self.corpus, v, &self.sponsors).ok().map(|(_, d)| d)
    }

    /// Shannon entropy (nats) of the neighborhood's type distribution.
    pub fn nearby_place_entropy(&self, v: VenueIdx) -> f64 {
        let hist = &self.histograms[v.get()];
        let n: u32 = hist.iter().map(|(_, c)| c).sum();
        let n = n as f64;
        hist.iter().fold(0.0, |h, &(_, c)| {
            let p = c as f64 / n;
            h - p * p.ln()
        })
    }

    /// `k(t_p -> t_v)` by type name.
    pub fn jensen_coefficient(&self, tp: &str, tv: &str) -> Result<Option<f64>, FeatureError> {
        let tax = self.corpus.taxonomy();
        let p = tax.type_index(tp).ok_or_else(|| FeatureError::UnknownType(tp.to_string()))?;
        let q = tax.type_index(tv).ok_or_else(|| FeatureError::UnknownType(tv.to_string()))?;
        Ok(self.jensen.coefficient(p, q))
    }

    pub fn jensen_quality(&self, v: VenueIdx) -> f64 {
        self.jensen.quality(self.corpus.venue_type(v), &self.histograms[v.get()])
    }

    /// Check-ins during the pre-event window.
    pub fn popularity(&self, v: VenueIdx) -> u64 {
        self.corpus.checkin_count(v, self.cfg.pre_window) as u64
    }

    /// Mean event-flow fraction over the neighborhood, using pre-window transitions.
    pub fn entertainment_flow(&self, v: VenueIdx) -> f64 {
        let hood = &self.neighborhoods[v.get()];
        let sum: f64 = hood.iter().map(|&p| venue_event_flow_fraction(self.corpus, &self.pre_transitions, p)).sum();
        sum / hood.len() as f64
    }

    /// Pre-window visitors of any venue in the neighborhood.
    pub fn neighborhood_visitors(&self, v: VenueIdx) -> Vec<UserIdx> {
        let mut users: Vec<UserIdx> =
            self.neighborhoods[v.get()].iter().flat_map(|&p| self.corpus.visitors(p, self.cfg.pre_window)).collect();
        users.sort_unstable();
        users.dedup();
        users
    }

    /// Friendship edges with both endpoints among the neighborhood's pre-window visitors.
    pub fn social_area(&self, v: VenueIdx) -> u64 {
        let users = self.neighborhood_visitors(v);
        let mut edges = 0u64;
        for &u in &users {
            for &f in self.corpus.friends(u) {
                if f > u && users.binary_search(&f).is_ok() {
                    edges += 1;
                }
            }
        }
        edges
    }

    pub fn feature_vector(&self, v: VenueIdx) -> Result<FeatureVector, FeatureError> {
        let at =
            |e: FeatureError| FeatureError::AtVenue { venue: self.corpus.venue(v).id.clone(), source: Box::new(e) };
        Ok(FeatureVector {
            venue_id: self.corpus.venue(v).id.clone(),
            olympic_distance: self.olympic_distance(v).map_err(at)?,
            stadium_distance: self.stadium_distance(v).map_err(at)?,
            sponsor_distance: self.sponsor_distance(v),
            nearby_place_entropy: self.nearby_place_entropy(v),
            jensen_quality: self.jensen_quality(v),
            popularity: self.popularity(v),
            entertainment_flow: self.entertainment_flow(v),
            social_area: self.social_area(v),
        })
    }

    /// One row per venue, in input order.
    pub fn feature_matrix(&self, venues: &[VenueIdx]) -> Result<FeatureMatrix, FeatureError> {
        let rows = venues.par_iter().map(|&v| self.feature_vector(v)).collect::<Result<Vec<_>, _>>()?;
        let absent = Feature::ALL.into_iter().filter(|&f| rows.iter().any(|r| r.get(f).is_none())).collect();
        Ok(FeatureMatrix { rows, absent })
    }
}

#[cfg(test)]
mod tests;
