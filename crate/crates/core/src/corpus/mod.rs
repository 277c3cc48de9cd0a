//! Check-in corpus: venues, timestamped check-ins, the friendship graph and
//! the category taxonomy, validated and indexed for read-only analysis.

mod io;
mod types;
mod window;

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use thiserror::Error;

pub use io::{
    load_corpus, read_taxonomy, write_checkins, write_social, write_taxonomy, write_venues, CheckInRecord,
    TaxonomyRecord, VenueRecord,
};
pub use types::{
    is_stadium_type, CategoryPath, CategoryTaxonomy, CheckIn, LatLon, SocialGraph, TypeIdx, UserIdx, Venue, VenueIdx,
    DEFAULT_EVENT_TYPES,
};
pub use window::{format_timestamp, parse_timestamp, TimeWindow, SECONDS_PER_DAY};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file} line {line}: {message}")]
    Parse { file: String, line: usize, message: String },
    #[error("{file} line {line}: check-in references unknown venue {venue:?}")]
    DanglingVenue { file: String, line: usize, venue: String },
    #[error("{file} line {line}: duplicate venue id {venue:?}")]
    DuplicateVenue { file: String, line: usize, venue: String },
    #[error("{file} line {line}: invalid venue {venue:?}: {message}")]
    InvalidVenue { file: String, line: usize, venue: String, message: String },
    #[error("self-edge for user {0:?}")]
    SelfEdge(String),
    #[error("taxonomy: {0}")]
    Taxonomy(String),
    #[error("unknown venue {0:?}")]
    UnknownVenue(String),
    #[error("invalid time window: start {start} must precede end {end}")]
    InvalidWindow { start: i64, end: i64 },
    #[error("{0}")]
    Timestamp(String),
}

/// Incrementally validates records and assembles a [`Corpus`]. Venues must
/// be added before the check-ins that reference them.
#[derive(Debug)]
pub struct CorpusBuilder {
    taxonomy: CategoryTaxonomy,
    venues: Vec<Venue>,
    venue_ids: HashMap<String, usize>,
    checkins: Vec<(String, usize, i64)>,
    social: SocialGraph,
}

/// Where a record came from, for error messages.
#[derive(Debug, Clone, Copy)]
pub struct Origin<'a> {
    pub file: &'a str,
    pub line: usize,
}

impl<'a> Origin<'a> {
    pub fn new(file: &'a str, line: usize) -> Self {
        Self { file, line }
    }
}

impl CorpusBuilder {
    pub fn new(taxonomy: CategoryTaxonomy) -> Self {
        Self {
            taxonomy,
            venues: Vec::new(),
            venue_ids: HashMap::new(),
            checkins: Vec::new(),
            social: SocialGraph::new(),
        }
    }

    pub fn add_venue(&mut self, venue: Venue, at: Origin<'_>) -> Result<(), CorpusError> {
        let invalid = |message: String| CorpusError::InvalidVenue {
            file: at.file.to_string(),
            line: at.line,
            venue: venue.id.clone(),
            message,
        };
        if venue.id.is_empty() {
            return Err(invalid("empty id".into()));
        }
        if !venue.location.is_valid() {
            return Err(invalid(format!("coordinates ({}, {}) out of range", venue.location.lat, venue.location.lon)));
        }
        match self.taxonomy.root_of(&venue.category.specific) {
            None => return Err(invalid(format!("type {:?} not in taxonomy", venue.category.specific))),
            Some(root) if root != venue.category.root => {
                return Err(invalid(format!("category {} does not match taxonomy root {root:?}", venue.category)))
            }
            Some(_) => {}
        }
        if self.venue_ids.contains_key(&venue.id) {
            return Err(CorpusError::DuplicateVenue { file: at.file.to_string(), line: at.line, venue: venue.id });
        }
        self.venue_ids.insert(venue.id.clone(), self.venues.len());
        self.venues.push(venue);
        Ok(())
    }

    pub fn add_checkin(&mut self, user: &str, venue: &str, ts: i64, at: Origin<'_>) -> Result<(), CorpusError> {
        if user.is_empty() {
            return Err(CorpusError::Parse {
                file: at.file.to_string(),
                line: at.line,
                message: "empty user id".into(),
            });
        }
        let Some(&v) = self.venue_ids.get(venue) else {
            return Err(CorpusError::DanglingVenue {
                file: at.file.to_string(),
                line: at.line,
                venue: venue.to_string(),
            });
        };
        self.checkins.push((user.to_string(), v, ts));
        Ok(())
    }

    pub fn add_friendship(&mut self, a: &str, b: &str, at: Origin<'_>) -> Result<(), CorpusError> {
        if a.is_empty() || b.is_empty() {
            return Err(CorpusError::Parse {
                file: at.file.to_string(),
                line: at.line,
                message: "empty user id".into(),
            });
        }
        self.social.insert(a, b).map(|_| ()).map_err(|e| CorpusError::Parse {
            file: at.file.to_string(),
            line: at.line,
            message: e.to_string(),
        })
    }

    pub fn build(self) -> Corpus {
        let CorpusBuilder { taxonomy, venues, checkins, social, .. } = self;

        // Canonical venue order is by id, so indices follow lexicographic order.
        let mut order: Vec<usize> = (0..venues.len()).collect();
        order.sort_by(|&a, &b| venues[a].id.cmp(&venues[b].id));
        let mut remap = vec![0u32; venues.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new as u32;
        }
        let mut slots: Vec<Option<Venue>> = venues.into_iter().map(Some).collect();
        let venues: Vec<Venue> = order.iter().map(|&old| slots[old].take().expect("each venue moved once")).collect();
        let venue_lookup: HashMap<String, VenueIdx> =
            venues.iter().enumerate().map(|(i, v)| (v.id.clone(), VenueIdx(i as u32))).collect();
        let venue_types: Vec<TypeIdx> =
            venues.iter().map(|v| taxonomy.type_index(&v.category.specific).expect("validated on insert")).collect();

        let users: Vec<String> =
            checkins.iter().map(|(u, _, _)| u.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let user_lookup: HashMap<String, UserIdx> =
            users.iter().enumerate().map(|(i, u)| (u.clone(), UserIdx(i as u32))).collect();

        let mut records: Vec<CheckIn> = checkins
            .iter()
            .map(|(u, v, ts)| CheckIn { user: user_lookup[u], venue: VenueIdx(remap[*v]), ts: *ts })
            .collect();
        records.sort_by_key(|c| (c.user, c.ts, c.venue));

        let mut user_ranges = vec![0..0; users.len()];
        let mut start = 0;
        while start < records.len() {
            let user = records[start].user;
            let mut end = start;
            while end < records.len() && records[end].user == user {
                end += 1;
            }
            user_ranges[user.get()] = start..end;
            start = end;
        }

        let mut venue_timeline: Vec<Vec<(i64, UserIdx)>> = vec![Vec::new(); venues.len()];
        for c in &records {
            venue_timeline[c.venue.get()].push((c.ts, c.user));
        }
        for timeline in &mut venue_timeline {
            timeline.sort_unstable();
        }

        let mut friends: Vec<Vec<UserIdx>> = vec![Vec::new(); users.len()];
        for (a, b) in social.edges() {
            if let (Some(&ua), Some(&ub)) = (user_lookup.get(a), user_lookup.get(b)) {
                friends[ua.get()].push(ub);
                friends[ub.get()].push(ua);
            }
        }
        for f in &mut friends {
            f.sort_unstable();
        }

        Corpus {
            taxonomy,
            venues,
            venue_lookup,
            venue_types,
            users,
            user_lookup,
            checkins: records,
            user_ranges,
            venue_timeline,
            social,
            friends,
        }
    }
}

/// Immutable, fully cross-referenced check-in corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    taxonomy: CategoryTaxonomy,
    venues: Vec<Venue>,
    venue_lookup: HashMap<String, VenueIdx>,
    venue_types: Vec<TypeIdx>,
    users: Vec<String>,
    user_lookup: HashMap<String, UserIdx>,
    checkins: Vec<CheckIn>,
    user_ranges: Vec<std::ops::Range<usize>>,
    venue_timeline: Vec<Vec<(i64, UserIdx)>>,
    social: SocialGraph,
    friends: Vec<Vec<UserIdx>>,
}

impl Corpus {
    pub fn taxonomy(&self) -> &CategoryTaxonomy {
        &self.taxonomy
    }

    pub fn venues(&self) -> &[Venue] {
        &self.venues
    }

    pub fn venue_count(&self) -> usize {
        self.venues.len()
    }

    pub fn venue_indices(&self) -> impl Iterator<Item = VenueIdx> + '_ {
        (0..self.venues.len()).map(|i| VenueIdx(i as u32))
    }

    pub fn venue(&self, v: VenueIdx) -> &Venue {
        &self.venues[v.get()]
    }

    pub fn venue_index(&self, id: &str) -> Result<VenueIdx, CorpusError> {
        self.venue_lookup.get(id).copied().ok_or_else(|| CorpusError::UnknownVenue(id.to_string()))
    }

    pub fn location(&self, v: VenueIdx) -> LatLon {
        self.venues[v.get()].location
    }

    pub fn venue_type(&self, v: VenueIdx) -> TypeIdx {
        self.venue_types[v.get()]
    }

    pub fn venue_root(&self, v: VenueIdx) -> &str {
        &self.venues[v.get()].category.root
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn user_id(&self, u: UserIdx) -> &str {
        &self.users[u.get()]
    }

    pub fn user_index(&self, id: &str) -> Option<UserIdx> {
        self.user_lookup.get(id).copied()
    }

    /// All check-ins sorted by `(user, timestamp, venue)`.
    pub fn checkins(&self) -> &[CheckIn] {
        &self.checkins
    }

    /// One user's check-ins in time order.
    pub fn user_checkins(&self, u: UserIdx) -> &[CheckIn] {
        &self.checkins[self.user_ranges[u.get()].clone()]
    }

    /// `(timestamp, user)` pairs at a venue in time order.
    pub fn venue_timeline(&self, v: VenueIdx) -> &[(i64, UserIdx)] {
        &self.venue_timeline[v.get()]
    }

    fn timeline_slice(&self, v: VenueIdx, window: TimeWindow) -> &[(i64, UserIdx)] {
        let tl = &self.venue_timeline[v.get()];
        let lo = tl.partition_point(|(t, _)| *t < window.start());
        let hi = tl.partition_point(|(t, _)| *t < window.end());
        &tl[lo..hi]
    }

    /// Check-ins at `v` with `start <= t < end`.
    pub fn checkin_count(&self, v: VenueIdx, window: TimeWindow) -> usize {
        self.timeline_slice(v, window).len()
    }

    /// Distinct users with at least one check-in at `v` inside `window`.
    pub fn visitors(&self, v: VenueIdx, window: TimeWindow) -> BTreeSet<UserIdx> {
        self.timeline_slice(v, window).iter().map(|(_, u)| *u).collect()
    }

    pub fn total_checkins_in(&self, window: TimeWindow) -> usize {
        self.checkins.iter().filter(|c| window.contains(c.ts)).count()
    }

    pub fn social(&self) -> &SocialGraph {
        &self.social
    }

    /// Friends of `u` that have at least one check-in, sorted.
    pub fn friends(&self, u: UserIdx) -> &[UserIdx] {
        &self.friends[u.get()]
    }

    /// Earliest and latest check-in timestamps.
    pub fn time_span(&self) -> Option<(i64, i64)> {
        let min = self.checkins.iter().map(|c| c.ts).min()?;
        let max = self.checkins.iter().map(|c| c.ts).max()?;
        Some((min, max))
    }

    pub fn venues_with_root<'a>(&'a self, root: &'a str) -> impl Iterator<Item = VenueIdx> + 'a {
        self.venue_indices().filter(move |&v| self.venue_root(v) == root)
    }

    /// Venues whose display name contains any pattern, ignoring case.
    pub fn venues_matching_name(&self, patterns: &[String]) -> Vec<VenueIdx> {
        let patterns: Vec<String> = patterns.iter().map(|p| p.to_lowercase()).filter(|p| !p.is_empty()).collect();
        self.venue_indices()
            .filter(|&v| {
                let name = self.venue(v).name.to_lowercase();
                patterns.iter().any(|p| name.contains(p.as_str()))
            })
            .collect()
    }
}
