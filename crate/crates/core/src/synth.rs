//! Seeded synthetic city with a planted event effect.
//!
//! Background venues sit uniformly in a box. Each named hotspot has a
//! cluster of stadiums a short offset away, and the event boost decays with
//! distance to that cluster's center (the crowd center). Users check in at
//! venues near home; during the event window venue weights are multiplied
//! by `1 + beta * exp(-d / decay)`. Users who live near the crowds check in
//! more often during the event, and one global factor keeps total activity
//! unchanged, so venues near crowds gain at the expense of the rest.
//!
//! Some users are fans. Fans concentrate in a few districts, favour event
//! venues, befriend each other more often and feel the full boost, while
//! other users feel `casual_response` of it.
//!
//! Per-venue counts are exact Poisson: each user-day draws a Poisson number
//! of check-ins and each check-in picks a venue from the user's
//! distribution for that day.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    format_timestamp, is_stadium_type, parse_timestamp, write_checkins, write_social, write_taxonomy, write_venues,
    CheckInRecord, CorpusError, LatLon, TaxonomyRecord, TimeWindow, VenueRecord, DEFAULT_EVENT_TYPES, SECONDS_PER_DAY,
};
use crate::geo::{haversine, EARTH_RADIUS_M};
use crate::ml::derive_seed;

pub const CHECKINS_FILE: &str = "checkins.jsonl";
pub const VENUES_FILE: &str = "venues.jsonl";
pub const SOCIAL_FILE: &str = "social.csv";
pub const TAXONOMY_FILE: &str = "taxonomy.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth parameters: {0}")]
    InvalidParams(String),
    #[error("could not place {0} hotspots with the required spacing")]
    Placement(usize),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    /// Square of side `side_m` centered on `c`.
    pub fn around(c: LatLon, side_m: f64) -> Self {
        let half_lat = (side_m / 2.0 / EARTH_RADIUS_M).to_degrees();
        let half_lon = (side_m / 2.0 / (EARTH_RADIUS_M * c.lat.to_radians().cos())).to_degrees();
        Self {
            min_lat: c.lat - half_lat,
            min_lon: c.lon - half_lon,
            max_lat: c.lat + half_lat,
            max_lon: c.lon + half_lon,
        }
    }

    fn is_valid(&self) -> bool {
        let ok = |v: f64| v.is_finite();
        ok(self.min_lat)
            && ok(self.max_lat)
            && ok(self.min_lon)
            && ok(self.max_lon)
            && self.min_lat < self.max_lat
            && self.min_lon < self.max_lon
            && self.min_lat >= -89.0
            && self.max_lat <= 89.0
            && self.min_lon >= -180.0
            && self.max_lon <= 180.0
    }
}

/// One category of the background mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryWeight {
    pub specific: String,
    pub root: String,
    /// Share of background venues.
    pub weight: f64,
    /// Multiplier on the attractiveness of venues of this type.
    pub appeal: f64,
}

fn default_mixture() -> Vec<CategoryWeight> {
    let rows: [(&str, &str, f64, f64); 24] = [
        ("Coffee Shop", "Food", 0.07, 1.2),
        ("Fast Food Restaurant", "Food", 0.06, 1.2),
        ("Sandwich Place", "Food", 0.04, 1.0),
        ("Italian Restaurant", "Food", 0.04, 1.0),
        ("Indian Restaurant", "Food", 0.03, 1.0),
        ("Chinese Restaurant", "Food", 0.03, 1.0),
        ("Bakery", "Food", 0.03, 1.0),
        ("Pub", "Nightlife", 0.07, 1.1),
        ("Bar", "Nightlife", 0.04, 1.0),
        ("Clothing Store", "Shop", 0.06, 0.7),
        ("Grocery Store", "Shop", 0.06, 1.0),
        ("Bookstore", "Shop", 0.02, 0.7),
        ("Train Station", "Travel", 0.04, 2.0),
        ("Bus Stop", "Travel", 0.05, 0.6),
        ("Hotel", "Travel", 0.04, 0.8),
        ("Office", "Professional", 0.10, 0.8),
        ("Home", "Residence", 0.06, 0.5),
        ("Park", "Outdoors", 0.04, 1.0),
        ("Plaza", "Outdoors", 0.02, 0.8),
        ("Gym", "Outdoors", 0.03, 0.8),
        ("General Entertainment", "Arts & Entertainment", 0.02, 1.0),
        ("Movie Theater", "Arts & Entertainment", 0.02, 1.0),
        ("Music Venue", "Arts & Entertainment", 0.02, 1.0),
        ("Stadium", "Arts & Entertainment", 0.002, 1.5),
    ];
    rows.iter()
        .map(|&(s, r, w, a)| CategoryWeight { specific: s.into(), root: r.into(), weight: w, appeal: a })
        .collect()
}

const HOTSPOT_NAMES: [&str; 6] = [
    "Hyde Park Live Site 2012",
    "Olympic Broadcast Compound",
    "Victoria Park Live Site 2012",
    "Trafalgar Square Live Site 2012",
    "Potters Fields Live Site 2012",
    "Woolwich Live Site 2012",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub seed: u64,
    /// Background venues (hotspots and stadium clusters come on top).
    pub n_venues: usize,
    pub n_users: usize,
    pub bbox: BoundingBox,
    pub mixture: Vec<CategoryWeight>,
    pub hotspot_count: usize,
    /// Explicit hotspot positions; generated from the seed when empty.
    #[serde(default)]
    pub hotspot_positions: Vec<LatLon>,
    /// Minimum spacing between generated hotspots.
    pub hotspot_spacing_m: f64,
    /// Distance from each hotspot to the center of its stadium cluster.
    pub cluster_offset_m: f64,
    pub cluster_radius_m: f64,
    pub stadiums_per_cluster: usize,
    /// Event-window rate multiplier strength.
    pub beta: f64,
    pub decay_m: f64,
    pub sponsor_count: usize,
    pub social_edge_prob: f64,
    /// Mean check-ins per user per day.
    pub daily_rate: f64,
    /// Gamma shape of per-user daily rates.
    pub user_rate_shape: f64,
    /// Gamma shape of venue attractiveness.
    pub appeal_shape: f64,
    /// Length scale of the home-distance decay of venue affinity.
    pub affinity_scale_m: f64,
    /// Neighbourhoods where sports fans concentrate.
    pub fan_districts: usize,
    pub fan_district_radius_m: f64,
    /// Fan probability far from, and at the center of, a fan district.
    pub fan_share_base: f64,
    pub fan_share_peak: f64,
    /// Fans' affinity multiplier for event-type venues.
    pub fan_event_affinity: f64,
    /// Fraction of the event boost felt by non-fans.
    pub casual_response: f64,
    /// Friendship probability multiplier between two fans.
    pub fan_edge_factor: f64,
    /// Event window start, RFC 3339.
    pub event_start: String,
    pub event_days: i64,
    /// Days of history before the event.
    pub history_days: i64,
    pub prior_days: i64,
    pub pre_days: i64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: 42,
            n_venues: 5000,
            n_users: 3000,
            bbox: BoundingBox::around(LatLon::new(51.515, -0.09), 6_500.0),
            mixture: default_mixture(),
            hotspot_count: 4,
            hotspot_positions: Vec::new(),
            hotspot_spacing_m: 2_200.0,
            cluster_offset_m: 500.0,
            cluster_radius_m: 150.0,
            stadiums_per_cluster: 6,
            beta: 3.0,
            decay_m: 500.0,
            sponsor_count: 15,
            social_edge_prob: 0.004,
            daily_rate: 2.5,
            user_rate_shape: 2.0,
            appeal_shape: 2.0,
            affinity_scale_m: 700.0,
            fan_districts: 5,
            fan_district_radius_m: 900.0,
            fan_share_base: 0.1,
            fan_share_peak: 0.8,
            fan_event_affinity: 4.0,
            casual_response: 0.6,
            fan_edge_factor: 5.0,
            event_start: "2012-07-25T00:00:00Z".into(),
            event_days: 21,
            history_days: 126,
            prior_days: 91,
            pre_days: 21,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidParams(m.to_string()));
        if self.n_venues == 0 || self.n_users == 0 {
            return bad("need at least one venue and one user");
        }
        if !self.bbox.is_valid() {
            return bad("bounding box is not a valid lat/lon rectangle");
        }
        if self.mixture.is_empty() || self.mixture.iter().any(|c| !(c.weight >= 0.0 && c.appeal > 0.0)) {
            return bad("mixture weights must be non-negative and appeal positive");
        }
        let total: f64 = self.mixture.iter().map(|c| c.weight).sum();
        if total.is_nan() || total <= 0.0 {
            return bad("mixture weights sum to zero");
        }
        if self.hotspot_count == 0 || self.hotspot_count > HOTSPOT_NAMES.len() {
            return bad("hotspot count must be between 1 and 6");
        }
        if !self.hotspot_positions.is_empty() && self.hotspot_positions.len() != self.hotspot_count {
            return bad("hotspot positions must match the hotspot count");
        }
        let nonneg = [self.beta, self.cluster_offset_m, self.cluster_radius_m, self.hotspot_spacing_m, self.daily_rate];
        if nonneg.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("rates, distances and beta must be non-negative");
        }
        let pos = [self.decay_m, self.affinity_scale_m, self.user_rate_shape, self.appeal_shape];
        if pos.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("decay, affinity scale and gamma shapes must be positive");
        }
        if !(0.0..=1.0).contains(&self.social_edge_prob) {
            return bad("social edge probability must lie in [0, 1]");
        }
        let shares = [self.fan_share_base, self.fan_share_peak, self.casual_response];
        if shares.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return bad("fan shares and casual response must lie in [0, 1]");
        }
        if !(self.fan_district_radius_m > 0.0 && self.fan_event_affinity > 0.0 && self.fan_edge_factor >= 0.0) {
            return bad("fan district radius and affinity must be positive");
        }
        if self.event_days <= 0 || self.prior_days <= 0 || self.pre_days <= 0 {
            return bad("window lengths must be positive");
        }
        if self.history_days < self.prior_days.max(self.pre_days) {
            return bad("history must cover the prior and pre windows");
        }
        let start = parse_timestamp(&self.event_start).map_err(SynthError::InvalidParams)?;
        if start.rem_euclid(SECONDS_PER_DAY) != 0 {
            return bad("event start must be midnight UTC");
        }
        Ok(())
    }

    pub fn event_window(&self) -> Result<TimeWindow, SynthError> {
        let start = parse_timestamp(&self.event_start).map_err(SynthError::InvalidParams)?;
        Ok(TimeWindow::new(start, start + self.event_days * SECONDS_PER_DAY)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedHotspot {
    pub venue_id: String,
    pub name: String,
    pub location: LatLon,
    pub crowd_center: LatLon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedVenue {
    pub venue_id: String,
    pub category: String,
    pub crowd_distance_m: f64,
    /// Event-window weight multiplier for fans, before per-user
    /// renormalization. Non-fans feel `casual_response` of the excess.
    pub boost: f64,
    pub expected_prior: f64,
    pub expected_pre: f64,
    pub expected_event: f64,
    /// `expected_event - expected_prior * event_len / prior_len`.
    pub expected_ar: f64,
    pub intended_label: i8,
}

/// What the generator planted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthManifest {
    pub params: SynthParams,
    pub span: TimeWindow,
    pub event_window: TimeWindow,
    pub pre_window: TimeWindow,
    pub prior_window: TimeWindow,
    pub hotspots: Vec<PlantedHotspot>,
    pub sponsors: Vec<String>,
    pub venues: Vec<PlantedVenue>,
    pub checkin_count: usize,
    pub edge_count: usize,
}

impl GroundTruthManifest {
    pub fn hotspot_ids(&self) -> Vec<String> {
        self.hotspots.iter().map(|h| h.venue_id.clone()).collect()
    }

    pub fn venue(&self, id: &str) -> Option<&PlantedVenue> {
        self.venues.binary_search_by(|v| v.venue_id.as_str().cmp(id)).ok().map(|i| &self.venues[i])
    }
}

/// A generated city in corpus record form.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub venues: Vec<VenueRecord>,
    pub checkins: Vec<CheckInRecord>,
    pub social: Vec<(String, String)>,
    pub taxonomy: TaxonomyRecord,
    pub manifest: GroundTruthManifest,
}

impl SynthCorpus {
    /// Writes the four corpus files and the manifest into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), SynthError> {
        fs::create_dir_all(dir).map_err(|e| SynthError::Io { path: dir.display().to_string(), source: e })?;
        write_venues(&dir.join(VENUES_FILE), &self.venues)?;
        write_checkins(&dir.join(CHECKINS_FILE), &self.checkins)?;
        write_social(&dir.join(SOCIAL_FILE), &self.social)?;
        write_taxonomy(&dir.join(TAXONOMY_FILE), &self.taxonomy)?;
        let path = dir.join(MANIFEST_FILE);
        let mut json = serde_json::to_string_pretty(&self.manifest)?;
        json.push('\n');
        fs::write(&path, json).map_err(|e| SynthError::Io { path: path.display().to_string(), source: e })?;
        Ok(())
    }
}

/// Local east/north plane around the box center.
struct Plane {
    origin: LatLon,
    cos_lat: f64,
}

impl Plane {
    fn to_latlon(&self, east: f64, north: f64) -> LatLon {
        LatLon::new(
            self.origin.lat + (north / EARTH_RADIUS_M).to_degrees(),
            self.origin.lon + (east / (EARTH_RADIUS_M * self.cos_lat)).to_degrees(),
        )
    }

    fn to_xy(&self, p: LatLon) -> (f64, f64) {
        (
            (p.lon - self.origin.lon).to_radians() * EARTH_RADIUS_M * self.cos_lat,
            (p.lat - self.origin.lat).to_radians() * EARTH_RADIUS_M,
        )
    }
}

struct Site {
    xy: (f64, f64),
    loc: LatLon,
    specific: String,
    root: String,
    name: String,
    appeal: f64,
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

fn draw(cum: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total = *cum.last().expect("non-empty");
    let u = rng.random_range(0.0..total);
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

pub fn generate(params: &SynthParams) -> Result<SynthCorpus, SynthError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let b = params.bbox;
    let center = LatLon::new((b.min_lat + b.max_lat) / 2.0, (b.min_lon + b.max_lon) / 2.0);
    let plane = Plane { origin: center, cos_lat: center.lat.to_radians().cos() };
    let (x_lo, y_lo) = plane.to_xy(LatLon::new(b.min_lat, b.min_lon));
    let (x_hi, y_hi) = plane.to_xy(LatLon::new(b.max_lat, b.max_lon));
    let rand_xy = |rng: &mut ChaCha8Rng| (rng.random_range(x_lo..x_hi), rng.random_range(y_lo..y_hi));

    // hotspots and their crowd centers
    let hotspot_xy: Vec<(f64, f64)> = if params.hotspot_positions.is_empty() {
        let margin = (params.cluster_offset_m + 800.0).min((x_hi - x_lo).min(y_hi - y_lo) / 4.0);
        let mut placed: Vec<(f64, f64)> = Vec::new();
        let mut tries = 0;
        while placed.len() < params.hotspot_count {
            tries += 1;
            if tries > 100_000 {
                return Err(SynthError::Placement(params.hotspot_count));
            }
            if tries % 500 == 0 {
                // start over rather than get stuck behind a bad early draw
                placed.clear();
            }
            let p = (rng.random_range(x_lo + margin..x_hi - margin), rng.random_range(y_lo + margin..y_hi - margin));
            if placed.iter().all(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt() >= params.hotspot_spacing_m) {
                placed.push(p);
            }
        }
        placed
    } else {
        params.hotspot_positions.iter().map(|&p| plane.to_xy(p)).collect()
    };
    let crowd_xy: Vec<(f64, f64)> = hotspot_xy
        .iter()
        .map(|&(x, y)| {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            (x + params.cluster_offset_m * theta.cos(), y + params.cluster_offset_m * theta.sin())
        })
        .collect();

    let fan_xy: Vec<(f64, f64)> = (0..params.fan_districts).map(|_| rand_xy(&mut rng)).collect();

    let mixture_cum = cumulative(&params.mixture.iter().map(|c| c.weight).collect::<Vec<_>>());
    let appeal = Gamma::new(params.appeal_shape, 1.0 / params.appeal_shape).expect("positive shape");
    let mut sites: Vec<Site> = Vec::new();
    let push = |sites: &mut Vec<Site>, xy: (f64, f64), specific: &str, root: &str, name: String, a: f64| {
        sites.push(Site {
            xy,
            loc: plane.to_latlon(xy.0, xy.1),
            specific: specific.into(),
            root: root.into(),
            name,
            appeal: a,
        });
    };
    let mut hotspot_sites = Vec::new();
    for (i, &xy) in hotspot_xy.iter().enumerate() {
        hotspot_sites.push(sites.len());
        let a = 1.5 * appeal.sample(&mut rng);
        push(&mut sites, xy, "General Entertainment", "Arts & Entertainment", HOTSPOT_NAMES[i].into(), a);
    }
    for (c, &(cx, cy)) in crowd_xy.iter().enumerate() {
        for s in 0..params.stadiums_per_cluster {
            let r = params.cluster_radius_m * rng.random::<f64>().sqrt();
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            let specific = if s % 3 == 2 { "Track Stadium" } else { "Stadium" };
            let a = 2.0 * appeal.sample(&mut rng);
            push(
                &mut sites,
                (cx + r * t.cos(), cy + r * t.sin()),
                specific,
                "Arts & Entertainment",
                format!("Olympic Venue {} {}", c + 1, s + 1),
                a,
            );
        }
    }
    let mut counters: BTreeMap<String, usize> = BTreeMap::new();
    for _ in 0..params.n_venues {
        let cat = &params.mixture[draw(&mixture_cum, &mut rng)];
        let n = counters.entry(cat.specific.clone()).or_insert(0);
        *n += 1;
        let xy = rand_xy(&mut rng);
        let a = cat.appeal * appeal.sample(&mut rng);
        push(&mut sites, xy, &cat.specific, &cat.root, format!("{} {}", cat.specific, n), a);
    }
    // sponsor outlets among the fast-food venues
    let fast_food: Vec<usize> = (0..sites.len()).filter(|&i| sites[i].specific == "Fast Food Restaurant").collect();
    let mut sponsor_sites: Vec<usize> = sample(&mut rng, fast_food.len(), params.sponsor_count.min(fast_food.len()))
        .into_iter()
        .map(|k| fast_food[k])
        .collect();
    sponsor_sites.sort_unstable();
    for (k, &s) in sponsor_sites.iter().enumerate() {
        sites[s].name = format!("McDonald's {}", k + 1);
    }

    let venue_id = |i: usize| format!("v{:05}", i + 1);
    let crowd_dist: Vec<f64> = sites
        .iter()
        .map(|s| crowd_xy.iter().map(|&(x, y)| haversine(s.loc, plane.to_latlon(x, y))).fold(f64::INFINITY, f64::min))
        .collect();
    let pull: Vec<f64> = crowd_dist.iter().map(|d| (-d / params.decay_m).exp()).collect();
    let boost: Vec<f64> = pull.iter().map(|p| 1.0 + params.beta * p).collect();
    let event_kind: Vec<bool> = sites
        .iter()
        .map(|s| is_stadium_type(&s.specific) || DEFAULT_EVENT_TYPES.contains(&s.specific.as_str()))
        .collect();

    // windows
    let event = params.event_window()?;
    let day = SECONDS_PER_DAY;
    let span = TimeWindow::new(event.start() - params.history_days * day, event.end())?;
    let prior = event.preceding_days(params.prior_days)?;
    let pre = event.preceding_days(params.pre_days)?;

    // users
    let user_rate =
        Gamma::new(params.user_rate_shape, params.daily_rate / params.user_rate_shape).expect("positive shape");
    let gap = Exp::new(1.0 / 2_400.0).expect("positive rate");
    let n_sites = sites.len();
    let mut acc_normal = vec![0.0; n_sites];
    let mut acc_event = vec![0.0; n_sites];
    let mut checkins = Vec::new();
    let total_days = span.len_seconds() / day;
    struct User {
        home: (f64, f64),
        rate: f64,
        fan: bool,
        rng: ChaCha8Rng,
    }
    let users: Vec<User> = (0..params.n_users)
        .map(|u| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, u as u64));
            let home = rand_xy(&mut rng);
            let rate = if params.daily_rate > 0.0 { user_rate.sample(&mut rng) } else { 0.0 };
            let district = fan_xy
                .iter()
                .map(|&(x, y)| {
                    let d2 = (x - home.0).powi(2) + (y - home.1).powi(2);
                    (-d2 / (2.0 * params.fan_district_radius_m.powi(2))).exp()
                })
                .fold(0.0, f64::max);
            let fan =
                rng.random_bool(params.fan_share_base + (params.fan_share_peak - params.fan_share_base) * district);
            User { home, rate, fan, rng }
        })
        .collect();
    let fill = |user: &User, weights: &mut [f64], event_weights: &mut [f64]| {
        let response = if user.fan { params.beta } else { params.beta * params.casual_response };
        for (i, s) in sites.iter().enumerate() {
            let d = ((s.xy.0 - user.home.0).powi(2) + (s.xy.1 - user.home.1).powi(2)).sqrt();
            let taste = if user.fan && event_kind[i] { params.fan_event_affinity } else { 1.0 };
            weights[i] = taste * s.appeal * (-d / params.affinity_scale_m).exp();
            event_weights[i] = weights[i] * (1.0 + response * pull[i]);
        }
        (weights.iter().sum::<f64>(), event_weights.iter().sum::<f64>())
    };
    let fans: Vec<bool> = users.iter().map(|u| u.fan).collect();
    let mut weights = vec![0.0; n_sites];
    let mut event_weights = vec![0.0; n_sites];

    // A user's event-window volume scales with the mean boost of their venues;
    // one global factor keeps the total volume unchanged.
    let lift: Vec<f64> = users
        .iter()
        .map(|user| {
            let (wsum, esum) = fill(user, &mut weights, &mut event_weights);
            if wsum > 0.0 {
                esum / wsum
            } else {
                1.0
            }
        })
        .collect();
    let total_rate: f64 = users.iter().map(|u| u.rate).sum();
    let norm =
        if total_rate > 0.0 { users.iter().zip(&lift).map(|(u, l)| u.rate * l).sum::<f64>() / total_rate } else { 1.0 };

    for (u, (mut user, lift)) in users.into_iter().zip(lift).enumerate() {
        let (wsum, esum) = fill(&user, &mut weights, &mut event_weights);
        if !(wsum > 0.0 && esum > 0.0) || user.rate == 0.0 {
            continue;
        }
        let event_rate = user.rate * lift / norm;
        for i in 0..n_sites {
            acc_normal[i] += user.rate * weights[i] / wsum;
            acc_event[i] += event_rate * event_weights[i] / esum;
        }
        let id = format!("u{:05}", u + 1);
        let cum_normal = cumulative(&weights);
        let cum_event = cumulative(&event_weights);
        let per_day = Poisson::new(user.rate).expect("positive rate");
        let per_event_day = Poisson::new(event_rate).expect("positive rate");
        let urng = &mut user.rng;
        for d in 0..total_days {
            let day_start = span.start() + d * day;
            let in_event = event.contains(day_start);
            let n = if in_event { per_event_day.sample(urng) } else { per_day.sample(urng) } as usize;
            if n == 0 {
                continue;
            }
            let cum = if in_event { &cum_event } else { &cum_normal };
            let mut t = day_start + 8 * 3600 + urng.random_range(0..6 * 3600);
            for _ in 0..n {
                let v = draw(cum, urng);
                checkins.push(CheckInRecord {
                    user: id.clone(),
                    venue: venue_id(v),
                    ts: format_timestamp(t.min(day_start + day - 1)),
                });
                t += 300 + gap.sample(urng) as i64;
            }
        }
    }

    // friendships
    let mut social = Vec::new();
    let mut srng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, u64::MAX));
    if params.social_edge_prob > 0.0 {
        for a in 0..params.n_users {
            for b in a + 1..params.n_users {
                let factor = if fans[a] && fans[b] { params.fan_edge_factor } else { 1.0 };
                if srng.random_bool((params.social_edge_prob * factor).min(1.0)) {
                    social.push((format!("u{:05}", a + 1), format!("u{:05}", b + 1)));
                }
            }
        }
    }

    let prior_days = params.prior_days as f64;
    let event_days = params.event_days as f64;
    let planted: Vec<PlantedVenue> = (0..n_sites)
        .map(|i| {
            let expected_prior = acc_normal[i] * prior_days;
            let expected_event = acc_event[i] * event_days;
            let expected_ar = expected_event - expected_prior * event_days / prior_days;
            PlantedVenue {
                venue_id: venue_id(i),
                category: format!("{}/{}", sites[i].root, sites[i].specific),
                crowd_distance_m: crowd_dist[i],
                boost: boost[i],
                expected_prior,
                expected_pre: acc_normal[i] * params.pre_days as f64,
                expected_event,
                expected_ar,
                intended_label: if expected_ar > 0.0 { 1 } else { -1 },
            }
        })
        .collect();

    let venues: Vec<VenueRecord> = sites
        .iter()
        .enumerate()
        .map(|(i, s)| VenueRecord {
            id: venue_id(i),
            name: s.name.clone(),
            lat: s.loc.lat,
            lon: s.loc.lon,
            category: format!("{}/{}", s.root, s.specific),
        })
        .collect();
    let mut types: BTreeMap<String, String> =
        params.mixture.iter().map(|c| (c.specific.clone(), c.root.clone())).collect();
    for s in &sites {
        types.entry(s.specific.clone()).or_insert_with(|| s.root.clone());
    }
    let hotspots = hotspot_sites
        .iter()
        .zip(&crowd_xy)
        .map(|(&i, &(x, y))| PlantedHotspot {
            venue_id: venue_id(i),
            name: sites[i].name.clone(),
            location: sites[i].loc,
            crowd_center: plane.to_latlon(x, y),
        })
        .collect();
    let manifest = GroundTruthManifest {
        params: params.clone(),
        span,
        event_window: event,
        pre_window: pre,
        prior_window: prior,
        hotspots,
        sponsors: sponsor_sites.iter().map(|&i| venue_id(i)).collect(),
        venues: planted,
        checkin_count: checkins.len(),
        edge_count: social.len(),
    };
    Ok(SynthCorpus { venues, checkins, social, taxonomy: TaxonomyRecord { types, event_types: None }, manifest })
}
