//! Brute-force reference implementations and random small cities.
//!
//! Everything here works from the raw records with plain loops, sharing no
//! code with the library beyond file writing.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub mod check;

use eventpulse::corpus::{
    load_corpus, write_checkins, write_social, write_taxonomy, write_venues, CheckInRecord, Corpus, TaxonomyRecord,
    VenueRecord,
};

pub const DAY: i64 = 86_400;
/// 2012-06-01T00:00:00Z.
pub const T0: i64 = 1_338_508_800;

const TYPES: [(&str, &str); 7] = [
    ("Coffee Shop", "Food"),
    ("Pizza Place", "Food"),
    ("Fast Food Restaurant", "Food"),
    ("Stadium", "Arts & Entertainment"),
    ("Music Venue", "Arts & Entertainment"),
    ("Park", "Outdoors"),
    ("Train Station", "Travel"),
];
const EVENT_TYPES: [&str; 2] = ["Stadium", "Music Venue"];

#[derive(Debug, Clone)]
pub struct RawVenue {
    pub id: String,
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    pub root: String,
    pub specific: String,
}

/// A city as plain records: check-ins are `(user, venue_id, ts)`.
#[derive(Debug, Clone)]
pub struct RawCity {
    pub venues: Vec<RawVenue>,
    pub checkins: Vec<(String, String, i64)>,
    pub edges: Vec<(String, String)>,
}

/// Half-open `[start, end)` windows used with random cities.
#[derive(Debug, Clone, Copy)]
pub struct Windows {
    pub prior: (i64, i64),
    pub pre: (i64, i64),
    pub event: (i64, i64),
}

pub fn windows() -> Windows {
    Windows { prior: (T0, T0 + 6 * DAY), pre: (T0 + 4 * DAY, T0 + 6 * DAY), event: (T0 + 6 * DAY, T0 + 8 * DAY) }
}

fn inside(w: (i64, i64), ts: i64) -> bool {
    w.0 <= ts && ts < w.1
}

pub fn type_names() -> Vec<&'static str> {
    TYPES.iter().map(|(s, _)| *s).collect()
}

pub fn root_of(specific: &str) -> &'static str {
    TYPES.iter().find(|(s, _)| *s == specific).map(|(_, r)| *r).unwrap()
}

pub fn is_event_type(specific: &str) -> bool {
    EVENT_TYPES.contains(&specific)
}

pub fn haversine(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let r = 6_371_000.0_f64;
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let a = ((p2 - p1) / 2.0).sin().powi(2) + p1.cos() * p2.cos() * ((lon2 - lon1).to_radians() / 2.0).sin().powi(2);
    2.0 * r * a.sqrt().min(1.0).asin()
}

/// Up to `max_venues` venues within about 800 m, up to `max_checkins`
/// check-ins over ten days with distinct timestamps per user.
pub fn random_city(rng: &mut ChaCha8Rng, max_venues: usize, max_checkins: usize) -> RawCity {
    let n = rng.random_range(2..=max_venues);
    let mut venues: Vec<RawVenue> = Vec::with_capacity(n);
    for i in 0..n {
        let (lat, lon) = if i > 0 && rng.random_bool(0.1) {
            let prev = &venues[rng.random_range(0..i)];
            (prev.lat, prev.lon)
        } else {
            (51.5 + rng.random_range(-0.0036..0.0036), -0.1 + rng.random_range(-0.0058..0.0058))
        };
        // a narrow type mix now and then leaves some types empty
        let pool = if rng.random_bool(0.2) { 3 } else { TYPES.len() };
        let (specific, root) = TYPES[rng.random_range(0..pool)];
        let name = if rng.random_bool(0.1) { format!("Live Site {i}") } else { format!("Place {i}") };
        venues.push(RawVenue {
            id: format!("v{i:02}"),
            name,
            lat,
            lon,
            root: root.to_string(),
            specific: specific.to_string(),
        });
    }

    let n_users = rng.random_range(1..=12);
    let users: Vec<String> = (0..n_users).map(|u| format!("u{u:02}")).collect();
    let m = rng.random_range(0..=max_checkins);
    let mut used = BTreeSet::new();
    let mut checkins = Vec::with_capacity(m);
    while checkins.len() < m {
        let u = &users[rng.random_range(0..n_users)];
        let ts = T0 - DAY + rng.random_range(0..10 * DAY);
        if !used.insert((u.clone(), ts)) {
            continue;
        }
        let v = &venues[rng.random_range(0..n)].id;
        checkins.push((u.clone(), v.clone(), ts));
    }

    let mut edges = Vec::new();
    if n_users > 1 {
        for _ in 0..rng.random_range(0..=2 * n_users) {
            let a = rng.random_range(0..n_users);
            let b = rng.random_range(0..n_users);
            if a != b {
                edges.push((users[a].clone(), users[b].clone()));
            }
        }
    }
    RawCity { venues, checkins, edges }
}

impl RawCity {
    pub fn write(&self, dir: &Path) {
        let venues: Vec<VenueRecord> = self
            .venues
            .iter()
            .map(|v| VenueRecord {
                id: v.id.clone(),
                name: v.name.clone(),
                lat: v.lat,
                lon: v.lon,
                category: format!("{}/{}", v.root, v.specific),
            })
            .collect();
        let checkins: Vec<CheckInRecord> = self
            .checkins
            .iter()
            .map(|(u, v, ts)| CheckInRecord {
                user: u.clone(),
                venue: v.clone(),
                ts: chrono::DateTime::from_timestamp(*ts, 0)
                    .unwrap()
                    .to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            })
            .collect();
        let taxonomy = TaxonomyRecord {
            types: TYPES.iter().map(|(s, r)| (s.to_string(), r.to_string())).collect(),
            event_types: Some(EVENT_TYPES.iter().map(|s| s.to_string()).collect()),
        };
        write_venues(&dir.join("venues.jsonl"), &venues).unwrap();
        write_checkins(&dir.join("checkins.jsonl"), &checkins).unwrap();
        write_social(&dir.join("social.csv"), &self.edges).unwrap();
        write_taxonomy(&dir.join("taxonomy.json"), &taxonomy).unwrap();
    }

    /// Writes the city to `dir` and loads it back through the library.
    pub fn load(&self, dir: &Path) -> Corpus {
        self.write(dir);
        load_corpus(
            &dir.join("checkins.jsonl"),
            &dir.join("venues.jsonl"),
            &dir.join("social.csv"),
            &dir.join("taxonomy.json"),
        )
        .unwrap()
    }

    pub fn venue(&self, id: &str) -> usize {
        self.venues.iter().position(|v| v.id == id).unwrap()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.venues[i], &self.venues[j]);
        haversine(a.lat, a.lon, b.lat, b.lon)
    }

    pub fn types(&self) -> Vec<String> {
        TYPES.iter().map(|(s, _)| s.to_string()).collect()
    }

    pub fn count_in(&self, i: usize, w: (i64, i64)) -> usize {
        let id = &self.venues[i].id;
        self.checkins.iter().filter(|(_, v, ts)| v == id && inside(w, *ts)).count()
    }
}

/// Ids of every venue within `r` of venue `i`, `i` included.
pub fn neighborhood(city: &RawCity, i: usize, r: f64) -> Vec<String> {
    let mut out: Vec<String> =
        (0..city.venues.len()).filter(|&j| city.distance(i, j) <= r).map(|j| city.venues[j].id.clone()).collect();
    out.sort();
    out
}

pub fn count_by_type(city: &RawCity, i: usize, r: f64) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for j in 0..city.venues.len() {
        if city.distance(i, j) <= r {
            *out.entry(city.venues[j].specific.clone()).or_insert(0) += 1;
        }
    }
    out
}

pub fn entropy(counts: &BTreeMap<String, usize>) -> f64 {
    let n: usize = counts.values().sum();
    -counts.values().map(|&c| c as f64 / n as f64).map(|p| p * p.ln()).sum::<f64>()
}

fn type_total(city: &RawCity, t: &str) -> usize {
    city.venues.iter().filter(|v| v.specific == t).count()
}

/// `None` when either type has no venues.
pub fn jensen_coefficient(city: &RawCity, tp: &str, tv: &str, r: f64) -> Option<f64> {
    let n = city.venues.len();
    let (np, nv) = (type_total(city, tp), type_total(city, tv));
    if np == 0 || nv == 0 {
        return None;
    }
    let mut sum = 0.0;
    for q in 0..n {
        if city.venues[q].specific != tp {
            continue;
        }
        let counts = count_by_type(city, q, r);
        let all: usize = counts.values().sum();
        let same = counts.get(tp).copied().unwrap_or(0);
        if all == same {
            continue;
        }
        sum += counts.get(tv).copied().unwrap_or(0) as f64 / (all - same) as f64;
    }
    Some((n - np) as f64 / (np as f64 * nv as f64) * sum)
}

pub fn jensen_quality(city: &RawCity, i: usize, r: f64) -> f64 {
    let tv = city.venues[i].specific.clone();
    let here = count_by_type(city, i, r);
    let same: Vec<usize> = (0..city.venues.len()).filter(|&u| city.venues[u].specific == tv).collect();
    let mut q = 0.0;
    for tp in city.types() {
        let Some(k) = jensen_coefficient(city, &tp, &tv, r) else { continue };
        let mean = same.iter().map(|&u| count_by_type(city, u, r).get(&tp).copied().unwrap_or(0) as f64).sum::<f64>()
            / same.len() as f64;
        q += k * (here.get(&tp).copied().unwrap_or(0) as f64 - mean);
    }
    q
}

/// Consecutive check-ins by one user, both in `w`, at different venues,
/// at most `max_gap` seconds apart, as `(from, to)` venue ids.
pub fn transitions(city: &RawCity, w: (i64, i64), max_gap: i64) -> Vec<(String, String)> {
    let users: BTreeSet<&String> = city.checkins.iter().map(|c| &c.0).collect();
    let mut out = Vec::new();
    for u in users {
        let mut mine: Vec<(i64, &String)> =
            city.checkins.iter().filter(|c| &c.0 == u && inside(w, c.2)).map(|c| (c.2, &c.1)).collect();
        mine.sort();
        for pair in mine.windows(2) {
            let ((t1, a), (t2, b)) = (pair[0], pair[1]);
            if a != b && t2 - t1 <= max_gap {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

pub fn flow_fraction(city: &RawCity, trans: &[(String, String)], id: &str) -> f64 {
    let (mut event, mut total) = (0, 0);
    for (a, b) in trans {
        let other = if a == id {
            b
        } else if b == id {
            a
        } else {
            continue;
        };
        total += 1;
        if is_event_type(&city.venues[city.venue(other)].specific) {
            event += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        event as f64 / total as f64
    }
}

pub fn entertainment_flow(city: &RawCity, i: usize, r: f64, w: (i64, i64), max_gap: i64) -> f64 {
    let trans = transitions(city, w, max_gap);
    let hood = neighborhood(city, i, r);
    hood.iter().map(|id| flow_fraction(city, &trans, id)).sum::<f64>() / hood.len() as f64
}

pub fn social_area(city: &RawCity, i: usize, r: f64, w: (i64, i64)) -> u64 {
    let hood: BTreeSet<String> = neighborhood(city, i, r).into_iter().collect();
    let visitors: BTreeSet<&String> =
        city.checkins.iter().filter(|c| hood.contains(&c.1) && inside(w, c.2)).map(|c| &c.0).collect();
    let edges: BTreeSet<(&String, &String)> =
        city.edges.iter().map(|(a, b)| if a < b { (a, b) } else { (b, a) }).collect();
    edges.iter().filter(|(a, b)| visitors.contains(a) && visitors.contains(b)).count() as u64
}

pub fn prediction_space(
    city: &RawCity,
    hotspots: &[usize],
    root: &str,
    max_distance: f64,
    prior: (i64, i64),
    min_prior: usize,
) -> Vec<String> {
    let mut out: Vec<String> = (0..city.venues.len())
        .filter(|&i| city.venues[i].root == root)
        .filter(|&i| hotspots.iter().any(|&h| city.distance(i, h) <= max_distance))
        .filter(|&i| city.count_in(i, prior) >= min_prior)
        .map(|i| city.venues[i].id.clone())
        .collect();
    out.sort();
    out
}

/// Tau-b by counting every pair; `None` when a ranking is all ties.
pub fn kendall(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    let (mut conc, mut disc, mut tie_a, mut tie_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let da = (a[i] - a[j]).signum() * f64::from(a[i] != a[j]);
            let db = (b[i] - b[j]).signum() * f64::from(b[i] != b[j]);
            if da == 0.0 {
                tie_a += 1;
            }
            if db == 0.0 {
                tie_b += 1;
            }
            if da * db > 0.0 {
                conc += 1;
            } else if da * db < 0.0 {
                disc += 1;
            }
        }
    }
    let n0 = (n * n.saturating_sub(1) / 2) as i64;
    let denom = ((n0 - tie_a) as f64 * (n0 - tie_b) as f64).sqrt();
    if n < 2 || denom == 0.0 {
        None
    } else {
        Some((conc - disc) as f64 / denom)
    }
}

/// `(tau, n_items)` between two windows over venues of `root` active in either.
pub fn period_tau(city: &RawCity, root: &str, earlier: (i64, i64), later: (i64, i64)) -> (Option<f64>, usize) {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for i in 0..city.venues.len() {
        if city.venues[i].root != root {
            continue;
        }
        let (x, y) = (city.count_in(i, earlier), city.count_in(i, later));
        if x + y > 0 {
            xs.push(x as f64);
            ys.push(y as f64);
        }
    }
    (kendall(&xs, &ys), xs.len())
}

/// Mann-Whitney over all positive/negative pairs.
pub fn auc(scores: &[f64], positive: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if positive[i] && !positive[j] {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

/// ROC vertices by thresholding at every distinct score, highest first.
pub fn roc_points(scores: &[f64], positive: &[bool]) -> Vec<(f64, f64)> {
    let p = positive.iter().filter(|&&x| x).count() as f64;
    let n = positive.len() as f64 - p;
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut out = vec![(0.0, 0.0)];
    for t in thresholds {
        let tp = (0..scores.len()).filter(|&i| scores[i] >= t && positive[i]).count() as f64;
        let fp = (0..scores.len()).filter(|&i| scores[i] >= t && !positive[i]).count() as f64;
        out.push((fp / n, tp / p));
    }
    out
}

/// `(precision, recall)` when the `k` best items are predicted positive;
/// an item's place is the number of items ahead of it by score, then id.
pub fn top_k(ids: &[String], scores: &[f64], positive: &[bool], k: usize) -> (f64, f64) {
    let place = |i: usize| {
        (0..ids.len()).filter(|&j| scores[j] > scores[i] || (scores[j] == scores[i] && ids[j] < ids[i])).count()
    };
    let chosen: Vec<usize> = (0..ids.len()).filter(|&i| place(i) < k).collect();
    let tp = chosen.iter().filter(|&&i| positive[i]).count() as f64;
    let p = positive.iter().filter(|&&x| x).count() as f64;
    (if chosen.is_empty() { 0.0 } else { tp / chosen.len() as f64 }, tp / p)
}
