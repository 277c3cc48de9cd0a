//! Small in-memory corpora for unit tests.

use std::collections::BTreeMap;

use crate::corpus::{CategoryPath, CategoryTaxonomy, Corpus, CorpusBuilder, LatLon, Origin, Venue};
use crate::geo::EARTH_RADIUS_M;

pub const ORIGIN: LatLon = LatLon { lat: 51.5, lon: -0.1 };

pub fn taxonomy() -> CategoryTaxonomy {
    let types: BTreeMap<String, String> = [
        ("Coffee Shop", "Food"),
        ("Fast Food Restaurant", "Food"),
        ("Italian Restaurant", "Food"),
        ("Stadium", "Entertainment"),
        ("Track Stadium", "Entertainment"),
        ("General Entertainment", "Entertainment"),
        ("Park", "Outdoors"),
        ("Train Station", "Travel"),
        ("Bookstore", "Shop"),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    CategoryTaxonomy::new(types, None).unwrap()
}

/// Point `east` and `north` meters from [`ORIGIN`] (local flat approximation).
pub fn offset(east: f64, north: f64) -> LatLon {
    let dlat = (north / EARTH_RADIUS_M).to_degrees();
    let dlon = (east / (EARTH_RADIUS_M * ORIGIN.lat.to_radians().cos())).to_degrees();
    LatLon::new(ORIGIN.lat + dlat, ORIGIN.lon + dlon)
}

#[derive(Default)]
pub struct TestCity {
    venues: Vec<Venue>,
    checkins: Vec<(String, String, i64)>,
    friends: Vec<(String, String)>,
}

impl TestCity {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn venue(mut self, id: &str, specific: &str, east: f64, north: f64) -> Self {
        self.venues.push(Venue {
            id: id.to_string(),
            name: id.to_string(),
            location: offset(east, north),
            category: CategoryPath::new(taxonomy().root_of(specific).expect("known type"), specific),
        });
        self
    }

    pub fn named_venue(mut self, id: &str, name: &str, specific: &str, east: f64, north: f64) -> Self {
        self = self.venue(id, specific, east, north);
        self.venues.last_mut().unwrap().name = name.to_string();
        self
    }

    pub fn checkin(mut self, user: &str, venue: &str, ts: i64) -> Self {
        self.checkins.push((user.to_string(), venue.to_string(), ts));
        self
    }

    pub fn friends(mut self, a: &str, b: &str) -> Self {
        self.friends.push((a.to_string(), b.to_string()));
        self
    }

    pub fn build(self) -> Corpus {
        let mut b = CorpusBuilder::new(taxonomy());
        for (i, v) in self.venues.into_iter().enumerate() {
            b.add_venue(v, Origin::new("venues", i + 1)).unwrap();
        }
        for (i, (u, v, ts)) in self.checkins.iter().enumerate() {
            b.add_checkin(u, v, *ts, Origin::new("checkins", i + 1)).unwrap();
        }
        for (i, (x, y)) in self.friends.iter().enumerate() {
            b.add_friendship(x, y, Origin::new("social", i + 2)).unwrap();
        }
        b.build()
    }
}
