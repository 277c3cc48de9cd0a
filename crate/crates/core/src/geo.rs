//! Great-circle distance, a uniform lat/lon grid index and neighborhood
//! queries.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::corpus::{Corpus, LatLon, VenueIdx};

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Default neighborhood radius in meters.
pub const DEFAULT_RADIUS_M: f64 = 200.0;

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("candidate set is empty")]
    EmptyCandidates,
}

/// Haversine great-circle distance in meters.
pub fn haversine(a: LatLon, b: LatLon) -> f64 {
    let (phi1, phi2) = (a.lat.to_radians(), b.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon - a.lon).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.clamp(0.0, 1.0).sqrt().asin()
}

/// Venues within a radius of a center venue; the center is always a member.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub center: VenueIdx,
    pub radius: f64,
    /// Sorted by venue index.
    pub members: Vec<VenueIdx>,
}

impl Neighborhood {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Uniform grid over latitude and longitude.
///
/// Rows are `cell_size / R` radians of latitude. Columns are sized so that
/// any two indexed points within `cell_size` meters differ by at most one
/// column: from the haversine identity, `sin(Δλ/2) ≤ sin(d/2R) / cos φ_max`
/// where `φ_max` is the largest absolute latitude present. A query of radius
/// `r` scans `ceil(r / width)` cells on each side, then filters by exact
/// distance, so results are exact for any radius.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    cell_size: f64,
    lat_step: f64,
    lon_step: f64,
    n_cols: i64,
    cos_max_lat: f64,
    points: Vec<LatLon>,
    cells: HashMap<(i64, i64), Vec<VenueIdx>>,
}

impl SpatialIndex {
    /// Builds an index over `points`, where `points[i]` belongs to venue `i`.
    pub fn new(points: &[LatLon], cell_size: f64) -> Result<Self, GeoError> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(GeoError::InvalidRadius(cell_size));
        }
        let max_lat = points.iter().map(|p| p.lat.abs()).fold(0.0_f64, f64::max);
        let cos_max_lat = max_lat.to_radians().cos().max(0.0);
        let lat_step = (cell_size / EARTH_RADIUS_M).to_degrees();
        let n_cols = match lon_bound_degrees(cell_size, cos_max_lat) {
            Some(bound) => ((360.0 / bound).floor() as i64).max(1),
            None => 1,
        };
        let lon_step = 360.0 / n_cols as f64;
        let mut index =
            Self { cell_size, lat_step, lon_step, n_cols, cos_max_lat, points: points.to_vec(), cells: HashMap::new() };
        for (i, p) in points.iter().enumerate() {
            let cell = index.cell_of(*p);
            index.cells.entry(cell).or_default().push(VenueIdx(i as u32));
        }
        Ok(index)
    }

    pub fn for_corpus(corpus: &Corpus, cell_size: f64) -> Result<Self, GeoError> {
        let points: Vec<LatLon> = corpus.venues().iter().map(|v| v.location).collect();
        Self::new(&points, cell_size)
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cell_of(&self, p: LatLon) -> (i64, i64) {
        let row = ((p.lat + 90.0) / self.lat_step).floor() as i64;
        let col = (((p.lon + 180.0) / self.lon_step).floor() as i64).rem_euclid(self.n_cols);
        (row, col)
    }

    /// Every venue within `radius` meters of `center` (inclusive), sorted.
    pub fn within(&self, center: LatLon, radius: f64) -> Result<Vec<VenueIdx>, GeoError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GeoError::InvalidRadius(radius));
        }
        // small slack keeps the cell bounds conservative under rounding
        let slack = 1.0 + 1e-9;
        let (row, col) = self.cell_of(center);
        let k_rows = ((radius * slack) / self.cell_size).ceil() as i64;
        let cols: Vec<i64> =
            match lon_bound_degrees(radius * slack, self.cos_max_lat.min(center.lat.to_radians().cos())) {
                Some(bound) => {
                    let k = (bound / self.lon_step).ceil() as i64;
                    if 2 * k + 1 >= self.n_cols {
                        (0..self.n_cols).collect()
                    } else {
                        (-k..=k).map(|d| (col + d).rem_euclid(self.n_cols)).collect()
                    }
                }
                None => (0..self.n_cols).collect(),
            };
        let mut out = Vec::new();
        for r in row - k_rows..=row + k_rows {
            for &c in &cols {
                if let Some(members) = self.cells.get(&(r, c)) {
                    out.extend(members.iter().copied().filter(|v| haversine(center, self.points[v.get()]) <= radius));
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// `P(v, r)`: venues within `radius` of venue `v`, including `v`.
    pub fn neighborhood(&self, v: VenueIdx, radius: f64) -> Result<Neighborhood, GeoError> {
        let members = self.within(self.points[v.get()], radius)?;
        debug_assert!(members.binary_search(&v).is_ok());
        Ok(Neighborhood { center: v, radius, members })
    }
}

/// Upper bound on the longitude difference (degrees) between two points at
/// most `d` meters apart whose latitudes have cosine at least `cos_lat`.
/// `None` when the bound covers the whole circle.
fn lon_bound_degrees(d: f64, cos_lat: f64) -> Option<f64> {
    if cos_lat <= 1e-12 {
        return None;
    }
    let s = (d / (2.0 * EARTH_RADIUS_M)).min(std::f64::consts::FRAC_PI_2).sin() / cos_lat;
    if s >= 1.0 {
        return None;
    }
    Some((2.0 * s.asin()).to_degrees())
}

/// `N_t(v, r)` per specific type name over a neighborhood's members.
pub fn count_by_type(corpus: &Corpus, hood: &Neighborhood) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for &m in &hood.members {
        let name = corpus.taxonomy().name(corpus.venue_type(m));
        *counts.entry(name.to_string()).or_insert(0) += 1;
    }
    counts
}

/// The candidate closest to `v`; ties go to the lexicographically smaller id.
pub fn nearest_of(corpus: &Corpus, v: VenueIdx, candidates: &[VenueIdx]) -> Result<(VenueIdx, f64), GeoError> {
    let center = corpus.location(v);
    candidates
        .iter()
        .map(|&c| (c, haversine(center, corpus.location(c))))
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| corpus.venue(a.0).id.cmp(&corpus.venue(b.0).id)))
        .ok_or(GeoError::EmptyCandidates)
}
