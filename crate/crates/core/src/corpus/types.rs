use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::CorpusError;

/// Dense index of a venue inside a [`Corpus`](super::Corpus). Venues are
/// stored sorted by id, so index order equals lexicographic id order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VenueIdx(pub u32);

/// Dense index of a user; users are sorted by id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UserIdx(pub u32);

/// Dense index of a specific place type in a [`CategoryTaxonomy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeIdx(pub u32);

impl VenueIdx {
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl UserIdx {
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

impl TypeIdx {
    pub fn get(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
    }
}

/// Two-level category such as `Food/Coffee Shop`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CategoryPath {
    pub root: String,
    pub specific: String,
}

impl CategoryPath {
    pub fn new(root: impl Into<String>, specific: impl Into<String>) -> Self {
        Self { root: root.into(), specific: specific.into() }
    }

    /// Splits `Root/Specific` at the first slash.
    pub fn parse(s: &str) -> Option<Self> {
        let (root, specific) = s.split_once('/')?;
        let (root, specific) = (root.trim(), specific.trim());
        if root.is_empty() || specific.is_empty() {
            return None;
        }
        Some(Self::new(root, specific))
    }
}

impl fmt::Display for CategoryPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.root, self.specific)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Venue {
    pub id: String,
    pub name: String,
    pub location: LatLon,
    pub category: CategoryPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CheckIn {
    pub user: UserIdx,
    pub venue: VenueIdx,
    /// UTC seconds.
    pub ts: i64,
}

/// Event-related specific types used when a taxonomy does not list them.
pub const DEFAULT_EVENT_TYPES: [&str; 6] =
    ["General Entertainment", "Event Space", "Park", "Pool", "Athletics & Sports", "Scenic Lookout"];

/// Whether a specific type is one of the stadium kinds (`Stadium`,
/// `Track Stadium`, `Soccer Stadium`, ...).
pub fn is_stadium_type(specific: &str) -> bool {
    specific.to_lowercase().contains("stadium")
}

/// The set `T` of specific types with their roots, plus the event subset `T_E`.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryTaxonomy {
    names: Vec<String>,
    roots: Vec<String>,
    event: Vec<bool>,
}

impl CategoryTaxonomy {
    /// `event_types = None` selects the stadium kinds plus [`DEFAULT_EVENT_TYPES`].
    pub fn new(types: BTreeMap<String, String>, event_types: Option<BTreeSet<String>>) -> Result<Self, CorpusError> {
        for (specific, root) in &types {
            if specific.trim().is_empty() || root.trim().is_empty() {
                return Err(CorpusError::Taxonomy(format!("empty type or root in entry {specific:?} -> {root:?}")));
            }
        }
        if let Some(ev) = &event_types {
            if let Some(missing) = ev.iter().find(|t| !types.contains_key(*t)) {
                return Err(CorpusError::Taxonomy(format!("event type {missing:?} is not a known type")));
            }
        }
        let mut names = Vec::with_capacity(types.len());
        let mut roots = Vec::with_capacity(types.len());
        let mut event = Vec::with_capacity(types.len());
        for (specific, root) in types {
            let is_event = match &event_types {
                Some(ev) => ev.contains(&specific),
                None => is_stadium_type(&specific) || DEFAULT_EVENT_TYPES.contains(&specific.as_str()),
            };
            event.push(is_event);
            names.push(specific);
            roots.push(root);
        }
        Ok(Self { names, roots, event })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn type_index(&self, specific: &str) -> Option<TypeIdx> {
        self.names.binary_search_by(|n| n.as_str().cmp(specific)).ok().map(|i| TypeIdx(i as u32))
    }

    pub fn name(&self, t: TypeIdx) -> &str {
        &self.names[t.get()]
    }

    pub fn root(&self, t: TypeIdx) -> &str {
        &self.roots[t.get()]
    }

    pub fn root_of(&self, specific: &str) -> Option<&str> {
        self.type_index(specific).map(|t| self.root(t))
    }

    pub fn is_event_type(&self, t: TypeIdx) -> bool {
        self.event[t.get()]
    }

    pub fn types(&self) -> impl Iterator<Item = TypeIdx> + '_ {
        (0..self.names.len()).map(|i| TypeIdx(i as u32))
    }

    pub fn event_types(&self) -> impl Iterator<Item = &str> + '_ {
        self.names.iter().zip(&self.event).filter(|(_, e)| **e).map(|(n, _)| n.as_str())
    }

    pub fn roots(&self) -> BTreeSet<&str> {
        self.roots.iter().map(String::as_str).collect()
    }

    pub fn has_root(&self, root: &str) -> bool {
        self.roots.iter().any(|r| r == root)
    }

    /// `(specific, root)` pairs in name order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.names.iter().map(String::as_str).zip(self.roots.iter().map(String::as_str))
    }
}

/// Undirected friendship edges, each stored once as a lexicographically
/// ordered pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SocialGraph {
    edges: BTreeSet<(String, String)>,
}

impl SocialGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `{a, b}`; returns `false` if it was already present.
    pub fn insert(&mut self, a: &str, b: &str) -> Result<bool, CorpusError> {
        if a == b {
            return Err(CorpusError::SelfEdge(a.to_string()));
        }
        let pair = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        Ok(self.edges.insert(pair))
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        self.edges.contains(&(x.to_string(), y.to_string()))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }
}
