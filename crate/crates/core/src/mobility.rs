//! Per-user venue transitions and category-level flow statistics.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::corpus::{Corpus, TimeWindow, UserIdx, VenueIdx};

/// Consecutive check-ins further apart than this do not form a transition.
pub const DEFAULT_MAX_GAP_S: i64 = 86_400;

#[derive(Debug, Error, PartialEq)]
pub enum MobilityError {
    #[error("max gap must be positive, got {0}")]
    InvalidGap(i64),
}

/// An ordered move between two distinct venues by one user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub user: UserIdx,
    pub from: VenueIdx,
    pub to: VenueIdx,
    /// Seconds between the two check-ins.
    pub gap: i64,
}

impl Transition {
    /// The endpoint that is not `v`, if `v` is an endpoint.
    pub fn other_end(&self, v: VenueIdx) -> Option<VenueIdx> {
        if self.from == v {
            Some(self.to)
        } else if self.to == v {
            Some(self.from)
        } else {
            None
        }
    }
}

/// All transitions inside one window, with a per-venue incidence index.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    window: TimeWindow,
    max_gap: i64,
    transitions: Vec<Transition>,
    incident: Vec<Vec<u32>>,
}

impl TransitionTable {
    /// For each user, walks the check-ins inside `window` in time order and
    /// emits one transition per consecutive pair at distinct venues no more
    /// than `max_gap` seconds apart.
    pub fn extract(corpus: &Corpus, window: TimeWindow, max_gap: i64) -> Result<Self, MobilityError> {
        if max_gap <= 0 {
            return Err(MobilityError::InvalidGap(max_gap));
        }
        let mut transitions = Vec::new();
        for u in 0..corpus.users().len() {
            let user = UserIdx(u as u32);
            let mut prev = None;
            for c in corpus.user_checkins(user).iter().filter(|c| window.contains(c.ts)) {
                if let Some((pv, pts)) = prev {
                    let gap = c.ts - pts;
                    if pv != c.venue && gap <= max_gap {
                        transitions.push(Transition { user, from: pv, to: c.venue, gap });
                    }
                }
                prev = Some((c.venue, c.ts));
            }
        }
        let mut incident = vec![Vec::new(); corpus.venue_count()];
        for (i, t) in transitions.iter().enumerate() {
            incident[t.from.get()].push(i as u32);
            incident[t.to.get()].push(i as u32);
        }
        Ok(Self { window, max_gap, transitions, incident })
    }

    pub fn window(&self) -> TimeWindow {
        self.window
    }

    pub fn max_gap(&self) -> i64 {
        self.max_gap
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Transitions with `v` at either end.
    pub fn incident(&self, v: VenueIdx) -> impl Iterator<Item = &Transition> + '_ {
        self.incident[v.get()].iter().map(|&i| &self.transitions[i as usize])
    }

    pub fn incident_count(&self, v: VenueIdx) -> usize {
        self.incident[v.get()].len()
    }
}

/// Fraction of the transitions touching `p` whose other end is an
/// event-type venue; 0 when `p` has no transitions.
pub fn venue_event_flow_fraction(corpus: &Corpus, table: &TransitionTable, p: VenueIdx) -> f64 {
    let tax = corpus.taxonomy();
    let (mut event, mut total) = (0usize, 0usize);
    for t in table.incident(p) {
        let q = t.other_end(p).expect("indexed transitions touch p");
        total += 1;
        if tax.is_event_type(corpus.venue_type(q)) {
            event += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        event as f64 / total as f64
    }
}

/// Conditional type distributions of flows into and out of a root category.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowMatrix {
    /// `P(from-type = t | to-venue root = focus)`.
    pub inflow: BTreeMap<String, f64>,
    /// `P(to-type = t | from-venue root = focus)`.
    pub outflow: BTreeMap<String, f64>,
}

impl FlowMatrix {
    /// `(in_prob, out_prob)` for a type, zero when absent.
    pub fn get(&self, specific: &str) -> (f64, f64) {
        (self.inflow.get(specific).copied().unwrap_or(0.0), self.outflow.get(specific).copied().unwrap_or(0.0))
    }
}

fn normalize(counts: BTreeMap<String, usize>) -> BTreeMap<String, f64> {
    let total: usize = counts.values().sum();
    counts.into_iter().map(|(k, c)| (k, c as f64 / total as f64)).collect()
}

/// Per-transition conditional type distributions around `focus_root`.
pub fn category_flow_matrix(corpus: &Corpus, table: &TransitionTable, focus_root: &str) -> FlowMatrix {
    let tax = corpus.taxonomy();
    let mut inflow = BTreeMap::new();
    let mut outflow = BTreeMap::new();
    for t in table.transitions() {
        if corpus.venue_root(t.from) == focus_root {
            *outflow.entry(tax.name(corpus.venue_type(t.to)).to_string()).or_insert(0) += 1;
        }
        if corpus.venue_root(t.to) == focus_root {
            *inflow.entry(tax.name(corpus.venue_type(t.from)).to_string()).or_insert(0) += 1;
        }
    }
    FlowMatrix { inflow: normalize(inflow), outflow: normalize(outflow) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FlowDirection {
    In,
    Out,
}

impl FlowDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowDirection::In => "in",
            FlowDirection::Out => "out",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowDelta {
    pub specific: String,
    pub before: f64,
    pub during: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowDeltas {
    pub inflow: Vec<FlowDelta>,
    pub outflow: Vec<FlowDelta>,
}

impl FlowDeltas {
    pub fn rows(&self) -> impl Iterator<Item = (FlowDirection, &FlowDelta)> + '_ {
        self.inflow.iter().map(|d| (FlowDirection::In, d)).chain(self.outflow.iter().map(|d| (FlowDirection::Out, d)))
    }
}

fn ranked_deltas(before: &BTreeMap<String, f64>, during: &BTreeMap<String, f64>) -> Vec<FlowDelta> {
    let mut keys: Vec<&String> = before.keys().chain(during.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut out: Vec<FlowDelta> = keys
        .into_iter()
        .map(|k| {
            let b = before.get(k).copied().unwrap_or(0.0);
            let d = during.get(k).copied().unwrap_or(0.0);
            FlowDelta { specific: k.clone(), before: b, during: d, delta: d - b }
        })
        .collect();
    out.sort_by(|a, b| b.delta.total_cmp(&a.delta).then_with(|| a.specific.cmp(&b.specific)));
    out
}

/// Change in flow probabilities between two periods, largest increase first.
pub fn flow_deltas(before: &FlowMatrix, during: &FlowMatrix) -> FlowDeltas {
    FlowDeltas {
        inflow: ranked_deltas(&before.inflow, &during.inflow),
        outflow: ranked_deltas(&before.outflow, &during.outflow),
    }
}

/// Share of the window's check-ins per root category.
pub fn popularity_share(corpus: &Corpus, window: TimeWindow) -> BTreeMap<String, f64> {
    let mut counts = BTreeMap::new();
    for c in corpus.checkins().iter().filter(|c| window.contains(c.ts)) {
        *counts.entry(corpus.venue_root(c.venue).to_string()).or_insert(0) += 1;
    }
    normalize(counts)
}
