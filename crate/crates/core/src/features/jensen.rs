//! Jensen inter-type attraction coefficients and neighborhood quality.
//!
//! For types `p` and `v`:
//!
//! ```text
//! k(p -> v) = (N - N_p) / (N_p * N_v) * Σ_{q of type p} N_v(q, r) / (N(q, r) - N_p(q, r))
//! ```
//!
//! where `N_t` counts venues of type `t` city-wide and `N_t(q, r)` counts
//! them in the self-inclusive neighborhood of `q`. Terms whose denominator
//! is zero are skipped. The coefficient is absent when either type has no
//! venues.

use std::collections::HashMap;

use crate::corpus::{TypeIdx, VenueIdx};

/// Sparse per-venue type histogram, sorted by type.
pub type TypeHistogram = Vec<(TypeIdx, u32)>;

pub(crate) fn histogram_count(hist: &TypeHistogram, t: TypeIdx) -> u32 {
    hist.binary_search_by_key(&t, |(ty, _)| *ty).map(|i| hist[i].1).unwrap_or(0)
}

#[derive(Debug, Clone)]
pub struct JensenTable {
    n_venues: usize,
    type_counts: Vec<usize>,
    /// Σ_q N_v(q)/(N(q) - N_p(q)) keyed by `(p, v)`.
    sums: HashMap<(TypeIdx, TypeIdx), f64>,
    /// Mean of `N_p(u, r)` over venues `u` of type `v`, keyed by `v` then `p`.
    mean_around: Vec<Vec<(TypeIdx, f64)>>,
}

impl JensenTable {
    /// `types[i]` is the type of venue `i`; `histograms[i]` its neighborhood histogram.
    pub fn build(n_types: usize, types: &[TypeIdx], histograms: &[TypeHistogram]) -> Self {
        let mut type_counts = vec![0usize; n_types];
        for t in types {
            type_counts[t.get()] += 1;
        }

        let mut sums: HashMap<(TypeIdx, TypeIdx), f64> = HashMap::new();
        for (q, hist) in histograms.iter().enumerate() {
            let tp = types[q];
            let n_q: u32 = hist.iter().map(|(_, c)| c).sum();
            let denom = n_q - histogram_count(hist, tp);
            if denom == 0 {
                continue;
            }
            for &(tv, c) in hist {
                *sums.entry((tp, tv)).or_insert(0.0) += c as f64 / denom as f64;
            }
        }

        let mut totals: Vec<HashMap<TypeIdx, u64>> = vec![HashMap::new(); n_types];
        for (u, hist) in histograms.iter().enumerate() {
            let acc = &mut totals[types[u].get()];
            for &(tp, c) in hist {
                *acc.entry(tp).or_insert(0) += c as u64;
            }
        }
        let mean_around = totals
            .into_iter()
            .enumerate()
            .map(|(tv, acc)| {
                let mut means: Vec<(TypeIdx, f64)> =
                    acc.into_iter().map(|(tp, s)| (tp, s as f64 / type_counts[tv] as f64)).collect();
                means.sort_by_key(|(t, _)| *t);
                means
            })
            .collect();

        Self { n_venues: types.len(), type_counts, sums, mean_around }
    }

    pub fn type_count(&self, t: TypeIdx) -> usize {
        self.type_counts[t.get()]
    }

    /// `k(p -> v)`, or `None` when either type is absent from the city.
    pub fn coefficient(&self, tp: TypeIdx, tv: TypeIdx) -> Option<f64> {
        let (np, nv) = (self.type_counts[tp.get()], self.type_counts[tv.get()]);
        if np == 0 || nv == 0 {
            return None;
        }
        let sum = self.sums.get(&(tp, tv)).copied().unwrap_or(0.0);
        Some((self.n_venues - np) as f64 / (np as f64 * nv as f64) * sum)
    }

    /// Mean `N_p(·, r)` around venues of type `v`.
    pub fn mean_count_around(&self, tv: TypeIdx, tp: TypeIdx) -> f64 {
        let means = &self.mean_around[tv.get()];
        means.binary_search_by_key(&tp, |(t, _)| *t).map(|i| means[i].1).unwrap_or(0.0)
    }

    /// `Σ_p k(p -> t_v) · (N_p(v, r) - mean N_p around type t_v)`; absent
    /// coefficients contribute nothing.
    pub fn quality(&self, tv: TypeIdx, hist: &TypeHistogram) -> f64 {
        // Only types present around v or around some venue of type t_v
        // have a non-zero deviation.
        let means = &self.mean_around[tv.get()];
        let mut types: Vec<TypeIdx> = hist.iter().map(|(t, _)| *t).chain(means.iter().map(|(t, _)| *t)).collect();
        types.sort_unstable();
        types.dedup();
        types
            .into_iter()
            .map(|tp| match self.coefficient(tp, tv) {
                Some(k) => k * (histogram_count(hist, tp) as f64 - self.mean_count_around(tv, tp)),
                None => 0.0,
            })
            .sum()
    }

    /// All defined coefficients as `(p, v, k)`, sorted by `(p, v)`.
    pub fn entries(&self) -> Vec<(TypeIdx, TypeIdx, f64)> {
        let present: Vec<TypeIdx> =
            (0..self.type_counts.len()).filter(|&t| self.type_counts[t] > 0).map(|t| TypeIdx(t as u32)).collect();
        let mut out = Vec::new();
        for &tp in &present {
            for &tv in &present {
                if let Some(k) = self.coefficient(tp, tv) {
                    out.push((tp, tv, k));
                }
            }
        }
        out
    }
}

/// Builds the sorted sparse histogram of a neighborhood.
pub fn histogram(members: &[VenueIdx], type_of: impl Fn(VenueIdx) -> TypeIdx) -> TypeHistogram {
    let mut types: Vec<TypeIdx> = members.iter().map(|&m| type_of(m)).collect();
    types.sort_unstable();
    let mut out: TypeHistogram = Vec::new();
    for t in types {
        match out.last_mut() {
            Some((last, c)) if *last == t => *c += 1,
            _ => out.push((t, 1)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(i: u32) -> TypeIdx {
        TypeIdx(i)
    }

    #[test]
    fn histogram_groups_types() {
        let types = [t(2), t(0), t(2)];
        let h = histogram(&[VenueIdx(0), VenueIdx(1), VenueIdx(2)], |v| types[v.get()]);
        assert_eq!(h, vec![(t(0), 1), (t(2), 2)]);
        assert_eq!(histogram_count(&h, t(1)), 0);
    }

    #[test]
    fn absent_type_has_no_coefficient() {
        let types = [t(0), t(1)];
        let hists = vec![vec![(t(0), 1), (t(1), 1)], vec![(t(0), 1), (t(1), 1)]];
        let table = JensenTable::build(3, &types, &hists);
        assert_eq!(table.coefficient(t(2), t(0)), None);
        assert_eq!(table.coefficient(t(0), t(2)), None);
        // N = 2, N_0 = N_1 = 1: (2-1)/(1*1) * 1/(2-1) = 1
        assert_eq!(table.coefficient(t(0), t(1)), Some(1.0));
    }

    #[test]
    fn never_cooccurring_types_have_zero_coefficient() {
        let types = [t(0), t(0), t(1)];
        // two type-0 venues near each other, type-1 far away
        let hists = vec![vec![(t(0), 2)], vec![(t(0), 2)], vec![(t(1), 1)]];
        let table = JensenTable::build(2, &types, &hists);
        assert_eq!(table.coefficient(t(0), t(1)), Some(0.0));
    }

    #[test]
    fn lone_venue_of_its_type_has_zero_quality() {
        let types = [t(0), t(1), t(1)];
        let hists = vec![vec![(t(0), 1), (t(1), 2)], vec![(t(0), 1), (t(1), 2)], vec![(t(0), 1), (t(1), 2)]];
        let table = JensenTable::build(2, &types, &hists);
        assert_eq!(table.quality(t(0), &hists[0]), 0.0);
    }
}
