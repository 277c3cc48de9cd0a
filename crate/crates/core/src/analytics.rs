//! Period-to-period popularity rank correlation and hotspot detection.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, TimeWindow, VenueIdx, SECONDS_PER_DAY};

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("rankings cover different item sets")]
    UniverseMismatch,
    #[error("tau needs at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error("span {span} holds fewer than two {period_s} s periods aligned to {anchor}")]
    InsufficientSpan { span: TimeWindow, anchor: TimeWindow, period_s: i64 },
    #[error("period length must be positive, got {0}")]
    InvalidPeriod(i64),
    #[error("distance bins must be positive and strictly increasing")]
    InvalidBins,
    #[error("no hotspot patterns given")]
    NoPatterns,
    #[error("corpus has no check-ins")]
    EmptyCorpus,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

fn cmp(a: f64, b: f64) -> Ordering {
    a.total_cmp(&b)
}

/// Counts pairs `i < j` with `x[i] > x[j]` while sorting `x` in place.
fn merge_count(x: &mut [f64], buf: &mut Vec<f64>) -> u64 {
    let n = x.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut x[..mid], buf) + merge_count(&mut x[mid..], buf);
    buf.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if cmp(x[j], x[i]) == Ordering::Less {
            swaps += (mid - i) as u64;
            buf.push(x[j]);
            j += 1;
        } else {
            buf.push(x[i]);
            i += 1;
        }
    }
    buf.extend_from_slice(&x[i..mid]);
    buf.extend_from_slice(&x[j..n]);
    x.copy_from_slice(buf);
    swaps
}

/// Sum of `t(t-1)/2` over runs of equal values in a sorted sequence.
fn tied_pairs<T: PartialEq>(sorted: impl Iterator<Item = T>) -> u64 {
    let mut total = 0u64;
    let mut run = 0u64;
    let mut last: Option<T> = None;
    for x in sorted {
        if last.as_ref() == Some(&x) {
            run += 1;
        } else {
            total += run * (run.saturating_sub(1)) / 2;
            run = 1;
            last = Some(x);
        }
    }
    total + run * run.saturating_sub(1) / 2
}

/// Tie-corrected Kendall tau between paired scores, in O(n log n).
///
/// `Ok(None)` when every pair is tied in one of the two orderings.
pub fn kendall_tau_b(a: &[f64], b: &[f64]) -> Result<Option<f64>, AnalyticsError> {
    if a.len() != b.len() {
        return Err(AnalyticsError::UniverseMismatch);
    }
    let n = a.len();
    if n < 2 {
        return Err(AnalyticsError::TooFewItems(n));
    }
    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|x, y| cmp(x.0, y.0).then(cmp(x.1, y.1)));

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let n1 = tied_pairs(pairs.iter().map(|p| p.0.to_bits()));
    let n3 = tied_pairs(pairs.iter().map(|p| (p.0.to_bits(), p.1.to_bits())));
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let swaps = merge_count(&mut ys, &mut Vec::with_capacity(n));
    let n2 = tied_pairs(ys.iter().map(|y| y.to_bits()));

    let (da, db) = (n0 - n1, n0 - n2);
    if da == 0 || db == 0 {
        return Ok(None);
    }
    let num = n0 as i128 - n1 as i128 - n2 as i128 + n3 as i128 - 2 * swaps as i128;
    Ok(Some(num as f64 / ((da as f64) * (db as f64)).sqrt()))
}

/// Venues of one category with their check-in counts in a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodRanking {
    pub window: TimeWindow,
    /// Sorted by descending count, then venue id.
    pub entries: Vec<(String, u64)>,
}

impl PeriodRanking {
    pub fn build(corpus: &Corpus, venues: &[VenueIdx], window: TimeWindow) -> Self {
        let mut entries: Vec<(String, u64)> =
            venues.iter().map(|&v| (corpus.venue(v).id.clone(), corpus.checkin_count(v, window) as u64)).collect();
        entries.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
        Self { window, entries }
    }

    /// Tau-b against another ranking over the same venues.
    pub fn tau_b(&self, other: &PeriodRanking) -> Result<Option<f64>, AnalyticsError> {
        let mut a = self.entries.clone();
        let mut b = other.entries.clone();
        a.sort();
        b.sort();
        if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| x.0 != y.0) {
            return Err(AnalyticsError::UniverseMismatch);
        }
        let xs: Vec<f64> = a.iter().map(|e| e.1 as f64).collect();
        let ys: Vec<f64> = b.iter().map(|e| e.1 as f64).collect();
        kendall_tau_b(&xs, &ys)
    }
}

/// Tau between two consecutive periods.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodPairTau {
    pub earlier: TimeWindow,
    pub later: TimeWindow,
    /// `None` for a degenerate pair (fewer than two active venues, or all tied).
    pub tau: Option<f64>,
    pub n_items: usize,
}

/// `[first midnight, midnight after last check-in)`.
pub fn day_aligned_span(corpus: &Corpus) -> Result<TimeWindow, AnalyticsError> {
    let (lo, hi) = corpus.time_span().ok_or(AnalyticsError::EmptyCorpus)?;
    let start = lo.div_euclid(SECONDS_PER_DAY) * SECONDS_PER_DAY;
    let end = (hi.div_euclid(SECONDS_PER_DAY) + 1) * SECONDS_PER_DAY;
    Ok(TimeWindow::new(start, end)?)
}

/// Consecutive `period_s`-long windows on the grid through `anchor.start()`
/// that lie entirely inside `span`.
pub fn aligned_periods(anchor: TimeWindow, period_s: i64, span: TimeWindow) -> Result<Vec<TimeWindow>, AnalyticsError> {
    if period_s <= 0 {
        return Err(AnalyticsError::InvalidPeriod(period_s));
    }
    let base = anchor.start();
    // smallest k with base + k*p >= span.start
    let k0 = (span.start() - base).div_euclid(period_s) + i64::from((span.start() - base).rem_euclid(period_s) != 0);
    let mut out = Vec::new();
    let mut k = k0;
    while base + (k + 1) * period_s <= span.end() {
        out.push(TimeWindow::new(base + k * period_s, base + (k + 1) * period_s)?);
        k += 1;
    }
    if out.len() < 2 {
        return Err(AnalyticsError::InsufficientSpan { span, anchor, period_s });
    }
    Ok(out)
}

/// Tau for each consecutive period pair over `venues`; each pair's universe
/// is the venues active in either period, inactive ones counted as zero.
pub fn rank_correlation_series(corpus: &Corpus, venues: &[VenueIdx], periods: &[TimeWindow]) -> Vec<PeriodPairTau> {
    periods
        .par_windows(2)
        .map(|w| {
            let (earlier, later) = (w[0], w[1]);
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for &v in venues {
                let (x, y) = (corpus.checkin_count(v, earlier), corpus.checkin_count(v, later));
                if x + y > 0 {
                    xs.push(x as f64);
                    ys.push(y as f64);
                }
            }
            let tau = kendall_tau_b(&xs, &ys).ok().flatten();
            PeriodPairTau { earlier, later, tau, n_items: xs.len() }
        })
        .collect()
}

pub fn period_rank_correlation(
    corpus: &Corpus,
    root: &str,
    period_s: i64,
    anchor: TimeWindow,
    span: TimeWindow,
) -> Result<Vec<PeriodPairTau>, AnalyticsError> {
    let periods = aligned_periods(anchor, period_s, span)?;
    let venues: Vec<VenueIdx> = corpus.venues_with_root(root).collect();
    Ok(rank_correlation_series(corpus, &venues, &periods))
}

/// Tau series for one distance band `(previous bound, bin_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinSeries {
    pub bin_max_m: f64,
    pub n_venues: usize,
    pub series: Vec<PeriodPairTau>,
}

/// As [`period_rank_correlation`], split by `distance[v]` into bands with
/// the given upper bounds; an infinite last bound collects the remainder.
pub fn distance_binned_correlation(
    corpus: &Corpus,
    root: &str,
    distance: impl Fn(VenueIdx) -> f64,
    period_s: i64,
    anchor: TimeWindow,
    span: TimeWindow,
    bins: &[f64],
) -> Result<Vec<BinSeries>, AnalyticsError> {
    if bins.is_empty() || bins[0] <= 0.0 || bins.windows(2).any(|w| w[0] >= w[1]) || bins.iter().any(|b| b.is_nan()) {
        return Err(AnalyticsError::InvalidBins);
    }
    let periods = aligned_periods(anchor, period_s, span)?;
    let mut members: Vec<Vec<VenueIdx>> = vec![Vec::new(); bins.len()];
    for v in corpus.venues_with_root(root) {
        let d = distance(v);
        if let Some(i) = bins.iter().position(|&b| d <= b) {
            members[i].push(v);
        }
    }
    Ok(bins
        .iter()
        .zip(members)
        .map(|(&bin_max_m, venues)| BinSeries {
            bin_max_m,
            n_venues: venues.len(),
            series: rank_correlation_series(corpus, &venues, &periods),
        })
        .collect())
}

/// Ids of venues whose name contains any pattern, ignoring case.
pub fn detect_hotspots(corpus: &Corpus, patterns: &[String]) -> Result<Vec<String>, AnalyticsError> {
    if patterns.iter().all(|p| p.is_empty()) {
        return Err(AnalyticsError::NoPatterns);
    }
    Ok(corpus.venues_matching_name(patterns).into_iter().map(|v| corpus.venue(v).id.clone()).collect())
}
