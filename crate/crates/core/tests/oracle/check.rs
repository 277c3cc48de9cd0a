//! Compares the library against the brute-force oracles on one random city.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use eventpulse::analytics::{kendall_tau_b, rank_correlation_series};
use eventpulse::corpus::{TimeWindow, VenueIdx};
use eventpulse::features::{EventConfig, FeatureEngine};
use eventpulse::geo::{count_by_type as lib_count_by_type, SpatialIndex};
use eventpulse::ml::{rank_sweep, roc_auc, Direction, ScoredItem};
use eventpulse::returns::{prediction_space as lib_prediction_space, Label};

use super::*;

const TOL: f64 = 1e-9;

fn close(what: &str, got: f64, want: f64) -> Result<(), String> {
    if (got - want).abs() <= TOL * want.abs().max(1.0) {
        Ok(())
    } else {
        Err(format!("{what}: library {got} vs oracle {want}"))
    }
}

fn same<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: library {got:?} vs oracle {want:?}"))
    }
}

fn window(w: (i64, i64)) -> TimeWindow {
    TimeWindow::new(w.0, w.1).unwrap()
}

/// Runs every comparison on the city drawn from `seed`.
pub fn instance(seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let city = random_city(&mut rng, 50, 200);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = city.load(dir.path());
    let at = |id: &str| corpus.venue_index(id).unwrap();
    let r = [50.0, 120.0, 200.0, 350.0][rng.random_range(0..4)];
    let w = windows();

    // neighborhood and count_by_type
    let index = SpatialIndex::for_corpus(&corpus, r).map_err(|e| e.to_string())?;
    for i in 0..city.venues.len() {
        let hood = index.neighborhood(at(&city.venues[i].id), r).map_err(|e| e.to_string())?;
        let ids: Vec<String> = hood.members.iter().map(|&v| corpus.venue(v).id.clone()).collect();
        same("neighborhood", ids, neighborhood(&city, i, r))?;
        same("count_by_type", lib_count_by_type(&corpus, &hood), count_by_type(&city, i, r))?;
    }

    // features
    let mut hotspots: Vec<usize> = (0..city.venues.len()).collect();
    hotspots.shuffle(&mut rng);
    hotspots.truncate(rng.random_range(1..=2));
    let mut cfg = EventConfig::new(window(w.event), hotspots.iter().map(|&h| city.venues[h].id.clone()).collect());
    cfg.prior_window = window(w.prior);
    cfg.pre_window = window(w.pre);
    cfg.radius_m = r;
    cfg.max_gap_s = [3_600, 6 * 3_600, DAY][rng.random_range(0..3)];
    cfg.max_hotspot_distance_m = rng.random_range(100.0..900.0);
    cfg.min_prior_checkins = rng.random_range(0..4);
    let engine = FeatureEngine::new(&corpus, cfg.clone()).map_err(|e| e.to_string())?;

    for tp in city.types() {
        for tv in city.types() {
            let got = engine.jensen_coefficient(&tp, &tv).map_err(|e| e.to_string())?;
            match (got, jensen_coefficient(&city, &tp, &tv, r)) {
                (Some(a), Some(b)) => close(&format!("k({tp} -> {tv})"), a, b)?,
                (a, b) => same(&format!("k({tp} -> {tv})"), a, b)?,
            }
        }
    }
    for i in 0..city.venues.len() {
        let v = at(&city.venues[i].id);
        close("jensen_quality", engine.jensen_quality(v), jensen_quality(&city, i, r))?;
        close(
            "entertainment_flow",
            engine.entertainment_flow(v),
            entertainment_flow(&city, i, r, w.pre, cfg.max_gap_s),
        )?;
        same("social_area", engine.social_area(v), social_area(&city, i, r, w.pre))?;
    }
    let space: Vec<String> =
        lib_prediction_space(&engine).map_err(|e| e.to_string())?.iter().map(|&v| corpus.venue(v).id.clone()).collect();
    same(
        "prediction_space",
        space,
        prediction_space(
            &city,
            &hotspots,
            &cfg.focus_root,
            cfg.max_hotspot_distance_m,
            w.prior,
            cfg.min_prior_checkins,
        ),
    )?;

    // kendall, raw and over consecutive periods
    let n = rng.random_range(2..60);
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
    match (kendall_tau_b(&a, &b).map_err(|e| e.to_string())?, kendall(&a, &b)) {
        (Some(x), Some(y)) => close("kendall_tau_b", x, y)?,
        (x, y) => same("kendall_tau_b", x, y)?,
    }
    let periods: Vec<TimeWindow> = (0..4).map(|k| window((T0 + 2 * k * DAY, T0 + 2 * (k + 1) * DAY))).collect();
    let food: Vec<VenueIdx> = corpus.venues_with_root("Food").collect();
    for (k, pair) in rank_correlation_series(&corpus, &food, &periods).iter().enumerate() {
        let (k, next) = (2 * k as i64, 2 * (k as i64 + 1));
        let (tau, n_items) =
            period_tau(&city, "Food", (T0 + k * DAY, T0 + next * DAY), (T0 + next * DAY, T0 + (next + 2) * DAY));
        same("period n_items", pair.n_items, n_items)?;
        match (pair.tau, tau) {
            (Some(x), Some(y)) => close("period tau", x, y)?,
            (x, y) => same("period tau", x, y)?,
        }
    }

    // roc_auc and rank_sweep over a random labelling with coarse scores
    let m = rng.random_range(2..=city.venues.len().max(2));
    let mut ids: Vec<String> = (0..m).map(|i| format!("x{i:02}")).collect();
    ids.shuffle(&mut rng);
    let values: Vec<f64> = (0..m).map(|_| rng.random_range(0..5) as f64 * 0.5).collect();
    let mut positive: Vec<bool> = (0..m).map(|_| rng.random_bool(0.5)).collect();
    positive[0] = true;
    positive[m - 1] = false;
    let labels: Vec<Label> = positive.iter().map(|&p| if p { Label::Positive } else { Label::Negative }).collect();
    let items: Vec<ScoredItem> =
        (0..m).map(|i| ScoredItem { venue_id: ids[i].clone(), score: values[i], label: labels[i] }).collect();
    close("roc_auc", roc_auc(&items).map_err(|e| e.to_string())?, auc(&values, &positive))?;
    for direction in [Direction::Ascending, Direction::Descending] {
        let signed: Vec<f64> = values.iter().map(|&v| if direction == Direction::Ascending { -v } else { v }).collect();
        let report = rank_sweep(&ids, &values, &labels, direction).map_err(|e| e.to_string())?;
        close("rank_sweep auc", report.auc, auc(&signed, &positive))?;
        same("rank_sweep roc", report.roc_points, roc_points(&signed, &positive))?;
        let pos = positive.iter().filter(|&&p| p).count();
        let (p, rc) = top_k(&ids, &signed, &positive, pos);
        close("rank_sweep precision", report.precision, p)?;
        close("rank_sweep recall", report.recall, rc)?;
        for pt in &report.pr_curve {
            let (p, rc) = top_k(&ids, &signed, &positive, pt.k);
            close("pr_curve precision", pt.precision, p)?;
            close("pr_curve recall", pt.recall, rc)?;
        }
    }
    Ok(())
}
