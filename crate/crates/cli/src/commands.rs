use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};

use eventpulse::analytics::{day_aligned_span, detect_hotspots, distance_binned_correlation};
use eventpulse::corpus::{format_timestamp, Corpus, SECONDS_PER_DAY};
use eventpulse::features::{Feature, FeatureEngine, FeatureVector};
use eventpulse::geo::nearest_of;
use eventpulse::ml::{loocv, rank_sweep, Direction, EvalReport, FeatureSet, ModelKind};
use eventpulse::mobility::{category_flow_matrix, flow_deltas, popularity_share, TransitionTable};
use eventpulse::returns::{label_instances, prediction_space};
use eventpulse::synth::{generate, SynthParams, CHECKINS_FILE, MANIFEST_FILE, SOCIAL_FILE, TAXONOMY_FILE, VENUES_FILE};

use crate::config::{read_document, RunConfig};
use crate::output::{num, opt_num, write_csv, write_json, Run};
use crate::{Cli, Command, Common};

pub fn run(cli: &Cli) -> Result<()> {
    let common = &cli.common;
    match &cli.command {
        Command::Synth { beta, n_venues, n_users, daily_rate, params } => {
            synth(common, *beta, *n_venues, *n_users, *daily_rate, params.as_deref())
        }
        cmd => {
            let cfg = resolve(common, overrides(cmd))?;
            let name = cmd.name();
            let (mut run, started) = Run::start(name, &cfg.out_dir)?;
            match cmd {
                Command::Validate => validate(&cfg, &mut run)?,
                Command::Features { all } => features(&cfg, *all, &mut run)?,
                Command::Label => label(&cfg, &mut run)?,
                Command::RankEval => rank_eval(&cfg, &mut run)?,
                Command::Crossval { model, set } => crossval(&cfg, model, set, &mut run)?,
                Command::Kendall { .. } => kendall(&cfg, &mut run)?,
                Command::Popshare => popshare(&cfg, &mut run)?,
                Command::Flows { .. } => flows(&cfg, &mut run)?,
                Command::Hotspots { .. } => hotspots(&cfg, &mut run)?,
                Command::Jensen => jensen(&cfg, &mut run)?,
                Command::Synth { .. } => unreachable!(),
            }
            run.finish(started, cfg.seed, &serde_json::to_value(&cfg)?)
        }
    }
}

/// Config keys set by subcommand-specific flags.
fn overrides(cmd: &Command) -> Vec<(&'static str, Value)> {
    let mut out = Vec::new();
    match cmd {
        Command::Kendall { root, period_days, bins } => {
            if let Some(r) = root {
                out.push(("focus_root", json!(r)));
            }
            if let Some(d) = period_days {
                out.push(("kendall_period_days", json!(d)));
            }
            if let Some(b) = bins {
                out.push(("kendall_bins_m", json!(b)));
            }
        }
        Command::Flows { root: Some(r) } => out.push(("focus_root", json!(r))),
        Command::Hotspots { patterns } if !patterns.is_empty() => {
            out.push(("hotspot_patterns", json!(patterns)));
            out.push(("hotspots", json!([])));
        }
        _ => {}
    }
    out
}

fn resolve(common: &Common, extra: Vec<(&'static str, Value)>) -> Result<RunConfig> {
    let mut doc = match &common.config {
        Some(p) => read_document(p)?,
        None => Map::new(),
    };
    let mut set = |key: &str, v: Value| {
        doc.insert(key.to_string(), v);
    };
    let path = |p: &Path| Value::String(p.to_string_lossy().into_owned());
    for (key, v) in [
        ("checkins", &common.checkins),
        ("venues", &common.venues),
        ("social", &common.social),
        ("taxonomy", &common.taxonomy),
        ("out_dir", &common.out),
    ] {
        if let Some(p) = v {
            set(key, path(p));
        }
    }
    if let Some(s) = common.seed {
        set("seed", json!(s));
    }
    if let Some(s) = &common.event_start {
        set("event_start", json!(s));
    }
    if let Some(s) = &common.event_end {
        set("event_end", json!(s));
    }
    if !common.hotspots.is_empty() {
        set("hotspots", json!(common.hotspots));
    }
    if let Some(r) = common.radius {
        set("radius_m", json!(r));
    }
    for (key, v) in extra {
        set(key, v);
    }
    RunConfig::from_document(doc)
}

fn synth(
    common: &Common,
    beta: Option<f64>,
    n_venues: Option<usize>,
    n_users: Option<usize>,
    daily_rate: Option<f64>,
    params_file: Option<&Path>,
) -> Result<()> {
    let mut params = match params_file {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<SynthParams>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => SynthParams::default(),
    };
    if let Some(s) = common.seed {
        params.seed = s;
    }
    if let Some(b) = beta {
        params.beta = b;
    }
    if let Some(n) = n_venues {
        params.n_venues = n;
    }
    if let Some(n) = n_users {
        params.n_users = n;
    }
    if let Some(r) = daily_rate {
        params.daily_rate = r;
    }
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("synth"));
    let (mut run, started) = Run::start("synth", &dir)?;
    let city = generate(&params)?;
    city.write(&dir)?;
    for name in [CHECKINS_FILE, VENUES_FILE, SOCIAL_FILE, TAXONOMY_FILE, MANIFEST_FILE] {
        run.path(name);
    }
    let m = &city.manifest;
    let config = json!({
        "checkins": CHECKINS_FILE,
        "venues": VENUES_FILE,
        "social": SOCIAL_FILE,
        "taxonomy": TAXONOMY_FILE,
        "out_dir": "out",
        "seed": params.seed,
        "event_start": format_timestamp(m.event_window.start()),
        "event_end": format_timestamp(m.event_window.end()),
        "pre_days": params.pre_days,
        "prior_days": params.prior_days,
        "hotspots": m.hotspot_ids(),
    });
    write_json(&run.path("config.json"), &config)?;
    println!(
        "{} venues, {} check-ins, {} friendships, {} hotspots -> {}",
        city.venues.len(),
        m.checkin_count,
        m.edge_count,
        m.hotspots.len(),
        dir.display()
    );
    run.finish(started, params.seed, &serde_json::to_value(&params)?)
}

#[derive(Serialize)]
struct Summary {
    venues: usize,
    users: usize,
    checkins: usize,
    friendships: usize,
    types: usize,
    first_checkin: Option<String>,
    last_checkin: Option<String>,
    hotspots: Vec<String>,
    stadiums: usize,
    sponsors: usize,
    prediction_space: usize,
}

fn validate(cfg: &RunConfig, run: &mut Run) -> Result<()> {
    let corpus = cfg.load_corpus()?;
    let engine = FeatureEngine::new(&corpus, cfg.event_config(&corpus)?)?;
    let span = corpus.time_span();
    let summary = Summary {
        venues: corpus.venue_count(),
        users: corpus.users().len(),
        checkins: corpus.checkins().len(),
        friendships: corpus.social().len(),
        types: corpus.taxonomy().len(),
        first_checkin: span.map(|s| format_timestamp(s.0)),
        last_checkin: span.map(|s| format_timestamp(s.1)),
        hotspots: engine.config().hotspots.clone(),
        stadiums: engine.stadiums().len(),
        sponsors: engine.sponsors().len(),
        prediction_space: prediction_space(&engine)?.len(),
    };
    write_json(&run.path("validate.json"), &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn feature_cells(fv: &FeatureVector) -> Vec<String> {
    Feature::ALL.iter().map(|&f| opt_num(fv.get(f))).collect()
}

fn engine_for<'a>(cfg: &RunConfig, corpus: &'a Corpus) -> Result<FeatureEngine<'a>> {
    Ok(FeatureEngine::new(corpus, cfg.event_config(corpus)?)?)
}

fn features(cfg: &RunConfig, all: bool, run: &mut Run) -> Result<()> {
    let corpus = cfg.load_corpus()?;
    let engine = engine_for(cfg, &corpus)?;
    let venues = if all { corpus.venue_indices().collect() } else { prediction_space(&engine)? };
    let matrix = engine.feature_matrix(&venues)?;
    let mut header = vec!["venue_id"];
    header.extend(Feature::ALL.iter().map(|f| f.column()));
    let rows: Vec<Vec<String>> =
        matrix.rows.iter().map(|fv| std::iter::once(fv.venue_id.clone()).chain(feature_cells(fv)).collect()).collect();
    write_csv(&run.path("features.csv"), &header, &rows)?;
    for f in &matrix.absent {
        eprintln!("note: {} is absent for some venues", f.column());
    }
    println!("{} venues", rows.len());
    Ok(())
}

fn label(cfg: &RunConfig, run: &mut Run) -> Result<()> {
    let corpus = cfg.load_corpus()?;
    let engine = engine_for(cfg, &corpus)?;
    let instances = label_instances(&engine)?;
    let mut header = vec!["venue_id", "R", "E", "AR", "label"];
    header.extend(Feature::ALL.iter().map(|f| f.column()));
    let rows: Vec<Vec<String>> = instances
        .iter()
        .map(|i| {
            let r = &i.returns;
            let mut row =
                vec![i.venue_id.clone(), r.actual.to_string(), num(r.expected), num(r.abnormal), r.label.to_string()];
            row.extend(feature_cells(&i.features));
            row
        })
        .collect();
    write_csv(&run.path("labels.csv"), &header, &rows)?;
    let pos = instances.iter().filter(|i| i.label().is_positive()).count();
    println!("{} instances, {} positive", instances.len(), pos);
    Ok(())
}

#[derive(Serialize)]
struct FeatureEval {
    feature: &'static str,
    direction: Direction,
    /// `None` when the feature is absent for some instance.
    report: Option<EvalReport>,
}

fn rank_eval(cfg: &RunConfig, run: &mut Run) -> Result<()> {
    let corpus = cfg.load_corpus()?;
    let engine = engine_for(cfg, &corpus)?;
    let instances = label_instances(&engine)?;
    let ids: Vec<String> = instances.iter().map(|i| i.venue_id.clone()).collect();
    let labels: Vec<_> = instances.iter().map(|i| i.label()).collect();
    let mut evals = Vec::new();
    let mut rows = Vec::new();
    for f in Feature::ALL {
        let direction = if f.ascending() { Direction::Ascending } else { Direction::Descending };
        let values: Option<Vec<f64>> = instances.iter().map(|i| i.features.get(f)).collect();
        let report = values.map(|v| rank_sweep(&ids, &v, &labels, direction)).transpose()?;
        rows.push(vec![f.column().to_string(), opt_num(report.as_ref().map(|r| r.auc))]);
        evals.push(FeatureEval { feature: f.column(), direction, report });
    }
    write_csv(&run.path("rank_eval.csv"), &["feature", "auc"], &rows)?;
    write_json(&run.path("rank_eval.json"), &evals)?;
    for r in &rows {
        println!("{:24} {}", r[0], r[1]);
    }
    Ok(())
}

fn parse_all<T: std::str::FromStr + Copy>(s: &str, all: &[T]) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    if s.eq_ignore_ascii_case("all") {
        Ok(all.to_vec())
    } else {
        Ok(vec![s.parse()?])
    }
}

fn crossval(cfg: &RunConfig, model: &str, set: &str, run: &mut Run) -> Result<()> {
    let models = parse_all(model, &ModelKind::ALL)?;
    let sets = parse_all(set, &FeatureSet::ALL)?;
    let corpus = cfg.load_corpus()?;
    let engine = engine_for(cfg, &corpus)?;
    let instances = label_instances(&engine)?;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &m in &models {
        for &s in &sets {
            let r = loocv(&instances, m, s, cfg.seed).with_context(|| format!("cross-validating {m} on {s}"))?;
            rows.push(vec![m.to_string(), s.to_string(), num(r.eval.precision), num(r.eval.recall), num(r.eval.auc)]);
            println!("{m:4} {s:3} auc {:.3} precision {:.3} recall {:.3}", r.eval.auc, r.eval.precision, r.eval.recall);
            reports.push(r);
        }
    }
    write_csv(&run.path("crossval.csv"), &["model", "set", "precision", "recall", "auc"], &rows)?;
    write_json(&run.path("crossval.json"), &reports)?;
    Ok(())
}

fn kendall(cfg: &RunConfig, run: &mut Run) -> Result<()> {
    let corpus = cfg.load_corpus()?;
    let (event, _, _) = cfg.windows()?;
    let hotspots = cfg.hotspot_ids(&corpus)?.iter().map(|id| corpus.venue_index(id)).collect::<Result<Vec<_>, _>>()?;
    let span = match cfg.analysis_span()? {
        Some(s) => s,
        None => day_aligned_span(&corpus)?,
    };
    let period_s = cfg.kendall_period_days.map_or(event.len_seconds(), |d| d * SECONDS_PER_DAY);
    let distance = |v| nearest_of(&corpus, v, &hotspots).map(|(_, d)| d).unwrap_or(f64::INFINITY);
    let bins =
        distance_binned_correlation(&corpus, &cfg.focus_root, distance, period_s, event, span, &cfg.kendall_bins())?;
    let mut rows = Vec::new();
    for b in &bins {
        for p in &b.series {
            rows.push(vec![format_timestamp(p.later.start()), num(b.bin_max_m), opt_num(p.tau), p.n_items.to_string()]);
        }
    }
    write_csv(&run.path("kendall.csv"), &["period_start", "bin_max_m", "tau", "n_items"], &rows)?;
    println!("{} bins x {} period pairs", bins.len(), bins.first().map_or(0, |b| b.series.len()));
    Ok(())
}

fn popshare(cfg: &RunConfig, run: &mut Run) -> Result<()> {
    let corpus = cfg.load_corpus()?;
    let (event, pre, _) = cfg.windows()?;
    let before = popularity_share(&corpus, pre);
    let during = popularity_share(&corpus, event);
    let roots: BTreeSet<&String> = before.keys().chain(during.keys()).collect();
    let rows: Vec<Vec<String>> = roots
        .into_iter()
        .map(|r| {
            let (b, d) = (before.get(r).copied().unwrap_or(0.0), during.get(r).copied().unwrap_or(0.0));
            vec![r.clone(), num(b), num(d), num(d - b)]
        })
        .collect();
    write_csv(&run.path("popshare.csv"), &["root", "share_before", "share_during", "delta"], &rows)?;
    Ok(())
}

fn flows(cfg: &RunConfig, run: &mut Run) -> Result<()> {
    let corpus = cfg.load_corpus()?;
    let (event, pre, _) = cfg.windows()?;
    let before = TransitionTable::extract(&corpus, pre, cfg.max_gap_s)?;
    let during = TransitionTable::extract(&corpus, event, cfg.max_gap_s)?;
    let deltas = flow_deltas(
        &category_flow_matrix(&corpus, &before, &cfg.focus_root),
        &category_flow_matrix(&corpus, &during, &cfg.focus_root),
    );
    let rows: Vec<Vec<String>> = deltas
        .rows()
        .map(|(dir, d)| vec![d.specific.clone(), dir.as_str().to_string(), num(d.before), num(d.during), num(d.delta)])
        .collect();
    write_csv(&run.path("flows.csv"), &["type", "direction", "prob_before", "prob_during", "delta"], &rows)?;
    println!("{} transitions before, {} during", before.len(), during.len());
    Ok(())
}

fn hotspots(cfg: &RunConfig, run: &mut Run) -> Result<()> {
    let corpus = cfg.load_corpus()?;
    let ids = detect_hotspots(&corpus, &cfg.hotspot_patterns)?;
    if ids.is_empty() {
        bail!("no venue name matches {:?}", cfg.hotspot_patterns);
    }
    let mut text = ids.join("\n");
    text.push('\n');
    let path = run.path("hotspots.txt");
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    for id in &ids {
        println!("{id}");
    }
    Ok(())
}

fn jensen(cfg: &RunConfig, run: &mut Run) -> Result<()> {
    let corpus = cfg.load_corpus()?;
    let engine = engine_for(cfg, &corpus)?;
    let tax = corpus.taxonomy();
    let table = engine.jensen_table();
    let mut rows: Vec<Vec<String>> = table
        .entries()
        .into_iter()
        .map(|(tp, tv, k)| {
            vec![
                tax.name(tp).to_string(),
                tax.name(tv).to_string(),
                num(k),
                table.type_count(tp).to_string(),
                table.type_count(tv).to_string(),
            ]
        })
        .collect();
    rows.sort();
    write_csv(&run.path("jensen.csv"), &["type_p", "type_v", "k", "n_p", "n_v"], &rows)?;
    println!("{} type pairs", rows.len());
    Ok(())
}
