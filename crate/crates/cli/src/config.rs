//! Run configuration: one flat JSON document, with command-line overrides.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use eventpulse::analytics::detect_hotspots;
use eventpulse::corpus::{load_corpus, Corpus, TimeWindow};
use eventpulse::features::{
    EventConfig, DEFAULT_FOCUS_ROOT, DEFAULT_HOTSPOT_PATTERNS, DEFAULT_MAX_HOTSPOT_DISTANCE_M,
    DEFAULT_MIN_PRIOR_CHECKINS, DEFAULT_PRE_DAYS, DEFAULT_PRIOR_DAYS, DEFAULT_SPONSOR_PATTERN,
};
use eventpulse::geo::DEFAULT_RADIUS_M;
use eventpulse::mobility::DEFAULT_MAX_GAP_S;

/// Keys holding file paths; relative values resolve against the config file.
const PATH_KEYS: [&str; 5] = ["checkins", "venues", "social", "taxonomy", "out_dir"];

pub const DEFAULT_KENDALL_BINS_M: [f64; 2] = [1_000.0, 2_000.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub checkins: PathBuf,
    pub venues: PathBuf,
    pub social: PathBuf,
    pub taxonomy: PathBuf,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub event_start: String,
    pub event_end: String,
    /// Explicit window bounds; when absent the window is `*_days` long and
    /// ends at the event start.
    #[serde(default)]
    pub pre_start: Option<String>,
    #[serde(default)]
    pub pre_end: Option<String>,
    #[serde(default)]
    pub prior_start: Option<String>,
    #[serde(default)]
    pub prior_end: Option<String>,
    #[serde(default = "default_pre_days")]
    pub pre_days: i64,
    #[serde(default = "default_prior_days")]
    pub prior_days: i64,
    #[serde(default = "default_radius")]
    pub radius_m: f64,
    /// Hotspot venue ids; when empty, venues matching `hotspot_patterns`.
    #[serde(default)]
    pub hotspots: Vec<String>,
    #[serde(default = "default_patterns")]
    pub hotspot_patterns: Vec<String>,
    #[serde(default)]
    pub stadium_types: Vec<String>,
    #[serde(default = "default_sponsor")]
    pub sponsor_pattern: String,
    #[serde(default = "default_max_gap")]
    pub max_gap_s: i64,
    #[serde(default = "default_focus_root")]
    pub focus_root: String,
    #[serde(default = "default_max_hotspot_distance")]
    pub max_hotspot_distance_m: f64,
    #[serde(default = "default_min_prior")]
    pub min_prior_checkins: usize,
    /// Kendall period length; defaults to the event length.
    #[serde(default)]
    pub kendall_period_days: Option<i64>,
    /// Finite upper bounds of the Kendall distance bins; an unbounded last
    /// bin is always added.
    #[serde(default = "default_bins")]
    pub kendall_bins_m: Vec<f64>,
    /// Kendall analysis span; defaults to the day-aligned corpus span.
    #[serde(default)]
    pub analysis_start: Option<String>,
    #[serde(default)]
    pub analysis_end: Option<String>,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_pre_days() -> i64 {
    DEFAULT_PRE_DAYS
}
fn default_prior_days() -> i64 {
    DEFAULT_PRIOR_DAYS
}
fn default_radius() -> f64 {
    DEFAULT_RADIUS_M
}
fn default_patterns() -> Vec<String> {
    DEFAULT_HOTSPOT_PATTERNS.iter().map(|s| s.to_string()).collect()
}
fn default_sponsor() -> String {
    DEFAULT_SPONSOR_PATTERN.to_string()
}
fn default_max_gap() -> i64 {
    DEFAULT_MAX_GAP_S
}
fn default_focus_root() -> String {
    DEFAULT_FOCUS_ROOT.to_string()
}
fn default_max_hotspot_distance() -> f64 {
    DEFAULT_MAX_HOTSPOT_DISTANCE_M
}
fn default_min_prior() -> usize {
    DEFAULT_MIN_PRIOR_CHECKINS
}
fn default_bins() -> Vec<f64> {
    DEFAULT_KENDALL_BINS_M.to_vec()
}

/// Reads a config file into a JSON object, resolving relative paths
/// against the file's directory.
pub fn read_document(path: &Path) -> Result<Map<String, Value>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let Value::Object(mut doc) = value else { bail!("config {} must be a JSON object", path.display()) };
    let base = path.parent().unwrap_or(Path::new(""));
    for key in PATH_KEYS {
        if let Some(Value::String(p)) = doc.get(key) {
            if Path::new(p).is_relative() {
                let joined = base.join(p).to_string_lossy().into_owned();
                doc.insert(key.to_string(), Value::String(joined));
            }
        }
    }
    Ok(doc)
}

impl RunConfig {
    pub fn from_document(doc: Map<String, Value>) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_value(Value::Object(doc)).context("invalid run configuration")?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        ensure!(self.radius_m.is_finite() && self.radius_m > 0.0, "radius_m must be positive");
        ensure!(self.pre_days > 0 && self.prior_days > 0, "window lengths must be positive");
        ensure!(
            self.kendall_bins_m.iter().all(|b| b.is_finite() && *b > 0.0)
                && self.kendall_bins_m.windows(2).all(|w| w[0] < w[1]),
            "kendall_bins_m must be positive, finite and strictly increasing"
        );
        if let Some(d) = self.kendall_period_days {
            ensure!(d > 0, "kendall_period_days must be positive");
        }
        let (event, pre, prior) = self.windows()?;
        ensure!(
            prior.start() <= pre.start() && pre.end() <= event.start(),
            "windows must be ordered prior -> pre -> event (prior {prior}, pre {pre}, event {event})"
        );
        Ok(())
    }

    /// `(event, pre, prior)` windows.
    pub fn windows(&self) -> Result<(TimeWindow, TimeWindow, TimeWindow)> {
        let event = TimeWindow::parse(&self.event_start, &self.event_end).context("event window")?;
        let window = |start: &Option<String>, end: &Option<String>, days: i64, name: &str| -> Result<TimeWindow> {
            match (start, end) {
                (Some(s), Some(e)) => TimeWindow::parse(s, e).with_context(|| format!("{name} window")),
                (None, None) => event.preceding_days(days).with_context(|| format!("{name} window")),
                _ => bail!("{name}_start and {name}_end must be given together"),
            }
        };
        let pre = window(&self.pre_start, &self.pre_end, self.pre_days, "pre")?;
        let prior = window(&self.prior_start, &self.prior_end, self.prior_days, "prior")?;
        Ok((event, pre, prior))
    }

    pub fn analysis_span(&self) -> Result<Option<TimeWindow>> {
        match (&self.analysis_start, &self.analysis_end) {
            (Some(s), Some(e)) => Ok(Some(TimeWindow::parse(s, e).context("analysis span")?)),
            (None, None) => Ok(None),
            _ => bail!("analysis_start and analysis_end must be given together"),
        }
    }

    /// Distance bin upper bounds including the unbounded last bin.
    pub fn kendall_bins(&self) -> Vec<f64> {
        let mut bins = self.kendall_bins_m.clone();
        bins.push(f64::INFINITY);
        bins
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        Ok(load_corpus(&self.checkins, &self.venues, &self.social, &self.taxonomy)?)
    }

    /// Hotspot ids: the configured list, else venues matching the patterns.
    pub fn hotspot_ids(&self, corpus: &Corpus) -> Result<Vec<String>> {
        if !self.hotspots.is_empty() {
            return Ok(self.hotspots.clone());
        }
        let found = detect_hotspots(corpus, &self.hotspot_patterns)?;
        ensure!(!found.is_empty(), "no venue name matches the hotspot patterns {:?}", self.hotspot_patterns);
        Ok(found)
    }

    pub fn event_config(&self, corpus: &Corpus) -> Result<EventConfig> {
        let (event, pre, prior) = self.windows()?;
        let mut cfg = EventConfig::new(event, self.hotspot_ids(corpus)?);
        cfg.pre_window = pre;
        cfg.prior_window = prior;
        cfg.radius_m = self.radius_m;
        cfg.stadium_types = self.stadium_types.iter().cloned().collect::<BTreeSet<_>>();
        cfg.sponsor_pattern = self.sponsor_pattern.clone();
        cfg.max_gap_s = self.max_gap_s;
        cfg.focus_root = self.focus_root.clone();
        cfg.max_hotspot_distance_m = self.max_hotspot_distance_m;
        cfg.min_prior_checkins = self.min_prior_checkins;
        cfg.validate()?;
        Ok(cfg)
    }
}
