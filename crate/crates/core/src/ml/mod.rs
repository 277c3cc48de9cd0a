//! Ranking evaluation and supervised classifiers with leave-one-out
//! cross-validation.

pub mod forest;
pub mod gnb;
mod metrics;
pub mod svm;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use forest::RandomForest;
pub use gnb::GaussianNb;
pub use metrics::{pr_curve, precision_recall, rank_sweep, roc_auc, roc_points, Direction, EvalReport, PrPoint};
pub use svm::{Svm, SvmParams};

use crate::features::{Feature, FeatureVector};
use crate::returns::{Label, LabeledInstance};

#[derive(Debug, Error)]
pub enum MlError {
    #[error("both classes are required")]
    SingleClass,
    #[error("need at least {need} instances, got {got}")]
    TooFew { need: usize, got: usize },
    #[error("non-finite score or feature value")]
    NonFinite,
    #[error("expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("SMO did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("feature {feature} is absent for venue {venue:?}")]
    MissingFeature { venue: String, feature: &'static str },
    #[error("unknown {kind} {value:?}")]
    Unknown { kind: &'static str, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredItem {
    pub venue_id: String,
    pub score: f64,
    pub label: Label,
}

/// Returns the feature count after checking shape, finiteness and class balance.
pub(crate) fn check_training(x: &[Vec<f64>], y: &[Label]) -> Result<usize, MlError> {
    if x.len() != y.len() {
        return Err(MlError::Dimension { expected: x.len(), got: y.len() });
    }
    if x.is_empty() {
        return Err(MlError::TooFew { need: 2, got: 0 });
    }
    let d = x[0].len();
    if let Some(row) = x.iter().find(|r| r.len() != d) {
        return Err(MlError::Dimension { expected: d, got: row.len() });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(MlError::NonFinite);
    }
    let pos = y.iter().filter(|l| l.is_positive()).count();
    if pos == 0 || pos == y.len() {
        return Err(MlError::SingleClass);
    }
    Ok(d)
}

/// SplitMix64 step over `seed + stream`, for independent per-tree and
/// per-fold RNG streams.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureSet {
    G,
    M,
    GM,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 3] = [FeatureSet::G, FeatureSet::M, FeatureSet::GM];

    pub fn features(self) -> &'static [Feature] {
        use Feature::*;
        match self {
            FeatureSet::G => &[StadiumDistance, JensenQuality, NearbyPlaceEntropy, SponsorDistance],
            FeatureSet::M => &[Popularity, EntertainmentFlow, SocialArea],
            FeatureSet::GM => &[
                StadiumDistance,
                JensenQuality,
                NearbyPlaceEntropy,
                SponsorDistance,
                Popularity,
                EntertainmentFlow,
                SocialArea,
            ],
        }
    }

    /// Random-forest split candidates per node.
    pub fn forest_m(self) -> usize {
        match self {
            FeatureSet::GM => 4,
            _ => 3,
        }
    }

    pub fn extract(self, fv: &FeatureVector) -> Result<Vec<f64>, MlError> {
        self.features()
            .iter()
            .map(|&f| fv.get(f).ok_or(MlError::MissingFeature { venue: fv.venue_id.clone(), feature: f.column() }))
            .collect()
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSet::G => "G",
            FeatureSet::M => "M",
            FeatureSet::GM => "GM",
        })
    }
}

impl FromStr for FeatureSet {
    type Err = MlError;
    fn from_str(s: &str) -> Result<Self, MlError> {
        match s.to_ascii_uppercase().as_str() {
            "G" => Ok(FeatureSet::G),
            "M" => Ok(FeatureSet::M),
            "GM" => Ok(FeatureSet::GM),
            _ => Err(MlError::Unknown { kind: "feature set", value: s.to_string() }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    Gnb,
    Rf,
    Svm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Gnb, ModelKind::Rf, ModelKind::Svm];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Gnb => "gnb",
            ModelKind::Rf => "rf",
            ModelKind::Svm => "svm",
        }
    }

    /// Score above which an instance is predicted positive.
    pub fn threshold(self) -> f64 {
        match self {
            ModelKind::Svm => 0.0,
            _ => 0.5,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = MlError;
    fn from_str(s: &str) -> Result<Self, MlError> {
        match s.to_ascii_lowercase().as_str() {
            "gnb" => Ok(ModelKind::Gnb),
            "rf" => Ok(ModelKind::Rf),
            "svm" => Ok(ModelKind::Svm),
            _ => Err(MlError::Unknown { kind: "model", value: s.to_string() }),
        }
    }
}

/// Per-column z-scores. Constant columns are centered only.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let sd = (0..d)
            .map(|j| {
                let v = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if v > 0.0 {
                    v.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, sd }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.sd).map(|((v, m), s)| (v - m) / s).collect()
    }
}

/// A fitted model of any kind.
#[derive(Debug, Clone)]
pub enum Model {
    Gnb(GaussianNb),
    Rf(RandomForest),
    Svm(Svm),
}

impl Model {
    pub fn fit(kind: ModelKind, set: FeatureSet, x: &[Vec<f64>], y: &[Label], seed: u64) -> Result<Self, MlError> {
        Ok(match kind {
            ModelKind::Gnb => Model::Gnb(GaussianNb::fit(x, y)?),
            ModelKind::Rf => Model::Rf(RandomForest::fit(x, y, forest::DEFAULT_TREES, set.forest_m(), seed)?),
            ModelKind::Svm => Model::Svm(Svm::fit(x, y, SvmParams::default())?),
        })
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            Model::Gnb(m) => m.predict_proba(x),
            Model::Rf(m) => m.predict_proba(x),
            Model::Svm(m) => m.decision_value(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub model: ModelKind,
    pub set: FeatureSet,
    pub seed: u64,
    pub n_instances: usize,
    /// Folds whose training split held a single class.
    pub skipped_folds: usize,
    pub threshold: f64,
    pub eval: EvalReport,
    /// Held-out score of every evaluated fold, in instance order.
    pub scores: Vec<ScoredItem>,
}

/// Leave-one-out cross-validation. Each fold refits the standardizer on its
/// training split; folds run in parallel but results follow instance order.
pub fn loocv(instances: &[LabeledInstance], kind: ModelKind, set: FeatureSet, seed: u64) -> Result<CvReport, MlError> {
    let n = instances.len();
    if n < 3 {
        return Err(MlError::TooFew { need: 3, got: n });
    }
    let x = instances.iter().map(|i| set.extract(&i.features)).collect::<Result<Vec<_>, _>>()?;
    let y: Vec<Label> = instances.iter().map(|i| i.label()).collect();
    check_training(&x, &y)?;

    let folds: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|held| {
            let train_y: Vec<Label> = (0..n).filter(|&i| i != held).map(|i| y[i]).collect();
            if train_y.iter().all(|&l| l == train_y[0]) {
                return Ok(None);
            }
            let raw: Vec<Vec<f64>> = (0..n).filter(|&i| i != held).map(|i| x[i].clone()).collect();
            let z = Standardizer::fit(&raw);
            let train_x: Vec<Vec<f64>> = raw.iter().map(|r| z.apply(r)).collect();
            let model = Model::fit(kind, set, &train_x, &train_y, derive_seed(seed, held as u64))?;
            Ok(Some(model.score(&z.apply(&x[held]))))
        })
        .collect::<Result<_, MlError>>()?;

    let mut scores = Vec::new();
    let mut skipped = 0;
    for (inst, s) in instances.iter().zip(&folds) {
        match s {
            Some(score) => {
                scores.push(ScoredItem { venue_id: inst.venue_id.clone(), score: *score, label: inst.label() })
            }
            None => skipped += 1,
        }
    }
    let threshold = kind.threshold();
    let predicted: Vec<bool> = scores.iter().map(|s| s.score > threshold).collect();
    let eval = EvalReport::with_predictions(&scores, &predicted)?;
    Ok(CvReport { model: kind, set, seed, n_instances: n, skipped_folds: skipped, threshold, eval, scores })
}
