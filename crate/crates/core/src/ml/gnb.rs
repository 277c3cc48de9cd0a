use super::{check_training, MlError};
use crate::returns::Label;

pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with per-class MLE moments.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNb {
    /// Index 0 is the negative class, 1 the positive class.
    mean: [Vec<f64>; 2],
    var: [Vec<f64>; 2],
    log_prior: [f64; 2],
}

impl GaussianNb {
    pub fn fit(x: &[Vec<f64>], y: &[Label]) -> Result<Self, MlError> {
        let d = check_training(x, y)?;
        let mut mean = [vec![0.0; d], vec![0.0; d]];
        let mut var = [vec![0.0; d], vec![0.0; d]];
        let mut count = [0usize; 2];
        for (row, l) in x.iter().zip(y) {
            let c = usize::from(l.is_positive());
            count[c] += 1;
            for (m, v) in mean[c].iter_mut().zip(row) {
                *m += v;
            }
        }
        for c in 0..2 {
            for m in &mut mean[c] {
                *m /= count[c] as f64;
            }
        }
        for (row, l) in x.iter().zip(y) {
            let c = usize::from(l.is_positive());
            for j in 0..d {
                var[c][j] += (row[j] - mean[c][j]).powi(2);
            }
        }
        for c in 0..2 {
            for v in &mut var[c] {
                *v = (*v / count[c] as f64).max(VARIANCE_FLOOR);
            }
        }
        let n = y.len() as f64;
        let log_prior = [(count[0] as f64 / n).ln(), (count[1] as f64 / n).ln()];
        Ok(Self { mean, var, log_prior })
    }

    fn log_joint(&self, c: usize, x: &[f64]) -> f64 {
        let ll: f64 = x
            .iter()
            .zip(&self.mean[c])
            .zip(&self.var[c])
            .map(|((&xi, &m), &v)| -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (xi - m).powi(2) / v))
            .sum();
        self.log_prior[c] + ll
    }

    /// Posterior probability of the positive class.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let diff = self.log_joint(0, x) - self.log_joint(1, x);
        1.0 / (1.0 + diff.exp())
    }
}
