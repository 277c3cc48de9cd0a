//! C-SVC with an RBF kernel, trained by SMO with second-order working set
//! selection and a full precomputed kernel matrix.

use super::{check_training, MlError};
use crate::returns::Label;

const TAU: f64 = 1e-12;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    /// `None` picks `1 / (d * variance of all training entries)`.
    pub gamma: Option<f64>,
    pub tolerance: f64,
    /// `None` uses `max(100_000, 100 n)`.
    pub max_iter: Option<usize>,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self { c: 1.0, gamma: None, tolerance: DEFAULT_TOLERANCE, max_iter: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Svm {
    support: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    coef: Vec<f64>,
    rho: f64,
    gamma: f64,
    iterations: usize,
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// `1 / (d * var)` over every entry of `x`, or `1 / d` when the entries are constant.
pub fn default_gamma(x: &[Vec<f64>]) -> f64 {
    let d = x[0].len() as f64;
    let all: Vec<f64> = x.iter().flatten().copied().collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let var = all.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / all.len() as f64;
    if var > 0.0 {
        1.0 / (d * var)
    } else {
        1.0 / d
    }
}

impl Svm {
    pub fn fit(x: &[Vec<f64>], y: &[Label], params: SvmParams) -> Result<Self, MlError> {
        check_training(x, y)?;
        if params.c.is_nan() || params.c <= 0.0 {
            return Err(MlError::InvalidParam(format!("C must be positive, got {}", params.c)));
        }
        let gamma = params.gamma.unwrap_or_else(|| default_gamma(x));
        let n = x.len();
        let c = params.c;
        let ys: Vec<f64> = y.iter().map(|l| f64::from(l.sign())).collect();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rbf(gamma, &x[i], &x[j]);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        let kk = |i: usize, j: usize| k[i * n + j];

        let mut alpha = vec![0.0; n];
        let mut grad = vec![-1.0; n];
        let max_iter = params.max_iter.unwrap_or((100 * n).max(100_000));
        let is_upper = |a: f64| a >= c;
        let is_lower = |a: f64| a <= 0.0;
        let mut iter = 0usize;
        loop {
            // i: maximal violator in I_up
            let mut gmax = f64::NEG_INFINITY;
            let mut i_sel = None;
            for t in 0..n {
                let in_up = if ys[t] > 0.0 { !is_upper(alpha[t]) } else { !is_lower(alpha[t]) };
                if in_up && -ys[t] * grad[t] >= gmax {
                    gmax = -ys[t] * grad[t];
                    i_sel = Some(t);
                }
            }
            // j: second-order choice in I_low
            let mut gmax2 = f64::NEG_INFINITY;
            let mut j_sel = None;
            let mut obj_min = f64::INFINITY;
            if let Some(i) = i_sel {
                for t in 0..n {
                    let in_low = if ys[t] > 0.0 { !is_lower(alpha[t]) } else { !is_upper(alpha[t]) };
                    if !in_low {
                        continue;
                    }
                    let yg = ys[t] * grad[t];
                    gmax2 = gmax2.max(yg);
                    let b = gmax + yg;
                    if b > 0.0 {
                        let a = kk(i, i) + kk(t, t) - 2.0 * kk(i, t);
                        let obj = -(b * b) / if a > 0.0 { a } else { TAU };
                        if obj <= obj_min {
                            obj_min = obj;
                            j_sel = Some(t);
                        }
                    }
                }
            }
            let (Some(i), Some(j)) = (i_sel, j_sel) else { break };
            if gmax + gmax2 < params.tolerance {
                break;
            }
            if iter >= max_iter {
                return Err(MlError::NotConverged { iterations: iter });
            }
            iter += 1;

            let (old_i, old_j) = (alpha[i], alpha[j]);
            let qij = ys[i] * ys[j] * kk(i, j);
            let (mut ai, mut aj) = (old_i, old_j);
            if ys[i] != ys[j] {
                let quad = {
                    let q = kk(i, i) + kk(j, j) + 2.0 * qij;
                    if q > 0.0 {
                        q
                    } else {
                        TAU
                    }
                };
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = ai - aj;
                ai += delta;
                aj += delta;
                if diff > 0.0 {
                    if aj < 0.0 {
                        aj = 0.0;
                        ai = diff;
                    }
                } else if ai < 0.0 {
                    ai = 0.0;
                    aj = -diff;
                }
                if diff > 0.0 {
                    if ai > c {
                        ai = c;
                        aj = c - diff;
                    }
                } else if aj > c {
                    aj = c;
                    ai = c + diff;
                }
            } else {
                let quad = {
                    let q = kk(i, i) + kk(j, j) - 2.0 * qij;
                    if q > 0.0 {
                        q
                    } else {
                        TAU
                    }
                };
                let delta = (grad[i] - grad[j]) / quad;
                let sum = ai + aj;
                ai -= delta;
                aj += delta;
                if sum > c {
                    if ai > c {
                        ai = c;
                        aj = sum - c;
                    }
                } else if aj < 0.0 {
                    aj = 0.0;
                    ai = sum;
                }
                if sum > c {
                    if aj > c {
                        aj = c;
                        ai = sum - c;
                    }
                } else if ai < 0.0 {
                    ai = 0.0;
                    aj = sum;
                }
            }
            alpha[i] = ai;
            alpha[j] = aj;
            let (di, dj) = (ai - old_i, aj - old_j);
            for t in 0..n {
                grad[t] += ys[t] * (ys[i] * kk(i, t) * di + ys[j] * kk(j, t) * dj);
            }
        }

        // bias from free vectors, else the midpoint of the feasible interval
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut sum_free) = (0usize, 0.0);
        for t in 0..n {
            let yg = ys[t] * grad[t];
            if is_upper(alpha[t]) {
                if ys[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if is_lower(alpha[t]) {
                if ys[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum_free += yg;
            }
        }
        let rho = if free > 0 { sum_free / free as f64 } else { (ub + lb) / 2.0 };

        let mut support = Vec::new();
        let mut coef = Vec::new();
        for t in 0..n {
            if alpha[t] > 0.0 {
                support.push(x[t].clone());
                coef.push(alpha[t] * ys[t]);
            }
        }
        Ok(Self { support, coef, rho, gamma, iterations: iter })
    }

    /// Signed distance-like score; positive predicts the positive class.
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.support.iter().zip(&self.coef).map(|(s, &c)| c * rbf(self.gamma, s, x)).sum::<f64>() - self.rho
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn support_count(&self) -> usize {
        self.support.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}
