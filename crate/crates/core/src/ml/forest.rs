use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_training, derive_seed, MlError};
use crate::returns::Label;

pub const DEFAULT_TREES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// CART tree grown on Gini impurity until nodes are pure or hold fewer
/// than two samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    /// Bootstrap rows; nodes hold positions into this list.
    sample: Vec<usize>,
    m: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    /// `order[f]` holds sample positions; each node owns one range of every
    /// list, sorted by that feature.
    order: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

impl Grower<'_> {
    fn value(&self, pos: u32, f: usize) -> f64 {
        self.x[self.sample[pos as usize]][f]
    }

    fn label(&self, pos: u32) -> bool {
        self.y[self.sample[pos as usize]]
    }

    /// Best `(weighted impurity, threshold)` over one feature, given the
    /// node's positions sorted by that feature.
    fn best_on(&self, sorted: &[u32], f: usize, total_pos: usize) -> Option<(f64, f64)> {
        let n = sorted.len();
        let mut left_pos = 0usize;
        let mut best: Option<(f64, f64)> = None;
        for i in 0..n - 1 {
            left_pos += usize::from(self.label(sorted[i]));
            let (a, b) = (self.value(sorted[i], f), self.value(sorted[i + 1], f));
            if a == b {
                continue;
            }
            let nl = i + 1;
            let score = nl as f64 * gini(left_pos, nl) + (n - nl) as f64 * gini(total_pos - left_pos, n - nl);
            if best.is_none_or(|(s, _)| score < s) {
                let mut mid = a + (b - a) / 2.0;
                if mid >= b {
                    // adjacent floats
                    mid = a;
                }
                best = Some((score, mid));
            }
        }
        best
    }

    fn grow(&mut self, lo: usize, hi: usize) -> usize {
        let size = hi - lo;
        let pos = self.order[0][lo..hi].iter().filter(|&&p| self.label(p)).count();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(pos as f64 / size as f64));
        if size < 2 || pos == 0 || pos == size {
            return id;
        }
        let d = self.order.len();
        let mut features: Vec<usize> = (0..d).collect();
        features.shuffle(&mut self.rng);
        let mut best: Option<(f64, usize, f64)> = None;
        // Keep drawing past m only while no candidate feature can split.
        for (tried, &f) in features.iter().enumerate() {
            if tried >= self.m && best.is_some() {
                break;
            }
            if let Some((s, thr)) = self.best_on(&self.order[f][lo..hi], f, pos) {
                if best.is_none_or(|(b, _, _)| s < b) {
                    best = Some((s, f, thr));
                }
            }
        }
        let Some((_, feature, threshold)) = best else { return id };
        let mut n_left = 0;
        for i in lo..hi {
            let p = self.order[0][i];
            let left = self.value(p, feature) <= threshold;
            self.goes_left[p as usize] = left;
            n_left += usize::from(left);
        }
        for f in 0..d {
            self.scratch.clear();
            let list = &mut self.order[f];
            let mut w = lo;
            for i in lo..hi {
                let p = list[i];
                if self.goes_left[p as usize] {
                    list[w] = p;
                    w += 1;
                } else {
                    self.scratch.push(p);
                }
            }
            list[w..hi].copy_from_slice(&self.scratch);
        }
        let mid = lo + n_left;
        let l = self.grow(lo, mid);
        let r = self.grow(mid, hi);
        self.nodes[id] = Node::Split { feature, threshold, left: l, right: r };
        id
    }
}

impl Tree {
    /// Grows a tree on the rows listed in `sample` (repeats allowed).
    pub fn fit(x: &[Vec<f64>], y: &[bool], sample: Vec<usize>, m: usize, rng: ChaCha8Rng) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let order: Vec<Vec<u32>> = (0..d)
            .map(|f| {
                let mut l: Vec<u32> = (0..sample.len() as u32).collect();
                l.sort_by(|&a, &b| x[sample[a as usize]][f].total_cmp(&x[sample[b as usize]][f]));
                l
            })
            .collect();
        let goes_left = vec![false; sample.len()];
        let n = sample.len();
        let mut g =
            Grower { x, y, sample, m, rng, nodes: Vec::new(), order, goes_left, scratch: Vec::with_capacity(n) };
        g.grow(0, n);
        Tree { nodes: g.nodes }
    }

    /// Positive fraction of the training samples in the leaf reached by `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(p) => return p,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<Tree>,
}

impl RandomForest {
    /// Bagged trees with `m` candidate features per split. Tree `t` draws
    /// from its own stream derived from `seed`, so results do not depend
    /// on scheduling.
    pub fn fit(x: &[Vec<f64>], y: &[Label], n_trees: usize, m: usize, seed: u64) -> Result<Self, MlError> {
        let d = check_training(x, y)?;
        if m == 0 || m > d {
            return Err(MlError::InvalidParam(format!("m_features = {m} with {d} features")));
        }
        if n_trees == 0 {
            return Err(MlError::InvalidParam("n_trees must be positive".into()));
        }
        let yb: Vec<bool> = y.iter().map(|l| l.is_positive()).collect();
        let n = x.len();
        let trees = (0..n_trees)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
                let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                Tree::fit(x, &yb, sample, m, rng)
            })
            .collect();
        Ok(Self { trees })
    }

    /// Mean leaf positive fraction across trees.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }
}
