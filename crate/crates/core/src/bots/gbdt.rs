//! Gradient boosted regression trees on the logistic loss.
//!
//! Each round fits a least-squares regression tree to the residuals
//! `y - p` with exact greedy splits, then sets every leaf to its Newton
//! step `sum(r) / sum(p(1-p))` scaled by the learning rate. A leaf step
//! that would raise that leaf's loss is halved until it does not.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            rounds: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// A regression tree stored as a flat node list; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    fn leaf_of(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Best least-squares split of `idx` on residuals, or `None` when no split helps.
fn best_split(rows: &[Vec<f64>], resid: &[f64], idx: &[usize], min_leaf: usize) -> Option<SplitChoice> {
    let n = idx.len();
    let total: f64 = idx.iter().map(|&i| resid[i]).sum();
    let base = total * total / n as f64;
    let mut best: Option<SplitChoice> = None;
    let n_features = rows[idx[0]].len();
    let mut order = idx.to_vec();
    for f in 0..n_features {
        order.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]).then(a.cmp(&b)));
        let mut left_sum = 0.0;
        for pos in 0..n - 1 {
            left_sum += resid[order[pos]];
            let (lo, hi) = (rows[order[pos]][f], rows[order[pos + 1]][f]);
            if lo == hi {
                continue;
            }
            let n_left = pos + 1;
            let n_right = n - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / n_left as f64 + right_sum * right_sum / n_right as f64 - base;
            if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(SplitChoice {
                    feature: f,
                    threshold: lo + (hi - lo) / 2.0,
                    gain,
                });
            }
        }
    }
    best
}

fn grow(
    rows: &[Vec<f64>],
    resid: &[f64],
    idx: Vec<usize>,
    depth: usize,
    params: &GbdtParams,
    nodes: &mut Vec<Node>,
) -> usize {
    let me = nodes.len();
    nodes.push(Node::Leaf { value: 0.0 });
    if depth >= params.max_depth || idx.len() < 2 * params.min_samples_leaf.max(1) {
        return me;
    }
    let Some(split) = best_split(rows, resid, &idx, params.min_samples_leaf.max(1)) else {
        return me;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx
        .into_iter()
        .partition(|&i| rows[i][split.feature] <= split.threshold);
    let left = grow(rows, resid, l, depth + 1, params, nodes);
    let right = grow(rows, resid, r, depth + 1, params, nodes);
    nodes[me] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    me
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Logistic loss of one sample with label `y` in {0, 1} at raw score `f`.
fn log_loss(y: f64, f: f64) -> f64 {
    // log(1 + e^f) - y f, written to avoid overflow
    let softplus = if f > 0.0 {
        f + (-f).exp().ln_1p()
    } else {
        f.exp().ln_1p()
    };
    softplus - y * f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedTrees {
    pub params: GbdtParams,
    pub base_score: f64,
    pub trees: Vec<Tree>,
    /// Mean training loss before the first round and after each round.
    pub train_loss: Vec<f64>,
}

impl BoostedTrees {
    /// Fits on rows with targets in {0, 1}; both classes must be present.
    pub fn fit(rows: &[Vec<f64>], targets: &[f64], params: &GbdtParams) -> BoostedTrees {
        let n = rows.len();
        let pos = targets.iter().sum::<f64>() / n as f64;
        let base_score = (pos / (1.0 - pos)).ln();
        let mut scores = vec![base_score; n];
        let mean_loss =
            |scores: &[f64]| targets.iter().zip(scores).map(|(&y, &f)| log_loss(y, f)).sum::<f64>() / n as f64;
        let mut train_loss = vec![mean_loss(&scores)];
        let mut trees = Vec::with_capacity(params.rounds);

        for _ in 0..params.rounds {
            let probs: Vec<f64> = scores.iter().map(|&f| sigmoid(f)).collect();
            let resid: Vec<f64> = targets.iter().zip(&probs).map(|(y, p)| y - p).collect();
            let mut nodes = Vec::new();
            grow(rows, &resid, (0..n).collect(), 0, params, &mut nodes);
            let mut tree = Tree { nodes };

            let mut members: Vec<Vec<usize>> = vec![Vec::new(); tree.nodes.len()];
            for (i, row) in rows.iter().enumerate() {
                members[tree.leaf_of(row)].push(i);
            }
            for (leaf, idx) in members.iter().enumerate() {
                if idx.is_empty() {
                    continue;
                }
                let g: f64 = idx.iter().map(|&i| resid[i]).sum();
                let h: f64 = idx.iter().map(|&i| probs[i] * (1.0 - probs[i])).sum();
                let mut step = if h > 1e-12 { params.learning_rate * g / h } else { 0.0 };
                let leaf_loss = |delta: f64| {
                    idx.iter()
                        .map(|&i| log_loss(targets[i], scores[i] + delta))
                        .sum::<f64>()
                };
                let before = leaf_loss(0.0);
                let mut halvings = 0;
                while step != 0.0 && leaf_loss(step) > before {
                    step /= 2.0;
                    halvings += 1;
                    if halvings > 50 {
                        step = 0.0;
                    }
                }
                tree.nodes[leaf] = Node::Leaf { value: step };
                for &i in idx {
                    scores[i] += step;
                }
            }
            train_loss.push(mean_loss(&scores));
            trees.push(tree);
        }
        BoostedTrees {
            params: params.clone(),
            base_score,
            trees,
            train_loss,
        }
    }

    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score(row))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_stump_separates() {
        let rows: Vec<Vec<f64>> = (-5..5).map(|x| vec![f64::from(x)]).collect();
        let y: Vec<f64> = (-5..5).map(|x| if x >= 0 { 1.0 } else { 0.0 }).collect();
        let m = BoostedTrees::fit(&rows, &y, &GbdtParams::default());
        for (r, t) in rows.iter().zip(&y) {
            assert_eq!(m.probability(r) >= 0.5, *t == 1.0);
        }
        match &m.trees[0].nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(*threshold, -0.5),
            n => panic!("expected split, got {n:?}"),
        }
    }

    #[test]
    fn constant_rows_give_prior() {
        let rows = vec![vec![1.0, 2.0]; 10];
        let y = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let m = BoostedTrees::fit(&rows, &y, &GbdtParams::default());
        assert!((m.probability(&rows[0]) - 0.7).abs() < 1e-9);
        assert!(m.trees.iter().all(|t| t.nodes.len() == 1));
    }

    #[test]
    fn depth_is_bounded() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![f64::from(i), f64::from(i % 7)]).collect();
        let y: Vec<f64> = (0..64).map(|i| f64::from((i * 37 % 5 == 0) as u8)).collect();
        let params = GbdtParams {
            rounds: 5,
            max_depth: 2,
            ..GbdtParams::default()
        };
        let m = BoostedTrees::fit(&rows, &y, &params);
        for t in &m.trees {
            assert!(t.nodes.len() <= 7);
        }
    }

    proptest! {
        #[test]
        fn training_loss_never_increases(
            data in prop::collection::vec((0u8..5, 0u8..3, prop::bool::ANY), 4..60),
        ) {
            let rows: Vec<Vec<f64>> = data.iter().map(|&(a, b, _)| vec![f64::from(a), f64::from(b)]).collect();
            let mut y: Vec<f64> = data.iter().map(|&(_, _, c)| f64::from(c as u8)).collect();
            y[0] = 0.0;
            y[1] = 1.0;
            let params = GbdtParams { rounds: 30, ..GbdtParams::default() };
            let m = BoostedTrees::fit(&rows, &y, &params);
            for w in m.train_loss.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", m.train_loss);
            }
        }
    }
}
