//! Greedy CART regression trees.
//!
//! Each node picks the `(feature, threshold)` pair minimizing the summed
//! squared deviation of the two children from their means. Candidate
//! thresholds are midpoints between consecutive distinct sorted values of a
//! feature; a row goes left when `x[feature] <= threshold`. Equal-gain
//! candidates resolve to the lowest feature index, then the lowest
//! threshold. Growth stops at the depth cap, when a node cannot give both
//! children `min_leaf` rows, when its targets are constant, or when no
//! split lowers the squared error.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, IndexSet};
use crate::error::{DtbError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
        samples: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    max_depth: usize,
    min_leaf: usize,
    n_features: usize,
}

#[derive(Debug, Clone, Copy)]
struct BestSplit {
    feature: usize,
    threshold: f64,
    /// Reduction in summed squared error.
    gain: f64,
}

impl RegressionTree {
    pub fn fit(data: &Dataset, subset: &IndexSet, max_depth: usize, min_leaf: usize) -> Result<Self> {
        if subset.is_empty() {
            return Err(DtbError::data("cannot train a tree on an empty subset"));
        }
        if min_leaf == 0 {
            return Err(DtbError::config("min_leaf must be at least 1"));
        }
        if subset.len() < min_leaf {
            return Err(DtbError::config(format!(
                "subset of {} rows is smaller than min_leaf = {min_leaf}",
                subset.len()
            )));
        }
        if subset.parent_len() != data.len() {
            return Err(DtbError::data("training subset does not index this dataset"));
        }
        let mut tree = Self {
            nodes: Vec::new(),
            max_depth,
            min_leaf,
            n_features: data.n_features(),
        };
        let mut rows = subset.indices().to_vec();
        tree.grow(data, &mut rows, 0);
        Ok(tree)
    }

    fn grow(&mut self, data: &Dataset, rows: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let mean = rows.iter().map(|&r| data.y(r)).sum::<f64>() / rows.len() as f64;
        self.nodes.push(Node::Leaf {
            value: mean,
            samples: rows.len(),
        });

        if depth >= self.max_depth || rows.len() < 2 * self.min_leaf {
            return id;
        }
        let first = data.y(rows[0]);
        if rows.iter().all(|&r| data.y(r) == first) {
            return id;
        }
        let Some(best) = best_split(data, rows, self.min_leaf) else {
            return id;
        };

        let mut cut = 0;
        for i in 0..rows.len() {
            if data.x(rows[i])[best.feature] <= best.threshold {
                rows.swap(i, cut);
                cut += 1;
            }
        }
        let (left_rows, right_rows) = rows.split_at_mut(cut);
        left_rows.sort_unstable();
        right_rows.sort_unstable();
        let left = self.grow(data, left_rows, depth + 1);
        let right = self.grow(data, right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { value, .. } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// Index of the leaf `x` is routed to.
    pub fn leaf_of(&self, x: &[f64]) -> usize {
        let mut id = 0;
        while let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = self.nodes[id]
        {
            id = if x[feature] <= threshold { left } else { right };
        }
        id
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn min_leaf(&self) -> usize {
        self.min_leaf
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

/// Midpoint of two consecutive distinct values that still separates them.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

fn best_split(data: &Dataset, rows: &[usize], min_leaf: usize) -> Option<BestSplit> {
    let n = rows.len();
    // Centre targets for numerically stable prefix sums.
    let mean = rows.iter().map(|&r| data.y(r)).sum::<f64>() / n as f64;
    let total: f64 = rows.iter().map(|&r| data.y(r) - mean).sum();
    let base = total * total / n as f64;

    let mut best: Option<BestSplit> = None;
    let mut order: Vec<(f64, f64)> = Vec::with_capacity(n);
    for feature in 0..data.n_features() {
        order.clear();
        order.extend(rows.iter().map(|&r| (data.x(r)[feature], data.y(r) - mean)));
        order.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left_sum = 0.0;
        for k in 1..n {
            left_sum += order[k - 1].1;
            let (lo, hi) = (order[k - 1].0, order[k].0);
            if lo == hi || k < min_leaf || n - k < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let score = left_sum * left_sum / k as f64 + right_sum * right_sum / (n - k) as f64;
            let gain = score - base;
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(BestSplit {
                    feature,
                    threshold: midpoint(lo, hi),
                    gain,
                });
            }
        }
    }
    let sse: f64 = rows.iter().map(|&r| (data.y(r) - mean).powi(2)).sum();
    best.filter(|b| b.gain > 1e-12 * sse.max(f64::MIN_POSITIVE))
}
