//! C4.5-style decision tree on numeric features.
//!
//! Binary threshold splits chosen by gain ratio, no pruning, no missing-value
//! handling.

use crate::data::Matrix;
use crate::error::{Error, Result};

const GAIN_EPS: f64 = 1e-12;

/// Best binary split of a single numeric feature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Split {
    pub threshold: f64,
    pub ratio: f64,
    pub gain: f64,
}

/// Best gain-ratio threshold for one feature, or `None` when the values are
/// constant or no threshold reduces entropy.
pub fn gain_ratio_split(values: &[f64], labels: &[usize]) -> Option<Split> {
    let class_count = labels.iter().max().map_or(0, |&m| m + 1);
    let mut order: Vec<usize> = (0..values.len()).collect();
    best_split_sorted(values, labels, class_count, &mut order, 1)
}

fn entropy(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let q = c as f64 / n;
            -q * q.log2()
        })
        .sum()
}

/// `order` is scratch space holding the instance indices to consider; it is
/// sorted in place. Children must each hold at least `min_leaf` instances.
fn best_split_sorted(
    values: &[f64],
    labels: &[usize],
    class_count: usize,
    order: &mut [usize],
    min_leaf: usize,
) -> Option<Split> {
    let n = order.len();
    if n < 2 * min_leaf.max(1) {
        return None;
    }
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut total = vec![0usize; class_count];
    for &i in order.iter() {
        total[labels[i]] += 1;
    }
    let parent = entropy(&total, n);
    if parent <= GAIN_EPS {
        return None;
    }

    let mut left = vec![0usize; class_count];
    let mut right = total;
    let mut best: Option<Split> = None;
    for pos in 0..n - 1 {
        let i = order[pos];
        left[labels[i]] += 1;
        right[labels[i]] -= 1;
        let (v, next) = (values[i], values[order[pos + 1]]);
        if v >= next {
            continue;
        }
        let nl = pos + 1;
        let nr = n - nl;
        if nl < min_leaf || nr < min_leaf {
            continue;
        }
        let (fl, fr) = (nl as f64 / n as f64, nr as f64 / n as f64);
        let gain = parent - fl * entropy(&left, nl) - fr * entropy(&right, nr);
        if gain <= GAIN_EPS {
            continue;
        }
        let split_info = -(fl * fl.log2() + fr * fr.log2());
        let ratio = gain / split_info;
        if best.is_none_or(|b| ratio > b.ratio) {
            // Adjacent floats can round the midpoint up onto `next`.
            let mid = 0.5 * (v + next);
            best = Some(Split {
                threshold: if mid < next { mid } else { v },
                ratio,
                gain,
            });
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct TreeParams {
    /// Minimum number of training instances in each child of a split.
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { min_leaf: 2 }
    }
}

#[derive(Clone, Debug)]
pub struct Leaf {
    pub class: usize,
    pub counts: Vec<usize>,
}

impl Leaf {
    fn from_counts(counts: Vec<usize>) -> Self {
        let mut class = 0;
        for (c, &k) in counts.iter().enumerate() {
            if k > counts[class] {
                class = c;
            }
        }
        Self { class, counts }
    }

    pub fn class_fraction(&self, class: usize) -> f64 {
        let total: usize = self.counts.iter().sum();
        if total == 0 || class >= self.counts.len() {
            0.0
        } else {
            self.counts[class] as f64 / total as f64
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(Leaf),
    Branch {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Fitted tree stored as an arena; node 0 is the root. Rows with
/// `x[feature] <= threshold` go left.
#[derive(Clone, Debug)]
pub struct TreeModel {
    nodes: Vec<Node>,
}

impl TreeModel {
    pub fn fit(x: &Matrix, y: &[usize], class_count: usize, params: &TreeParams) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::Classifier("empty training partition".into()));
        }
        let mut tree = TreeModel { nodes: Vec::new() };
        let columns: Vec<Vec<f64>> = (0..x.cols()).map(|j| x.column(j)).collect();
        let rows: Vec<usize> = (0..x.rows()).collect();
        tree.grow(&columns, y, class_count, rows, params);
        Ok(tree)
    }

    fn grow(
        &mut self,
        columns: &[Vec<f64>],
        y: &[usize],
        class_count: usize,
        rows: Vec<usize>,
        params: &TreeParams,
    ) -> usize {
        let id = self.nodes.len();
        let mut counts = vec![0usize; class_count];
        for &r in &rows {
            counts[y[r]] += 1;
        }
        self.nodes.push(Node::Leaf(Leaf::from_counts(counts.clone())));

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || rows.len() < 2 {
            return id;
        }

        // Per-feature best thresholds, then C4.5's rule: among candidates
        // whose gain is at least the average gain, take the best ratio.
        let mut scratch = rows.clone();
        let candidates: Vec<(usize, Split)> = columns
            .iter()
            .enumerate()
            .filter_map(|(j, col)| {
                scratch.copy_from_slice(&rows);
                best_split_sorted(col, y, class_count, &mut scratch, params.min_leaf).map(|s| (j, s))
            })
            .collect();
        if candidates.is_empty() {
            return id;
        }
        let mean_gain = candidates.iter().map(|(_, s)| s.gain).sum::<f64>() / candidates.len() as f64;
        let mut chosen: Option<(usize, Split)> = None;
        for &(j, s) in &candidates {
            if s.gain + GAIN_EPS < mean_gain {
                continue;
            }
            if chosen.is_none_or(|(_, b)| s.ratio > b.ratio) {
                chosen = Some((j, s));
            }
        }
        let Some((feature, split)) = chosen else {
            return id;
        };

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| columns[feature][r] <= split.threshold);
        if left_rows.is_empty() || right_rows.is_empty() {
            return id;
        }
        let left = self.grow(columns, y, class_count, left_rows, params);
        let right = self.grow(columns, y, class_count, right_rows, params);
        self.nodes[id] = Node::Branch {
            feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    pub fn leaf_for(&self, row: &[f64]) -> &Leaf {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf(leaf) => return leaf,
                Node::Branch {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict(&self, x: &Matrix) -> Vec<usize> {
        (0..x.rows()).map(|i| self.leaf_for(x.row(i)).class).collect()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}
