//! CART classification tree grown on weighted rows with Gini impurity.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::seed::Rng;

const LEAF: u32 = u32::MAX;

/// A node is a leaf when `feature == u32::MAX`; then `left` is the offset of its
/// class fractions in [`Tree::leaf_values`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub feature: u32,
    pub threshold: f64,
    pub left: u32,
    pub right: u32,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.feature == LEAF
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
    leaf_values: Vec<f64>,
    classes: usize,
    /// Unnormalized mean-decrease-impurity per feature, scaled by root weight.
    importance: Vec<f64>,
}

pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_leaf: f64,
    pub features_per_split: usize,
}

struct Frame {
    start: usize,
    end: usize,
    depth: usize,
    /// index of the parent's child slot to patch, `None` for the root
    slot: Option<(usize, bool)>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn importance(&self) -> &[f64] {
        &self.importance
    }

    pub fn leaf_fractions(&self, node: &Node) -> &[f64] {
        let off = node.left as usize;
        &self.leaf_values[off..off + self.classes]
    }

    /// Class fractions of the leaf reached by `row`.
    #[inline]
    pub fn leaf_for(&self, row: &[f64]) -> &[f64] {
        let mut i = 0usize;
        loop {
            let n = &self.nodes[i];
            if n.feature == LEAF {
                let off = n.left as usize;
                return &self.leaf_values[off..off + self.classes];
            }
            i = if row[n.feature as usize] <= n.threshold {
                n.left as usize
            } else {
                n.right as usize
            };
        }
    }

    /// Grow a tree on rows with positive `weights` (bootstrap multiplicities).
    pub(crate) fn grow(
        x: &Matrix,
        y: &[usize],
        weights: &[f64],
        classes: usize,
        params: &GrowParams,
        rng: &mut Rng,
    ) -> Tree {
        let d = x.cols();
        let mut idx: Vec<usize> = (0..x.rows()).filter(|&i| weights[i] > 0.0).collect();
        let root_weight: f64 = idx.iter().map(|&i| weights[i]).sum();
        let mut tree = Tree {
            nodes: Vec::new(),
            leaf_values: Vec::new(),
            classes,
            importance: vec![0.0; d],
        };
        let mut features: Vec<usize> = (0..d).collect();
        let mut buf: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
        let mut counts = vec![0.0; classes];
        let mut left = vec![0.0; classes];
        let mut stack = vec![Frame {
            start: 0,
            end: idx.len(),
            depth: 0,
            slot: None,
        }];

        while let Some(frame) = stack.pop() {
            let node_id = tree.nodes.len();
            if let Some((parent, is_left)) = frame.slot {
                if is_left {
                    tree.nodes[parent].left = node_id as u32;
                } else {
                    tree.nodes[parent].right = node_id as u32;
                }
            }
            let rows = &mut idx[frame.start..frame.end];
            counts.iter_mut().for_each(|c| *c = 0.0);
            for &r in rows.iter() {
                counts[y[r]] += weights[r];
            }
            let total: f64 = counts.iter().sum();
            let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
            let depth_capped = params.max_depth.is_some_and(|m| frame.depth >= m);

            let split = if pure || depth_capped || total < 2.0 * params.min_leaf {
                None
            } else {
                best_split(
                    x,
                    y,
                    weights,
                    rows,
                    &counts,
                    total,
                    params,
                    &mut features,
                    &mut buf,
                    &mut left,
                    rng,
                )
            };

            match split {
                None => {
                    let off = tree.leaf_values.len();
                    if total > 0.0 {
                        tree.leaf_values.extend(counts.iter().map(|c| c / total));
                    } else {
                        tree.leaf_values
                            .extend(std::iter::repeat_n(1.0 / classes as f64, classes));
                    }
                    tree.nodes.push(Node {
                        feature: LEAF,
                        threshold: 0.0,
                        left: off as u32,
                        right: 0,
                    });
                }
                Some(s) => {
                    tree.importance[s.feature] += s.decrease / root_weight;
                    tree.nodes.push(Node {
                        feature: s.feature as u32,
                        threshold: s.threshold,
                        left: 0,
                        right: 0,
                    });
                    // partition rows in place: left side first
                    let mut mid = 0;
                    for k in 0..rows.len() {
                        if x.get(rows[k], s.feature) <= s.threshold {
                            rows.swap(mid, k);
                            mid += 1;
                        }
                    }
                    let mid = frame.start + mid;
                    // right pushed first so the left subtree is laid out next
                    stack.push(Frame {
                        start: mid,
                        end: frame.end,
                        depth: frame.depth + 1,
                        slot: Some((node_id, false)),
                    });
                    stack.push(Frame {
                        start: frame.start,
                        end: mid,
                        depth: frame.depth + 1,
                        slot: Some((node_id, true)),
                    });
                }
            }
        }
        tree
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum()
}

/// Best Gini split over up to `features_per_split` randomly drawn features.
/// Features that are constant in the node do not count toward the quota.
#[allow(clippy::too_many_arguments)]
fn best_split(
    x: &Matrix,
    y: &[usize],
    weights: &[f64],
    rows: &[usize],
    counts: &[f64],
    total: f64,
    params: &GrowParams,
    features: &mut [usize],
    buf: &mut Vec<(f64, usize)>,
    left: &mut [f64],
    rng: &mut Rng,
) -> Option<Split> {
    let d = features.len();
    let total_sq = sum_sq(counts);
    // weighted impurity of the node is total - total_sq / total
    let node_score = total_sq / total;
    let mut best: Option<(f64, usize, f64)> = None;
    let mut informative_seen = 0;
    let mut drawn = 0;

    while drawn < d && informative_seen < params.features_per_split {
        let pick = rng.random_range(drawn..d);
        features.swap(drawn, pick);
        let f = features[drawn];
        drawn += 1;

        buf.clear();
        buf.extend(rows.iter().map(|&r| (x.get(r, f), r)));
        buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        if buf[0].0 == buf[buf.len() - 1].0 {
            continue;
        }
        informative_seen += 1;

        left.iter_mut().for_each(|c| *c = 0.0);
        let mut lw = 0.0;
        let mut lsq = 0.0;
        let mut rsq = total_sq;
        for p in 0..buf.len() - 1 {
            let (v, r) = buf[p];
            let w = weights[r];
            let k = y[r];
            let right_k = counts[k] - left[k];
            lsq += 2.0 * left[k] * w + w * w;
            rsq += -2.0 * right_k * w + w * w;
            left[k] += w;
            lw += w;
            let next = buf[p + 1].0;
            if v == next {
                continue;
            }
            let rw = total - lw;
            if lw < params.min_leaf || rw < params.min_leaf {
                continue;
            }
            let score = lsq / lw + rsq / rw;
            if best.is_none_or(|(s, _, _)| score > s + 1e-12) {
                let mut t = 0.5 * (v + next);
                if t >= next {
                    t = v;
                }
                best = Some((score, f, t));
            }
        }
    }

    best.map(|(score, feature, threshold)| Split {
        feature,
        threshold,
        decrease: (score - node_score).max(0.0),
    })
}
