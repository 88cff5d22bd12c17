//! CART classification tree with Gini impurity, grown breadth-first up to
//! a maximum number of splits.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::features::FeatureMatrix;
use crate::record::ClassLabel;
use crate::scalar::Scalar;

/// Nodes with fewer rows than this are not split.
pub const MIN_PARENT_SIZE: usize = 10;

const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node<T> {
    Leaf { label: ClassLabel, counts: [usize; 3] },
    Split { feature: usize, threshold: T, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree<T> {
    pub max_splits: usize,
    pub nodes: Vec<Node<T>>,
}

fn majority(counts: &[usize; 3]) -> ClassLabel {
    // Strict comparison keeps the smallest label on ties.
    let mut best = 0;
    for k in 1..3 {
        if counts[k] > counts[best] {
            best = k;
        }
    }
    ClassLabel::from_index(best)
}

fn gini(counts: &[usize; 3], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

struct Candidate<T> {
    feature: usize,
    threshold: T,
    gain: f64,
    split_at: usize,
    sorted: Vec<usize>,
}

impl<T: Scalar> DecisionTree<T> {
    pub fn fit(data: &FeatureMatrix<T>, max_splits: usize) -> Self {
        let counts_of = |idx: &[usize]| {
            let mut c = [0usize; 3];
            for &i in idx {
                c[data.labels[i].index()] += 1;
            }
            c
        };
        let all: Vec<usize> = (0..data.rows()).collect();
        let root_counts = counts_of(&all);
        let mut nodes = vec![Node::Leaf { label: majority(&root_counts), counts: root_counts }];
        let mut queue: VecDeque<(usize, Vec<usize>)> = VecDeque::from([(0, all)]);
        let mut splits = 0;

        while splits < max_splits {
            let Some((node_id, idx)) = queue.pop_front() else { break };
            let counts = counts_of(&idx);
            if idx.len() < MIN_PARENT_SIZE || counts.iter().filter(|&&c| c > 0).count() < 2 {
                continue;
            }
            let Some(best) = best_split(data, &idx, &counts) else { continue };
            let (left_idx, right_idx) = best.sorted.split_at(best.split_at);
            let left_idx = left_idx.to_vec();
            let right_idx = right_idx.to_vec();
            let lc = counts_of(&left_idx);
            let rc = counts_of(&right_idx);
            let left = nodes.len();
            nodes.push(Node::Leaf { label: majority(&lc), counts: lc });
            let right = nodes.len();
            nodes.push(Node::Leaf { label: majority(&rc), counts: rc });
            nodes[node_id] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
            queue.push_back((left, left_idx));
            queue.push_back((right, right_idx));
            splits += 1;
        }
        DecisionTree { max_splits, nodes }
    }

    pub fn split_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Split { .. })).count()
    }

    pub fn predict_row(&self, row: &[T]) -> ClassLabel {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { label, .. } => return *label,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] < *threshold { *left } else { *right };
                }
            }
        }
    }
}

/// Best Gini split; ties go to the lowest feature index, then the lowest
/// threshold.
fn best_split<T: Scalar>(data: &FeatureMatrix<T>, idx: &[usize], counts: &[usize; 3]) -> Option<Candidate<T>> {
    let n = idx.len();
    let parent = gini(counts, n);
    let mut best: Option<Candidate<T>> = None;
    for feature in 0..data.cols() {
        let value = |i: usize| data.values[i * data.cols() + feature];
        let mut sorted = idx.to_vec();
        sorted.sort_by(|&a, &b| value(a).partial_cmp(&value(b)).unwrap().then(a.cmp(&b)));
        let mut left = [0usize; 3];
        let mut found: Option<(f64, usize)> = None;
        for pos in 1..n {
            left[data.labels[sorted[pos - 1]].index()] += 1;
            let (lo, hi) = (value(sorted[pos - 1]), value(sorted[pos]));
            if !(lo < hi) {
                continue;
            }
            let right = [counts[0] - left[0], counts[1] - left[1], counts[2] - left[2]];
            let child = (pos as f64 * gini(&left, pos) + (n - pos) as f64 * gini(&right, n - pos)) / n as f64;
            let gain = parent - child;
            if found.map_or(true, |(g, _)| gain > g + GAIN_EPS) {
                found = Some((gain, pos));
            }
        }
        if let Some((gain, pos)) = found {
            if gain > GAIN_EPS && best.as_ref().map_or(true, |b| gain > b.gain + GAIN_EPS) {
                let two = T::one() + T::one();
                let threshold = (value(sorted[pos - 1]) + value(sorted[pos])) / two;
                best = Some(Candidate { feature, threshold, gain, split_at: pos, sorted });
            }
        }
    }
    best
}
