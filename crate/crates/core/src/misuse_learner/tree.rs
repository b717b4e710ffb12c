use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, Normal};

use super::{LearnError, LearnerParams};
use crate::feature_rank::entropy;
use crate::kdd_data::{AttackClass, Dataset, FeatureKind};

pub(crate) const K: usize = AttackClass::COUNT;
pub type ClassDist = [usize; K];

/// Column-major view of a training set.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub nominal: Vec<bool>,
    pub cols: Vec<Vec<f64>>,
    pub classes: Vec<AttackClass>,
}

impl FeatureMatrix {
    pub fn from_dataset(ds: &Dataset) -> Self {
        let schema = ds.schema();
        let cols = (0..schema.len())
            .map(|f| ds.records().iter().map(|r| r.values()[f]).collect())
            .collect();
        FeatureMatrix {
            names: schema.names().map(str::to_string).collect(),
            nominal: schema
                .features()
                .iter()
                .map(|f| f.kind == FeatureKind::Nominal)
                .collect(),
            cols,
            classes: ds.classes().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn dist(&self, rows: &[u32]) -> ClassDist {
        let mut d = [0; K];
        for &r in rows {
            d[self.classes[r as usize].index()] += 1;
        }
        d
    }
}

/// Majority class; ties go to the class with more training instances overall,
/// then to the earlier class.
#[derive(Debug, Clone, Copy)]
pub struct ClassOrder {
    global: ClassDist,
}

impl ClassOrder {
    pub fn new(global: ClassDist) -> Self {
        ClassOrder { global }
    }

    pub fn majority(&self, dist: &ClassDist) -> AttackClass {
        let best = (0..K)
            .max_by(|&a, &b| {
                dist[a]
                    .cmp(&dist[b])
                    .then(self.global[a].cmp(&self.global[b]))
                    .then(b.cmp(&a))
            })
            .unwrap_or(0);
        AttackClass::from_index(best).expect("index in range")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeTest {
    /// One branch per listed code, in order.
    Nominal { feature: usize, codes: Vec<u32> },
    /// Branch 0 for `v <= threshold`, branch 1 otherwise.
    Numeric { feature: usize, threshold: f64 },
}

impl NodeTest {
    pub fn feature(&self) -> usize {
        match self {
            NodeTest::Nominal { feature, .. } | NodeTest::Numeric { feature, .. } => *feature,
        }
    }

    /// Branch for a value; `None` for a symbol with no branch.
    pub fn branch(&self, value: f64) -> Option<usize> {
        match self {
            NodeTest::Nominal { codes, .. } => codes.iter().position(|&c| c as f64 == value),
            NodeTest::Numeric { threshold, .. } => Some(if value <= *threshold { 0 } else { 1 }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    pub test: NodeTest,
    pub gain: f64,
    pub gain_ratio: f64,
}

fn info_gain(parent: &ClassDist, parts: &[ClassDist]) -> (f64, f64) {
    let n: usize = parent.iter().sum();
    let nf = n as f64;
    let cond: f64 = parts
        .iter()
        .map(|d| d.iter().sum::<usize>() as f64 / nf * entropy(d))
        .sum();
    let sizes: Vec<usize> = parts.iter().map(|d| d.iter().sum()).collect();
    (entropy(parent) - cond, entropy(&sizes))
}

fn candidate(test: NodeTest, parent: &ClassDist, parts: &[ClassDist]) -> SplitCandidate {
    let (gain, split_info) = info_gain(parent, parts);
    let gain_ratio = if split_info > 0.0 {
        gain / split_info
    } else {
        0.0
    };
    SplitCandidate {
        test,
        gain,
        gain_ratio,
    }
}

/// Best split of `rows` on one feature, if a valid one exists.
///
/// A split is valid when at least two branches hold `min_leaf` rows and the
/// gain reaches `min_gain`. Numeric thresholds are tried between neighbouring
/// values whose class sets differ and at the two ends of the range allowed by
/// `min_leaf`; the highest gain wins, the lowest threshold on ties.
pub fn evaluate_feature(
    m: &FeatureMatrix,
    rows: &[u32],
    feature: usize,
    params: &LearnerParams,
) -> Option<SplitCandidate> {
    let parent = m.dist(rows);
    let col = &m.cols[feature];
    let min_leaf = params.min_leaf.max(1);
    let best = if m.nominal[feature] {
        let mut groups: BTreeMap<u32, ClassDist> = BTreeMap::new();
        for &r in rows {
            groups.entry(col[r as usize] as u32).or_insert([0; K])
                [m.classes[r as usize].index()] += 1;
        }
        let big = groups
            .values()
            .filter(|d| d.iter().sum::<usize>() >= min_leaf)
            .count();
        if big < 2 {
            return None;
        }
        let codes: Vec<u32> = groups.keys().copied().collect();
        let parts: Vec<ClassDist> = groups.into_values().collect();
        candidate(NodeTest::Nominal { feature, codes }, &parent, &parts)
    } else {
        let mut pts: Vec<(f64, usize)> = rows
            .iter()
            .map(|&r| (col[r as usize], m.classes[r as usize].index()))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        // runs of equal values: (end, single class or None)
        let mut runs: Vec<(usize, Option<usize>)> = Vec::new();
        let mut start = 0;
        while start < pts.len() {
            let mut end = start + 1;
            let mut class = Some(pts[start].1);
            while end < pts.len() && pts[end].0 == pts[start].0 {
                if Some(pts[end].1) != class {
                    class = None;
                }
                end += 1;
            }
            runs.push((end, class));
            start = end;
        }
        let n = pts.len();
        // with min_leaf in force the edges of the feasible range are candidates too
        let lo_end = runs.iter().map(|r| r.0).find(|&e| e >= min_leaf && e < n);
        let hi_end = runs
            .iter()
            .map(|r| r.0).rfind(|&e| e < n && n - e >= min_leaf);
        let mut left = [0usize; K];
        let mut pos = 0;
        let mut best: Option<(usize, f64, ClassDist)> = None;
        for w in 0..runs.len().saturating_sub(1) {
            let (end, class) = runs[w];
            while pos < end {
                left[pts[pos].1] += 1;
                pos += 1;
            }
            let next = runs[w + 1].1;
            let edge = Some(end) == lo_end || Some(end) == hi_end;
            if class.is_some() && class == next && !edge {
                continue;
            }
            if end < min_leaf || n - end < min_leaf {
                continue;
            }
            let mut right = parent;
            for k in 0..K {
                right[k] -= left[k];
            }
            let (gain, _) = info_gain(&parent, &[left, right]);
            if best.is_none_or(|(_, g, _)| gain > g) {
                best = Some((end, gain, left));
            }
        }
        let (end, _, left) = best?;
        let (a, b) = (pts[end - 1].0, pts[end].0);
        let mut threshold = a + (b - a) / 2.0;
        if threshold >= b {
            threshold = a;
        }
        let mut right = parent;
        for k in 0..K {
            right[k] -= left[k];
        }
        candidate(
            NodeTest::Numeric { feature, threshold },
            &parent,
            &[left, right],
        )
    };
    (best.gain >= params.min_gain).then_some(best)
}

/// Picks the split with the best gain ratio among valid candidates whose gain
/// is at least the mean gain; the lowest feature index wins ties.
pub fn choose_split(
    m: &FeatureMatrix,
    rows: &[u32],
    params: &LearnerParams,
) -> Option<SplitCandidate> {
    let cands: Vec<SplitCandidate> = (0..m.cols.len())
        .filter_map(|f| evaluate_feature(m, rows, f, params))
        .collect();
    if cands.is_empty() {
        return None;
    }
    let mean = cands.iter().map(|c| c.gain).sum::<f64>() / cands.len() as f64;
    let mut best: Option<SplitCandidate> = None;
    for c in cands {
        if c.gain < mean - 1e-9 {
            continue;
        }
        if best.as_ref().is_none_or(|b| c.gain_ratio > b.gain_ratio) {
            best = Some(c);
        }
    }
    best
}

/// Partitions rows by a test; nominal rows without a branch are dropped.
pub(crate) fn partition(m: &FeatureMatrix, rows: &[u32], test: &NodeTest) -> Vec<Vec<u32>> {
    let n = match test {
        NodeTest::Nominal { codes, .. } => codes.len(),
        NodeTest::Numeric { .. } => 2,
    };
    let col = &m.cols[test.feature()];
    let mut parts = vec![Vec::new(); n];
    for &r in rows {
        if let Some(b) = test.branch(col[r as usize]) {
            parts[b].push(r);
        }
    }
    parts
}

/// Upper confidence bound on extra errors at a leaf (C4.5 pessimistic estimate).
pub fn added_errors(n: f64, e: f64, cf: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if e < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (added_errors(n, 1.0, cf) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - cf);
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt())
        / (1.0 + z * z / n);
    r * n - e
}

/// Observed plus pessimistic errors if `dist` were a single leaf.
pub fn leaf_estimate(dist: &ClassDist, cf: f64) -> f64 {
    let n: usize = dist.iter().sum();
    let e = n - dist.iter().max().copied().unwrap_or(0);
    e as f64 + added_errors(n as f64, e as f64, cf)
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        dist: ClassDist,
        class: AttackClass,
    },
    Split {
        test: NodeTest,
        dist: ClassDist,
        class: AttackClass,
        children: Vec<TreeNode>,
        /// Branch taken by symbols that had no training rows here.
        fallback: usize,
    },
}

impl TreeNode {
    pub fn dist(&self) -> &ClassDist {
        match self {
            TreeNode::Leaf { dist, .. } | TreeNode::Split { dist, .. } => dist,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { children, .. } => {
                1 + children.iter().map(TreeNode::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { children, .. } => children.iter().map(TreeNode::leaves).sum(),
        }
    }

    /// Class of the leaf a value vector routes to.
    pub fn predict_values(&self, values: &[f64]) -> AttackClass {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { class, .. } => return *class,
                TreeNode::Split {
                    test,
                    children,
                    fallback,
                    ..
                } => {
                    let b = test.branch(values[test.feature()]).unwrap_or(*fallback);
                    node = &children[b];
                }
            }
        }
    }

    fn estimated_errors(&self, cf: f64) -> f64 {
        match self {
            TreeNode::Leaf { dist, .. } => leaf_estimate(dist, cf),
            TreeNode::Split { children, .. } => {
                children.iter().map(|c| c.estimated_errors(cf)).sum()
            }
        }
    }
}

pub(crate) fn fallback_branch(parts: &[Vec<u32>]) -> usize {
    let mut best = 0;
    for (i, p) in parts.iter().enumerate() {
        if p.len() > parts[best].len() {
            best = i;
        }
    }
    best
}

/// True when a node must stay a leaf regardless of candidate splits.
pub(crate) fn stop_here(dist: &ClassDist, params: &LearnerParams) -> bool {
    let n: usize = dist.iter().sum();
    n < 2 * params.min_leaf.max(1) || dist.iter().filter(|&&c| c > 0).count() <= 1
}

struct Builder<'a> {
    m: &'a FeatureMatrix,
    params: &'a LearnerParams,
    order: ClassOrder,
}

impl Builder<'_> {
    fn grow(&self, rows: &[u32], depth: usize) -> TreeNode {
        let dist = self.m.dist(rows);
        let class = self.order.majority(&dist);
        let leaf = TreeNode::Leaf { dist, class };
        if stop_here(&dist, self.params) || self.params.max_depth.is_some_and(|d| depth >= d) {
            return leaf;
        }
        let Some(split) = choose_split(self.m, rows, self.params) else {
            return leaf;
        };
        let parts = partition(self.m, rows, &split.test);
        let fallback = fallback_branch(&parts);
        let children = parts.iter().map(|p| self.grow(p, depth + 1)).collect();
        let node = TreeNode::Split {
            test: split.test,
            dist,
            class,
            children,
            fallback,
        };
        if self.params.prune
            && leaf_estimate(&dist, self.params.confidence)
                <= node.estimated_errors(self.params.confidence) + 0.1 + 1e-6
        {
            return leaf;
        }
        node
    }
}

/// C4.5-style tree with subtree-replacement pruning.
pub fn build_tree(train: &Dataset, params: &LearnerParams) -> Result<TreeNode, LearnError> {
    params.validate()?;
    if train.is_empty() {
        return Err(LearnError::EmptyTrainingSet);
    }
    let m = FeatureMatrix::from_dataset(train);
    Ok(build_tree_matrix(&m, params))
}

pub fn build_tree_matrix(m: &FeatureMatrix, params: &LearnerParams) -> TreeNode {
    let rows: Vec<u32> = (0..m.len() as u32).collect();
    let b = Builder {
        m,
        params,
        order: ClassOrder::new(m.dist(&rows)),
    };
    b.grow(&rows, 0)
}
