use super::rules::{simplify, Condition, Rule, RuleSet};
use super::tree::{
    choose_split, leaf_estimate, partition, stop_here, ClassDist, ClassOrder, FeatureMatrix,
    NodeTest,
};
use super::{LearnError, LearnerParams};
use crate::feature_rank::entropy;
use crate::kdd_data::Dataset;

/// Node of a partially expanded tree. `None` children were never expanded.
#[derive(Debug, Clone)]
pub enum PartialNode {
    Leaf {
        dist: ClassDist,
    },
    Split {
        test: NodeTest,
        dist: ClassDist,
        children: Vec<Option<PartialNode>>,
    },
}

impl PartialNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self, PartialNode::Leaf { .. })
    }

    pub fn dist(&self) -> &ClassDist {
        match self {
            PartialNode::Leaf { dist } | PartialNode::Split { dist, .. } => dist,
        }
    }

    /// Coverage of every expanded leaf, in branch order.
    pub fn leaf_coverages(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.walk_leaves(&mut Vec::new(), &mut |_, d| out.push(d.iter().sum()));
        out
    }

    fn walk_leaves(&self, path: &mut Vec<Condition>, f: &mut impl FnMut(&[Condition], &ClassDist)) {
        match self {
            PartialNode::Leaf { dist } => f(path, dist),
            PartialNode::Split { test, children, .. } => {
                for (b, child) in children.iter().enumerate() {
                    let Some(child) = child else { continue };
                    path.push(branch_condition(test, b));
                    child.walk_leaves(path, f);
                    path.pop();
                }
            }
        }
    }
}

fn branch_condition(test: &NodeTest, branch: usize) -> Condition {
    match test {
        NodeTest::Nominal { feature, codes } => Condition::Equals {
            feature: *feature,
            code: codes[branch],
        },
        NodeTest::Numeric { feature, threshold } => {
            if branch == 0 {
                Condition::AtMost {
                    feature: *feature,
                    threshold: *threshold,
                }
            } else {
                Condition::Above {
                    feature: *feature,
                    threshold: *threshold,
                }
            }
        }
    }
}

struct Grower<'a> {
    m: &'a FeatureMatrix,
    params: &'a LearnerParams,
}

impl Grower<'_> {
    fn expand(&self, rows: &[u32], depth: usize) -> PartialNode {
        let dist = self.m.dist(rows);
        if stop_here(&dist, self.params) || self.params.max_depth.is_some_and(|d| depth >= d) {
            return PartialNode::Leaf { dist };
        }
        let Some(split) = choose_split(self.m, rows, self.params) else {
            return PartialNode::Leaf { dist };
        };
        let parts = partition(self.m, rows, &split.test);
        let dists: Vec<ClassDist> = parts.iter().map(|p| self.m.dist(p)).collect();
        let mut children: Vec<Option<PartialNode>> = vec![None; parts.len()];

        // expand the lowest-entropy subset first while expansions end in leaves
        let mut expanded = 0;
        loop {
            expanded += 1;
            match self.choose_index(&dists, &children) {
                None => {
                    for (b, c) in children.iter_mut().enumerate() {
                        if c.is_none() {
                            *c = Some(PartialNode::Leaf { dist: dists[b] });
                        }
                    }
                    break;
                }
                Some(b) => {
                    let child = self.expand(&parts[b], depth + 1);
                    let leaf = child.is_leaf();
                    children[b] = Some(child);
                    if expanded >= children.len() || !leaf {
                        break;
                    }
                }
            }
        }

        let all_leaves = children
            .iter()
            .all(|c| c.as_ref().is_some_and(PartialNode::is_leaf));
        if all_leaves && self.params.prune {
            let cf = self.params.confidence;
            let tree: f64 = dists.iter().map(|d| leaf_estimate(d, cf)).sum();
            if leaf_estimate(&dist, cf) <= tree + 0.1 + 1e-6 {
                return PartialNode::Leaf { dist };
            }
        }
        PartialNode::Split {
            test: split.test,
            dist,
            children,
        }
    }

    fn choose_index(&self, dists: &[ClassDist], children: &[Option<PartialNode>]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (b, d) in dists.iter().enumerate() {
            if children[b].is_some() {
                continue;
            }
            let n: usize = d.iter().sum();
            if n < self.params.min_leaf.max(1) {
                continue;
            }
            let h = entropy(d);
            if h <= 0.0 {
                return Some(b);
            }
            if best.is_none_or(|(_, bh)| h < bh) {
                best = Some((b, h));
            }
        }
        best.map(|(b, _)| b)
    }
}

/// Grows a partial tree on the given rows.
pub fn grow_partial_tree(m: &FeatureMatrix, rows: &[u32], params: &LearnerParams) -> PartialNode {
    Grower { m, params }.expand(rows, 0)
}

/// Rule for the expanded leaf with the largest coverage (first in branch order on ties).
pub fn extract_rule(tree: &PartialNode, order: &ClassOrder) -> Rule {
    let mut best: Option<(Vec<Condition>, ClassDist)> = None;
    tree.walk_leaves(&mut Vec::new(), &mut |path, dist| {
        let n: usize = dist.iter().sum();
        if best
            .as_ref()
            .is_none_or(|(_, d)| n > d.iter().sum::<usize>())
        {
            best = Some((path.to_vec(), *dist));
        }
    });
    let (path, dist) = best.unwrap_or((Vec::new(), *tree.dist()));
    let class = order.majority(&dist);
    let coverage: usize = dist.iter().sum();
    Rule {
        conditions: simplify(&path),
        class,
        coverage,
        errors: coverage - dist[class.index()],
    }
}

/// One PART iteration: partial tree on the residual, best-coverage leaf as a rule.
pub fn build_partial_tree_rule(
    residual: &Dataset,
    params: &LearnerParams,
) -> Result<Rule, LearnError> {
    params.validate()?;
    if residual.is_empty() {
        return Err(LearnError::EmptyTrainingSet);
    }
    let m = FeatureMatrix::from_dataset(residual);
    let rows: Vec<u32> = (0..m.len() as u32).collect();
    let order = ClassOrder::new(m.dist(&rows));
    Ok(extract_rule(&grow_partial_tree(&m, &rows, params), &order))
}

/// Separate-and-conquer decision list built from repeated partial trees.
pub fn train_part(train: &Dataset, params: &LearnerParams) -> Result<RuleSet, LearnError> {
    params.validate()?;
    if train.is_empty() {
        return Err(LearnError::EmptyTrainingSet);
    }
    let m = FeatureMatrix::from_dataset(train);
    Ok(train_part_matrix(&m, params))
}

pub fn train_part_matrix(m: &FeatureMatrix, params: &LearnerParams) -> RuleSet {
    let all: Vec<u32> = (0..m.len() as u32).collect();
    let order = ClassOrder::new(m.dist(&all));
    let default_class = order.majority(&m.dist(&all));
    let mut residual = all;
    let mut rules = Vec::new();
    let mut row = vec![0.0; m.cols.len()];
    while !residual.is_empty() {
        let tree = grow_partial_tree(m, &residual, params);
        let rule = extract_rule(&tree, &order);
        let before = residual.len();
        residual.retain(|&r| {
            for (f, col) in m.cols.iter().enumerate() {
                row[f] = col[r as usize];
            }
            !rule.matches(&row)
        });
        debug_assert_eq!(before - residual.len(), rule.coverage);
        assert!(residual.len() < before, "rule covers no residual record");
        rules.push(rule);
    }
    RuleSet {
        rules,
        default_class,
    }
}
