use rayon::prelude::*;

use crate::kdd_data::{AttackClass, Dataset, FeatureKind};

const K: usize = AttackClass::COUNT;

/// How one feature maps values to bins.
#[derive(Debug, Clone, PartialEq)]
pub enum Binning {
    /// Strictly increasing cut-points; `v <= cuts[0]` is bin 0, and so on.
    Cuts(Vec<f64>),
    /// One bin per symbol code.
    Symbols,
}

impl Binning {
    pub fn bin(&self, value: f64) -> usize {
        match self {
            Binning::Cuts(cuts) => cuts.partition_point(|&c| c < value),
            Binning::Symbols => value as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub names: Vec<String>,
    pub binning: Vec<Binning>,
}

impl Discretization {
    pub fn bin(&self, feature: usize, value: f64) -> usize {
        self.binning[feature].bin(value)
    }
}

/// Supervised discretization of every numeric feature (Fayyad-Irani MDL).
pub fn discretize(train: &Dataset) -> Discretization {
    let schema = train.schema();
    let binning = schema
        .features()
        .par_iter()
        .map(|f| match f.kind {
            FeatureKind::Nominal => Binning::Symbols,
            FeatureKind::Numeric => {
                let values: Vec<f64> = train
                    .records()
                    .iter()
                    .map(|r| r.values()[f.index])
                    .collect();
                Binning::Cuts(mdl_cut_points(&values, train.classes()))
            }
        })
        .collect();
    Discretization {
        names: schema.names().map(str::to_string).collect(),
        binning,
    }
}

pub(crate) fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn present(counts: &[usize; K]) -> usize {
    counts.iter().filter(|&&c| c > 0).count()
}

/// MDL cut-points for one numeric column, sorted ascending.
pub fn mdl_cut_points(values: &[f64], classes: &[AttackClass]) -> Vec<f64> {
    assert_eq!(values.len(), classes.len());
    let mut points: Vec<(f64, usize)> = values
        .iter()
        .zip(classes)
        .map(|(&v, c)| (v, c.index()))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut cuts = Vec::new();
    split_range(&points, &mut cuts);
    cuts.sort_by(f64::total_cmp);
    cuts
}

fn split_range(points: &[(f64, usize)], cuts: &mut Vec<f64>) {
    let n = points.len();
    if n < 2 {
        return;
    }
    let mut total = [0usize; K];
    for &(_, c) in points {
        total[c] += 1;
    }
    let ent = entropy(&total);
    if ent == 0.0 {
        return;
    }

    // best boundary by weighted child entropy; the first one wins ties
    let mut left = [0usize; K];
    let mut best: Option<(usize, f64, [usize; K])> = None;
    for i in 1..n {
        left[points[i - 1].1] += 1;
        if points[i - 1].0 == points[i].0 {
            continue;
        }
        let mut right = total;
        for k in 0..K {
            right[k] -= left[k];
        }
        let w = (i as f64 * entropy(&left) + (n - i) as f64 * entropy(&right)) / n as f64;
        if best.is_none_or(|(_, bw, _)| w < bw) {
            best = Some((i, w, left));
        }
    }
    let Some((i, w, left)) = best else {
        return;
    };
    let mut right = total;
    for k in 0..K {
        right[k] -= left[k];
    }

    let nf = n as f64;
    let gain = ent - w;
    let (k, k1, k2) = (
        present(&total) as f64,
        present(&left) as f64,
        present(&right) as f64,
    );
    let delta =
        (3f64.powf(k) - 2.0).log2() - (k * ent - k1 * entropy(&left) - k2 * entropy(&right));
    if gain <= ((nf - 1.0).log2() + delta) / nf {
        return;
    }

    let (a, b) = (points[i - 1].0, points[i].0);
    let mut cut = a + (b - a) / 2.0;
    if cut >= b {
        cut = a;
    }
    cuts.push(cut);
    split_range(&points[..i], cuts);
    split_range(&points[i..], cuts);
}
