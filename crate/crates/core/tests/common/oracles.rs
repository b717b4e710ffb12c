//! Brute-force reference computations, run over seeded random fixtures.
//! Each check returns the first disagreement as an error message.

use std::collections::{BTreeMap, BTreeSet};

use chids_core::eval_report::{evaluate, Ratio};
use chids_core::feature_rank::{discretize, score_features, Binning, ScoreMethod};
use chids_core::kdd_data::{AttackClass, Dataset, KddRecord};
use chids_core::misuse_learner::{
    evaluate_feature, Classifier, FeatureMatrix, LearnerParams, NodeTest,
};
use chids_core::preprocess::{apply_normalizer, dedupe, fit_normalizer, FeatureStats};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{class, dataset};

pub const TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * (1.0 + b.abs())
}

pub fn naive_entropy(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    let mut h = 0.0;
    for c in labels.iter().collect::<BTreeSet<_>>() {
        let p = labels.iter().filter(|&l| l == c).count() as f64 / n;
        h -= p * p.log2();
    }
    h
}

/// Two features (nominal, numeric) with a class signal of random strength.
fn random_fixture(rng: &mut ChaCha8Rng, max_n: usize) -> Dataset {
    let n = rng.gen_range(2..=max_n);
    let k = rng.gen_range(2..=5);
    let noise = rng.gen_range(0.0..1.0);
    let rows: Vec<(Vec<f64>, AttackClass)> = (0..n)
        .map(|_| {
            let c = rng.gen_range(0..k);
            let sym = if rng.gen_bool(noise) {
                rng.gen_range(0..4)
            } else {
                c % 4
            };
            let x = if rng.gen_bool(noise) {
                rng.gen_range(0..30) as f64
            } else {
                (c * 6) as f64 + rng.gen_range(0..4) as f64
            };
            (vec![sym as f64, x], class(c))
        })
        .collect();
    dataset(&[("s", &["a", "b", "c", "d"]), ("x", &[])], &rows)
}

fn naive_bin(binning: &Binning, v: f64) -> usize {
    match binning {
        Binning::Symbols => v as usize,
        Binning::Cuts(cuts) => cuts.iter().filter(|&&c| v > c).count(),
    }
}

/// (bin, class) -> count by explicit enumeration.
fn naive_table(ds: &Dataset, binning: &Binning, f: usize) -> BTreeMap<(usize, usize), usize> {
    let mut t = BTreeMap::new();
    for (r, c) in ds.iter() {
        *t.entry((naive_bin(binning, r.values()[f]), c.index()))
            .or_insert(0) += 1;
    }
    t
}

pub fn naive_chi2(t: &BTreeMap<(usize, usize), usize>) -> f64 {
    let n: usize = t.values().sum();
    let bins: BTreeSet<usize> = t.keys().map(|k| k.0).collect();
    let classes: BTreeSet<usize> = t.keys().map(|k| k.1).collect();
    let mut chi = 0.0;
    for &b in &bins {
        for &c in &classes {
            let row: usize = t.iter().filter(|(k, _)| k.0 == b).map(|(_, v)| v).sum();
            let col: usize = t.iter().filter(|(k, _)| k.1 == c).map(|(_, v)| v).sum();
            let e = row as f64 * col as f64 / n as f64;
            let o = *t.get(&(b, c)).unwrap_or(&0) as f64;
            if e > 0.0 {
                chi += (o - e) * (o - e) / e;
            }
        }
    }
    chi
}

pub fn naive_igr(t: &BTreeMap<(usize, usize), usize>) -> f64 {
    let expand = |filter: &dyn Fn(&(usize, usize)) -> bool,
                  key: &dyn Fn(&(usize, usize)) -> usize| {
        let mut v = Vec::new();
        for (k, &n) in t {
            if filter(k) {
                v.extend(std::iter::repeat_n(key(k), n));
            }
        }
        v
    };
    let all_classes = expand(&|_| true, &|k| k.1);
    let all_bins = expand(&|_| true, &|k| k.0);
    let n = all_classes.len() as f64;
    let split = naive_entropy(&all_bins);
    if split == 0.0 {
        return 0.0;
    }
    let mut cond = 0.0;
    for b in all_bins.iter().collect::<BTreeSet<_>>() {
        let sub = expand(&|k| k.0 == *b, &|k| k.1);
        cond += sub.len() as f64 / n * naive_entropy(&sub);
    }
    ((naive_entropy(&all_classes) - cond) / split).max(0.0)
}

/// Chi-squared and gain-ratio scores against explicit contingency enumeration,
/// plus shuffle and bin-relabel invariance.
pub fn check_feature_scores(trials: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let ds = random_fixture(&mut rng, 200);
        let disc = discretize(&ds);
        let chi = score_features(&ds, &disc, ScoreMethod::ChiSquared).map_err(|e| e.to_string())?;
        let igr =
            score_features(&ds, &disc, ScoreMethod::InfoGainRatio).map_err(|e| e.to_string())?;
        let mut order: Vec<usize> = (0..ds.len()).collect();
        order.shuffle(&mut rng);
        let shuffled = ds.select(&order);
        let chi_s =
            score_features(&shuffled, &disc, ScoreMethod::ChiSquared).map_err(|e| e.to_string())?;
        let igr_s = score_features(&shuffled, &disc, ScoreMethod::InfoGainRatio)
            .map_err(|e| e.to_string())?;
        for f in 0..2 {
            let t = naive_table(&ds, &disc.binning[f], f);
            let (c0, i0) = (naive_chi2(&t), naive_igr(&t));
            if !close(chi[f].score, c0) || !close(igr[f].score, i0) {
                return Err(format!(
                    "trial {trial} feature {f}: chi {} vs {c0}, igr {} vs {i0}",
                    chi[f].score, igr[f].score
                ));
            }
            if !close(chi_s[f].score, c0) || !close(igr_s[f].score, i0) {
                return Err(format!(
                    "trial {trial} feature {f}: shuffle changed the score"
                ));
            }
            // relabel bins in reverse order
            let top = t.keys().map(|k| k.0).max().unwrap_or(0);
            let relabeled: BTreeMap<(usize, usize), usize> =
                t.iter().map(|(&(b, c), &v)| ((top - b, c), v)).collect();
            if !close(naive_chi2(&relabeled), c0) {
                return Err(format!(
                    "trial {trial} feature {f}: relabeling changed chi-squared"
                ));
            }
            if !(chi[f].score.is_finite() && chi[f].score >= 0.0 && igr[f].score >= 0.0) {
                return Err(format!("trial {trial}: negative or non-finite score"));
            }
        }
    }
    Ok(())
}

/// Information gain and gain ratio of candidate splits against naive entropy
/// sums; numeric thresholds are checked against every midpoint, not only
/// class boundaries.
pub fn check_split_scores(trials: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let ds = random_fixture(&mut rng, 100);
        let m = FeatureMatrix::from_dataset(&ds);
        let params = LearnerParams {
            min_leaf: rng.gen_range(1..=3),
            min_gain: 0.0,
            ..LearnerParams::default()
        };
        let labels: Vec<usize> = ds.classes().iter().map(|c| c.index()).collect();
        let rows: Vec<u32> = (0..ds.len() as u32).collect();
        let n = labels.len() as f64;
        let h = naive_entropy(&labels);
        let gain_of = |groups: &[Vec<usize>]| {
            let cond: f64 = groups
                .iter()
                .map(|g| g.len() as f64 / n * naive_entropy(g))
                .sum();
            let sizes: Vec<usize> = groups
                .iter()
                .enumerate()
                .flat_map(|(i, g)| std::iter::repeat_n(i, g.len()))
                .collect();
            (h - cond, naive_entropy(&sizes))
        };

        // nominal feature 0
        let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (r, &l) in ds.records().iter().zip(&labels) {
            groups.entry(r.values()[0] as u64).or_default().push(l);
        }
        let groups: Vec<Vec<usize>> = groups.into_values().collect();
        let valid = groups.iter().filter(|g| g.len() >= params.min_leaf).count() >= 2;
        let got = evaluate_feature(&m, &rows, 0, &params);
        match (valid, &got) {
            (false, None) => {}
            (true, Some(c)) => {
                let (g, si) = gain_of(&groups);
                let gr = if si > 0.0 { g / si } else { 0.0 };
                if !close(c.gain, g) || !close(c.gain_ratio, gr) {
                    return Err(format!(
                        "trial {trial} nominal: {} / {} vs {g} / {gr}",
                        c.gain, c.gain_ratio
                    ));
                }
            }
            _ => {
                return Err(format!(
                    "trial {trial} nominal: validity {valid} vs {got:?}"
                ))
            }
        }

        // numeric feature 1
        let xs: Vec<f64> = ds.records().iter().map(|r| r.values()[1]).collect();
        let distinct: BTreeSet<u64> = xs.iter().map(|&v| v as u64).collect();
        let distinct: Vec<f64> = distinct.into_iter().map(|v| v as f64).collect();
        let mut best: Option<f64> = None;
        for w in distinct.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left: Vec<usize> = (0..xs.len())
                .filter(|&i| xs[i] <= t)
                .map(|i| labels[i])
                .collect();
            let right: Vec<usize> = (0..xs.len())
                .filter(|&i| xs[i] > t)
                .map(|i| labels[i])
                .collect();
            if left.len() < params.min_leaf || right.len() < params.min_leaf {
                continue;
            }
            let (g, _) = gain_of(&[left, right]);
            best = Some(best.map_or(g, |b: f64| b.max(g)));
        }
        let got = evaluate_feature(&m, &rows, 1, &params);
        match (best, &got) {
            (None, None) => {}
            (Some(g), Some(c)) => {
                let NodeTest::Numeric { threshold, .. } = c.test else {
                    return Err("numeric feature produced a nominal test".into());
                };
                let left: Vec<usize> = (0..xs.len())
                    .filter(|&i| xs[i] <= threshold)
                    .map(|i| labels[i])
                    .collect();
                let right: Vec<usize> = (0..xs.len())
                    .filter(|&i| xs[i] > threshold)
                    .map(|i| labels[i])
                    .collect();
                let (g_at, si) = gain_of(&[left, right]);
                if !close(c.gain, g) || !close(g_at, g) || !close(c.gain_ratio, g_at / si) {
                    return Err(format!(
                        "trial {trial} numeric: gain {} vs best {g} (at threshold {g_at}), ratio {} vs {}",
                        c.gain,
                        c.gain_ratio,
                        g_at / si
                    ));
                }
            }
            // a run with a single class on both sides can hide all boundaries
            (Some(g), None) if g <= 0.0 => {}
            _ => return Err(format!("trial {trial} numeric: best {best:?} vs {got:?}")),
        }
    }
    Ok(())
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Fitted mean and deviation against a compensated two-pass oracle; the
/// normalized training column has mean 0 and deviation 1.
pub fn check_normalization(trials: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let n = rng.gen_range(1..=200);
        let scale = 10f64.powi(rng.gen_range(0..6));
        let rows: Vec<(Vec<f64>, AttackClass)> = (0..n)
            .map(|_| {
                (
                    vec![rng.gen_range(-1.0..1.0) * scale + scale, 0.0],
                    AttackClass::Normal,
                )
            })
            .collect();
        let ds = dataset(&[("x", &[]), ("s", &["a"])], &rows);
        let stats = fit_normalizer(&ds).map_err(|e| e.to_string())?;
        let FeatureStats::Numeric { mu, sigma, .. } = stats.stats[0] else {
            return Err("numeric feature not fitted".into());
        };
        let xs: Vec<f64> = rows.iter().map(|r| r.0[0]).collect();
        let m = compensated_sum(xs.iter().copied()) / n as f64;
        let s = (compensated_sum(xs.iter().map(|v| (v - m) * (v - m))) / n as f64).sqrt();
        if (mu - m).abs() > TOL * m.abs().max(1.0) || (sigma - s).abs() > TOL * s.max(1.0) {
            return Err(format!("trial {trial}: ({mu}, {sigma}) vs ({m}, {s})"));
        }
        if stats.stats[1] != FeatureStats::PassThrough {
            return Err("nominal feature was not passed through".into());
        }
        let out = apply_normalizer(&ds, &stats).map_err(|e| e.to_string())?;
        let zs: Vec<f64> = out.records().iter().map(|r| r.values()[0]).collect();
        let zm = compensated_sum(zs.iter().copied()) / n as f64;
        let zs_dev = (compensated_sum(zs.iter().map(|v| (v - zm) * (v - zm))) / n as f64).sqrt();
        let expected_dev = if s > 0.0 { 1.0 } else { 0.0 };
        if zm.abs() > TOL || (zs_dev - expected_dev).abs() > TOL {
            return Err(format!(
                "trial {trial}: normalized mean {zm}, deviation {zs_dev}"
            ));
        }
    }
    Ok(())
}

/// Duplicate removal against a pairwise first-occurrence scan.
pub fn check_dedupe(trials: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let n = rng.gen_range(0..=200);
        let rows: Vec<(Vec<f64>, AttackClass)> = (0..n)
            .map(|_| {
                (
                    vec![rng.gen_range(0..3) as f64, rng.gen_range(0..4) as f64],
                    class(rng.gen_range(0..3)),
                )
            })
            .collect();
        let ds = dataset(&[("s", &["a", "b", "c"]), ("x", &[])], &rows);
        let keep: Vec<usize> = (0..n)
            .filter(|&i| (0..i).all(|j| rows[j] != rows[i]))
            .collect();
        let expected = ds.select(&keep);
        let got = dedupe(&ds);
        if got != expected {
            return Err(format!(
                "trial {trial}: {} kept vs {}",
                got.len(),
                keep.len()
            ));
        }
        if dedupe(&got) != got {
            return Err(format!("trial {trial}: not idempotent"));
        }
    }
    Ok(())
}

/// Predicts from a fixed table indexed by the record's only value.
struct Lookup(Vec<AttackClass>);

impl Classifier for Lookup {
    fn classify(&self, r: &KddRecord) -> AttackClass {
        self.0[r.values()[0] as usize]
    }
}

fn scan_percent(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| 100.0 * num as f64 / den as f64)
}

fn same(r: &Ratio, want: Option<f64>) -> bool {
    match (r.percent(), want) {
        (Some(a), Some(b)) => close(a, b),
        (None, None) => true,
        _ => false,
    }
}

/// Detection rate, false alarm rate, accuracy and per-class recall and
/// precision against direct scans over (actual, predicted) pairs.
pub fn check_metrics(trials: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let n = rng.gen_range(1..=200);
        let skew = rng.gen_range(0.0..1.0);
        let pick = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(skew) {
                class(0)
            } else {
                class(rng.gen_range(0..5))
            }
        };
        let actual: Vec<AttackClass> = (0..n).map(|_| pick(&mut rng)).collect();
        let predicted: Vec<AttackClass> = (0..n).map(|_| pick(&mut rng)).collect();
        let rows: Vec<(Vec<f64>, AttackClass)> =
            (0..n).map(|i| (vec![i as f64], actual[i])).collect();
        let ds = dataset(&[("i", &[])], &rows);
        let ev = evaluate(&Lookup(predicted.clone()), &ds).map_err(|e| e.to_string())?;
        let m = &ev.metrics;
        let pairs: Vec<(AttackClass, AttackClass)> = actual
            .iter()
            .copied()
            .zip(predicted.iter().copied())
            .collect();
        let attacks = pairs.iter().filter(|(a, _)| a.is_attack()).count();
        let detected = pairs
            .iter()
            .filter(|(a, p)| a.is_attack() && p.is_attack())
            .count();
        let normals = n - attacks;
        let alarms = pairs
            .iter()
            .filter(|(a, p)| !a.is_attack() && p.is_attack())
            .count();
        let correct = pairs.iter().filter(|(a, p)| a == p).count();
        if ev.matrix.total() != n as u64 {
            return Err(format!(
                "trial {trial}: matrix holds {} of {n}",
                ev.matrix.total()
            ));
        }
        if !same(&m.detection_rate, scan_percent(detected, attacks))
            || !same(&m.false_alarm_rate, scan_percent(alarms, normals))
            || !same(&m.accuracy, scan_percent(correct, n))
        {
            return Err(format!("trial {trial}: rates {m:?}"));
        }
        for c in AttackClass::ALL {
            let tp = pairs.iter().filter(|&&(a, p)| a == c && p == c).count();
            let support = pairs.iter().filter(|&&(a, _)| a == c).count();
            let called = pairs.iter().filter(|&&(_, p)| p == c).count();
            let cm = &m.per_class[c.index()];
            if cm.class != c
                || cm.support != support as u64
                || !same(&cm.recall, scan_percent(tp, support))
                || !same(&cm.precision, scan_percent(tp, called))
            {
                return Err(format!("trial {trial}: class {c} {cm:?}"));
            }
        }
    }
    Ok(())
}
