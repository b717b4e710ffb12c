use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PreprocessError;
use crate::kdd_data::{AttackClass, ClassCounts, Dataset};

/// How a deduplicated dataset is divided into training and testing sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_size: usize,
    pub test_size: usize,
    /// Classes whose records are all used, two thirds for training.
    pub minority_classes: Vec<AttackClass>,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_size: 20_000,
            test_size: 10_000,
            minority_classes: vec![AttackClass::Probe, AttackClass::R2L, AttackClass::U2R],
            seed: 1,
        }
    }
}

/// Training share of a fully enumerated minority class: 2n/3 rounded half up.
pub fn minority_train_count(n: usize) -> usize {
    (4 * n + 3) / 6
}

/// Largest-remainder (Hamilton) apportionment of `seats` over `populations`.
///
/// Equal remainders go to the larger population, then to the lower index.
pub fn largest_remainder(seats: usize, populations: &[usize]) -> Vec<usize> {
    let total: usize = populations.iter().sum();
    if total == 0 {
        return vec![0; populations.len()];
    }
    // Exact integer arithmetic: quota_i = seats * p_i / total.
    let mut alloc: Vec<usize> = Vec::with_capacity(populations.len());
    let mut remainders: Vec<(u128, usize, usize)> = Vec::with_capacity(populations.len());
    for (i, &p) in populations.iter().enumerate() {
        let num = seats as u128 * p as u128;
        alloc.push((num / total as u128) as usize);
        remainders.push((num % total as u128, p, i));
    }
    let left = seats - alloc.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    for &(_, _, i) in remainders.iter().take(left) {
        alloc[i] += 1;
    }
    alloc
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassAllocation {
    pub class: AttackClass,
    pub available: usize,
    pub train: usize,
    pub test: usize,
    pub minority: bool,
}

/// Record of how a split was drawn, for reproducibility audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub allocations: Vec<ClassAllocation>,
}

impl SplitManifest {
    pub fn train_counts(&self) -> ClassCounts {
        let mut c = ClassCounts::default();
        for a in &self.allocations {
            c.0[a.class.index()] = a.train;
        }
        c
    }

    pub fn test_counts(&self) -> ClassCounts {
        let mut c = ClassCounts::default();
        for a in &self.allocations {
            c.0[a.class.index()] = a.test;
        }
        c
    }

    /// Plain-text rendering, one `key = value` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "train_size = {}", self.train_size);
        let _ = writeln!(s, "test_size = {}", self.test_size);
        let _ = writeln!(s, "minority_rounding = round_half_up(2n/3)");
        let _ = writeln!(s, "majority_allocation = largest_remainder");
        let _ = writeln!(s, "sampling = without_replacement");
        for a in &self.allocations {
            let _ = writeln!(
                s,
                "class.{} = available:{} train:{} test:{}{}",
                a.class,
                a.available,
                a.train,
                a.test,
                if a.minority { " minority" } else { "" }
            );
        }
        s
    }
}

fn infeasible(msg: String) -> PreprocessError {
    PreprocessError::InfeasibleSplit(msg)
}

/// Computes per-class train/test counts without touching any records.
pub fn plan_split(
    counts: &ClassCounts,
    spec: &SplitSpec,
) -> Result<Vec<ClassAllocation>, PreprocessError> {
    let mut allocations: Vec<ClassAllocation> = AttackClass::ALL
        .into_iter()
        .map(|class| ClassAllocation {
            class,
            available: counts[class],
            train: 0,
            test: 0,
            minority: spec.minority_classes.contains(&class),
        })
        .collect();

    let (mut minority_train, mut minority_test) = (0, 0);
    for a in allocations.iter_mut().filter(|a| a.minority) {
        a.train = minority_train_count(a.available);
        a.test = a.available - a.train;
        minority_train += a.train;
        minority_test += a.test;
    }
    if minority_train > spec.train_size || minority_test > spec.test_size {
        return Err(infeasible(format!(
            "minority classes need {minority_train}/{minority_test} records but the split asks for {}/{}",
            spec.train_size, spec.test_size
        )));
    }
    let rest_train = spec.train_size - minority_train;
    let rest_test = spec.test_size - minority_test;

    let pool: Vec<usize> = allocations
        .iter()
        .map(|a| if a.minority { 0 } else { a.available })
        .collect();
    let pool_total: usize = pool.iter().sum();
    if rest_train + rest_test > pool_total {
        return Err(infeasible(format!(
            "{} records requested from the remaining classes but only {pool_total} are available",
            rest_train + rest_test
        )));
    }
    let train_q = largest_remainder(rest_train, &pool);
    let mut test_q = largest_remainder(rest_test, &pool);
    // Rounding can ask one record too many of a small class; move that test
    // slot to the class with the most spare records.
    loop {
        let Some(over) = (0..pool.len()).find(|&i| train_q[i] + test_q[i] > pool[i]) else {
            break;
        };
        test_q[over] -= 1;
        let spare = (0..pool.len())
            .filter(|&i| train_q[i] + test_q[i] < pool[i])
            .max_by(|&a, &b| {
                let sa = pool[a] - train_q[a] - test_q[a];
                let sb = pool[b] - train_q[b] - test_q[b];
                sa.cmp(&sb).then(b.cmp(&a))
            })
            .expect("feasibility checked above");
        test_q[spare] += 1;
    }
    for (i, a) in allocations.iter_mut().enumerate() {
        if !a.minority {
            a.train = train_q[i];
            a.test = test_q[i];
        }
    }
    Ok(allocations)
}

/// Draws a seeded stratified train/test split.
///
/// Minority classes are enumerated completely (two thirds to training); the
/// remaining slots are filled from the other classes in proportion to their
/// frequencies, without replacement. Both outputs are shuffled.
pub fn stratified_split(
    ds: &Dataset,
    spec: &SplitSpec,
) -> Result<(Dataset, Dataset, SplitManifest), PreprocessError> {
    let allocations = plan_split(&ds.class_counts(), spec)?;

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); AttackClass::COUNT];
    for (i, &c) in ds.classes().iter().enumerate() {
        by_class[c.index()].push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train = Vec::with_capacity(spec.train_size);
    let mut test = Vec::with_capacity(spec.test_size);
    for a in &allocations {
        let members = &mut by_class[a.class.index()];
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..a.train]);
        test.extend_from_slice(&members[a.train..a.train + a.test]);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);

    let manifest = SplitManifest {
        seed: spec.seed,
        train_size: spec.train_size,
        test_size: spec.test_size,
        allocations,
    };
    Ok((ds.select(&train), ds.select(&test), manifest))
}
