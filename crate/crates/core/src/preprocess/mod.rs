//! Dataset preprocessing: exact-duplicate removal, stratified sampling,
//! feature pruning and z-score normalization.

mod normalize;
mod split;

use std::collections::HashSet;

use thiserror::Error;

use crate::kdd_data::{Dataset, KddRecord};

pub use normalize::{apply_normalizer, fit_normalizer, FeatureStats, NormalizationStats};
pub use split::{
    largest_remainder, minority_train_count, plan_split, stratified_split, ClassAllocation,
    SplitManifest, SplitSpec,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PreprocessError {
    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),
    #[error("unknown feature {0:?}")]
    UnknownFeatureName(String),
    #[error("dataset schema does not match the fitted statistics")]
    SchemaMismatch,
    #[error("dataset is empty")]
    EmptyDataset,
}

/// Removes exact duplicates (all feature values and the label), keeping the
/// first occurrence and the order of survivors.
pub fn dedupe(ds: &Dataset) -> Dataset {
    let mut seen: HashSet<&KddRecord> = HashSet::with_capacity(ds.len());
    let keep: Vec<usize> = ds
        .records()
        .iter()
        .enumerate()
        .filter(|(_, r)| seen.insert(r))
        .map(|(i, _)| i)
        .collect();
    ds.select(&keep)
}

/// `1 - output/input`, or 0 for an empty input.
pub fn reduction_rate(input: usize, output: usize) -> f64 {
    if input == 0 {
        0.0
    } else {
        1.0 - output as f64 / input as f64
    }
}

fn resolve(ds: &Dataset, names: &[String]) -> Result<HashSet<usize>, PreprocessError> {
    names
        .iter()
        .map(|n| {
            ds.schema()
                .index_of(n)
                .ok_or_else(|| PreprocessError::UnknownFeatureName(n.clone()))
        })
        .collect()
}

fn project(ds: &Dataset, keep: &[usize]) -> Dataset {
    let schema = ds.schema().project(keep);
    let records = ds.records().iter().map(|r| r.project(keep)).collect();
    Dataset::from_parts(schema, records, ds.classes().to_vec()).expect("projection keeps layout")
}

/// Drops the named features; the rest keep their relative order.
pub fn prune_features(ds: &Dataset, names: &[String]) -> Result<Dataset, PreprocessError> {
    let drop = resolve(ds, names)?;
    let keep: Vec<usize> = (0..ds.schema().len())
        .filter(|i| !drop.contains(i))
        .collect();
    Ok(project(ds, &keep))
}

/// Keeps only the named features, in schema order.
pub fn select_features(ds: &Dataset, names: &[String]) -> Result<Dataset, PreprocessError> {
    let keep = resolve(ds, names)?;
    let mut keep: Vec<usize> = keep.into_iter().collect();
    keep.sort_unstable();
    Ok(project(ds, &keep))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdd_data::{
        parse_dataset, AttackClass, ClassTaxonomy, FeatureSchema, LoadOptions,
        DEFAULT_PRUNED_FEATURES,
    };
    use proptest::prelude::*;

    fn fixture(lines: &[&str]) -> Dataset {
        parse_dataset(
            &lines.join("\n"),
            FeatureSchema::kdd(),
            &ClassTaxonomy::kdd(),
            &LoadOptions::default(),
        )
        .unwrap()
        .0
    }

    fn line(src_bytes: u32, label: &str) -> String {
        format!("0,tcp,http,SF,{src_bytes},0,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,1,1,0,0,0,0,1,0,0,1,1,1,0,0,0,0,0,0,0,{label}.")
    }

    #[test]
    fn five_records_with_two_copies_of_the_first() {
        let l1 = line(100, "normal");
        let l3 = line(200, "smurf");
        let l5 = line(300, "normal");
        let ds = fixture(&[&l1, &l1, &l3, &l1, &l5]);
        let out = dedupe(&ds);
        // pairwise oracle: a record survives iff no earlier record equals it
        let expected: Vec<usize> = (0..ds.len())
            .filter(|&i| (0..i).all(|j| ds.records()[j] != ds.records()[i]))
            .collect();
        assert_eq!(expected, [0, 2, 4]);
        assert_eq!(out, ds.select(&expected));
        assert!((reduction_rate(5, 3) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn label_is_part_of_the_key() {
        let ds = fixture(&[&line(1, "normal"), &line(1, "smurf")]);
        assert_eq!(dedupe(&ds).len(), 2);
    }

    #[test]
    fn no_duplicates_is_identity() {
        let ds = fixture(&[&line(1, "normal"), &line(2, "normal"), &line(3, "neptune")]);
        assert_eq!(dedupe(&ds), ds);
        assert_eq!(reduction_rate(0, 0), 0.0);
    }

    #[test]
    fn default_prune_gives_35_features() {
        let ds = fixture(&[&line(1, "normal"), &line(2, "smurf")]);
        let names: Vec<String> = DEFAULT_PRUNED_FEATURES
            .iter()
            .map(|s| s.to_string())
            .collect();
        let out = prune_features(&ds, &names).unwrap();
        assert_eq!(out.schema().len(), 35);
        assert_eq!(out.len(), ds.len());
        assert_eq!(out.classes(), ds.classes());
        assert!(out.schema().index_of("land").is_none());
        let sb = out.schema().index_of("src_bytes").unwrap();
        assert_eq!(out.records()[1].values()[sb], 2.0);
        for (i, f) in out.schema().features().iter().enumerate() {
            assert_eq!(f.index, i);
        }
    }

    #[test]
    fn empty_prune_is_identity_and_unknown_name_errors() {
        let ds = fixture(&[&line(1, "normal")]);
        assert_eq!(prune_features(&ds, &[]).unwrap(), ds);
        assert_eq!(
            prune_features(&ds, &["bogus".to_string()]),
            Err(PreprocessError::UnknownFeatureName("bogus".into()))
        );
    }

    #[test]
    fn select_keeps_schema_order() {
        let ds = fixture(&[&line(7, "normal")]);
        let names = ["src_bytes".to_string(), "service".to_string()];
        let out = select_features(&ds, &names).unwrap();
        let got: Vec<&str> = out.schema().names().collect();
        assert_eq!(got, ["service", "src_bytes"]);
        assert_eq!(out.records()[0].values()[1], 7.0);
    }

    proptest! {
        #[test]
        fn dedupe_idempotent_and_matches_set_oracle(
            rows in proptest::collection::vec((0u32..4, 0usize..3), 0..60)
        ) {
            let labels = ["normal", "smurf", "satan"];
            let lines: Vec<String> = rows.iter().map(|&(v, l)| line(v, labels[l])).collect();
            let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
            let ds = fixture(&refs);
            let once = dedupe(&ds);
            prop_assert_eq!(&dedupe(&once), &once);

            let unique: std::collections::BTreeSet<(u32, usize)> = rows.iter().copied().collect();
            prop_assert_eq!(once.len(), unique.len());
            let mut hist = [0usize; 5];
            for &(_, l) in &unique {
                let c = ClassTaxonomy::kdd().classify(labels[l]).unwrap();
                hist[c.index()] += 1;
            }
            prop_assert_eq!(once.class_counts().0, hist);
            prop_assert!(once.class_counts()[AttackClass::U2R] == 0);
        }
    }
}
