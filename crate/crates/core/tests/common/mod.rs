#![allow(dead_code)]

pub mod oracles;
pub mod pipeline;
pub mod replayer;

use chids_core::kdd_data::{
    AttackClass, Dataset, FeatureKind, FeatureSchema, KddRecord, SymbolDomain,
};

/// Dataset from `(name, nominal symbols or empty for numeric)` columns and
/// `(values, class)` rows.
pub fn dataset(cols: &[(&str, &[&str])], rows: &[(Vec<f64>, AttackClass)]) -> Dataset {
    let schema = FeatureSchema::from_defs(cols.iter().map(|(name, syms)| {
        if syms.is_empty() {
            (
                name.to_string(),
                FeatureKind::Numeric,
                SymbolDomain::default(),
            )
        } else {
            (
                name.to_string(),
                FeatureKind::Nominal,
                SymbolDomain::from_symbols(syms.iter().copied()),
            )
        }
    }))
    .unwrap();
    let records = rows
        .iter()
        .map(|(v, c)| KddRecord::new(v.clone(), c.as_str()))
        .collect();
    let classes = rows.iter().map(|(_, c)| *c).collect();
    Dataset::from_parts(schema, records, classes).unwrap()
}

pub fn class(i: usize) -> AttackClass {
    AttackClass::from_index(i).unwrap()
}
