use std::collections::HashMap;

use super::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Numeric,
    Nominal,
}

/// Admissible symbols of a nominal feature, in first-seen order.
///
/// The position of a symbol in the domain is its code; codes are stored in
/// record values as exact small integers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolDomain {
    symbols: Vec<String>,
    lookup: HashMap<String, u32>,
}

impl SymbolDomain {
    pub fn from_symbols<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut domain = SymbolDomain::default();
        for s in symbols {
            domain.intern(&s.into());
        }
        domain
    }

    pub fn code(&self, symbol: &str) -> Option<u32> {
        self.lookup.get(symbol).copied()
    }

    pub fn symbol(&self, code: u32) -> Option<&str> {
        self.symbols.get(code as usize).map(String::as_str)
    }

    /// Returns the code of `symbol`, adding it to the domain if unseen.
    pub fn intern(&mut self, symbol: &str) -> u32 {
        if let Some(code) = self.lookup.get(symbol) {
            return *code;
        }
        let code = self.symbols.len() as u32;
        self.symbols.push(symbol.to_string());
        self.lookup.insert(symbol.to_string(), code);
        code
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureDef {
    pub index: usize,
    pub name: String,
    pub kind: FeatureKind,
    /// Empty for numeric features.
    pub domain: SymbolDomain,
}

impl FeatureDef {
    pub fn is_nominal(&self) -> bool {
        self.kind == FeatureKind::Nominal
    }
}

/// Ordered feature layout of a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    features: Vec<FeatureDef>,
}

/// The 41 connection features of the KDD Cup '99 record format, in file order.
pub const KDD_FEATURES: [(&str, FeatureKind); 41] = {
    use FeatureKind::{Nominal as S, Numeric as N};
    [
        ("duration", N),
        ("protocol_type", S),
        ("service", S),
        ("flag", S),
        ("src_bytes", N),
        ("dst_bytes", N),
        ("land", S),
        ("wrong_fragment", N),
        ("urgent", N),
        ("hot", N),
        ("num_failed_logins", N),
        ("logged_in", S),
        ("num_compromised", N),
        ("root_shell", N),
        ("su_attempted", N),
        ("num_root", N),
        ("num_file_creations", N),
        ("num_shells", N),
        ("num_access_files", N),
        ("num_outbound_cmds", N),
        ("is_host_login", S),
        ("is_guest_login", S),
        ("count", N),
        ("srv_count", N),
        ("serror_rate", N),
        ("srv_serror_rate", N),
        ("rerror_rate", N),
        ("srv_rerror_rate", N),
        ("same_srv_rate", N),
        ("diff_srv_rate", N),
        ("srv_diff_host_rate", N),
        ("dst_host_count", N),
        ("dst_host_srv_count", N),
        ("dst_host_same_srv_rate", N),
        ("dst_host_diff_srv_rate", N),
        ("dst_host_same_src_port_rate", N),
        ("dst_host_srv_diff_host_rate", N),
        ("dst_host_serror_rate", N),
        ("dst_host_srv_serror_rate", N),
        ("dst_host_rerror_rate", N),
        ("dst_host_srv_rerror_rate", N),
    ]
};

/// Features that carry no discriminating information in the KDD 10% file and
/// are dropped before ranking.
pub const DEFAULT_PRUNED_FEATURES: [&str; 6] = [
    "is_host_login",
    "num_outbound_cmds",
    "urgent",
    "su_attempted",
    "land",
    "num_failed_logins",
];

impl FeatureSchema {
    /// The standard 41-feature KDD schema with empty nominal domains.
    pub fn kdd() -> Self {
        Self::from_defs(
            KDD_FEATURES
                .iter()
                .map(|(name, kind)| (name.to_string(), *kind, SymbolDomain::default())),
        )
        .expect("static KDD schema is well formed")
    }

    /// Builds a schema from `(name, kind, domain)` triples; indices are assigned
    /// in iteration order.
    pub fn from_defs<I>(defs: I) -> Result<Self, DataError>
    where
        I: IntoIterator<Item = (String, FeatureKind, SymbolDomain)>,
    {
        let mut features = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (index, (name, kind, domain)) in defs.into_iter().enumerate() {
            if !seen.insert(name.clone()) {
                return Err(DataError::DuplicateFeature(name));
            }
            features.push(FeatureDef {
                index,
                name,
                kind,
                domain,
            });
        }
        Ok(FeatureSchema { features })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn features(&self) -> &[FeatureDef] {
        &self.features
    }

    pub fn feature(&self, index: usize) -> &FeatureDef {
        &self.features[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    pub(crate) fn domain_mut(&mut self, index: usize) -> &mut SymbolDomain {
        &mut self.features[index].domain
    }

    /// Keeps the features at `indices` (which must be ascending), re-indexing them.
    pub fn project(&self, indices: &[usize]) -> FeatureSchema {
        let features = indices
            .iter()
            .enumerate()
            .map(|(new_index, &old)| FeatureDef {
                index: new_index,
                ..self.features[old].clone()
            })
            .collect();
        FeatureSchema { features }
    }

    /// True when both schemas have the same names and kinds in the same order.
    /// Domains may differ (they grow during open-world ingest).
    pub fn is_compatible(&self, other: &FeatureSchema) -> bool {
        self.len() == other.len()
            && self
                .features
                .iter()
                .zip(&other.features)
                .all(|(a, b)| a.name == b.name && a.kind == b.kind)
    }
}
