use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;

/// Traffic category of a connection record. The declaration order is the
/// fixed class order used for every tie-break in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttackClass {
    Normal,
    DoS,
    Probe,
    R2L,
    U2R,
}

impl AttackClass {
    pub const COUNT: usize = 5;
    pub const ALL: [AttackClass; 5] = [
        AttackClass::Normal,
        AttackClass::DoS,
        AttackClass::Probe,
        AttackClass::R2L,
        AttackClass::U2R,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<AttackClass> {
        Self::ALL.get(i).copied()
    }

    pub fn is_attack(self) -> bool {
        self != AttackClass::Normal
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AttackClass::Normal => "Normal",
            AttackClass::DoS => "DoS",
            AttackClass::Probe => "Probe",
            AttackClass::R2L => "R2L",
            AttackClass::U2R => "U2R",
        }
    }
}

impl fmt::Display for AttackClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackClass {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| DataError::UnknownClass(s.to_string()))
    }
}

/// The 23 raw KDD Cup '99 labels and their traffic class.
///
/// `buffer_overflow` is a user-to-root exploit and `ftp_write` a
/// remote-to-local one; this is the assignment under which the class totals of
/// the 10% file come out as 52 U2R and 1,126 R2L records.
pub const KDD_LABELS: [(&str, AttackClass); 23] = [
    ("normal", AttackClass::Normal),
    ("back", AttackClass::DoS),
    ("land", AttackClass::DoS),
    ("neptune", AttackClass::DoS),
    ("pod", AttackClass::DoS),
    ("smurf", AttackClass::DoS),
    ("teardrop", AttackClass::DoS),
    ("ipsweep", AttackClass::Probe),
    ("nmap", AttackClass::Probe),
    ("portsweep", AttackClass::Probe),
    ("satan", AttackClass::Probe),
    ("ftp_write", AttackClass::R2L),
    ("guess_passwd", AttackClass::R2L),
    ("imap", AttackClass::R2L),
    ("multihop", AttackClass::R2L),
    ("phf", AttackClass::R2L),
    ("spy", AttackClass::R2L),
    ("warezclient", AttackClass::R2L),
    ("warezmaster", AttackClass::R2L),
    ("buffer_overflow", AttackClass::U2R),
    ("loadmodule", AttackClass::U2R),
    ("perl", AttackClass::U2R),
    ("rootkit", AttackClass::U2R),
];

/// Mapping from raw label to [`AttackClass`].
#[derive(Debug, Clone)]
pub struct ClassTaxonomy {
    entries: Vec<(String, AttackClass)>,
}

impl Default for ClassTaxonomy {
    fn default() -> Self {
        Self::kdd()
    }
}

impl ClassTaxonomy {
    pub fn kdd() -> Self {
        ClassTaxonomy {
            entries: KDD_LABELS
                .iter()
                .map(|(l, c)| (l.to_string(), *c))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(l, _)| l.as_str())
    }

    /// Raw labels that belong to `class`, in table order.
    pub fn members(&self, class: AttackClass) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(_, c)| *c == class)
            .map(|(l, _)| l.as_str())
            .collect()
    }

    /// Case-insensitive lookup; a trailing period is ignored.
    pub fn classify(&self, label: &str) -> Result<AttackClass, DataError> {
        let key = label.trim().trim_end_matches('.').to_ascii_lowercase();
        self.entries
            .iter()
            .find(|(l, _)| *l == key)
            .map(|(_, c)| *c)
            .ok_or_else(|| DataError::UnknownLabel(label.to_string()))
    }
}

pub fn classify_label(label: &str, taxonomy: &ClassTaxonomy) -> Result<AttackClass, DataError> {
    taxonomy.classify(label)
}
