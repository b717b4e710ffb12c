//! First-line anomaly filter: seven threshold rules evaluated over a stream of
//! message events observed by a cluster head.
//!
//! Event model. A `Reception` says the monitor saw `neighbor` take delivery
//! of message `msg_id` originated by `source`; that neighbor is then expected
//! to forward it, which the monitor overhears as a `ForwardObserved` event
//! with the same (neighbor, source, msg_id). `Collision` events carry only a
//! timestamp that matters.

mod engine;
mod io;
mod scenario;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use engine::{evaluate_stream, AnomalyEngine, StateSizes};
pub use io::{parse_events, parse_verdicts, write_events, write_verdicts};
pub use scenario::{generate_stream, Scenario};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnomalyError {
    #[error("event {index} at t={timestamp} is earlier than its predecessor")]
    UnorderedStream { index: usize, timestamp: f64 },
    #[error("invalid rule configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    Reception,
    ForwardObserved,
    Collision,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Reception => "reception",
            EventKind::ForwardObserved => "forward",
            EventKind::Collision => "collision",
        }
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reception" => Ok(EventKind::Reception),
            "forward" => Ok(EventKind::ForwardObserved),
            "collision" => Ok(EventKind::Collision),
            _ => Err(format!("unknown event kind {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyEvent {
    /// Seconds; non-decreasing along a stream.
    pub timestamp: f64,
    pub source: u32,
    pub neighbor: u32,
    pub kind: EventKind,
    pub msg_id: u64,
    /// Opaque payload token compared for integrity.
    pub digest: u64,
    /// dBm.
    pub rssi: f64,
}

/// Thresholds of the seven rules. Defaults are harness values, not measured ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConfig {
    pub interval_lower: f64,
    pub interval_upper: f64,
    pub retransmission_deadline: f64,
    pub delay_window: f64,
    pub repetition_limit: usize,
    pub rssi_min: f64,
    pub rssi_max: f64,
    /// Distinct neighbors allowed to take delivery of one message.
    pub max_neighbors: usize,
    pub collision_limit: usize,
    /// Sliding window for collisions and lifetime of per-message state.
    pub window: f64,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            interval_lower: 0.5,
            interval_upper: 30.0,
            retransmission_deadline: 2.0,
            delay_window: 1.0,
            repetition_limit: 3,
            rssi_min: -95.0,
            rssi_max: -20.0,
            max_neighbors: 1,
            collision_limit: 5,
            window: 10.0,
        }
    }
}

impl RuleConfig {
    pub fn validate(&self) -> Result<(), AnomalyError> {
        let bad = |m: &str| Err(AnomalyError::InvalidConfig(m.to_string()));
        let finite = [
            self.interval_lower,
            self.interval_upper,
            self.retransmission_deadline,
            self.delay_window,
            self.rssi_min,
            self.rssi_max,
            self.window,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("thresholds must be finite");
        }
        if !(0.0 <= self.interval_lower && self.interval_lower < self.interval_upper) {
            return bad("interval band needs 0 <= lower < upper");
        }
        if self.rssi_min >= self.rssi_max {
            return bad("rssi band needs min < max");
        }
        if self.retransmission_deadline <= 0.0 || self.delay_window <= 0.0 || self.window <= 0.0 {
            return bad("deadline, delay window and window must be positive");
        }
        if self.repetition_limit == 0 || self.collision_limit == 0 || self.max_neighbors == 0 {
            return bad("limits must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleId {
    Interval,
    Retransmission,
    Integrity,
    Delay,
    Repetition,
    RadioRange,
    Jamming,
}

impl RuleId {
    pub const ALL: [RuleId; 7] = [
        RuleId::Interval,
        RuleId::Retransmission,
        RuleId::Integrity,
        RuleId::Delay,
        RuleId::Repetition,
        RuleId::RadioRange,
        RuleId::Jamming,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::Interval => "interval",
            RuleId::Retransmission => "retransmission",
            RuleId::Integrity => "integrity",
            RuleId::Delay => "delay",
            RuleId::Repetition => "repetition",
            RuleId::RadioRange => "radio_range",
            RuleId::Jamming => "jamming",
        }
    }

    /// Attacks a violation of this rule points to.
    pub fn tags(self) -> &'static [AttackTag] {
        use AttackTag::*;
        match self {
            RuleId::Interval => &[DoS, HelloFlood],
            RuleId::Retransmission => &[Sinkhole, SelectiveForwarding],
            RuleId::Integrity => &[ContentModification],
            RuleId::Delay => &[DoS],
            RuleId::Repetition => &[DoS],
            RuleId::RadioRange => &[Sybil, Wormhole, HelloFlood],
            RuleId::Jamming => &[Jamming],
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown rule {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttackTag {
    DoS,
    HelloFlood,
    Sinkhole,
    SelectiveForwarding,
    ContentModification,
    Sybil,
    Wormhole,
    Jamming,
}

impl AttackTag {
    pub fn as_str(self) -> &'static str {
        match self {
            AttackTag::DoS => "dos",
            AttackTag::HelloFlood => "hello_flood",
            AttackTag::Sinkhole => "sinkhole",
            AttackTag::SelectiveForwarding => "selective_forwarding",
            AttackTag::ContentModification => "content_modification",
            AttackTag::Sybil => "sybil",
            AttackTag::Wormhole => "wormhole",
            AttackTag::Jamming => "jamming",
        }
    }
}

impl fmt::Display for AttackTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A rule violation attributed to one event of the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleVerdict {
    /// Position of the offending event in the stream.
    pub event: usize,
    pub rule: RuleId,
}

impl RuleVerdict {
    pub fn tags(&self) -> &'static [AttackTag] {
        self.rule.tags()
    }
}

/// Which records drew at least one verdict.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerdictIndex {
    flagged: BTreeSet<usize>,
}

impl VerdictIndex {
    /// Record `i` is associated with event `i`.
    pub fn from_verdicts(verdicts: &[RuleVerdict]) -> Self {
        VerdictIndex {
            flagged: verdicts.iter().map(|v| v.event).collect(),
        }
    }

    pub fn from_flags(flags: &[bool]) -> Self {
        VerdictIndex {
            flagged: flags
                .iter()
                .enumerate()
                .filter(|(_, &f)| f)
                .map(|(i, _)| i)
                .collect(),
        }
    }

    pub fn is_flagged(&self, record: usize) -> bool {
        self.flagged.contains(&record)
    }

    pub fn len(&self) -> usize {
        self.flagged.len()
    }

    /// Highest flagged position.
    pub fn last(&self) -> Option<usize> {
        self.flagged.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.flagged.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.flagged.is_empty()
    }
}

/// Splits record positions into (passed as normal, forwarded to misuse detection).
pub fn filter_packets<T>(records: &[T], index: &VerdictIndex) -> (Vec<usize>, Vec<usize>) {
    (0..records.len()).partition(|&i| !index.is_flagged(i))
}
