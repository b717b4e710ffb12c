use std::fmt::Write as _;

use super::{AnomalyError, AnomalyEvent, RuleVerdict};

const EVENT_HEADER: &str = "timestamp\tsource\tneighbor\tkind\tmsg_id\tdigest\trssi";
const VERDICT_HEADER: &str = "event\trule\ttags";

/// Tab-separated events with a header line; digests in hex.
pub fn write_events(events: &[AnomalyEvent]) -> String {
    let mut out = format!("{EVENT_HEADER}\n");
    for e in events {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{:016x}\t{}",
            e.timestamp,
            e.source,
            e.neighbor,
            e.kind.as_str(),
            e.msg_id,
            e.digest,
            e.rssi
        );
    }
    out
}

pub fn parse_events(text: &str) -> Result<Vec<AnomalyEvent>, AnomalyError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty()
            || (i == 0 && line.starts_with("timestamp"))
            || line.starts_with('#')
        {
            continue;
        }
        let err = |message: String| AnomalyError::Parse {
            line: line_no,
            message,
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 7 {
            return Err(err(format!("expected 7 fields, found {}", f.len())));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("bad number {s:?}")))
        };
        let int = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| err(format!("bad integer {s:?}")))
        };
        out.push(AnomalyEvent {
            timestamp: num(f[0])?,
            source: int(f[1])? as u32,
            neighbor: int(f[2])? as u32,
            kind: f[3].parse().map_err(err)?,
            msg_id: int(f[4])?,
            digest: u64::from_str_radix(f[5], 16)
                .map_err(|_| err(format!("bad digest {:?}", f[5])))?,
            rssi: num(f[6])?,
        });
    }
    Ok(out)
}

pub fn write_verdicts(verdicts: &[RuleVerdict]) -> String {
    let mut out = format!("{VERDICT_HEADER}\n");
    for v in verdicts {
        let tags: Vec<&str> = v.tags().iter().map(|t| t.as_str()).collect();
        let _ = writeln!(out, "{}\t{}\t{}", v.event, v.rule, tags.join(","));
    }
    out
}

pub fn parse_verdicts(text: &str) -> Result<Vec<RuleVerdict>, AnomalyError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || (i == 0 && line.starts_with("event")) {
            continue;
        }
        let err = |message: String| AnomalyError::Parse {
            line: i + 1,
            message,
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() < 2 {
            return Err(err("expected event and rule".into()));
        }
        out.push(RuleVerdict {
            event: f[0]
                .parse()
                .map_err(|_| err(format!("bad event index {:?}", f[0])))?,
            rule: f[1].parse().map_err(err)?,
        });
    }
    Ok(out)
}
