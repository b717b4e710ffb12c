use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Disposition, Outcome, PipelineError, Stage};
use crate::anomaly_engine::{AnomalyEvent, AttackTag, RuleId, RuleVerdict};
use crate::kdd_data::AttackClass;

/// Where alert lines go. Written as `stdout`, `none` or a file path.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AlertSink {
    #[default]
    Stdout,
    Discard,
    File(PathBuf),
}

impl FromStr for AlertSink {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "" => Err("empty alert sink".into()),
            "stdout" | "-" => Ok(AlertSink::Stdout),
            "none" => Ok(AlertSink::Discard),
            path => Ok(AlertSink::File(PathBuf::from(path))),
        }
    }
}

impl TryFrom<String> for AlertSink {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<AlertSink> for String {
    fn from(s: AlertSink) -> String {
        s.to_string()
    }
}

impl fmt::Display for AlertSink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlertSink::Stdout => f.write_str("stdout"),
            AlertSink::Discard => f.write_str("none"),
            AlertSink::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Per-record facts carried into alert lines when the records came from an
/// event stream.
#[derive(Debug, Clone, Default)]
pub struct AlertContext {
    timestamps: Vec<f64>,
    rules: Vec<Vec<RuleId>>,
}

impl AlertContext {
    pub fn from_stream(events: &[AnomalyEvent], verdicts: &[RuleVerdict]) -> Self {
        let mut rules = vec![Vec::new(); events.len()];
        for v in verdicts {
            if let Some(r) = rules.get_mut(v.event) {
                r.push(v.rule);
            }
        }
        for r in &mut rules {
            r.sort_unstable();
            r.dedup();
        }
        AlertContext {
            timestamps: events.iter().map(|e| e.timestamp).collect(),
            rules,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alert {
    pub record: usize,
    pub stage: Stage,
    pub outcome: String,
    pub class: Option<AttackClass>,
    pub rules: Vec<RuleId>,
    pub tags: Vec<AttackTag>,
    pub timestamp: Option<f64>,
}

/// One alert per record whose outcome raises one, in record order.
pub fn alerts(dispositions: &[Disposition], ctx: &AlertContext) -> Vec<Alert> {
    dispositions
        .iter()
        .filter(|d| d.outcome.is_alert())
        .map(|d| {
            let rules = ctx.rules.get(d.record).cloned().unwrap_or_default();
            let mut tags: Vec<AttackTag> = rules
                .iter()
                .flat_map(|r| r.tags().iter().copied())
                .collect();
            tags.sort_unstable();
            tags.dedup();
            Alert {
                record: d.record,
                stage: d.stage,
                outcome: d.outcome.as_str().to_string(),
                class: match d.outcome {
                    Outcome::ClassifiedAttack(c) => Some(c),
                    _ => None,
                },
                rules,
                tags,
                timestamp: ctx.timestamps.get(d.record).copied(),
            }
        })
        .collect()
}

/// One JSON object per line.
pub fn write_alerts(alerts: &[Alert], out: &mut impl Write) -> io::Result<()> {
    for a in alerts {
        serde_json::to_writer(&mut *out, a)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Writes the alerts for `dispositions` to `sink`; returns how many.
pub fn emit_alerts(
    dispositions: &[Disposition],
    ctx: &AlertContext,
    sink: &AlertSink,
) -> Result<usize, PipelineError> {
    let list = alerts(dispositions, ctx);
    let unavailable = |e: io::Error| PipelineError::SinkUnavailable(format!("{sink}: {e}"));
    match sink {
        AlertSink::Discard => {}
        AlertSink::Stdout => write_alerts(&list, &mut io::stdout().lock()).map_err(unavailable)?,
        AlertSink::File(path) => {
            let f = File::create(path).map_err(unavailable)?;
            write_alerts(&list, &mut BufWriter::new(f)).map_err(unavailable)?;
        }
    }
    Ok(list.len())
}
