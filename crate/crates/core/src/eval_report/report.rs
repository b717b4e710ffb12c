use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{ConfusionMatrix, EvalError, MetricsReport, Ratio};
use crate::feature_rank::{rank_report, FeatureScore, ScoreMethod};
use crate::kdd_data::AttackClass;
use crate::preprocess::SplitManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    TableText,
    Structured,
    PlotData,
}

/// Files whose content depends only on the inputs. `timing.tsv` is written
/// next to them but is not part of this list.
pub const REPORT_FILES: [&str; 6] = [
    "classifiers.txt",
    "split_summary.txt",
    "metrics.json",
    "feature_rank.tsv",
    "detection_rate.tsv",
    "false_alarm_rate.tsv",
];

pub const TIMING_FILE: &str = "timing.tsv";

#[derive(Debug, Clone, Serialize)]
pub struct ClassifierResult {
    pub name: String,
    pub matrix: ConfusionMatrix,
    pub metrics: MetricsReport,
    #[serde(skip)]
    pub train_seconds: Option<f64>,
    #[serde(skip)]
    pub test_seconds: Option<f64>,
}

impl ClassifierResult {
    pub fn new(name: impl Into<String>, matrix: ConfusionMatrix) -> Self {
        ClassifierResult {
            name: name.into(),
            metrics: MetricsReport::from_matrix(&matrix),
            matrix,
            train_seconds: None,
            test_seconds: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ReportInputs {
    pub split: Option<SplitManifest>,
    pub feature_scores: Vec<FeatureScore>,
    pub classifiers: Vec<ClassifierResult>,
}

/// Left-aligned first column, right-aligned others, two spaces apart.
fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let mut line = String::new();
        for (c, cell) in r.iter().enumerate() {
            if c == 0 {
                let _ = write!(line, "{cell:<w$}", w = widths[0]);
            } else {
                let _ = write!(line, "  {cell:>w$}", w = widths[c]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn pct(r: &Ratio) -> String {
    r.to_string()
}

/// Per-classifier table followed by each confusion matrix.
pub fn classifier_table(results: &[ClassifierResult]) -> String {
    let mut rows = vec![[
        "classifier",
        "detection_rate_%",
        "false_alarm_rate_%",
        "accuracy_%",
        "detected",
        "attacks",
        "missed",
        "false_alarms",
        "normals",
    ]
    .map(String::from)
    .to_vec()];
    for r in results {
        let m = &r.metrics;
        rows.push(vec![
            r.name.clone(),
            pct(&m.detection_rate),
            pct(&m.false_alarm_rate),
            pct(&m.accuracy),
            m.detected_attacks.to_string(),
            m.attacks.to_string(),
            m.missed_attacks.to_string(),
            m.false_alarms.to_string(),
            m.normals.to_string(),
        ]);
    }
    let mut out = aligned(&rows);
    for r in results {
        let _ = write!(
            out,
            "\nconfusion matrix: {} (rows actual, columns predicted)\n",
            r.name
        );
        let mut rows = vec![std::iter::once("actual".to_string())
            .chain(AttackClass::ALL.iter().map(|c| c.to_string()))
            .chain(["recall_%".to_string(), "precision_%".to_string()])
            .collect::<Vec<_>>()];
        for (c, cm) in AttackClass::ALL.iter().zip(&r.metrics.per_class) {
            rows.push(
                std::iter::once(c.to_string())
                    .chain(
                        AttackClass::ALL
                            .iter()
                            .map(|&p| r.matrix.get(*c, p).to_string()),
                    )
                    .chain([pct(&cm.recall), pct(&cm.precision)])
                    .collect(),
            );
        }
        out.push_str(&aligned(&rows));
    }
    out
}

/// Per-class sample counts and shares of both splits.
pub fn split_summary(manifest: Option<&SplitManifest>) -> String {
    let mut rows = vec!["category", "train", "train_%", "test", "test_%"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    let mut table = vec![std::mem::take(&mut rows)];
    if let Some(m) = manifest {
        let (train, test) = (m.train_counts(), m.test_counts());
        for c in AttackClass::ALL {
            table.push(vec![
                c.to_string(),
                train[c].to_string(),
                format!("{:.2}", train.ratio_percent(c)),
                test[c].to_string(),
                format!("{:.2}", test.ratio_percent(c)),
            ]);
        }
        let share = |n: usize| if n > 0 { "100.00" } else { "0.00" }.to_string();
        table.push(vec![
            "Total".into(),
            train.total().to_string(),
            share(train.total()),
            test.total().to_string(),
            share(test.total()),
        ]);
    }
    aligned(&table)
}

fn rate_tsv(
    results: &[ClassifierResult],
    pick: impl Fn(&MetricsReport) -> &Ratio,
    column: &str,
) -> String {
    let mut out = format!("classifier\t{column}\n");
    for r in results {
        let _ = writeln!(out, "{}\t{}", r.name, pick(&r.metrics));
    }
    out
}

/// Each method's ranking in turn under one header.
fn feature_rank_tsv(scores: &[FeatureScore]) -> String {
    let mut out = rank_report(&[]);
    for method in [ScoreMethod::ChiSquared, ScoreMethod::InfoGainRatio] {
        let of: Vec<FeatureScore> = scores
            .iter()
            .filter(|s| s.method == method)
            .cloned()
            .collect();
        for line in rank_report(&of).lines().skip(1) {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

fn timing_tsv(results: &[ClassifierResult]) -> String {
    let secs = |s: Option<f64>| s.map_or("-".to_string(), |v| format!("{v:.6}"));
    let mut out = String::from("classifier\ttrain_seconds\ttest_seconds\n");
    for r in results {
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            r.name,
            secs(r.train_seconds),
            secs(r.test_seconds)
        );
    }
    out
}

/// Writes the requested report files into `dir`; returns the names written.
pub fn emit_report(
    inputs: &ReportInputs,
    dir: &Path,
    formats: &[ReportFormat],
) -> Result<Vec<&'static str>, EvalError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| EvalError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut files: Vec<(&'static str, String)> = Vec::new();
    if formats.contains(&ReportFormat::TableText) {
        files.push(("classifiers.txt", classifier_table(&inputs.classifiers)));
        files.push(("split_summary.txt", split_summary(inputs.split.as_ref())));
    }
    if formats.contains(&ReportFormat::Structured) {
        let mut json = serde_json::to_string_pretty(inputs).expect("report serializes");
        json.push('\n');
        files.push(("metrics.json", json));
    }
    if formats.contains(&ReportFormat::PlotData) {
        files.push(("feature_rank.tsv", feature_rank_tsv(&inputs.feature_scores)));
        files.push((
            "detection_rate.tsv",
            rate_tsv(
                &inputs.classifiers,
                |m| &m.detection_rate,
                "detection_rate_%",
            ),
        ));
        files.push((
            "false_alarm_rate.tsv",
            rate_tsv(
                &inputs.classifiers,
                |m| &m.false_alarm_rate,
                "false_alarm_rate_%",
            ),
        ));
        files.push((TIMING_FILE, timing_tsv(&inputs.classifiers)));
    }
    let mut written = Vec::new();
    for (name, content) in files {
        let path = dir.join(name);
        fs::write(&path, content).map_err(io(&path))?;
        written.push(name);
    }
    Ok(written)
}
