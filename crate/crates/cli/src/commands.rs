use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chids_core::anomaly_engine::{
    evaluate_stream, generate_stream, parse_events, write_events, write_verdicts, Scenario,
    VerdictIndex,
};
use chids_core::eval_report::{
    emit_report, evaluate, ClassifierResult, ConfusionMatrix, ReportFormat, ReportInputs,
};
use chids_core::feature_rank::{
    discretize, mean_score, score_features, select_top_k, FeatureScore, ScoreMethod,
};
use chids_core::hybrid_pipeline::{
    emit_alerts, run_pipeline, write_dispositions, AlertContext, AlertSink, CountingClassifier,
    DispositionSummary, PipelineConfig,
};
use chids_core::kdd_data::{
    load_dataset, read_cache, write_cache, AttackClass, ClassTaxonomy, Dataset, FeatureSchema,
    KddRecord,
};
use chids_core::misuse_learner::{
    train_majority_baseline, train_part, Classifier, DetectionModel, RuleSet,
};
use chids_core::preprocess::{
    apply_normalizer, dedupe, fit_normalizer, prune_features, reduction_rate, select_features,
    stratified_split, NormalizationStats, SplitManifest,
};
use serde::{Deserialize, Serialize};

use crate::config::{AnomalyMode, RunConfig, SelectionMethod};
use crate::error::{Failure, Result};

/// Where each artifact lives under the output directory.
pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: &Path) -> Self {
        Layout {
            root: root.to_path_buf(),
        }
    }

    pub fn train_cache(&self) -> PathBuf {
        self.root.join("cache/train.cache")
    }

    pub fn test_cache(&self) -> PathBuf {
        self.root.join("cache/test.cache")
    }

    pub fn manifest_text(&self) -> PathBuf {
        self.root.join("manifest.txt")
    }

    pub fn manifest_json(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn feature_scores(&self) -> PathBuf {
        self.root.join("feature_scores.json")
    }

    pub fn selected(&self) -> PathBuf {
        self.root.join("selected_features.txt")
    }

    pub fn normalization(&self) -> PathBuf {
        self.root.join("normalization.json")
    }

    pub fn model(&self) -> PathBuf {
        self.root.join("model.txt")
    }

    pub fn evaluation(&self) -> PathBuf {
        self.root.join("evaluation.json")
    }

    pub fn timing(&self, stage: &str) -> PathBuf {
        self.root.join(format!("timing/{stage}.tsv"))
    }

    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }

    pub fn sim_dir(&self) -> PathBuf {
        self.root.join("sim")
    }

    pub fn detect_dir(&self) -> PathBuf {
        self.root.join("detect")
    }

    /// Effective configuration of the last run of `command`.
    pub fn run_config(&self, command: &str) -> PathBuf {
        self.root.join(format!("config/{command}.toml"))
    }
}

fn write(path: &Path, content: impl AsRef<[u8]>) -> Result<PathBuf> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    }
    fs::write(path, content).map_err(|e| Failure::io(path, e))?;
    Ok(path.to_path_buf())
}

fn read(path: &Path, producer: &str) -> Result<String> {
    if !path.exists() {
        return Err(Failure::missing(path, producer));
    }
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, producer: &str) -> Result<T> {
    serde_json::from_str(&read(path, producer)?)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializes");
    s.push('\n');
    s
}

fn cache(path: &Path, producer: &str) -> Result<Dataset> {
    if !path.exists() {
        return Err(Failure::missing(path, producer));
    }
    Ok(read_cache(path, &ClassTaxonomy::kdd())?)
}

fn save_config(layout: &Layout, cfg: &RunConfig, command: &str) -> Result<PathBuf> {
    write(&layout.run_config(command), cfg.to_toml())
}

/// Dedupe, split, prune, rank and select, normalize.
pub fn preprocess(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let layout = Layout::new(&cfg.out);
    let raw = load_dataset(&cfg.dataset, FeatureSchema::kdd(), &ClassTaxonomy::kdd())?;
    let unique = dedupe(&raw);
    let (train, test, manifest) = stratified_split(&unique, &cfg.split_spec())?;
    let train = prune_features(&train, &cfg.features.prune)?;
    let test = prune_features(&test, &cfg.features.prune)?;

    let disc = discretize(&train);
    let mut scores = score_features(&train, &disc, ScoreMethod::ChiSquared)?;
    scores.extend(score_features(&train, &disc, ScoreMethod::InfoGainRatio)?);
    let method = match cfg.features.method {
        SelectionMethod::Chi2 => ScoreMethod::ChiSquared,
        SelectionMethod::Igr => ScoreMethod::InfoGainRatio,
    };
    let by_method: Vec<FeatureScore> = scores
        .iter()
        .filter(|s| s.method == method)
        .cloned()
        .collect();
    let chosen = select_top_k(&by_method, cfg.features.k)?;

    let train = select_features(&train, &chosen)?;
    let test = select_features(&test, &chosen)?;
    let stats = fit_normalizer(&train)?;
    let train = apply_normalizer(&train, &stats)?;
    let test = apply_normalizer(&test, &stats)?;

    let mut text = String::new();
    let _ = writeln!(text, "dataset = {}", cfg.dataset.display());
    let _ = writeln!(text, "input_records = {}", raw.len());
    let _ = writeln!(text, "deduplicated_records = {}", unique.len());
    let _ = writeln!(
        text,
        "reduction_rate_percent = {:.2}",
        reduction_rate(raw.len(), unique.len()) * 100.0
    );
    for (c, n) in unique.class_counts().iter() {
        let _ = writeln!(text, "deduplicated.{c} = {n}");
    }
    text.push_str(&manifest.to_text());
    let igr: Vec<FeatureScore> = scores
        .iter()
        .filter(|s| s.method == ScoreMethod::InfoGainRatio)
        .cloned()
        .collect();
    let _ = writeln!(text, "mean_info_gain_ratio = {:.6}", mean_score(&igr));
    let _ = writeln!(text, "selected = {}", chosen.join(","));

    let mut written = Vec::new();
    for (path, ds) in [(layout.train_cache(), &train), (layout.test_cache(), &test)] {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        }
        write_cache(ds, &path)?;
        written.push(path);
    }
    written.push(write(&layout.manifest_text(), text)?);
    written.push(write(&layout.manifest_json(), to_json(&manifest))?);
    written.push(write(&layout.feature_scores(), to_json(&scores))?);
    written.push(write(&layout.selected(), chosen.join("\n") + "\n")?);
    written.push(write(&layout.normalization(), to_json(&stats))?);
    written.push(save_config(&layout, cfg, "preprocess")?);
    Ok(written)
}

pub fn train(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let layout = Layout::new(&cfg.out);
    let train = cache(&layout.train_cache(), "preprocess")?;
    let stats: NormalizationStats = read_json(&layout.normalization(), "preprocess")?;
    let start = Instant::now();
    let rules = train_part(&train, &cfg.learner)?;
    let secs = start.elapsed().as_secs_f64();
    let model = DetectionModel::new(train.schema().clone(), stats, rules)?;
    eprintln!(
        "trained {} rules on {} records in {secs:.3} s",
        model.rules.rules.len(),
        train.len()
    );
    Ok(vec![
        write(&layout.model(), model.to_text())?,
        write(
            &layout.timing("train"),
            format!("classifier\tseconds\npart\t{secs:.6}\n"),
        )?,
        save_config(&layout, cfg, "train")?,
    ])
}

/// Scores records that are already in model space (selected and normalized).
struct RulesOnCache<'a> {
    rules: &'a RuleSet,
    width: usize,
}

impl Classifier for RulesOnCache<'_> {
    fn classify(&self, record: &KddRecord) -> AttackClass {
        self.rules.predict_values(record.values())
    }

    fn input_width(&self) -> Option<usize> {
        Some(self.width)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct StoredResult {
    name: String,
    matrix: ConfusionMatrix,
}

pub fn evaluate_cmd(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let layout = Layout::new(&cfg.out);
    let model = DetectionModel::from_text(&read(&layout.model(), "train")?)?;
    let test = cache(&layout.test_cache(), "preprocess")?;
    let names: Vec<&str> = test.schema().names().collect();
    if names != model.schema.names().collect::<Vec<_>>() {
        return Err(Failure::data(
            "test cache features differ from the model's; rerun `chids train`",
        ));
    }
    let part = evaluate(
        &RulesOnCache {
            rules: &model.rules,
            width: names.len(),
        },
        &test,
    )?;
    let mut stored = vec![StoredResult {
        name: "part".into(),
        matrix: part.matrix,
    }];
    let mut timing = format!("classifier\tseconds\npart\t{:.6}\n", part.test_seconds);
    if layout.train_cache().exists() {
        let base = train_majority_baseline(&cache(&layout.train_cache(), "preprocess")?)?;
        let ev = evaluate(&base, &test)?;
        stored.push(StoredResult {
            name: "majority".into(),
            matrix: ev.matrix,
        });
        let _ = writeln!(timing, "majority\t{:.6}", ev.test_seconds);
    }
    let m = &part.metrics;
    eprintln!(
        "part: detection rate {}%, false alarm rate {}%, accuracy {}%",
        m.detection_rate, m.false_alarm_rate, m.accuracy
    );
    let mut written = vec![
        write(&layout.evaluation(), to_json(&stored))?,
        write(&layout.timing("test"), timing)?,
        save_config(&layout, cfg, "evaluate")?,
    ];
    written.extend(report(cfg)?);
    Ok(written)
}

fn read_timings(path: &Path) -> Vec<(String, f64)> {
    let Ok(text) = fs::read_to_string(path) else {
        return Vec::new();
    };
    text.lines()
        .skip(1)
        .filter_map(|l| {
            let (name, secs) = l.split_once('\t')?;
            Some((name.to_string(), secs.parse().ok()?))
        })
        .collect()
}

pub fn report(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let layout = Layout::new(&cfg.out);
    let stored: Vec<StoredResult> = read_json(&layout.evaluation(), "evaluate")?;
    let split: Option<SplitManifest> = if layout.manifest_json().exists() {
        Some(read_json(&layout.manifest_json(), "preprocess")?)
    } else {
        None
    };
    let feature_scores: Vec<FeatureScore> = if layout.feature_scores().exists() {
        read_json(&layout.feature_scores(), "preprocess")?
    } else {
        Vec::new()
    };
    let train_t = read_timings(&layout.timing("train"));
    let test_t = read_timings(&layout.timing("test"));
    let lookup =
        |t: &[(String, f64)], name: &str| t.iter().find(|(n, _)| n == name).map(|(_, s)| *s);
    let classifiers = stored
        .into_iter()
        .map(|s| {
            let mut r = ClassifierResult::new(&s.name, s.matrix);
            r.train_seconds = lookup(&train_t, &s.name);
            r.test_seconds = lookup(&test_t, &s.name);
            r
        })
        .collect();
    let inputs = ReportInputs {
        split,
        feature_scores,
        classifiers,
    };
    let dir = layout.report_dir();
    let names = emit_report(
        &inputs,
        &dir,
        &[
            ReportFormat::TableText,
            ReportFormat::Structured,
            ReportFormat::PlotData,
        ],
    )?;
    Ok(names.into_iter().map(|n| dir.join(n)).collect())
}

pub fn simulate(cfg: &RunConfig, scenario: &str) -> Result<Vec<PathBuf>> {
    let layout = Layout::new(&cfg.out);
    let scenario: Scenario = scenario.parse()?;
    let events = generate_stream(scenario, cfg.seed);
    let verdicts = evaluate_stream(&events, &cfg.rules)?;
    eprintln!(
        "{scenario}: {} events, {} verdicts",
        events.len(),
        verdicts.len()
    );
    let dir = layout.sim_dir();
    Ok(vec![
        write(
            &dir.join(format!("{scenario}.events.tsv")),
            write_events(&events),
        )?,
        write(
            &dir.join(format!("{scenario}.verdicts.tsv")),
            write_verdicts(&verdicts),
        )?,
        save_config(&layout, cfg, "simulate")?,
    ])
}

pub fn detect(cfg: &RunConfig, records: &Path, events: Option<&Path>) -> Result<Vec<PathBuf>> {
    let layout = Layout::new(&cfg.out);
    let model = DetectionModel::from_text(&read(&layout.model(), "train")?)?;
    let data = load_dataset(records, FeatureSchema::kdd(), &ClassTaxonomy::kdd())?;
    let dir = layout.detect_dir();
    let mut written = Vec::new();

    let (index, ctx) = match (cfg.pipeline.anomaly, events) {
        (AnomalyMode::Events, None) => return Err(Failure::config(
            "pipeline.anomaly = events needs --events (or set pipeline.anomaly to all or labels)",
        )),
        (AnomalyMode::Events, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            let stream = parse_events(&text)?;
            if stream.len() != data.len() {
                return Err(Failure::data(format!(
                    "{} events but {} records; record i is matched with event i",
                    stream.len(),
                    data.len()
                )));
            }
            let verdicts = evaluate_stream(&stream, &cfg.rules)?;
            written.push(write(&dir.join("verdicts.tsv"), write_verdicts(&verdicts))?);
            (
                VerdictIndex::from_verdicts(&verdicts),
                AlertContext::from_stream(&stream, &verdicts),
            )
        }
        (AnomalyMode::All, _) => (
            VerdictIndex::from_flags(&vec![true; data.len()]),
            AlertContext::default(),
        ),
        (AnomalyMode::Labels, _) => {
            let flags: Vec<bool> = data.classes().iter().map(|c| c.is_attack()).collect();
            (VerdictIndex::from_flags(&flags), AlertContext::default())
        }
    };

    let classifier = CountingClassifier::new(model.bind(data.schema())?);
    let pcfg = PipelineConfig {
        policy: cfg.pipeline.policy,
        sink: match cfg.pipeline.alerts.as_str() {
            "" => AlertSink::File(dir.join("alerts.jsonl")),
            s => s.parse().map_err(Failure::config)?,
        },
    };
    let dispositions = run_pipeline(data.records(), &index, &classifier, &pcfg)?;
    fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;
    let alerts = emit_alerts(&dispositions, &ctx, &pcfg.sink)?;
    if let AlertSink::File(p) = &pcfg.sink {
        written.push(p.clone());
    }
    let s = DispositionSummary::of(&dispositions);
    let mut summary = String::new();
    let _ = writeln!(summary, "records = {}", data.len());
    let _ = writeln!(summary, "flagged = {}", index.len());
    let _ = writeln!(summary, "misuse_invocations = {}", classifier.calls());
    let _ = writeln!(summary, "passed_normal = {}", s.passed_normal);
    let _ = writeln!(summary, "classified_attack = {}", s.classified_attack);
    for c in AttackClass::ALL.iter().filter(|c| c.is_attack()) {
        let _ = writeln!(
            summary,
            "classified_attack.{c} = {}",
            s.attacks_by_class[c.index()]
        );
    }
    let _ = writeln!(summary, "classified_normal = {}", s.classified_normal);
    let _ = writeln!(summary, "unresolved_alert = {}", s.unresolved_alert);
    let _ = writeln!(summary, "alerts = {alerts}");
    let _ = writeln!(summary, "policy = {}", cfg.pipeline.policy);
    written.push(write(
        &dir.join("dispositions.tsv"),
        write_dispositions(&dispositions),
    )?);
    written.push(write(&dir.join("summary.txt"), summary)?);
    written.push(save_config(&layout, cfg, "detect")?);
    eprintln!(
        "{} records, {} flagged, {} misuse invocations, {alerts} alerts",
        data.len(),
        index.len(),
        classifier.calls()
    );
    Ok(written)
}
