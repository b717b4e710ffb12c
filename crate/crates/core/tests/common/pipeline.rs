//! Contract checks for the two-stage pipeline on labeled synthetic records.

use chids_core::anomaly_engine::{
    evaluate_stream, generate_stream, RuleConfig, Scenario, VerdictIndex,
};
use chids_core::hybrid_pipeline::{
    alerts, run_pipeline, AlertContext, CountingClassifier, DecisionPolicy, Disposition, Outcome,
    PipelineConfig, Stage,
};
use chids_core::kdd_data::synthetic::{generate_text, SyntheticSpec};
use chids_core::kdd_data::{
    parse_dataset, AttackClass, ClassTaxonomy, Dataset, FeatureSchema, LoadOptions,
};
use chids_core::misuse_learner::{train_part, Classifier, DetectionModel, LearnerParams};
use chids_core::preprocess::{apply_normalizer, fit_normalizer, select_features};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FEATURES: [&str; 4] = [
    "service",
    "src_bytes",
    "diff_srv_rate",
    "dst_host_diff_srv_rate",
];

/// A labeled fixture and a PART model trained on half of it.
pub fn fixture(records: usize, seed: u64) -> (Dataset, DetectionModel) {
    let text = generate_text(&SyntheticSpec::small(records, seed));
    let (ds, _) = parse_dataset(
        &text,
        FeatureSchema::kdd(),
        &ClassTaxonomy::kdd(),
        &LoadOptions::default(),
    )
    .unwrap();
    let half: Vec<usize> = (0..ds.len()).step_by(2).collect();
    let names: Vec<String> = FEATURES.iter().map(|s| s.to_string()).collect();
    let train = select_features(&ds.select(&half), &names).unwrap();
    let stats = fit_normalizer(&train).unwrap();
    let rules = train_part(
        &apply_normalizer(&train, &stats).unwrap(),
        &LearnerParams::default(),
    )
    .unwrap();
    let model = DetectionModel::new(train.schema().clone(), stats, rules).unwrap();
    (ds, model)
}

fn expected(
    flagged: bool,
    predicted: Option<AttackClass>,
    policy: DecisionPolicy,
) -> (Outcome, Stage) {
    match (flagged, predicted) {
        (false, _) => (Outcome::PassedNormal, Stage::Anomaly),
        (true, Some(AttackClass::Normal)) if policy == DecisionPolicy::TrustMisuse => {
            (Outcome::ClassifiedNormal, Stage::Decision)
        }
        (true, Some(AttackClass::Normal)) => (Outcome::UnresolvedAlert, Stage::Decision),
        (true, Some(c)) => (Outcome::ClassifiedAttack(c), Stage::Misuse),
        (true, None) => unreachable!(),
    }
}

/// Call count, conservation, per-record outcome and alert recount for one run.
fn check_run(
    ds: &Dataset,
    model: &dyn Classifier,
    index: &VerdictIndex,
    policy: DecisionPolicy,
) -> Result<Vec<Disposition>, String> {
    let counter = CountingClassifier::new(Wrap(model));
    let cfg = PipelineConfig {
        policy,
        ..PipelineConfig::default()
    };
    let d = run_pipeline(ds.records(), index, &counter, &cfg).map_err(|e| e.to_string())?;
    if counter.calls() != index.len() {
        return Err(format!(
            "{} model calls for {} flagged records",
            counter.calls(),
            index.len()
        ));
    }
    if d.len() != ds.len() || d.iter().enumerate().any(|(i, x)| x.record != i) {
        return Err("dispositions do not cover the records one to one".into());
    }
    let mut by_outcome = [0usize; 4];
    for (i, x) in d.iter().enumerate() {
        let flagged = index.is_flagged(i);
        let predicted = flagged.then(|| model.classify(&ds.records()[i]));
        if (x.outcome, x.stage) != expected(flagged, predicted, policy) {
            return Err(format!("record {i}: {:?} at {:?}", x.outcome, x.stage));
        }
        if x.outcome == Outcome::ClassifiedAttack(AttackClass::Normal) {
            return Err(format!("record {i}: attack outcome carrying Normal"));
        }
        by_outcome[match x.outcome {
            Outcome::PassedNormal => 0,
            Outcome::ClassifiedAttack(_) => 1,
            Outcome::ClassifiedNormal => 2,
            Outcome::UnresolvedAlert => 3,
        }] += 1;
    }
    if by_outcome.iter().sum::<usize>() != ds.len() {
        return Err("outcome partition is not exhaustive".into());
    }
    let log = alerts(&d, &AlertContext::default());
    if log.len() != by_outcome[1] + by_outcome[3] {
        return Err(format!(
            "{} alerts, recount {}",
            log.len(),
            by_outcome[1] + by_outcome[3]
        ));
    }
    Ok(d)
}

struct Wrap<'a>(&'a dyn Classifier);

impl Classifier for Wrap<'_> {
    fn classify(&self, r: &chids_core::kdd_data::KddRecord) -> AttackClass {
        self.0.classify(r)
    }

    fn input_width(&self) -> Option<usize> {
        self.0.input_width()
    }
}

/// Invocation count equals flagged count, dispositions partition the input,
/// and with a perfect anomaly stage the end-to-end detection count equals the
/// classifier's own detection count on the attacks.
pub fn check_pipeline_contract(trials: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let (ds, model) = fixture(rng.gen_range(300..700), rng.gen());
        let bound = model.bind(ds.schema()).map_err(|e| e.to_string())?;
        let p = rng.gen_range(0.0..1.0);
        let flags: Vec<bool> = (0..ds.len()).map(|_| rng.gen_bool(p)).collect();
        for policy in [DecisionPolicy::AlertUnresolved, DecisionPolicy::TrustMisuse] {
            check_run(&ds, &bound, &VerdictIndex::from_flags(&flags), policy)
                .map_err(|e| format!("trial {trial} random flags: {e}"))?;

            let perfect = VerdictIndex::from_flags(
                &ds.classes()
                    .iter()
                    .map(|c| c.is_attack())
                    .collect::<Vec<_>>(),
            );
            let d = check_run(&ds, &bound, &perfect, policy)
                .map_err(|e| format!("trial {trial} perfect: {e}"))?;
            let end_to_end = d
                .iter()
                .filter(|x| ds.classes()[x.record].is_attack() && x.outcome.is_detection())
                .count();
            let alone = ds
                .iter()
                .filter(|(r, c)| c.is_attack() && bound.classify(r) != AttackClass::Normal)
                .count();
            if end_to_end != alone {
                return Err(format!(
                    "trial {trial}: end-to-end detects {end_to_end}, classifier alone {alone}"
                ));
            }
        }
    }

    // records aligned with generated event streams
    let (ds, model) = fixture(600, seed);
    let bound = model.bind(ds.schema()).map_err(|e| e.to_string())?;
    for sc in Scenario::ALL {
        let events = generate_stream(sc, seed);
        let n = events.len().min(ds.len());
        let v = evaluate_stream(&events[..n], &RuleConfig::default()).map_err(|e| e.to_string())?;
        let idx = VerdictIndex::from_verdicts(&v);
        let prefix = ds.select(&(0..n).collect::<Vec<_>>());
        check_run(&prefix, &bound, &idx, DecisionPolicy::AlertUnresolved)
            .map_err(|e| format!("{sc}: {e}"))?;
    }

    // five of a hundred flagged
    let mut flags = vec![false; 100];
    for i in [3, 17, 42, 77, 99] {
        flags[i] = true;
    }
    let hundred = ds.select(&(0..100).collect::<Vec<_>>());
    let counter = CountingClassifier::new(bound);
    run_pipeline(
        hundred.records(),
        &VerdictIndex::from_flags(&flags),
        &counter,
        &PipelineConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    if counter.calls() != 5 {
        return Err(format!("{} calls for 5 flagged records", counter.calls()));
    }
    Ok(())
}
