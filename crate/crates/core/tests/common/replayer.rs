//! Quadratic reference evaluation of the seven rules: every verdict is decided
//! by re-scanning the whole stream from the start.

use chids_core::anomaly_engine::{
    evaluate_stream, generate_stream, AnomalyEvent, EventKind, RuleConfig, RuleId, RuleVerdict,
    Scenario,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use EventKind::*;

fn carries_message(e: &AnomalyEvent) -> bool {
    e.kind != Collision
}

/// Index of the event opening the message epoch that `j` belongs to.
fn epoch_start(s: &[AnomalyEvent], j: usize, window: f64) -> usize {
    let same = |i: usize| {
        carries_message(&s[i]) && s[i].source == s[j].source && s[i].msg_id == s[j].msg_id
    };
    let mut start: Option<usize> = None;
    for i in 0..=j {
        if !same(i) {
            continue;
        }
        match start {
            Some(st) if s[i].timestamp <= s[st].timestamp + window => {}
            _ => start = Some(i),
        }
    }
    start.expect("j is in its own epoch")
}

pub fn replay(s: &[AnomalyEvent], cfg: &RuleConfig) -> Vec<RuleVerdict> {
    let mut out = Vec::new();
    for j in 0..s.len() {
        let e = &s[j];
        let t = e.timestamp;
        let mut fire = |rule| out.push(RuleVerdict { event: j, rule });
        if e.kind == Collision {
            let n = (0..=j)
                .filter(|&i| s[i].kind == Collision && s[i].timestamp > t - cfg.window)
                .count();
            if n > cfg.collision_limit {
                fire(RuleId::Jamming);
            }
            continue;
        }
        let link = |i: usize| {
            s[i].neighbor == e.neighbor && s[i].source == e.source && s[i].msg_id == e.msg_id
        };
        if e.kind == Reception {
            if let Some(i) = (0..j)
                .rev()
                .find(|&i| s[i].kind == Reception && s[i].source == e.source)
            {
                let gap = t - s[i].timestamp;
                if gap < cfg.interval_lower || gap > cfg.interval_upper {
                    fire(RuleId::Interval);
                }
            }
            let deadline_passed =
                (j + 1..s.len()).any(|k| s[k].timestamp > t + cfg.retransmission_deadline);
            let forwarded = (j + 1..s.len()).any(|f| {
                s[f].kind == ForwardObserved
                    && link(f)
                    && s[f].timestamp <= t + cfg.retransmission_deadline
            });
            if deadline_passed && !forwarded {
                fire(RuleId::Retransmission);
            }
        }
        let st = epoch_start(s, j, cfg.window);
        if e.digest != s[st].digest {
            fire(RuleId::Integrity);
        }
        if e.kind == ForwardObserved {
            let prev = (0..j).rev().find(|&i| s[i].kind == Reception && link(i));
            if let Some(i) = prev {
                let gap = t - s[i].timestamp;
                if gap <= cfg.window && gap > cfg.delay_window {
                    fire(RuleId::Delay);
                }
            }
        }
        let mut crowded = false;
        if e.kind == Reception {
            let in_epoch: Vec<usize> = (st..=j)
                .filter(|&i| {
                    s[i].kind == Reception
                        && s[i].source == e.source
                        && s[i].msg_id == e.msg_id
                        && epoch_start(s, i, cfg.window) == st
                })
                .collect();
            if in_epoch.len() > cfg.repetition_limit {
                fire(RuleId::Repetition);
            }
            let mut nbs: Vec<u32> = in_epoch.iter().map(|&i| s[i].neighbor).collect();
            nbs.sort_unstable();
            nbs.dedup();
            crowded = nbs.len() > cfg.max_neighbors;
        }
        if crowded || e.rssi < cfg.rssi_min || e.rssi > cfg.rssi_max {
            fire(RuleId::RadioRange);
        }
    }
    out.sort_unstable();
    out
}

/// Small id spaces and tight timing so every rule fires regularly.
pub fn random_stream(rng: &mut ChaCha8Rng, len: usize) -> Vec<AnomalyEvent> {
    let mut t = 0.0f64;
    (0..len)
        .map(|_| {
            t += [0.0, 0.05, 0.3, 0.7, 1.5, 3.0][rng.gen_range(0..6)];
            if rng.gen_bool(0.02) {
                t += 35.0;
            }
            let kind = match rng.gen_range(0..10) {
                0..=4 => Reception,
                5..=8 => ForwardObserved,
                _ => Collision,
            };
            AnomalyEvent {
                timestamp: t,
                source: rng.gen_range(0..3),
                neighbor: rng.gen_range(0..3),
                kind,
                msg_id: rng.gen_range(0..4),
                digest: if rng.gen_bool(0.9) { 1 } else { 2 },
                rssi: [-60.0, -96.0, -10.0, -95.0, -20.0][if rng.gen_bool(0.85) {
                    0
                } else {
                    rng.gen_range(1..5)
                }],
            }
        })
        .collect()
}

fn random_config(rng: &mut ChaCha8Rng) -> RuleConfig {
    if rng.gen_bool(0.5) {
        return RuleConfig::default();
    }
    RuleConfig {
        interval_lower: rng.gen_range(0.0..1.0),
        interval_upper: rng.gen_range(2.0..20.0),
        retransmission_deadline: rng.gen_range(0.5..4.0),
        delay_window: rng.gen_range(0.2..2.0),
        repetition_limit: rng.gen_range(1..4),
        max_neighbors: rng.gen_range(1..3),
        collision_limit: rng.gen_range(1..4),
        window: rng.gen_range(2.0..12.0),
        ..RuleConfig::default()
    }
}

/// Streaming verdicts against the replayer, plus prefix consistency.
pub fn check_against_replayer(streams: usize, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fired = [0usize; 7];
    for trial in 0..streams {
        let len = rng.gen_range(0..=120);
        let s = random_stream(&mut rng, len);
        let cfg = random_config(&mut rng);
        let got = evaluate_stream(&s, &cfg).map_err(|e| e.to_string())?;
        let mut sorted = got.clone();
        sorted.sort_unstable();
        let want = replay(&s, &cfg);
        for v in &want {
            fired[RuleId::ALL.iter().position(|&r| r == v.rule).unwrap()] += 1;
        }
        if sorted != want {
            return Err(format!(
                "stream {trial}: engine {sorted:?}\nreplayer {want:?}"
            ));
        }
        let mut dedup = sorted.clone();
        dedup.dedup();
        if dedup.len() != sorted.len() {
            return Err(format!("stream {trial}: duplicate verdicts"));
        }
        if len > 0 {
            let cut = rng.gen_range(0..len);
            let prefix = evaluate_stream(&s[..cut], &cfg).map_err(|e| e.to_string())?;
            if got[..prefix.len()] != prefix[..] {
                return Err(format!(
                    "stream {trial}: prefix of length {cut} is not consistent"
                ));
            }
        }
    }
    if streams >= 100 && fired.contains(&0) {
        return Err(format!("some rule never fired: {fired:?}"));
    }
    Ok(())
}

pub fn designated_rule(s: Scenario) -> Option<RuleId> {
    match s {
        Scenario::Benign => None,
        Scenario::HelloFlood => Some(RuleId::Interval),
        Scenario::SelectiveForwarding | Scenario::Sinkhole => Some(RuleId::Retransmission),
        Scenario::Modification => Some(RuleId::Integrity),
        Scenario::Replay => Some(RuleId::Repetition),
        Scenario::Sybil => Some(RuleId::RadioRange),
        Scenario::Jamming => Some(RuleId::Jamming),
    }
}

/// Every attack scenario fires its rule, benign fires nothing, and the
/// generated streams agree with the replayer.
pub fn check_scenarios(seeds: std::ops::Range<u64>) -> Result<(), String> {
    let cfg = RuleConfig::default();
    for seed in seeds {
        for sc in Scenario::ALL {
            let s = generate_stream(sc, seed);
            let v = evaluate_stream(&s, &cfg).map_err(|e| e.to_string())?;
            let mut sorted = v.clone();
            sorted.sort_unstable();
            if sorted != replay(&s, &cfg) {
                return Err(format!("{sc} seed {seed}: engine and replayer disagree"));
            }
            match designated_rule(sc) {
                None if !v.is_empty() => {
                    return Err(format!("benign seed {seed}: {} verdicts", v.len()))
                }
                Some(rule) if !v.iter().any(|x| x.rule == rule) => {
                    return Err(format!("{sc} seed {seed}: no {rule} verdict"));
                }
                _ => {}
            }
            if sc == Scenario::Jamming && v.iter().any(|x| x.rule == RuleId::Integrity) {
                return Err(format!("jamming seed {seed}: integrity verdict"));
            }
        }
    }
    Ok(())
}
