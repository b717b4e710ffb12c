use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{AnomalyError, AnomalyEvent, EventKind, RuleConfig, RuleId, RuleVerdict};

type LinkKey = (u32, u32, u64); // (neighbor, source, msg)
type MsgKey = (u32, u64); // (source, msg)

#[derive(Debug)]
struct Epoch {
    start: f64,
    digest: u64,
    receptions: usize,
    neighbors: BTreeSet<u32>,
}

/// Current amount of retained state, for memory-bound checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StateSizes {
    pub sources: usize,
    pub pending_forwards: usize,
    pub recent_receptions: usize,
    pub message_epochs: usize,
    pub collisions: usize,
}

impl StateSizes {
    /// Everything except the one-timestamp-per-source interval state.
    pub fn windowed(&self) -> usize {
        self.pending_forwards + self.recent_receptions + self.message_epochs + self.collisions
    }
}

/// Online evaluator. Verdicts are final once emitted; a reception whose
/// forwarding deadline has not yet passed when the stream ends is never
/// reported.
#[derive(Debug)]
pub struct AnomalyEngine {
    cfg: RuleConfig,
    seen: usize,
    last_time: f64,
    last_reception: HashMap<u32, f64>,
    pending: HashMap<LinkKey, Vec<usize>>,
    pending_queue: VecDeque<(f64, usize, LinkKey)>,
    recent: HashMap<LinkKey, f64>,
    recent_queue: VecDeque<(f64, LinkKey)>,
    epochs: HashMap<MsgKey, Epoch>,
    epoch_queue: VecDeque<(f64, MsgKey)>,
    collisions: VecDeque<f64>,
}

impl AnomalyEngine {
    pub fn new(cfg: RuleConfig) -> Result<Self, AnomalyError> {
        cfg.validate()?;
        Ok(AnomalyEngine {
            cfg,
            seen: 0,
            last_time: f64::NEG_INFINITY,
            last_reception: HashMap::new(),
            pending: HashMap::new(),
            pending_queue: VecDeque::new(),
            recent: HashMap::new(),
            recent_queue: VecDeque::new(),
            epochs: HashMap::new(),
            epoch_queue: VecDeque::new(),
            collisions: VecDeque::new(),
        })
    }

    pub fn state_sizes(&self) -> StateSizes {
        StateSizes {
            sources: self.last_reception.len(),
            pending_forwards: self.pending.values().map(Vec::len).sum(),
            recent_receptions: self.recent.len(),
            message_epochs: self.epochs.len(),
            collisions: self.collisions.len(),
        }
    }

    /// Feeds the next event; returns the verdicts that became final with it.
    pub fn push(&mut self, ev: &AnomalyEvent) -> Result<Vec<RuleVerdict>, AnomalyError> {
        let t = ev.timestamp;
        if t.is_nan() || t < self.last_time {
            return Err(AnomalyError::UnorderedStream {
                index: self.seen,
                timestamp: t,
            });
        }
        let idx = self.seen;
        self.seen += 1;
        self.last_time = t;
        let cfg = &self.cfg;
        let mut out = Vec::new();

        // receptions whose forwarding deadline has now passed
        while let Some(&(tr, i, key)) = self.pending_queue.front() {
            if t <= tr + cfg.retransmission_deadline {
                break;
            }
            self.pending_queue.pop_front();
            if let Some(list) = self.pending.get_mut(&key) {
                if let Some(p) = list.iter().position(|&j| j == i) {
                    list.swap_remove(p);
                    out.push(RuleVerdict {
                        event: i,
                        rule: RuleId::Retransmission,
                    });
                }
                if list.is_empty() {
                    self.pending.remove(&key);
                }
            }
        }
        out.sort_unstable();
        while let Some(&(tr, key)) = self.recent_queue.front() {
            if t - tr <= cfg.window {
                break;
            }
            self.recent_queue.pop_front();
            if self.recent.get(&key) == Some(&tr) {
                self.recent.remove(&key);
            }
        }
        while let Some(&(start, key)) = self.epoch_queue.front() {
            if start + cfg.window >= t {
                break;
            }
            self.epoch_queue.pop_front();
            if self.epochs.get(&key).is_some_and(|e| e.start == start) {
                self.epochs.remove(&key);
            }
        }
        while let Some(&tc) = self.collisions.front() {
            if tc > t - cfg.window {
                break;
            }
            self.collisions.pop_front();
        }

        let mut fire = |rule| out.push(RuleVerdict { event: idx, rule });
        let link: LinkKey = (ev.neighbor, ev.source, ev.msg_id);
        let msg: MsgKey = (ev.source, ev.msg_id);
        match ev.kind {
            EventKind::Collision => {
                self.collisions.push_back(t);
                if self.collisions.len() > cfg.collision_limit {
                    fire(RuleId::Jamming);
                }
            }
            EventKind::Reception | EventKind::ForwardObserved => {
                let reception = ev.kind == EventKind::Reception;
                if reception {
                    if let Some(prev) = self.last_reception.insert(ev.source, t) {
                        let gap = t - prev;
                        if gap < cfg.interval_lower || gap > cfg.interval_upper {
                            fire(RuleId::Interval);
                        }
                    }
                } else {
                    // the monitor overheard the neighbor forwarding
                    self.pending.remove(&link);
                }

                let fresh = match self.epochs.get(&msg) {
                    Some(e) => t > e.start + cfg.window,
                    None => true,
                };
                if fresh {
                    self.epochs.insert(
                        msg,
                        Epoch {
                            start: t,
                            digest: ev.digest,
                            receptions: 0,
                            neighbors: BTreeSet::new(),
                        },
                    );
                    self.epoch_queue.push_back((t, msg));
                }
                let epoch = self.epochs.get_mut(&msg).expect("epoch present");
                if ev.digest != epoch.digest {
                    fire(RuleId::Integrity);
                }
                if !reception {
                    if let Some(&tr) = self.recent.get(&link) {
                        if t - tr > cfg.delay_window {
                            fire(RuleId::Delay);
                        }
                    }
                }
                let mut crowded = false;
                if reception {
                    epoch.receptions += 1;
                    if epoch.receptions > cfg.repetition_limit {
                        fire(RuleId::Repetition);
                    }
                    epoch.neighbors.insert(ev.neighbor);
                    crowded = epoch.neighbors.len() > cfg.max_neighbors;
                }
                if crowded || ev.rssi < cfg.rssi_min || ev.rssi > cfg.rssi_max {
                    fire(RuleId::RadioRange);
                }
                if reception {
                    self.pending.entry(link).or_default().push(idx);
                    self.pending_queue.push_back((t, idx, link));
                    self.recent.insert(link, t);
                    self.recent_queue.push_back((t, link));
                }
            }
        }
        Ok(out)
    }
}

/// Evaluates a whole stream; verdicts come out in emission order.
pub fn evaluate_stream(
    events: &[AnomalyEvent],
    cfg: &RuleConfig,
) -> Result<Vec<RuleVerdict>, AnomalyError> {
    let mut engine = AnomalyEngine::new(cfg.clone())?;
    let mut out = Vec::new();
    for ev in events {
        out.extend(engine.push(ev)?);
    }
    Ok(out)
}
