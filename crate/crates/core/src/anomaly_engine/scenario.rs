use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AnomalyError, AnomalyEvent, EventKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    Benign,
    HelloFlood,
    SelectiveForwarding,
    Sinkhole,
    Modification,
    Replay,
    Sybil,
    Jamming,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Benign,
        Scenario::HelloFlood,
        Scenario::SelectiveForwarding,
        Scenario::Sinkhole,
        Scenario::Modification,
        Scenario::Replay,
        Scenario::Sybil,
        Scenario::Jamming,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Benign => "benign",
            Scenario::HelloFlood => "hello-flood",
            Scenario::SelectiveForwarding => "selective-forwarding",
            Scenario::Sinkhole => "sinkhole",
            Scenario::Modification => "modification",
            Scenario::Replay => "replay",
            Scenario::Sybil => "sybil",
            Scenario::Jamming => "jamming",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = AnomalyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| AnomalyError::UnknownScenario(s.to_string()))
    }
}

const SOURCES: u32 = 6;
const DURATION: f64 = 120.0;
const ATTACKER: u32 = 99;

fn hop(source: u32) -> u32 {
    100 + source % 3
}

fn rssi(rng: &mut ChaCha8Rng) -> f64 {
    (rng.gen_range(-85.0..-35.0f64) * 10.0).round() / 10.0
}

fn round_ms(t: f64) -> f64 {
    (t * 1000.0).round() / 1000.0
}

/// Deterministic synthetic stream for a scenario.
///
/// Six sources each send a message every 2-5 s through a fixed next hop,
/// which forwards it 50-500 ms later; a collision happens now and then. Attack
/// scenarios perturb this traffic so that their rule is violated.
pub fn generate_stream(scenario: Scenario, seed: u64) -> Vec<AnomalyEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000_0000_0000);
    let mut events = Vec::new();
    let mut msg_counter: u64 = 0;
    let mut next_msg = || {
        msg_counter += 1;
        msg_counter
    };

    for source in 1..=SOURCES {
        let mut t = rng.gen_range(0.0..3.0);
        while t < DURATION {
            let msg = next_msg();
            let digest = rng.gen::<u64>();
            let mut neighbor = hop(source);
            if scenario == Scenario::Sinkhole && source % 2 == 0 {
                neighbor = ATTACKER;
            }
            let rec = AnomalyEvent {
                timestamp: round_ms(t),
                source,
                neighbor,
                kind: EventKind::Reception,
                msg_id: msg,
                digest,
                rssi: rssi(&mut rng),
            };
            events.push(rec);

            let mut forward_delay = Some(rng.gen_range(0.05..0.5));
            let mut fwd_digest = digest;
            match scenario {
                Scenario::SelectiveForwarding if neighbor == hop(3) && rng.gen_bool(0.5) => {
                    forward_delay = None;
                }
                Scenario::Sinkhole if neighbor == ATTACKER => {
                    forward_delay = if rng.gen_bool(0.6) {
                        None
                    } else {
                        Some(rng.gen_range(1.2..1.9))
                    };
                }
                Scenario::Modification if source == 2 && rng.gen_bool(0.5) => {
                    fwd_digest = digest ^ 0xff;
                }
                _ => {}
            }
            if let Some(d) = forward_delay {
                events.push(AnomalyEvent {
                    timestamp: round_ms(t + d),
                    kind: EventKind::ForwardObserved,
                    digest: fwd_digest,
                    rssi: rssi(&mut rng),
                    ..rec
                });
            }

            if scenario == Scenario::Sybil && source == 4 && rng.gen_bool(0.3) {
                for k in 0..3 {
                    let at = t + 0.01 * (k + 1) as f64;
                    let ghost = AnomalyEvent {
                        timestamp: round_ms(at),
                        neighbor: 200 + k,
                        rssi: rssi(&mut rng),
                        ..rec
                    };
                    events.push(ghost);
                    events.push(AnomalyEvent {
                        timestamp: round_ms(at + 0.1),
                        kind: EventKind::ForwardObserved,
                        ..ghost
                    });
                }
            }
            if scenario == Scenario::Replay && source == 5 && rng.gen_bool(0.3) {
                // the same message resent right after its first delivery
                for k in 0..4 {
                    let at = t + 0.6 + 0.6 * k as f64;
                    if at >= DURATION {
                        break;
                    }
                    let copy = AnomalyEvent {
                        timestamp: round_ms(at),
                        rssi: rssi(&mut rng),
                        ..rec
                    };
                    events.push(copy);
                    events.push(AnomalyEvent {
                        timestamp: round_ms(at + 0.1),
                        kind: EventKind::ForwardObserved,
                        ..copy
                    });
                }
                t += 0.6 * 4.0;
            }
            t += rng.gen_range(2.0..5.0);
        }
    }

    // background collisions, at most one per 10 s
    let mut t = rng.gen_range(0.0..10.0);
    while t < DURATION {
        events.push(collision(t, &mut rng));
        t += rng.gen_range(10.0..20.0);
    }

    match scenario {
        Scenario::HelloFlood => {
            let start = rng.gen_range(20.0..60.0);
            for k in 0..40 {
                let msg = next_msg();
                let rec = AnomalyEvent {
                    timestamp: round_ms(start + 0.1 * k as f64),
                    source: ATTACKER,
                    neighbor: ATTACKER,
                    kind: EventKind::Reception,
                    msg_id: msg,
                    digest: rng.gen(),
                    rssi: -10.0,
                };
                events.push(rec);
                events.push(AnomalyEvent {
                    timestamp: round_ms(rec.timestamp + 0.05),
                    kind: EventKind::ForwardObserved,
                    ..rec
                });
            }
        }
        Scenario::Jamming => {
            for _ in 0..3 {
                let start = rng.gen_range(10.0..100.0);
                for k in 0..12 {
                    events.push(collision(start + 0.15 * k as f64, &mut rng));
                }
            }
        }
        _ => {}
    }

    events.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    events
}

fn collision(t: f64, rng: &mut ChaCha8Rng) -> AnomalyEvent {
    AnomalyEvent {
        timestamp: round_ms(t),
        source: 0,
        neighbor: 0,
        kind: EventKind::Collision,
        msg_id: 0,
        digest: 0,
        rssi: rssi(rng),
    }
}
