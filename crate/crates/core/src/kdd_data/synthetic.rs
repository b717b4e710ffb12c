//! Synthetic KDD-format traffic for tests and demos.
//!
//! Each raw label has a prototype connection (protocol, service, flag, byte
//! counts and a few traffic rates) perturbed with seeded noise. A fraction of
//! records are verbatim copies of earlier ones so deduplication has work to do.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::taxonomy::AttackClass;

#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    /// Record count per raw label (duplicates included).
    pub per_label: Vec<(String, usize)>,
    /// Probability that a record repeats an earlier record of the same label.
    pub duplicate_fraction: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// A small corpus with roughly the class mix of the deduplicated 10% file.
    pub fn small(total: usize, seed: u64) -> Self {
        let shares: [(&str, f64); 14] = [
            ("normal", 0.58),
            ("neptune", 0.20),
            ("smurf", 0.06),
            ("back", 0.03),
            ("teardrop", 0.02),
            ("satan", 0.025),
            ("ipsweep", 0.02),
            ("portsweep", 0.02),
            ("nmap", 0.005),
            ("warezclient", 0.015),
            ("guess_passwd", 0.005),
            ("buffer_overflow", 0.003),
            ("rootkit", 0.002),
            ("pod", 0.01),
        ];
        let per_label = shares
            .iter()
            .map(|(l, s)| {
                (
                    l.to_string(),
                    ((total as f64) * s).round().max(1.0) as usize,
                )
            })
            .collect();
        SyntheticSpec {
            per_label,
            duplicate_fraction: 0.25,
            seed,
        }
    }
}

struct Prototype {
    protocol: &'static str,
    services: &'static [&'static str],
    flags: &'static [&'static str],
    src_bytes: (f64, f64),
    dst_bytes: (f64, f64),
    logged_in: f64,
    count: (f64, f64),
    serror: f64,
    rerror: f64,
    same_srv: f64,
    diff_srv: f64,
    host_diff_srv: f64,
    wrong_fragment: f64,
    hot: f64,
    root_shell: f64,
    failed_logins: f64,
}

const BASE: Prototype = Prototype {
    protocol: "tcp",
    services: &["http"],
    flags: &["SF"],
    src_bytes: (150.0, 400.0),
    dst_bytes: (200.0, 8000.0),
    logged_in: 1.0,
    count: (1.0, 15.0),
    serror: 0.0,
    rerror: 0.0,
    same_srv: 1.0,
    diff_srv: 0.0,
    host_diff_srv: 0.02,
    wrong_fragment: 0.0,
    hot: 0.0,
    root_shell: 0.0,
    failed_logins: 0.0,
};

fn prototype(label: &str) -> Prototype {
    match label {
        "normal" => Prototype {
            services: &["http", "smtp", "ftp_data", "domain_u", "ftp", "telnet"],
            ..BASE
        },
        "neptune" => Prototype {
            services: &["private", "telnet", "finger", "http"],
            flags: &["S0", "REJ"],
            src_bytes: (0.0, 0.0),
            dst_bytes: (0.0, 0.0),
            logged_in: 0.0,
            count: (100.0, 511.0),
            serror: 1.0,
            same_srv: 0.05,
            diff_srv: 0.06,
            host_diff_srv: 0.07,
            ..BASE
        },
        "smurf" => Prototype {
            protocol: "icmp",
            services: &["ecr_i"],
            src_bytes: (520.0, 1032.0),
            dst_bytes: (0.0, 0.0),
            logged_in: 0.0,
            count: (300.0, 511.0),
            ..BASE
        },
        "pod" => Prototype {
            protocol: "icmp",
            services: &["ecr_i", "tim_i"],
            src_bytes: (1480.0, 1480.0),
            dst_bytes: (0.0, 0.0),
            logged_in: 0.0,
            wrong_fragment: 1.0,
            ..BASE
        },
        "back" => Prototype {
            src_bytes: (54540.0, 54540.0),
            dst_bytes: (7300.0, 8315.0),
            hot: 2.0,
            ..BASE
        },
        "teardrop" => Prototype {
            protocol: "udp",
            services: &["private"],
            src_bytes: (28.0, 28.0),
            dst_bytes: (0.0, 0.0),
            logged_in: 0.0,
            wrong_fragment: 3.0,
            ..BASE
        },
        "satan" => Prototype {
            services: &["private", "other", "finger", "telnet", "ftp", "smtp"],
            flags: &["REJ", "RSTO", "SF"],
            src_bytes: (0.0, 40.0),
            dst_bytes: (0.0, 150.0),
            logged_in: 0.0,
            count: (1.0, 10.0),
            rerror: 0.8,
            same_srv: 0.1,
            diff_srv: 0.9,
            host_diff_srv: 0.8,
            ..BASE
        },
        "ipsweep" => Prototype {
            protocol: "icmp",
            services: &["eco_i"],
            src_bytes: (8.0, 18.0),
            dst_bytes: (0.0, 0.0),
            logged_in: 0.0,
            diff_srv: 0.5,
            host_diff_srv: 0.5,
            ..BASE
        },
        "portsweep" => Prototype {
            services: &["private", "other"],
            flags: &["RSTR", "REJ"],
            src_bytes: (0.0, 0.0),
            dst_bytes: (0.0, 0.0),
            logged_in: 0.0,
            rerror: 1.0,
            same_srv: 0.3,
            diff_srv: 0.6,
            host_diff_srv: 0.9,
            ..BASE
        },
        "nmap" => Prototype {
            protocol: "udp",
            services: &["private", "other"],
            flags: &["SH", "SF"],
            src_bytes: (0.0, 1.0),
            dst_bytes: (0.0, 0.0),
            logged_in: 0.0,
            diff_srv: 0.7,
            host_diff_srv: 0.9,
            ..BASE
        },
        "warezclient" => Prototype {
            services: &["ftp_data", "ftp"],
            src_bytes: (30000.0, 300000.0),
            dst_bytes: (0.0, 1500.0),
            hot: 1.0,
            host_diff_srv: 0.1,
            ..BASE
        },
        "guess_passwd" => Prototype {
            services: &["telnet", "pop_3"],
            flags: &["RSTO", "SF"],
            src_bytes: (125.0, 126.0),
            dst_bytes: (179.0, 181.0),
            logged_in: 0.0,
            failed_logins: 1.0,
            ..BASE
        },
        "buffer_overflow" | "rootkit" | "loadmodule" | "perl" => Prototype {
            services: &["telnet", "ftp_data"],
            src_bytes: (1500.0, 3000.0),
            dst_bytes: (2000.0, 9000.0),
            hot: 3.0,
            root_shell: 1.0,
            ..BASE
        },
        _ => BASE,
    }
}

fn sample(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi <= lo {
        lo
    } else {
        rng.gen_range(lo..=hi).round()
    }
}

fn rate(rng: &mut ChaCha8Rng, center: f64) -> f64 {
    let v: f64 = (center + rng.gen_range(-0.05..=0.05)).clamp(0.0, 1.0);
    (v * 100.0).round() / 100.0
}

fn fmt_rate(v: f64) -> String {
    format!("{v:.2}")
}

fn line_for(label: &str, rng: &mut ChaCha8Rng) -> String {
    let p = prototype(label);
    let service = p.services.choose(rng).copied().unwrap_or("http");
    let flag = p.flags.choose(rng).copied().unwrap_or("SF");
    let count = sample(rng, p.count);
    let srv_count = (count * rng.gen_range(0.5..=1.0)).round().max(1.0);
    let host_count = rng.gen_range(1..=255) as f64;
    let host_srv = (host_count * p.same_srv).round();
    let duration = if label == "normal" && rng.gen_bool(0.2) {
        rng.gen_range(1..=300) as f64
    } else {
        0.0
    };
    let fields: Vec<String> = vec![
        duration.to_string(),
        p.protocol.into(),
        service.into(),
        flag.into(),
        sample(rng, p.src_bytes).to_string(),
        sample(rng, p.dst_bytes).to_string(),
        if label == "land" { "1" } else { "0" }.into(),
        p.wrong_fragment.to_string(),
        "0".into(),
        p.hot.to_string(),
        p.failed_logins.to_string(),
        p.logged_in.to_string(),
        (p.root_shell * 2.0).to_string(),
        p.root_shell.to_string(),
        "0".into(),
        p.root_shell.to_string(),
        "0".into(),
        "0".into(),
        "0".into(),
        "0".into(),
        "0".into(),
        if label == "warezclient" { "1" } else { "0" }.into(),
        count.to_string(),
        srv_count.to_string(),
        fmt_rate(rate(rng, p.serror)),
        fmt_rate(rate(rng, p.serror)),
        fmt_rate(rate(rng, p.rerror)),
        fmt_rate(rate(rng, p.rerror)),
        fmt_rate(rate(rng, p.same_srv)),
        fmt_rate(rate(rng, p.diff_srv)),
        fmt_rate(rate(rng, 0.0)),
        host_count.to_string(),
        host_srv.to_string(),
        fmt_rate(rate(rng, p.same_srv)),
        fmt_rate(rate(rng, p.host_diff_srv)),
        fmt_rate(rate(rng, 0.1)),
        fmt_rate(rate(rng, 0.0)),
        fmt_rate(rate(rng, p.serror)),
        fmt_rate(rate(rng, p.serror)),
        fmt_rate(rate(rng, p.rerror)),
        fmt_rate(rate(rng, p.rerror)),
    ];
    debug_assert_eq!(fields.len(), 41);
    format!("{},{}.", fields.join(","), label)
}

/// Generates KDD-format lines (with trailing-period labels), shuffled.
pub fn generate_lines(spec: &SyntheticSpec) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut lines: Vec<String> = Vec::new();
    for (label, n) in &spec.per_label {
        let start = lines.len();
        for i in 0..*n {
            if i > 0 && rng.gen_bool(spec.duplicate_fraction.clamp(0.0, 1.0)) {
                let j = rng.gen_range(start..lines.len());
                let copy = lines[j].clone();
                lines.push(copy);
            } else {
                lines.push(line_for(label, &mut rng));
            }
        }
    }
    lines.shuffle(&mut rng);
    lines
}

pub fn generate_text(spec: &SyntheticSpec) -> String {
    let mut text = generate_lines(spec).join("\n");
    text.push('\n');
    text
}

/// Labels of the given class appearing in a spec.
pub fn labels_of(spec: &SyntheticSpec, class: AttackClass) -> Vec<&str> {
    let taxonomy = super::ClassTaxonomy::kdd();
    spec.per_label
        .iter()
        .filter(|(l, _)| taxonomy.classify(l).ok() == Some(class))
        .map(|(l, _)| l.as_str())
        .collect()
}
