use std::fmt::Write as _;

use super::LearnError;
use crate::kdd_data::{AttackClass, FeatureSchema};

/// One atomic test of a rule antecedent.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Equals { feature: usize, code: u32 },
    AtMost { feature: usize, threshold: f64 },
    Above { feature: usize, threshold: f64 },
}

impl Condition {
    pub fn feature(&self) -> usize {
        match self {
            Condition::Equals { feature, .. }
            | Condition::AtMost { feature, .. }
            | Condition::Above { feature, .. } => *feature,
        }
    }

    pub fn holds(&self, values: &[f64]) -> bool {
        match *self {
            Condition::Equals { feature, code } => values[feature] == code as f64,
            Condition::AtMost { feature, threshold } => values[feature] <= threshold,
            Condition::Above { feature, threshold } => values[feature] > threshold,
        }
    }

    fn render(&self, schema: &FeatureSchema) -> String {
        match *self {
            Condition::Equals { feature, code } => {
                let f = schema.feature(feature);
                let sym = f.domain.symbol(code).unwrap_or("?");
                format!("{} = {}", f.name, sym)
            }
            Condition::AtMost { feature, threshold } => {
                format!("{} <= {}", schema.feature(feature).name, threshold)
            }
            Condition::Above { feature, threshold } => {
                format!("{} > {}", schema.feature(feature).name, threshold)
            }
        }
    }

    fn parse(text: &str, schema: &FeatureSchema) -> Result<Self, LearnError> {
        let bad = || LearnError::ModelFormat(format!("bad condition {text:?}"));
        let (name, op, rhs) = ["<=", "≤", ">", "="]
            .iter()
            .find_map(|op| {
                text.split_once(&format!(" {op} "))
                    .map(|(l, r)| (l.trim(), *op, r.trim()))
            })
            .ok_or_else(bad)?;
        let feature = schema
            .index_of(name)
            .ok_or_else(|| LearnError::ModelFormat(format!("unknown feature {name:?}")))?;
        let number = || rhs.parse::<f64>().map_err(|_| bad());
        Ok(match op {
            "=" => Condition::Equals {
                feature,
                code: schema.feature(feature).domain.code(rhs).ok_or_else(bad)?,
            },
            ">" => Condition::Above {
                feature,
                threshold: number()?,
            },
            _ => Condition::AtMost {
                feature,
                threshold: number()?,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub class: AttackClass,
    /// Training records the rule covered when it was learned.
    pub coverage: usize,
    /// Covered records whose class differs from `class`.
    pub errors: usize,
}

impl Rule {
    pub fn matches(&self, values: &[f64]) -> bool {
        self.conditions.iter().all(|c| c.holds(values))
    }

    pub fn render(&self, schema: &FeatureSchema) -> String {
        let lhs = if self.conditions.is_empty() {
            "TRUE".to_string()
        } else {
            self.conditions
                .iter()
                .map(|c| c.render(schema))
                .collect::<Vec<_>>()
                .join(" AND ")
        };
        format!(
            "IF {lhs} THEN {} (cov={}, err={})",
            self.class, self.coverage, self.errors
        )
    }

    pub fn parse(line: &str, schema: &FeatureSchema) -> Result<Self, LearnError> {
        let bad = || LearnError::ModelFormat(format!("bad rule {line:?}"));
        let body = line.trim().strip_prefix("IF ").ok_or_else(bad)?;
        let (lhs, rhs) = body.rsplit_once(" THEN ").ok_or_else(bad)?;
        let (class, stats) = rhs.split_once(" (").ok_or_else(bad)?;
        let class: AttackClass = class.trim().parse().map_err(|_| bad())?;
        let stats = stats.strip_suffix(')').ok_or_else(bad)?;
        let (cov, err) = stats.split_once(", ").ok_or_else(bad)?;
        let coverage = cov
            .strip_prefix("cov=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(bad)?;
        let errors = err
            .strip_prefix("err=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(bad)?;
        let conditions = if lhs.trim() == "TRUE" {
            Vec::new()
        } else {
            lhs.split(" AND ")
                .map(|c| Condition::parse(c, schema))
                .collect::<Result<_, _>>()?
        };
        Ok(Rule {
            conditions,
            class,
            coverage,
            errors,
        })
    }
}

/// Ordered decision list; the first matching rule decides.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub default_class: AttackClass,
}

impl RuleSet {
    pub fn predict_values(&self, values: &[f64]) -> AttackClass {
        self.first_match(values)
            .map_or(self.default_class, |i| self.rules[i].class)
    }

    pub fn first_match(&self, values: &[f64]) -> Option<usize> {
        self.rules.iter().position(|r| r.matches(values))
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// `default <class>` followed by one rule per line.
    pub fn render(&self, schema: &FeatureSchema) -> String {
        let mut out = format!("default {}\n", self.default_class);
        for r in &self.rules {
            let _ = writeln!(out, "{}", r.render(schema));
        }
        out
    }

    pub fn parse(text: &str, schema: &FeatureSchema) -> Result<Self, LearnError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let default_class = lines
            .next()
            .and_then(|l| l.trim().strip_prefix("default "))
            .and_then(|c| c.trim().parse().ok())
            .ok_or_else(|| LearnError::ModelFormat("missing default class".into()))?;
        let rules = lines
            .map(|l| Rule::parse(l, schema))
            .collect::<Result<_, _>>()?;
        Ok(RuleSet {
            rules,
            default_class,
        })
    }
}

/// Merges a path of node tests into a rule antecedent, keeping only the
/// tightest numeric bound on each side per feature.
pub(crate) fn simplify(path: &[Condition]) -> Vec<Condition> {
    let mut out: Vec<Condition> = Vec::new();
    for c in path {
        let slot = out.iter_mut().find(|o| {
            o.feature() == c.feature() && std::mem::discriminant(*o) == std::mem::discriminant(c)
        });
        match (slot, c) {
            (None, _) => out.push(c.clone()),
            (Some(Condition::AtMost { threshold: t, .. }), Condition::AtMost { threshold, .. }) => {
                *t = t.min(*threshold)
            }
            (Some(Condition::Above { threshold: t, .. }), Condition::Above { threshold, .. }) => {
                *t = t.max(*threshold)
            }
            (Some(_), _) => {}
        }
    }
    out
}
