//! Deduplicating rule store with provenance and a line-oriented file format.
//!
//! The file starts with the line `swes-kb v1`; every following line is one
//! entry as a JSON object:
//!
//! ```text
//! swes-kb v1
//! {"antecedent":[{"attribute":"incoming","value":"builds"}],"consequent":{"attribute":"outgoing","value":"partOf"},"a":0.8,"b":0.85,"stats":{"covered":2,"correct":2},"provenance":{...}}
//! ```
//!
//! Absent values are written as `∅`. Memberships use the shortest decimal
//! that round-trips, so `load(save(kb))` is exact.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::{AttributeName, Value};
use crate::fuzzy::FuzzyRule;
use crate::induction::{Conjunction, Rule, RuleStats, Selector};
use crate::ontology::Membership;

pub const HEADER: &str = "swes-kb v1";
const MAGIC: &str = "swes-kb ";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    ontology_id: String,
    algorithm_id: String,
    target: AttributeName,
    created_at: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("provenance field {0} must not be empty")]
pub struct EmptyProvenanceField(pub &'static str);

impl Provenance {
    pub fn new(
        ontology_id: impl Into<String>,
        algorithm_id: impl Into<String>,
        target: AttributeName,
        created_at: impl Into<String>,
    ) -> Result<Self, EmptyProvenanceField> {
        let p = Provenance {
            ontology_id: ontology_id.into(),
            algorithm_id: algorithm_id.into(),
            target,
            created_at: created_at.into(),
        };
        for (field, text) in [
            ("ontology_id", &p.ontology_id),
            ("algorithm_id", &p.algorithm_id),
            ("created_at", &p.created_at),
        ] {
            if text.trim().is_empty() {
                return Err(EmptyProvenanceField(field));
            }
        }
        Ok(p)
    }

    pub fn ontology_id(&self) -> &str {
        &self.ontology_id
    }

    pub fn algorithm_id(&self) -> &str {
        &self.algorithm_id
    }

    pub fn target(&self) -> AttributeName {
        self.target
    }

    pub fn created_at(&self) -> &str {
        &self.created_at
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub rule: FuzzyRule,
    pub provenance: Provenance,
}

/// Structural identity of a rule: antecedent as a set plus consequent.
type RuleKey = (Conjunction, Selector);

fn key_of(rule: &FuzzyRule) -> RuleKey {
    (rule.base.antecedent.clone(), rule.base.consequent.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AddReport {
    pub added: usize,
    pub merged: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnowledgeBase {
    entries: Vec<Entry>,
    index: HashMap<RuleKey, usize>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rules(&self) -> impl Iterator<Item = &FuzzyRule> {
        self.entries.iter().map(|e| &e.rule)
    }

    /// Inserts rules. A rule whose structure is already stored is merged:
    /// the stored `(a, b)` are raised componentwise to the maximum, while
    /// its stats and provenance stay those seen first.
    pub fn add_rules<I>(&mut self, rules: I, provenance: &Provenance) -> AddReport
    where
        I: IntoIterator<Item = FuzzyRule>,
    {
        let mut report = AddReport::default();
        for rule in rules {
            let key = key_of(&rule);
            match self.index.get(&key) {
                Some(&i) => {
                    self.entries[i].rule.raise_to(rule.a(), rule.b());
                    report.merged += 1;
                }
                None => {
                    self.index.insert(key, self.entries.len());
                    self.entries.push(Entry {
                        rule,
                        provenance: provenance.clone(),
                    });
                    report.added += 1;
                }
            }
        }
        report
    }

    pub fn save(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for entry in &self.entries {
            let line = serde_json::to_string(&EntryRecord::from(entry)).expect("entry serializes");
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    pub fn load(text: &str) -> Result<Self, KbError> {
        let mut lines = text.split('\n');
        let header = lines.next().unwrap_or_default();
        let header = header.strip_suffix('\r').unwrap_or(header);
        if header != HEADER {
            return Err(match header.strip_prefix(MAGIC) {
                Some(version) => KbError::VersionMismatch {
                    found: version.to_string(),
                },
                None => KbError::MissingHeader,
            });
        }
        let body: Vec<&str> = lines.collect();
        let mut kb = KnowledgeBase::new();
        for (i, raw) in body.iter().enumerate() {
            let line_no = i + 2;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.is_empty() && i + 1 == body.len() {
                break;
            }
            let record: EntryRecord =
                serde_json::from_str(line).map_err(|e| KbError::Malformed {
                    line: line_no,
                    column: e.column(),
                    message: e.to_string(),
                })?;
            let entry = record.into_entry().map_err(|message| KbError::Invalid {
                line: line_no,
                message,
            })?;
            let key = key_of(&entry.rule);
            if kb.index.contains_key(&key) {
                return Err(KbError::Invalid {
                    line: line_no,
                    message: format!("duplicate rule {}", entry.rule),
                });
            }
            kb.index.insert(key, kb.entries.len());
            kb.entries.push(entry);
        }
        Ok(kb)
    }
}

impl fmt::Display for KnowledgeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for entry in &self.entries {
            writeln!(f, "{}", entry.rule)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KbError {
    #[error("line 1: missing '{HEADER}' header")]
    MissingHeader,
    #[error("line 1: unsupported knowledge base version {found:?} (expected v1)")]
    VersionMismatch { found: String },
    #[error("line {line}, column {column}: {message}")]
    Malformed {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectorRecord {
    attribute: String,
    value: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StatsRecord {
    covered: usize,
    correct: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProvenanceRecord {
    ontology_id: String,
    algorithm_id: String,
    target: String,
    created_at: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryRecord {
    antecedent: Vec<SelectorRecord>,
    consequent: SelectorRecord,
    a: f64,
    b: f64,
    stats: StatsRecord,
    provenance: ProvenanceRecord,
}

impl From<&Selector> for SelectorRecord {
    fn from(s: &Selector) -> Self {
        SelectorRecord {
            attribute: s.attribute.as_str().to_string(),
            value: s.value.to_string(),
        }
    }
}

impl SelectorRecord {
    fn into_selector(self) -> Result<Selector, String> {
        let attribute: AttributeName = self.attribute.parse().map_err(|e| format!("{e}"))?;
        if attribute.as_str() != self.attribute {
            return Err(format!("attribute {:?} must be lowercase", self.attribute));
        }
        let value: Value = self.value.parse().map_err(|e| format!("{e}"))?;
        Ok(Selector { attribute, value })
    }
}

impl From<&Entry> for EntryRecord {
    fn from(e: &Entry) -> Self {
        let base = &e.rule.base;
        EntryRecord {
            antecedent: base.antecedent.selectors().iter().map(Into::into).collect(),
            consequent: (&base.consequent).into(),
            a: e.rule.a().value(),
            b: e.rule.b().value(),
            stats: StatsRecord {
                covered: base.stats.covered,
                correct: base.stats.correct,
            },
            provenance: ProvenanceRecord {
                ontology_id: e.provenance.ontology_id.clone(),
                algorithm_id: e.provenance.algorithm_id.clone(),
                target: e.provenance.target.as_str().to_string(),
                created_at: e.provenance.created_at.clone(),
            },
        }
    }
}

impl EntryRecord {
    fn into_entry(self) -> Result<Entry, String> {
        let selectors = self
            .antecedent
            .into_iter()
            .map(SelectorRecord::into_selector)
            .collect::<Result<Vec<_>, _>>()?;
        let antecedent = Conjunction::new(selectors).map_err(|e| e.to_string())?;
        let consequent = self.consequent.into_selector()?;
        if antecedent.constrains(consequent.attribute) {
            return Err(format!(
                "antecedent constrains the consequent attribute {}",
                consequent.attribute
            ));
        }
        let a = Membership::new(self.a).map_err(|e| format!("a: {e}"))?;
        let b = Membership::new(self.b).map_err(|e| format!("b: {e}"))?;
        if antecedent.is_empty() && a != Membership::ONE {
            return Err("a rule with an empty antecedent must have a = 1".into());
        }
        let stats =
            RuleStats::new(self.stats.covered, self.stats.correct).map_err(|e| e.to_string())?;
        let target: AttributeName = self.provenance.target.parse().map_err(|e| format!("{e}"))?;
        let provenance = Provenance::new(
            self.provenance.ontology_id,
            self.provenance.algorithm_id,
            target,
            self.provenance.created_at,
        )
        .map_err(|e| e.to_string())?;
        let rule = FuzzyRule::new(
            Rule {
                antecedent,
                consequent,
                stats,
            },
            a,
            b,
        );
        Ok(Entry { rule, provenance })
    }
}
