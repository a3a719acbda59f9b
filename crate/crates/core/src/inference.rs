//! Forward-chaining fuzzy reasoner.
//!
//! A rule `IF x1 ∧ … ∧ xn (μ=a) THEN y (μ=b)` fires when every `xi` is a
//! known fact; the conclusion gets `min(a, μ(x1), …, μ(xn), b)`. Facts are
//! aggregated by `max`. Rounds are synchronous: every rule fires against
//! the fact base as it stood at the start of the round, so the result does
//! not depend on rule order. Iteration stops when a round changes nothing.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::dataset::{AttributeName, Value};
use crate::fuzzy::FuzzyRule;
use crate::induction::Selector;
use crate::kb::KnowledgeBase;
use crate::ontology::Membership;

pub const DEFAULT_MAX_ROUNDS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Fact {
    pub statement: Selector,
    pub mu: Membership,
}

impl Fact {
    pub fn new(statement: Selector, mu: Membership) -> Self {
        Fact { statement, mu }
    }
}

/// One membership per statement, iterated in attribute-then-value order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FactBase {
    facts: BTreeMap<Selector, Membership>,
}

impl FactBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_facts<'a>(facts: impl IntoIterator<Item = &'a Fact>) -> Self {
        let mut base = FactBase::new();
        for f in facts {
            base.aggregate(f);
        }
        base
    }

    /// Max-aggregates `fact` into the base; returns whether a membership
    /// was set or raised.
    pub fn aggregate(&mut self, fact: &Fact) -> bool {
        match self.facts.get_mut(&fact.statement) {
            Some(mu) if *mu >= fact.mu => false,
            Some(mu) => {
                *mu = fact.mu;
                true
            }
            None => {
                self.facts.insert(fact.statement.clone(), fact.mu);
                true
            }
        }
    }

    pub fn get(&self, statement: &Selector) -> Option<Membership> {
        self.facts.get(statement).copied()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Selector, Membership)> {
        self.facts.iter().map(|(s, m)| (s, *m))
    }

    /// `attribute=value μ` lines with six-decimal memberships, optionally
    /// restricted to the given statements.
    pub fn to_text(&self, query: &[Selector]) -> String {
        let mut out = String::new();
        for (s, mu) in self.iter() {
            if query.is_empty() || query.contains(s) {
                writeln!(out, "{s} {:.6}", mu.value()).expect("writing to a String");
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivation {
    pub conclusion: Fact,
    pub rule: FuzzyRule,
    pub premises: Vec<Fact>,
    pub round: usize,
}

fn conclude(rule: &FuzzyRule, facts: &FactBase) -> Option<(Fact, Vec<Fact>)> {
    let mut strength = rule.a();
    let mut premises = Vec::with_capacity(rule.base.antecedent.len());
    for s in rule.base.antecedent.selectors() {
        let mu = facts.get(s)?;
        strength = strength.min(mu);
        premises.push(Fact::new(s.clone(), mu));
    }
    let conclusion = Fact::new(rule.base.consequent.clone(), strength.min(rule.b()));
    Some((conclusion, premises))
}

/// Fires one rule against `facts`; `None` when some antecedent statement
/// is unknown.
pub fn fire(rule: &FuzzyRule, facts: &FactBase) -> Option<Fact> {
    conclude(rule, facts).map(|(f, _)| f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferenceStatus {
    Fixpoint,
    /// The round limit was reached before the base stopped changing; the
    /// returned facts are a partial result.
    RoundLimitExceeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub facts: FactBase,
    pub derivations: Vec<Derivation>,
    /// Number of rounds that changed at least one membership.
    pub rounds: usize,
    pub status: InferenceStatus,
}

/// Round-by-round driver; [`infer`] runs it to completion.
#[derive(Debug, Clone)]
pub struct Reasoner<'a> {
    rules: &'a [FuzzyRule],
    facts: FactBase,
    rounds: usize,
}

impl<'a> Reasoner<'a> {
    pub fn new(rules: &'a [FuzzyRule], initial: &[Fact]) -> Self {
        Reasoner {
            rules,
            facts: FactBase::from_facts(initial),
            rounds: 0,
        }
    }

    pub fn facts(&self) -> &FactBase {
        &self.facts
    }

    /// Conclusions of one synchronous round that would set or raise a
    /// membership, one per statement (the first rule reaching the maximum).
    fn pending(&self) -> BTreeMap<Selector, Derivation> {
        let mut best: BTreeMap<Selector, Derivation> = BTreeMap::new();
        for rule in self.rules {
            let Some((conclusion, premises)) = conclude(rule, &self.facts) else {
                continue;
            };
            if self
                .facts
                .get(&conclusion.statement)
                .is_some_and(|mu| mu >= conclusion.mu)
            {
                continue;
            }
            let improves = best
                .get(&conclusion.statement)
                .is_none_or(|d| d.conclusion.mu < conclusion.mu);
            if improves {
                best.insert(
                    conclusion.statement.clone(),
                    Derivation {
                        conclusion,
                        rule: rule.clone(),
                        premises,
                        round: self.rounds + 1,
                    },
                );
            }
        }
        best
    }

    pub fn at_fixpoint(&self) -> bool {
        self.pending().is_empty()
    }

    /// Runs one round and returns the derivations that changed the base
    /// (empty at a fixpoint).
    pub fn step(&mut self) -> Vec<Derivation> {
        let changes: Vec<Derivation> = self.pending().into_values().collect();
        if !changes.is_empty() {
            for d in &changes {
                self.facts.aggregate(&d.conclusion);
            }
            self.rounds += 1;
        }
        changes
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn into_facts(self) -> FactBase {
        self.facts
    }
}

/// Runs at most `max_rounds` productive rounds over `rules`.
pub fn infer_rules(rules: &[FuzzyRule], initial: &[Fact], max_rounds: usize) -> Inference {
    let mut reasoner = Reasoner::new(rules, initial);
    let mut derivations = Vec::new();
    let mut status = InferenceStatus::Fixpoint;
    loop {
        if reasoner.rounds() == max_rounds {
            if !reasoner.at_fixpoint() {
                status = InferenceStatus::RoundLimitExceeded;
            }
            break;
        }
        let changes = reasoner.step();
        if changes.is_empty() {
            break;
        }
        derivations.extend(changes);
    }
    Inference {
        rounds: reasoner.rounds(),
        facts: reasoner.into_facts(),
        derivations,
        status,
    }
}

/// Infers over every rule of `kb`.
pub fn infer(kb: &KnowledgeBase, initial: &[Fact], max_rounds: usize) -> Inference {
    let rules: Vec<FuzzyRule> = kb.rules().cloned().collect();
    infer_rules(&rules, initial, max_rounds)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct FactParseError {
    pub line: usize,
    pub message: String,
}

/// Parses a statement written `attribute=value`.
pub fn parse_statement(text: &str) -> Result<Selector, String> {
    let (attr, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected attribute=value, got {text:?}"))?;
    let attribute: AttributeName = attr.parse().map_err(|e| format!("{e}"))?;
    let value: Value = value.parse().map_err(|e| format!("{e}"))?;
    Ok(Selector { attribute, value })
}

/// Parses a facts file: one `attribute=value [μ]` per line, μ defaulting
/// to 1. Blank lines and `#` comments are skipped.
pub fn parse_facts(text: &str) -> Result<Vec<Fact>, FactParseError> {
    let mut facts = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| FactParseError {
            line: i + 1,
            message,
        };
        let mut fields = line.split_whitespace();
        let statement = fields.next().expect("line is not blank");
        let mu = match fields.next() {
            None => Membership::ONE,
            Some(tail) => {
                let v: f64 = tail
                    .parse()
                    .map_err(|_| err(format!("expected a membership degree, got {tail:?}")))?;
                Membership::new(v).map_err(|e| err(e.to_string()))?
            }
        };
        if let Some(extra) = fields.next() {
            return Err(err(format!(
                "unexpected {extra:?} after the membership degree"
            )));
        }
        let statement = parse_statement(statement).map_err(err)?;
        facts.push(Fact::new(statement, mu));
    }
    Ok(facts)
}

#[derive(Serialize)]
struct FactRecord<'a> {
    attribute: &'a str,
    value: String,
    mu: f64,
}

#[derive(Serialize)]
struct SelectorRecord<'a> {
    attribute: &'a str,
    value: String,
}

#[derive(Serialize)]
struct RuleRecord<'a> {
    antecedent: Vec<SelectorRecord<'a>>,
    consequent: SelectorRecord<'a>,
    a: f64,
    b: f64,
}

#[derive(Serialize)]
struct DerivationRecord<'a> {
    round: usize,
    conclusion: FactRecord<'a>,
    rule: RuleRecord<'a>,
    premises: Vec<FactRecord<'a>>,
}

fn fact_record(f: &Fact) -> FactRecord<'_> {
    FactRecord {
        attribute: f.statement.attribute.as_str(),
        value: f.statement.value.to_string(),
        mu: f.mu.value(),
    }
}

fn selector_record(s: &Selector) -> SelectorRecord<'_> {
    SelectorRecord {
        attribute: s.attribute.as_str(),
        value: s.value.to_string(),
    }
}

/// Renders derivations as JSON lines in the knowledge-base entry style.
pub fn trace_lines(derivations: &[Derivation]) -> String {
    let mut out = String::new();
    for d in derivations {
        let record = DerivationRecord {
            round: d.round,
            conclusion: fact_record(&d.conclusion),
            rule: RuleRecord {
                antecedent: d
                    .rule
                    .base
                    .antecedent
                    .selectors()
                    .iter()
                    .map(selector_record)
                    .collect(),
                consequent: selector_record(&d.rule.base.consequent),
                a: d.rule.a().value(),
                b: d.rule.b().value(),
            },
            premises: d.premises.iter().map(fact_record).collect(),
        };
        out.push_str(&serde_json::to_string(&record).expect("trace serializes"));
        out.push('\n');
    }
    out
}
