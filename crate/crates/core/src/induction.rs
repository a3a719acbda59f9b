//! Separate-and-conquer covering learner for crisp conjunctive rules.
//!
//! For every value `v` of the target attribute (in lexicographic order)
//! the learner repeatedly beam-searches, general to specific, for the
//! conjunction of `attribute=value` selectors that best predicts
//! `target=v`, accepts it when it is good enough, and removes the rows it
//! explains. Rules are scored by Laplace accuracy `(correct+1)/(covered+2)`;
//! ties prefer higher coverage, then shorter antecedents, then earlier
//! enumeration order. Each target value starts again from the full
//! dataset, so the per-value runs are independent.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::dataset::{AttributeName, DataRow, DataSet, Value};

/// An `attribute=value` test on one column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Selector {
    pub attribute: AttributeName,
    pub value: Value,
}

impl Selector {
    pub fn new(attribute: AttributeName, value: impl Into<Value>) -> Self {
        Selector {
            attribute,
            value: value.into(),
        }
    }

    pub fn matches(&self, row: &DataRow) -> bool {
        row.value(self.attribute) == &self.value
    }
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.attribute, self.value)
    }
}

/// A conjunction of selectors, at most one per attribute, kept sorted by
/// attribute so that structurally equal conjunctions compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Conjunction {
    selectors: Vec<Selector>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("attribute {0} is constrained twice")]
pub struct RepeatedAttribute(pub AttributeName);

impl Conjunction {
    pub fn empty() -> Self {
        Conjunction::default()
    }

    pub fn new(selectors: impl IntoIterator<Item = Selector>) -> Result<Self, RepeatedAttribute> {
        let mut conj = Conjunction::empty();
        for s in selectors {
            conj = conj.with(s)?;
        }
        Ok(conj)
    }

    /// Returns a copy extended by `selector`.
    pub fn with(&self, selector: Selector) -> Result<Self, RepeatedAttribute> {
        match self
            .selectors
            .binary_search_by(|s| s.attribute.cmp(&selector.attribute))
        {
            Ok(_) => Err(RepeatedAttribute(selector.attribute)),
            Err(at) => {
                let mut selectors = self.selectors.clone();
                selectors.insert(at, selector);
                Ok(Conjunction { selectors })
            }
        }
    }

    pub fn selectors(&self) -> &[Selector] {
        &self.selectors
    }

    pub fn len(&self) -> usize {
        self.selectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selectors.is_empty()
    }

    pub fn constrains(&self, attribute: AttributeName) -> bool {
        self.selectors.iter().any(|s| s.attribute == attribute)
    }

    pub fn matches(&self, row: &DataRow) -> bool {
        self.selectors.iter().all(|s| s.matches(row))
    }
}

impl fmt::Display for Conjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.selectors.is_empty() {
            return f.write_str("true");
        }
        for (i, s) in self.selectors.iter().enumerate() {
            if i > 0 {
                f.write_str(" AND ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Coverage statistics of a rule on some set of rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleStats {
    pub covered: usize,
    pub correct: usize,
    pub laplace: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("correct count {correct} exceeds covered count {covered}")]
pub struct InvalidStats {
    pub covered: usize,
    pub correct: usize,
}

impl RuleStats {
    pub fn new(covered: usize, correct: usize) -> Result<Self, InvalidStats> {
        if correct > covered {
            return Err(InvalidStats { covered, correct });
        }
        Ok(RuleStats {
            covered,
            correct,
            laplace: (correct as f64 + 1.0) / (covered as f64 + 2.0),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub antecedent: Conjunction,
    pub consequent: Selector,
    pub stats: RuleStats,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "IF {} THEN {} [{}/{}]",
            self.antecedent, self.consequent, self.stats.covered, self.stats.correct
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("min_coverage must be at least 1")]
    MinCoverage,
    #[error("min_laplace must lie strictly between 0 and 1, got {0}")]
    MinLaplace(f64),
    #[error("beam_width must be at least 1")]
    BeamWidth,
    #[error("max_antecedent_len must be between 1 and 3, got {0}")]
    MaxAntecedentLen(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    target: AttributeName,
    min_coverage: usize,
    min_laplace: f64,
    beam_width: usize,
    max_antecedent_len: usize,
}

impl LearnerConfig {
    pub const DEFAULT_MIN_COVERAGE: usize = 2;
    pub const DEFAULT_MIN_LAPLACE: f64 = 0.8;
    pub const DEFAULT_BEAM_WIDTH: usize = 5;
    pub const DEFAULT_MAX_ANTECEDENT_LEN: usize = 3;

    pub fn new(target: AttributeName) -> Self {
        LearnerConfig {
            target,
            min_coverage: Self::DEFAULT_MIN_COVERAGE,
            min_laplace: Self::DEFAULT_MIN_LAPLACE,
            beam_width: Self::DEFAULT_BEAM_WIDTH,
            max_antecedent_len: Self::DEFAULT_MAX_ANTECEDENT_LEN,
        }
    }

    pub fn with_target(mut self, target: AttributeName) -> Self {
        self.target = target;
        self
    }

    pub fn with_min_coverage(mut self, n: usize) -> Result<Self, ConfigError> {
        if n == 0 {
            return Err(ConfigError::MinCoverage);
        }
        self.min_coverage = n;
        Ok(self)
    }

    pub fn with_min_laplace(mut self, q: f64) -> Result<Self, ConfigError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(ConfigError::MinLaplace(q));
        }
        self.min_laplace = q;
        Ok(self)
    }

    pub fn with_beam_width(mut self, w: usize) -> Result<Self, ConfigError> {
        if w == 0 {
            return Err(ConfigError::BeamWidth);
        }
        self.beam_width = w;
        Ok(self)
    }

    pub fn with_max_antecedent_len(mut self, len: usize) -> Result<Self, ConfigError> {
        if !(1..=3).contains(&len) {
            return Err(ConfigError::MaxAntecedentLen(len));
        }
        self.max_antecedent_len = len;
        Ok(self)
    }

    pub fn target(&self) -> AttributeName {
        self.target
    }

    pub fn min_coverage(&self) -> usize {
        self.min_coverage
    }

    pub fn min_laplace(&self) -> f64 {
        self.min_laplace
    }

    pub fn beam_width(&self) -> usize {
        self.beam_width
    }

    pub fn max_antecedent_len(&self) -> usize {
        self.max_antecedent_len
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LearnError {
    #[error("cannot learn from an empty dataset")]
    EmptyDataset,
}

/// Counts the rows covered by `conj` and, among those, the rows whose
/// cell matches `consequent`. Memberships are ignored.
pub fn evaluate(conj: &Conjunction, consequent: &Selector, dataset: &DataSet) -> RuleStats {
    let (covered, correct) = dataset
        .rows()
        .iter()
        .filter(|r| conj.matches(r))
        .fold((0, 0), |(cov, cor), r| {
            (cov + 1, cor + usize::from(consequent.matches(r)))
        });
    RuleStats::new(covered, correct).expect("correct never exceeds covered")
}

/// All one-selector extensions of `conj` on attributes that are neither
/// constrained nor the target, using values occurring in `dataset`,
/// ordered by attribute and then by value.
pub fn specialize(
    conj: &Conjunction,
    dataset: &DataSet,
    target: AttributeName,
) -> Vec<Conjunction> {
    let mut out = Vec::new();
    for attribute in AttributeName::ALL {
        if attribute == target || conj.constrains(attribute) {
            continue;
        }
        let values: BTreeSet<&Value> = dataset.rows().iter().map(|r| r.value(attribute)).collect();
        for value in values {
            let child = conj
                .with(Selector::new(attribute, value.clone()))
                .expect("attribute is unconstrained");
            out.push(child);
        }
    }
    out
}

/// Dataset with every column dictionary-encoded; codes follow the sorted
/// order of the values so that comparing codes compares values.
struct Encoded {
    vocab: [Vec<Value>; 4],
    rows: Vec<[u32; 4]>,
}

impl Encoded {
    fn new(dataset: &DataSet) -> Self {
        let vocab: [Vec<Value>; 4] = AttributeName::ALL.map(|a| {
            let set: BTreeSet<&Value> = dataset.rows().iter().map(|r| r.value(a)).collect();
            set.into_iter().cloned().collect()
        });
        let rows = dataset
            .rows()
            .iter()
            .map(|r| {
                AttributeName::ALL.map(|a| {
                    vocab[a.index()]
                        .binary_search(r.value(a))
                        .expect("value is in vocabulary") as u32
                })
            })
            .collect();
        Encoded { vocab, rows }
    }
}

type Sel = (usize, u32);

#[derive(Debug, Clone)]
struct Candidate {
    sels: Vec<Sel>,
    covered: usize,
    correct: usize,
}

impl Candidate {
    /// Total preference order: higher Laplace accuracy, then higher
    /// coverage, then fewer selectors. `Greater` means `self` is better.
    fn rank(&self, other: &Candidate) -> Ordering {
        let lhs = (self.correct as u128 + 1) * (other.covered as u128 + 2);
        let rhs = (other.correct as u128 + 1) * (self.covered as u128 + 2);
        lhs.cmp(&rhs)
            .then(self.covered.cmp(&other.covered))
            .then(other.sels.len().cmp(&self.sels.len()))
    }

    fn matches(&self, row: &[u32; 4]) -> bool {
        self.sels.iter().all(|&(a, c)| row[a] == c)
    }
}

struct BeamMember {
    cand: Candidate,
    rows: Vec<u32>,
}

struct Search<'a> {
    data: &'a Encoded,
    config: &'a LearnerConfig,
    target: usize,
    counts: [Vec<(u32, u32)>; 4],
}

impl<'a> Search<'a> {
    fn new(data: &'a Encoded, config: &'a LearnerConfig) -> Self {
        let counts = AttributeName::ALL.map(|a| vec![(0, 0); data.vocab[a.index()].len()]);
        Search {
            data,
            config,
            target: config.target.index(),
            counts,
        }
    }

    fn eligible(&self, c: &Candidate) -> bool {
        c.covered >= self.config.min_coverage && c.correct > 0
    }

    /// Best conjunction for `target=value` over the `working` rows.
    fn best(&mut self, working: &[u32], value: u32) -> Option<Candidate> {
        let root = Candidate {
            sels: Vec::new(),
            covered: working.len(),
            correct: working
                .iter()
                .filter(|&&r| self.data.rows[r as usize][self.target] == value)
                .count(),
        };
        let mut best = self.eligible(&root).then(|| root.clone());
        let mut beam = vec![BeamMember {
            cand: root,
            rows: working.to_vec(),
        }];

        for _depth in 0..self.config.max_antecedent_len {
            let mut seen: HashSet<Vec<Sel>> = HashSet::new();
            // (candidate, index of the parent beam member)
            let mut children: Vec<(Candidate, usize)> = Vec::new();
            for (parent_idx, member) in beam.iter().enumerate() {
                self.expand(member, value, parent_idx, &mut seen, &mut children);
            }
            for (child, _) in &children {
                if best
                    .as_ref()
                    .is_none_or(|b| child.rank(b) == Ordering::Greater)
                {
                    best = Some(child.clone());
                }
            }
            // stable sort keeps enumeration order among equal ranks
            children.sort_by(|(a, _), (b, _)| b.rank(a));
            children.truncate(self.config.beam_width);
            if children.is_empty() {
                break;
            }
            beam = children
                .into_iter()
                .map(|(cand, parent_idx)| {
                    let rows = beam[parent_idx]
                        .rows
                        .iter()
                        .copied()
                        .filter(|&r| cand.matches(&self.data.rows[r as usize]))
                        .collect();
                    BeamMember { cand, rows }
                })
                .collect();
        }
        best
    }

    /// Appends the eligible one-selector extensions of `member`, counting
    /// all of them in a single pass over the member's rows.
    fn expand(
        &mut self,
        member: &BeamMember,
        value: u32,
        parent_idx: usize,
        seen: &mut HashSet<Vec<Sel>>,
        out: &mut Vec<(Candidate, usize)>,
    ) {
        let free: Vec<usize> = (0..4)
            .filter(|&a| a != self.target && !member.cand.sels.iter().any(|&(s, _)| s == a))
            .collect();
        if free.is_empty() {
            return;
        }
        for &a in &free {
            self.counts[a].iter_mut().for_each(|c| *c = (0, 0));
        }
        for &r in &member.rows {
            let row = &self.data.rows[r as usize];
            let hit = u32::from(row[self.target] == value);
            for &a in &free {
                let c = &mut self.counts[a][row[a] as usize];
                c.0 += 1;
                c.1 += hit;
            }
        }
        for &a in &free {
            for (code, &(covered, correct)) in self.counts[a].iter().enumerate() {
                if covered == 0 {
                    continue;
                }
                let mut sels = member.cand.sels.clone();
                let at = sels.partition_point(|&(s, _)| s < a);
                sels.insert(at, (a, code as u32));
                let cand = Candidate {
                    sels,
                    covered: covered as usize,
                    correct: correct as usize,
                };
                if !self.eligible(&cand) || !seen.insert(cand.sels.clone()) {
                    continue;
                }
                out.push((cand, parent_idx));
            }
        }
    }
}

/// Learns crisp rules predicting `config.target()`; see the module docs
/// for the procedure. Rules are returned in acceptance order and carry
/// the statistics measured on the rows still uncovered when they were
/// accepted.
pub fn learn_rules(dataset: &DataSet, config: &LearnerConfig) -> Result<Vec<Rule>, LearnError> {
    if dataset.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let data = Encoded::new(dataset);
    let target = config.target.index();
    let mut search = Search::new(&data, config);
    let mut rules = Vec::new();

    for value in 0..data.vocab[target].len() as u32 {
        let mut working: Vec<u32> = (0..data.rows.len() as u32).collect();
        loop {
            let remaining = working
                .iter()
                .filter(|&&r| data.rows[r as usize][target] == value)
                .count();
            if remaining == 0 {
                break;
            }
            let Some(best) = search.best(&working, value) else {
                break;
            };
            let stats = RuleStats::new(best.covered, best.correct).expect("consistent counts");
            if stats.laplace < config.min_laplace || best.covered < config.min_coverage {
                break;
            }
            working.retain(|&r| {
                let row = &data.rows[r as usize];
                !(best.matches(row) && row[target] == value)
            });
            let antecedent = Conjunction {
                selectors: best
                    .sels
                    .iter()
                    .map(|&(a, c)| {
                        Selector::new(AttributeName::ALL[a], data.vocab[a][c as usize].clone())
                    })
                    .collect(),
            };
            rules.push(Rule {
                antecedent,
                consequent: Selector::new(
                    config.target,
                    data.vocab[target][value as usize].clone(),
                ),
                stats,
            });
        }
    }
    Ok(rules)
}
