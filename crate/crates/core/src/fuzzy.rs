//! Membership annotation of crisp rules, producing rules of the form
//! `IF x (μ=a) THEN y (μ=b)`.
//!
//! `a` and `b` are minima (the t-norm is fixed to `min`) over the rows a
//! rule correctly covers: `a` over the memberships of the cells matched by
//! the antecedent, `b` over the consequent cell.

use std::fmt;

use crate::dataset::DataSet;
use crate::induction::{learn_rules, LearnError, LearnerConfig, Rule};
use crate::ontology::{Membership, MembershipOutOfRange};

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyRule {
    pub base: Rule,
    a: Membership,
    b: Membership,
}

impl FuzzyRule {
    /// Rules with an empty antecedent always get `a = 1`.
    pub fn new(base: Rule, a: Membership, b: Membership) -> Self {
        let a = if base.antecedent.is_empty() {
            Membership::ONE
        } else {
            a
        };
        FuzzyRule { base, a, b }
    }

    pub fn a(&self) -> Membership {
        self.a
    }

    pub fn b(&self) -> Membership {
        self.b
    }

    /// Raises `a` and `b` componentwise to at least the given values.
    pub fn raise_to(&mut self, a: Membership, b: Membership) {
        self.a = self.a.max(a);
        self.b = self.b.max(b);
    }
}

impl fmt::Display for FuzzyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "IF {} (μ={}) THEN {} (μ={}) [{}/{}]",
            self.base.antecedent,
            self.a,
            self.base.consequent,
            self.b,
            self.base.stats.covered,
            self.base.stats.correct
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyConfig {
    alpha: Membership,
}

impl FuzzyConfig {
    pub fn new(alpha: f64) -> Result<Self, MembershipOutOfRange> {
        Ok(FuzzyConfig {
            alpha: Membership::new(alpha)?,
        })
    }

    pub fn alpha(&self) -> Membership {
        self.alpha
    }
}

impl Default for FuzzyConfig {
    fn default() -> Self {
        FuzzyConfig {
            alpha: Membership::ZERO,
        }
    }
}

/// Computes `(a, b)` for `rule` over the whole dataset. When no row is
/// correctly covered both degrees are 0 (except `a` of an empty
/// antecedent, which is always 1).
pub fn annotate_rule(rule: &Rule, dataset: &DataSet) -> FuzzyRule {
    let mut support = dataset
        .rows()
        .iter()
        .filter(|r| rule.antecedent.matches(r) && rule.consequent.matches(r))
        .peekable();
    if support.peek().is_none() {
        return FuzzyRule::new(rule.clone(), Membership::ZERO, Membership::ZERO);
    }
    let (a, b) = support.fold((Membership::ONE, Membership::ONE), |(a, b), row| {
        let a = rule
            .antecedent
            .selectors()
            .iter()
            .fold(a, |acc, s| acc.min(row.cell(s.attribute).mu));
        (a, b.min(row.cell(rule.consequent.attribute).mu))
    });
    FuzzyRule::new(rule.clone(), a, b)
}

/// Learns crisp rules, annotates them and drops those with
/// `min(a, b) < alpha`, preserving order.
pub fn learn_fuzzy_rules(
    dataset: &DataSet,
    lconf: &LearnerConfig,
    fconf: &FuzzyConfig,
) -> Result<Vec<FuzzyRule>, LearnError> {
    Ok(learn_rules(dataset, lconf)?
        .iter()
        .map(|r| annotate_rule(r, dataset))
        .filter(|f| f.a.min(f.b) >= fconf.alpha)
        .collect())
}
