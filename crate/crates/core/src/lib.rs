//! Rule induction from OWL-style ontologies.
//!
//! The pipeline runs ontology parsing ([`ontology`]), tabulation of each
//! class's parts ([`dataset`]), covering-style rule learning
//! ([`induction`]), membership annotation ([`fuzzy`]), storage ([`kb`]) and
//! forward-chaining fuzzy reasoning ([`inference`]). [`cli`] wires the
//! stages together.

pub mod cli;
pub mod dataset;
pub mod fuzzy;
pub mod induction;
pub mod inference;
pub mod kb;
pub mod ontology;

pub use dataset::{
    extract_class_rows, extract_dataset, AttributeName, Cell, DataRow, DataSet, Value,
};
pub use fuzzy::{annotate_rule, learn_fuzzy_rules, FuzzyConfig, FuzzyRule};
pub use induction::{
    evaluate, learn_rules, specialize, Conjunction, LearnerConfig, Rule, RuleStats, Selector,
};
pub use inference::{fire, infer, Fact, FactBase, Inference, InferenceStatus};
pub use kb::{KnowledgeBase, Provenance};
pub use ontology::{parse_ontology, ElementName, Membership, OntologyFormat, OntologyGraph};
