//! In-memory ontology graph: classes, datatype properties attached to
//! classes, and named directed relations between classes.
//!
//! Every element may carry a [`Membership`] degree; absent annotations
//! default to exactly `1.0`. Iteration order everywhere is the order in
//! which elements were first declared, so two parses of the same bytes
//! always produce identical graphs.

mod json;
mod turtle;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use indexmap::IndexMap;

pub use json::{parse_json, to_json};
pub use turtle::parse_turtle;

/// Local name of a class, property or relation.
///
/// Whitespace around the name is stripped; the remaining text must be
/// non-empty and must not be the literal `∅` (reserved for absent cells).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementName(Arc<str>);

/// Text used to render an absent value wherever names are serialized.
pub const ABSENT_MARKER: &str = "∅";

impl ElementName {
    pub fn new(text: &str) -> Result<Self, InvalidName> {
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed == ABSENT_MARKER {
            return Err(InvalidName(text.to_string()));
        }
        Ok(ElementName(Arc::from(trimmed)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ElementName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ElementName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl FromStr for ElementName {
    type Err = InvalidName;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ElementName::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid element name {0:?}")]
pub struct InvalidName(pub String);

/// A membership degree in `[0, 1]`.
///
/// NaN is rejected and `-0.0` is normalized to `0.0`, which makes the
/// type totally ordered.
#[derive(Clone, Copy, PartialEq)]
pub struct Membership(f64);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("membership {0} is outside [0, 1]")]
pub struct MembershipOutOfRange(pub f64);

impl Membership {
    pub const ONE: Membership = Membership(1.0);
    pub const ZERO: Membership = Membership(0.0);

    pub fn new(value: f64) -> Result<Self, MembershipOutOfRange> {
        if !(0.0..=1.0).contains(&value) {
            return Err(MembershipOutOfRange(value));
        }
        Ok(Membership(if value == 0.0 { 0.0 } else { value }))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn min(self, other: Membership) -> Membership {
        if other.0 < self.0 {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Membership) -> Membership {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }
}

impl Default for Membership {
    fn default() -> Self {
        Membership::ONE
    }
}

impl Eq for Membership {}

impl PartialOrd for Membership {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Membership {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Debug for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "μ={}", self.0)
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl TryFrom<f64> for Membership {
    type Error = MembershipOutOfRange;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Membership::new(value)
    }
}

/// A named directed edge between two declared classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationEdge {
    pub source: ElementName,
    pub target: ElementName,
    pub label: ElementName,
    pub mu: Membership,
}

/// Line/column (both 1-based) inside a parsed document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

struct At(Option<Position>);

impl fmt::Display for At {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(p) => write!(f, " at {p}"),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OntologyError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: Position, message: String },
    #[error("reference to undeclared class {name}{}", At(*.position))]
    UndeclaredClass {
        name: String,
        position: Option<Position>,
    },
    #[error("reference to undeclared element {name}{}", At(*.position))]
    UndeclaredElement {
        name: String,
        position: Option<Position>,
    },
    #[error("membership {value} of {element} is outside [0, 1]{}", At(*.position))]
    MembershipOutOfRange {
        element: String,
        value: f64,
        position: Option<Position>,
    },
    #[error("property {property} declared twice on class {class}{}", At(*.position))]
    DuplicateProperty {
        class: String,
        property: String,
        position: Option<Position>,
    },
    #[error("class {name} declared twice{}", At(*.position))]
    DuplicateClass {
        name: String,
        position: Option<Position>,
    },
    #[error("relation {label} from {source_class} to {target_class} declared twice{}", At(*.position))]
    DuplicateRelation {
        source_class: String,
        target_class: String,
        label: String,
        position: Option<Position>,
    },
    #[error("{message}{}", At(*.position))]
    Conflict {
        message: String,
        position: Option<Position>,
    },
    #[error("invalid element name {name:?}{}", At(*.position))]
    InvalidName {
        name: String,
        position: Option<Position>,
    },
    #[error("unsupported input format: {0}")]
    UnsupportedFormat(String),
    #[error("unknown class {0}")]
    UnknownClass(String),
}

impl OntologyError {
    /// Attaches a position to errors raised without one.
    pub(crate) fn at(mut self, pos: Position) -> Self {
        match &mut self {
            OntologyError::UndeclaredClass { position, .. }
            | OntologyError::UndeclaredElement { position, .. }
            | OntologyError::MembershipOutOfRange { position, .. }
            | OntologyError::DuplicateProperty { position, .. }
            | OntologyError::DuplicateClass { position, .. }
            | OntologyError::DuplicateRelation { position, .. }
            | OntologyError::Conflict { position, .. }
            | OntologyError::InvalidName { position, .. } => {
                position.get_or_insert(pos);
            }
            _ => {}
        }
        self
    }
}

/// Accepted ontology input syntaxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OntologyFormat {
    Turtle,
    Json,
}

impl OntologyFormat {
    /// Guesses the format from a file extension; anything but `.json` is Turtle.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => OntologyFormat::Json,
            _ => OntologyFormat::Turtle,
        }
    }
}

impl FromStr for OntologyFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "turtle" | "ttl" => Ok(OntologyFormat::Turtle),
            "json" => Ok(OntologyFormat::Json),
            other => Err(format!("unknown ontology format {other:?}")),
        }
    }
}

/// Parses `document` in the given format. `source_id` is recorded on the
/// graph for provenance.
pub fn parse_ontology(
    document: &str,
    format: OntologyFormat,
    source_id: &str,
) -> Result<OntologyGraph, OntologyError> {
    let head = document.trim_start_matches('\u{feff}').trim_start();
    if head.starts_with("<?xml") || head.starts_with("<rdf:RDF") {
        return Err(OntologyError::UnsupportedFormat(
            "RDF/XML documents are not accepted; convert to Turtle or JSON".into(),
        ));
    }
    match format {
        OntologyFormat::Turtle => parse_turtle(document, source_id),
        OntologyFormat::Json => parse_json(document, source_id),
    }
}

/// Classes, datatype properties and relations of one ontology.
#[derive(Debug, Clone, PartialEq)]
pub struct OntologyGraph {
    classes: IndexMap<ElementName, Membership>,
    properties: IndexMap<ElementName, Vec<(ElementName, Membership)>>,
    relations: Vec<RelationEdge>,
    source_id: String,
}

/// The categorized parts of one class.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassParts {
    pub properties: Vec<(ElementName, Membership)>,
    pub incoming: Vec<(ElementName, Membership)>,
    pub outgoing: Vec<(ElementName, Membership)>,
}

impl OntologyGraph {
    pub fn builder(source_id: impl Into<String>) -> GraphBuilder {
        GraphBuilder {
            graph: OntologyGraph {
                classes: IndexMap::new(),
                properties: IndexMap::new(),
                relations: Vec::new(),
                source_id: source_id.into(),
            },
        }
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Classes in declaration order.
    pub fn classes(&self) -> impl Iterator<Item = (&ElementName, Membership)> {
        self.classes.iter().map(|(n, m)| (n, *m))
    }

    pub fn class_membership(&self, class: &ElementName) -> Option<Membership> {
        self.classes.get(class).copied()
    }

    /// Datatype properties of `class` in declaration order (empty for
    /// unknown classes).
    pub fn properties_of(&self, class: &ElementName) -> &[(ElementName, Membership)] {
        self.properties.get(class).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn relations(&self) -> &[RelationEdge] {
        &self.relations
    }

    /// Splits the parts attached to `class` into its properties, incoming
    /// relation labels and outgoing relation labels. Repeated labels are
    /// collapsed to their first position, keeping the largest membership.
    pub fn categorize_parts(&self, class: &ElementName) -> Result<ClassParts, OntologyError> {
        if !self.classes.contains_key(class) {
            return Err(OntologyError::UnknownClass(class.to_string()));
        }
        let mut incoming: IndexMap<ElementName, Membership> = IndexMap::new();
        let mut outgoing: IndexMap<ElementName, Membership> = IndexMap::new();
        for edge in &self.relations {
            if &edge.target == class {
                collapse_max(&mut incoming, &edge.label, edge.mu);
            }
            if &edge.source == class {
                collapse_max(&mut outgoing, &edge.label, edge.mu);
            }
        }
        Ok(ClassParts {
            properties: self.properties_of(class).to_vec(),
            incoming: incoming.into_iter().collect(),
            outgoing: outgoing.into_iter().collect(),
        })
    }
}

fn collapse_max(map: &mut IndexMap<ElementName, Membership>, label: &ElementName, mu: Membership) {
    map.entry(label.clone())
        .and_modify(|m| *m = (*m).max(mu))
        .or_insert(mu);
}

/// Incrementally assembles a validated [`OntologyGraph`].
#[derive(Debug)]
pub struct GraphBuilder {
    graph: OntologyGraph,
}

impl GraphBuilder {
    /// Declares a class. Re-declaring an existing class is an error.
    pub fn class(&mut self, name: ElementName, mu: Membership) -> Result<&mut Self, OntologyError> {
        if self.graph.classes.contains_key(&name) {
            return Err(OntologyError::DuplicateClass {
                name: name.to_string(),
                position: None,
            });
        }
        self.graph.classes.insert(name, mu);
        Ok(self)
    }

    pub fn has_class(&self, name: &ElementName) -> bool {
        self.graph.classes.contains_key(name)
    }

    pub fn property(
        &mut self,
        class: &ElementName,
        name: ElementName,
        mu: Membership,
    ) -> Result<&mut Self, OntologyError> {
        self.require_class(class)?;
        let list = self.graph.properties.entry(class.clone()).or_default();
        if list.iter().any(|(p, _)| *p == name) {
            return Err(OntologyError::DuplicateProperty {
                class: class.to_string(),
                property: name.to_string(),
                position: None,
            });
        }
        list.push((name, mu));
        Ok(self)
    }

    pub fn relation(
        &mut self,
        source: &ElementName,
        target: &ElementName,
        label: ElementName,
        mu: Membership,
    ) -> Result<&mut Self, OntologyError> {
        self.require_class(source)?;
        self.require_class(target)?;
        let duplicate = self
            .graph
            .relations
            .iter()
            .any(|e| e.source == *source && e.target == *target && e.label == label);
        if duplicate {
            return Err(OntologyError::DuplicateRelation {
                source_class: source.to_string(),
                target_class: target.to_string(),
                label: label.to_string(),
                position: None,
            });
        }
        self.graph.relations.push(RelationEdge {
            source: source.clone(),
            target: target.clone(),
            label,
            mu,
        });
        Ok(self)
    }

    fn require_class(&self, class: &ElementName) -> Result<(), OntologyError> {
        if self.graph.classes.contains_key(class) {
            Ok(())
        } else {
            Err(OntologyError::UndeclaredClass {
                name: class.to_string(),
                position: None,
            })
        }
    }

    pub fn build(self) -> OntologyGraph {
        self.graph
    }
}
