//! JSON interchange format for ontology graphs.
//!
//! ```json
//! {
//!   "classes":    [{"name": "House", "mu": 1.0}],
//!   "properties": [{"class": "House", "name": "Door", "mu": 0.95}],
//!   "relations":  [{"source": "Person", "target": "House", "label": "builds"}]
//! }
//! ```
//!
//! All three arrays are optional, `mu` defaults to 1.0, and unknown keys
//! are rejected. This is also the lossless output format of [`to_json`].

use serde::{Deserialize, Serialize};

use super::{ElementName, Membership, OntologyError, OntologyGraph, Position};

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    classes: Vec<ClassEntry>,
    #[serde(default)]
    properties: Vec<PropertyEntry>,
    #[serde(default)]
    relations: Vec<RelationEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassEntry {
    name: String,
    #[serde(default)]
    mu: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PropertyEntry {
    class: String,
    name: String,
    #[serde(default)]
    mu: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationEntry {
    source: String,
    target: String,
    label: String,
    #[serde(default)]
    mu: Option<f64>,
}

pub fn parse_json(document: &str, source_id: &str) -> Result<OntologyGraph, OntologyError> {
    let doc: Document = if document.trim().is_empty() {
        Document::default()
    } else {
        serde_json::from_str(document).map_err(|e| OntologyError::Syntax {
            position: Position {
                line: e.line(),
                column: e.column(),
            },
            message: e.to_string(),
        })?
    };

    let mut builder = OntologyGraph::builder(source_id);
    for c in doc.classes {
        let name = name(&c.name)?;
        let mu = membership(&c.name, c.mu)?;
        builder.class(name, mu)?;
    }
    for p in doc.properties {
        let class = name(&p.class)?;
        let prop = name(&p.name)?;
        let mu = membership(&p.name, p.mu)?;
        builder.property(&class, prop, mu)?;
    }
    for r in doc.relations {
        let source = name(&r.source)?;
        let target = name(&r.target)?;
        let label = name(&r.label)?;
        let mu = membership(&r.label, r.mu)?;
        builder.relation(&source, &target, label, mu)?;
    }
    Ok(builder.build())
}

fn name(text: &str) -> Result<ElementName, OntologyError> {
    ElementName::new(text).map_err(|_| OntologyError::InvalidName {
        name: text.to_string(),
        position: None,
    })
}

fn membership(element: &str, mu: Option<f64>) -> Result<Membership, OntologyError> {
    match mu {
        None => Ok(Membership::ONE),
        Some(v) => Membership::new(v).map_err(|_| OntologyError::MembershipOutOfRange {
            element: element.to_string(),
            value: v,
            position: None,
        }),
    }
}

/// Serializes a graph to the JSON interchange format (pretty-printed,
/// every membership written explicitly).
pub fn to_json(graph: &OntologyGraph) -> String {
    let mut doc = Document::default();
    for (class, mu) in graph.classes() {
        doc.classes.push(ClassEntry {
            name: class.to_string(),
            mu: Some(mu.value()),
        });
        for (prop, pmu) in graph.properties_of(class) {
            doc.properties.push(PropertyEntry {
                class: class.to_string(),
                name: prop.to_string(),
                mu: Some(pmu.value()),
            });
        }
    }
    for edge in graph.relations() {
        doc.relations.push(RelationEntry {
            source: edge.source.to_string(),
            target: edge.target.to_string(),
            label: edge.label.to_string(),
            mu: Some(edge.mu.value()),
        });
    }
    let mut out = serde_json::to_string_pretty(&doc).expect("graph serializes");
    out.push('\n');
    out
}
