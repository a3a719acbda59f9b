//! Tabular view of an ontology: one row per combination of a class's
//! property, incoming relation and outgoing relation.

use std::fmt;
use std::io;
use std::str::FromStr;

use crate::ontology::{ElementName, Membership, OntologyError, OntologyGraph, ABSENT_MARKER};

/// The four columns of the dataset, in their fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttributeName {
    Class,
    Property,
    Incoming,
    Outgoing,
}

impl AttributeName {
    pub const ALL: [AttributeName; 4] = [
        AttributeName::Class,
        AttributeName::Property,
        AttributeName::Incoming,
        AttributeName::Outgoing,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AttributeName::Class => "class",
            AttributeName::Property => "property",
            AttributeName::Incoming => "incoming",
            AttributeName::Outgoing => "outgoing",
        }
    }
}

impl fmt::Display for AttributeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown attribute {0:?} (expected class, property, incoming or outgoing)")]
pub struct UnknownAttribute(pub String);

impl FromStr for AttributeName {
    type Err = UnknownAttribute;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AttributeName::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownAttribute(s.to_string()))
    }
}

/// A cell value: an element name, or absent when the class has nothing in
/// that category. Absent sorts before every name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Absent,
    Named(ElementName),
}

impl Value {
    pub fn name(&self) -> Option<&ElementName> {
        match self {
            Value::Absent => None,
            Value::Named(n) => Some(n),
        }
    }
}

impl From<ElementName> for Value {
    fn from(n: ElementName) -> Self {
        Value::Named(n)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Absent => f.write_str(ABSENT_MARKER),
            Value::Named(n) => f.write_str(n.as_str()),
        }
    }
}

impl FromStr for Value {
    type Err = crate::ontology::InvalidName;

    /// `∅` parses as [`Value::Absent`]; anything else must be a valid name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == ABSENT_MARKER {
            Ok(Value::Absent)
        } else {
            ElementName::new(s).map(Value::Named)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub value: Value,
    pub mu: Membership,
}

impl Cell {
    pub fn named(name: ElementName, mu: Membership) -> Self {
        Cell {
            value: Value::Named(name),
            mu,
        }
    }

    /// The absent sentinel; it always carries membership 1.
    pub fn absent() -> Self {
        Cell {
            value: Value::Absent,
            mu: Membership::ONE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataRow {
    pub row_index: usize,
    cells: [Cell; 4],
}

impl DataRow {
    /// Builds a row. The class cell must be a name.
    pub fn new(row_index: usize, cells: [Cell; 4]) -> Result<Self, DatasetError> {
        if cells[0].value == Value::Absent {
            return Err(DatasetError::AbsentClass(row_index));
        }
        if cells
            .iter()
            .any(|c| c.value == Value::Absent && c.mu != Membership::ONE)
        {
            return Err(DatasetError::AbsentWithMembership(row_index));
        }
        Ok(DataRow { row_index, cells })
    }

    pub fn cell(&self, attribute: AttributeName) -> &Cell {
        &self.cells[attribute.index()]
    }

    pub fn value(&self, attribute: AttributeName) -> &Value {
        &self.cells[attribute.index()].value
    }

    pub fn cells(&self) -> &[Cell; 4] {
        &self.cells
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("row {0}: class cell cannot be absent")]
    AbsentClass(usize),
    #[error("row {0}: absent cells must carry membership 1")]
    AbsentWithMembership(usize),
    #[error("row indices must run 1..n consecutively; found {found} at position {expected}")]
    RowIndex { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataSet {
    rows: Vec<DataRow>,
    source_id: String,
}

impl DataSet {
    pub fn new(source_id: impl Into<String>, rows: Vec<DataRow>) -> Result<Self, DatasetError> {
        for (i, row) in rows.iter().enumerate() {
            if row.row_index != i + 1 {
                return Err(DatasetError::RowIndex {
                    expected: i + 1,
                    found: row.row_index,
                });
            }
        }
        Ok(DataSet {
            rows,
            source_id: source_id.into(),
        })
    }

    /// Builds a dataset from rows of cells, numbering them from 1.
    pub fn from_cells(
        source_id: impl Into<String>,
        rows: impl IntoIterator<Item = [Cell; 4]>,
    ) -> Result<Self, DatasetError> {
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, cells)| DataRow::new(i + 1, cells))
            .collect::<Result<Vec<_>, _>>()?;
        DataSet::new(source_id, rows)
    }

    pub fn rows(&self) -> &[DataRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Writes the dataset as CSV; absent cells become empty strings and
    /// memberships are printed with six decimals.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record([
            "row",
            "class",
            "class_mu",
            "property",
            "property_mu",
            "incoming",
            "incoming_mu",
            "outgoing",
            "outgoing_mu",
        ])?;
        for row in &self.rows {
            let mut record = vec![row.row_index.to_string()];
            for cell in row.cells() {
                record.push(cell.value.name().map(|n| n.to_string()).unwrap_or_default());
                record.push(format!("{:.6}", cell.mu.value()));
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Rows of a single class, numbered from 1.
///
/// Enumeration order is property (outermost), then outgoing, then
/// incoming; an empty category contributes a single absent cell.
pub fn extract_class_rows(
    graph: &OntologyGraph,
    class: &ElementName,
) -> Result<Vec<DataRow>, OntologyError> {
    let mut rows = Vec::new();
    push_class_rows(graph, class, &mut rows)?;
    Ok(rows)
}

fn push_class_rows(
    graph: &OntologyGraph,
    class: &ElementName,
    rows: &mut Vec<DataRow>,
) -> Result<(), OntologyError> {
    let parts = graph.categorize_parts(class)?;
    let class_mu = graph
        .class_membership(class)
        .expect("categorize_parts checked the class");
    let cells = |items: &[(ElementName, Membership)]| -> Vec<Cell> {
        if items.is_empty() {
            vec![Cell::absent()]
        } else {
            items
                .iter()
                .map(|(n, m)| Cell::named(n.clone(), *m))
                .collect()
        }
    };
    let properties = cells(&parts.properties);
    let incoming = cells(&parts.incoming);
    let outgoing = cells(&parts.outgoing);
    rows.reserve(properties.len() * incoming.len() * outgoing.len());
    for p in &properties {
        for o in &outgoing {
            for i in &incoming {
                let cells = [
                    Cell::named(class.clone(), class_mu),
                    p.clone(),
                    i.clone(),
                    o.clone(),
                ];
                rows.push(DataRow {
                    row_index: rows.len() + 1,
                    cells,
                });
            }
        }
    }
    Ok(())
}

/// Rows of every class in declaration order, numbered consecutively.
pub fn extract_dataset(graph: &OntologyGraph) -> DataSet {
    let mut rows = Vec::new();
    for (class, _) in graph.classes() {
        push_class_rows(graph, class, &mut rows).expect("class comes from the graph");
    }
    DataSet {
        rows,
        source_id: graph.source_id().to_string(),
    }
}
