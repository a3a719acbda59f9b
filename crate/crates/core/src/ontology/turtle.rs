//! A small Turtle subset reader.
//!
//! Supported: `@prefix`/`PREFIX` declarations, IRIs, prefixed names, the
//! `a` keyword, `;` and `,` lists, quoted and numeric literals. Blank
//! nodes, collections and `@base` are rejected. Only the statements below
//! are interpreted; every other triple (labels, comments, individuals) is
//! skipped:
//!
//! ```text
//! <C> a owl:Class .
//! <P> a owl:DatatypeProperty ; rdfs:domain <C> .
//! <R> a owl:ObjectProperty ; rdfs:domain <C1> ; rdfs:range <C2> .
//! <C1> rdfs:subClassOf <C2> .
//! <C1> owl:equivalentClass <C2> .
//! <E> swes:membership "0.95"^^xsd:decimal .
//! ```
//!
//! Elements are identified by their local name (the text after the last
//! `#` or `/`).

use std::collections::HashMap;

use indexmap::IndexSet;

use super::{ElementName, Membership, OntologyError, OntologyGraph, Position};

const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
const OWL: &str = "http://www.w3.org/2002/07/owl#";
const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
/// Namespace of the membership annotation predicate.
pub const SWES_NS: &str = "http://swes.org/ns#";

pub const SUBCLASS_LABEL: &str = "subClassOf";
pub const EQUIVALENT_LABEL: &str = "equivalentClass";

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    A,
    PrefixDirective,
    SparqlPrefix,
    Dot,
    Semi,
    Comma,
    Str(String),
    DataType,
    LangTag(String),
    Number(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    pos: Position,
}

fn syntax(pos: Position, message: impl Into<String>) -> OntologyError {
    OntologyError::Syntax {
        position: pos,
        message: message.into(),
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.trim_start_matches('\u{feff}').chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, OntologyError> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            let pos = self.pos();
            let tok = match c {
                c if c.is_whitespace() => {
                    self.bump();
                    continue;
                }
                '#' => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                    continue;
                }
                '<' => {
                    self.bump();
                    let mut iri = String::new();
                    loop {
                        match self.bump() {
                            Some('>') => break,
                            Some(c) if c.is_whitespace() => {
                                return Err(syntax(self.pos(), "whitespace inside IRI"))
                            }
                            Some(c) => iri.push(c),
                            None => return Err(syntax(pos, "unterminated IRI")),
                        }
                    }
                    Tok::Iri(iri)
                }
                '"' | '\'' => Tok::Str(self.string(pos)?),
                '^' => {
                    self.bump();
                    if self.bump() != Some('^') {
                        return Err(syntax(pos, "expected '^^'"));
                    }
                    Tok::DataType
                }
                '.' | ';' | ',' => {
                    self.bump();
                    match c {
                        '.' => Tok::Dot,
                        ';' => Tok::Semi,
                        _ => Tok::Comma,
                    }
                }
                '[' | ']' => return Err(syntax(pos, "blank nodes are not supported")),
                '(' | ')' => return Err(syntax(pos, "collections are not supported")),
                '@' => {
                    self.bump();
                    let word = self.word();
                    match word.as_str() {
                        "prefix" => Tok::PrefixDirective,
                        "base" => return Err(syntax(pos, "@base is not supported")),
                        "" => return Err(syntax(pos, "dangling '@'")),
                        _ => Tok::LangTag(word),
                    }
                }
                c if c.is_ascii_digit() || c == '+' || c == '-' => {
                    let mut num = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_digit() || "+-.eE".contains(c) {
                            num.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    // a trailing '.' terminates the statement
                    if num.ends_with('.') {
                        num.pop();
                        out.push(Spanned {
                            tok: Tok::Number(num),
                            pos,
                        });
                        let dot = Position {
                            line: self.line,
                            column: self.column - 1,
                        };
                        out.push(Spanned {
                            tok: Tok::Dot,
                            pos: dot,
                        });
                        continue;
                    }
                    Tok::Number(num)
                }
                _ => {
                    let mut word = self.word();
                    if word.is_empty() {
                        return Err(syntax(pos, format!("unexpected character {c:?}")));
                    }
                    let mut trailing_dots = 0;
                    while word.ends_with('.') {
                        word.pop();
                        trailing_dots += 1;
                    }
                    let tok = if word == "a" {
                        Tok::A
                    } else if word.eq_ignore_ascii_case("prefix") {
                        Tok::SparqlPrefix
                    } else if let Some((prefix, local)) = word.split_once(':') {
                        if prefix == "_" {
                            return Err(syntax(pos, "blank nodes are not supported"));
                        }
                        Tok::PName(prefix.to_string(), local.to_string())
                    } else {
                        return Err(syntax(pos, format!("unexpected bare word {word:?}")));
                    };
                    out.push(Spanned { tok, pos });
                    for i in 0..trailing_dots {
                        let dot = Position {
                            line: self.line,
                            column: self.column - trailing_dots + i,
                        };
                        out.push(Spanned {
                            tok: Tok::Dot,
                            pos: dot,
                        });
                    }
                    continue;
                }
            };
            out.push(Spanned { tok, pos });
        }
        Ok(out)
    }

    fn word(&mut self) -> String {
        let mut word = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || "_-:.%".contains(c) {
                word.push(c);
                self.bump();
            } else {
                break;
            }
        }
        word
    }

    fn string(&mut self, start: Position) -> Result<String, OntologyError> {
        let quote = self.bump().expect("quote");
        let mut s = String::new();
        loop {
            match self.bump() {
                Some(c) if c == quote => return Ok(s),
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    Some(c @ ('"' | '\'' | '\\')) => s.push(c),
                    _ => return Err(syntax(self.pos(), "unsupported escape sequence")),
                },
                Some('\n') | None => return Err(syntax(start, "unterminated string literal")),
                Some(c) => s.push(c),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Term {
    Iri(String),
    Literal(String),
}

#[derive(Debug, Clone)]
struct Triple {
    subject: String,
    subject_pos: Position,
    predicate: String,
    object: Term,
    object_pos: Position,
}

struct Parser {
    toks: Vec<Spanned>,
    idx: usize,
    end: Position,
    prefixes: HashMap<String, String>,
}

impl Parser {
    fn new(toks: Vec<Spanned>, end: Position) -> Self {
        let prefixes = [
            ("rdf", RDF),
            ("rdfs", RDFS),
            ("owl", OWL),
            ("xsd", XSD),
            ("swes", SWES_NS),
        ]
        .into_iter()
        .map(|(p, ns)| (p.to_string(), ns.to_string()))
        .collect();
        Parser {
            toks,
            idx: 0,
            end,
            prefixes,
        }
    }

    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.idx)
    }

    fn next(&mut self) -> Result<Spanned, OntologyError> {
        let t = self
            .toks
            .get(self.idx)
            .cloned()
            .ok_or_else(|| syntax(self.end, "unexpected end of document"))?;
        self.idx += 1;
        Ok(t)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), OntologyError> {
        let t = self.next()?;
        if t.tok == want {
            Ok(())
        } else {
            Err(syntax(t.pos, format!("expected {what}")))
        }
    }

    fn triples(mut self) -> Result<Vec<Triple>, OntologyError> {
        let mut out = Vec::new();
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::PrefixDirective => {
                    self.idx += 1;
                    self.prefix_decl()?;
                    self.expect(Tok::Dot, "'.' after @prefix")?;
                }
                Tok::SparqlPrefix => {
                    self.idx += 1;
                    self.prefix_decl()?;
                }
                _ => self.statement(&mut out)?,
            }
        }
        Ok(out)
    }

    fn prefix_decl(&mut self) -> Result<(), OntologyError> {
        let t = self.next()?;
        let prefix = match t.tok {
            Tok::PName(p, l) if l.is_empty() => p,
            _ => return Err(syntax(t.pos, "expected prefix name ending in ':'")),
        };
        let t = self.next()?;
        let ns = match t.tok {
            Tok::Iri(ns) => ns,
            _ => return Err(syntax(t.pos, "expected namespace IRI")),
        };
        self.prefixes.insert(prefix, ns);
        Ok(())
    }

    fn iri(&self, t: &Spanned) -> Result<Option<String>, OntologyError> {
        Ok(match &t.tok {
            Tok::Iri(iri) => Some(iri.clone()),
            Tok::PName(prefix, local) => match self.prefixes.get(prefix) {
                Some(ns) => Some(format!("{ns}{local}")),
                None => return Err(syntax(t.pos, format!("undeclared prefix {prefix:?}"))),
            },
            _ => None,
        })
    }

    fn statement(&mut self, out: &mut Vec<Triple>) -> Result<(), OntologyError> {
        let st = self.next()?;
        let subject = self
            .iri(&st)?
            .ok_or_else(|| syntax(st.pos, "expected subject IRI"))?;
        loop {
            let pt = self.next()?;
            let predicate = match pt.tok {
                Tok::A => format!("{RDF}type"),
                _ => self
                    .iri(&pt)?
                    .ok_or_else(|| syntax(pt.pos, "expected predicate"))?,
            };
            loop {
                let (object, object_pos) = self.object()?;
                out.push(Triple {
                    subject: subject.clone(),
                    subject_pos: st.pos,
                    predicate: predicate.clone(),
                    object,
                    object_pos,
                });
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::Comma) => self.idx += 1,
                    _ => break,
                }
            }
            let t = self.next()?;
            match t.tok {
                Tok::Dot => return Ok(()),
                Tok::Semi => {
                    // trailing ';' before '.'
                    if matches!(self.peek().map(|t| &t.tok), Some(Tok::Dot)) {
                        self.idx += 1;
                        return Ok(());
                    }
                }
                _ => return Err(syntax(t.pos, "expected ';', ',' or '.'")),
            }
        }
    }

    fn object(&mut self) -> Result<(Term, Position), OntologyError> {
        let t = self.next()?;
        if let Some(iri) = self.iri(&t)? {
            return Ok((Term::Iri(iri), t.pos));
        }
        match t.tok {
            Tok::Str(s) => {
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::DataType) => {
                        self.idx += 1;
                        let dt = self.next()?;
                        if self.iri(&dt)?.is_none() {
                            return Err(syntax(dt.pos, "expected datatype IRI after '^^'"));
                        }
                    }
                    Some(Tok::LangTag(_)) => self.idx += 1,
                    _ => {}
                }
                Ok((Term::Literal(s), t.pos))
            }
            Tok::Number(n) => Ok((Term::Literal(n), t.pos)),
            _ => Err(syntax(t.pos, "expected object")),
        }
    }
}

fn local_name(iri: &str, pos: Position) -> Result<ElementName, OntologyError> {
    let local = iri.rsplit(['#', '/']).next().unwrap_or(iri);
    ElementName::new(local).map_err(|_| OntologyError::InvalidName {
        name: iri.to_string(),
        position: Some(pos),
    })
}

#[derive(Default)]
struct Declarations {
    classes: IndexSet<ElementName>,
    datatype_props: IndexSet<ElementName>,
    object_props: IndexSet<ElementName>,
    domains: HashMap<ElementName, Vec<(ElementName, Position)>>,
    ranges: HashMap<ElementName, Vec<(ElementName, Position)>>,
    hierarchy: Vec<(&'static str, ElementName, Position, ElementName, Position)>,
    membership: HashMap<ElementName, (Membership, Position)>,
    annotated: Vec<(ElementName, Position)>,
}

pub fn parse_turtle(document: &str, source_id: &str) -> Result<OntologyGraph, OntologyError> {
    let lexer = Lexer::new(document);
    let toks = lexer.tokens()?;
    let end = end_position(document);
    let triples = Parser::new(toks, end).triples()?;

    let rdf_type = format!("{RDF}type");
    let domain = format!("{RDFS}domain");
    let range = format!("{RDFS}range");
    let subclass = format!("{RDFS}subClassOf");
    let equivalent = format!("{OWL}equivalentClass");
    let membership = format!("{SWES_NS}membership");
    let owl_thing = format!("{OWL}Thing");

    let mut decl = Declarations::default();
    for t in &triples {
        let object_iri = match &t.object {
            Term::Iri(iri) => Some(iri.as_str()),
            Term::Literal(_) => None,
        };
        let p = t.predicate.as_str();
        if p == rdf_type {
            let Some(kind) = object_iri else { continue };
            let set = if kind == format!("{OWL}Class") || kind == format!("{RDFS}Class") {
                &mut decl.classes
            } else if kind == format!("{OWL}DatatypeProperty") {
                &mut decl.datatype_props
            } else if kind == format!("{OWL}ObjectProperty") {
                &mut decl.object_props
            } else {
                continue;
            };
            set.insert(local_name(&t.subject, t.subject_pos)?);
        } else if p == domain || p == range {
            let obj = object_iri.ok_or_else(|| syntax(t.object_pos, "expected class IRI"))?;
            let subject = local_name(&t.subject, t.subject_pos)?;
            let class = local_name(obj, t.object_pos)?;
            let map = if p == domain {
                &mut decl.domains
            } else {
                &mut decl.ranges
            };
            map.entry(subject).or_default().push((class, t.object_pos));
        } else if p == subclass || p == equivalent {
            let obj = object_iri.ok_or_else(|| syntax(t.object_pos, "expected class IRI"))?;
            if obj == owl_thing {
                continue;
            }
            let label = if p == subclass {
                SUBCLASS_LABEL
            } else {
                EQUIVALENT_LABEL
            };
            decl.hierarchy.push((
                label,
                local_name(&t.subject, t.subject_pos)?,
                t.subject_pos,
                local_name(obj, t.object_pos)?,
                t.object_pos,
            ));
        } else if p == membership {
            let Term::Literal(lexical) = &t.object else {
                return Err(syntax(t.object_pos, "membership must be a numeric literal"));
            };
            let value: f64 = lexical.trim().parse().map_err(|_| {
                syntax(
                    t.object_pos,
                    format!("membership {lexical:?} is not a number"),
                )
            })?;
            let subject = local_name(&t.subject, t.subject_pos)?;
            let mu = Membership::new(value).map_err(|_| OntologyError::MembershipOutOfRange {
                element: subject.to_string(),
                value,
                position: Some(t.object_pos),
            })?;
            if let Some((prev, _)) = decl.membership.get(&subject) {
                if *prev != mu {
                    return Err(OntologyError::Conflict {
                        message: format!("conflicting membership annotations on {subject}"),
                        position: Some(t.object_pos),
                    });
                }
            }
            decl.membership.insert(subject.clone(), (mu, t.object_pos));
            decl.annotated.push((subject, t.subject_pos));
        }
    }

    build(decl, source_id)
}

fn build(decl: Declarations, source_id: &str) -> Result<OntologyGraph, OntologyError> {
    let mu_of = |name: &ElementName| {
        decl.membership
            .get(name)
            .map(|(m, _)| *m)
            .unwrap_or(Membership::ONE)
    };
    let class_ref = |name: &ElementName, pos: Position| {
        if decl.classes.contains(name) {
            Ok(())
        } else {
            Err(OntologyError::UndeclaredClass {
                name: name.to_string(),
                position: Some(pos),
            })
        }
    };

    for name in &decl.datatype_props {
        if decl.object_props.contains(name) {
            return Err(OntologyError::Conflict {
                message: format!("{name} is declared both as datatype and object property"),
                position: None,
            });
        }
    }
    for map in [&decl.domains, &decl.ranges] {
        for (prop, refs) in map {
            if !decl.datatype_props.contains(prop) && !decl.object_props.contains(prop) {
                return Err(OntologyError::UndeclaredElement {
                    name: prop.to_string(),
                    position: refs.first().map(|(_, p)| *p),
                });
            }
            for (class, pos) in refs {
                class_ref(class, *pos)?;
            }
        }
    }
    for (name, pos) in &decl.annotated {
        let known = decl.classes.contains(name)
            || decl.datatype_props.contains(name)
            || decl.object_props.contains(name);
        if !known {
            return Err(OntologyError::UndeclaredElement {
                name: name.to_string(),
                position: Some(*pos),
            });
        }
    }

    let mut builder = OntologyGraph::builder(source_id);
    for class in &decl.classes {
        builder.class(class.clone(), mu_of(class))?;
    }
    let none = Vec::new();
    for prop in &decl.datatype_props {
        for (class, pos) in decl.domains.get(prop).unwrap_or(&none) {
            builder
                .property(class, prop.clone(), mu_of(prop))
                .map_err(|e| e.at(*pos))?;
        }
    }
    for prop in &decl.object_props {
        let domains = decl.domains.get(prop).unwrap_or(&none);
        let ranges = decl.ranges.get(prop).unwrap_or(&none);
        for (source, _) in domains {
            for (target, pos) in ranges {
                builder
                    .relation(source, target, prop.clone(), mu_of(prop))
                    .map_err(|e| e.at(*pos))?;
            }
        }
    }
    for (label, source, spos, target, tpos) in &decl.hierarchy {
        class_ref(source, *spos)?;
        class_ref(target, *tpos)?;
        let label = ElementName::new(label).expect("static label");
        builder
            .relation(source, target, label, Membership::ONE)
            .map_err(|e| e.at(*tpos))?;
    }
    Ok(builder.build())
}

fn end_position(text: &str) -> Position {
    let line = text.matches('\n').count() + 1;
    let column = text
        .rsplit('\n')
        .next()
        .map(|l| l.chars().count())
        .unwrap_or(0)
        + 1;
    Position { line, column }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> ElementName {
        ElementName::new(s).unwrap()
    }

    #[test]
    fn prefixed_names_and_lists() {
        let doc = "@prefix ex: <http://example.org/onto#> .\n\
                   ex:A a owl:Class . ex:B a owl:Class .\n\
                   ex:r a owl:ObjectProperty ; rdfs:domain ex:A ; rdfs:range ex:B, ex:A .\n";
        let g = parse_turtle(doc, "t").unwrap();
        assert_eq!(g.class_count(), 2);
        let labels: Vec<_> = g
            .relations()
            .iter()
            .map(|e| (e.source.as_str(), e.target.as_str()))
            .collect();
        assert_eq!(labels, vec![("A", "B"), ("A", "A")]);
    }

    #[test]
    fn full_iris_use_local_names() {
        let doc = "<http://x.org/a/House> a <http://www.w3.org/2002/07/owl#Class> .";
        let g = parse_turtle(doc, "t").unwrap();
        assert_eq!(g.classes().next().unwrap().0, &n("House"));
    }

    #[test]
    fn unrelated_statements_are_skipped() {
        let doc = "@prefix : <http://e.org/#> .\n\
                   <http://e.org/> a owl:Ontology .\n\
                   :A a owl:Class ; rdfs:label \"A house\"@en .\n\
                   :a1 a :A .\n";
        let g = parse_turtle(doc, "t").unwrap();
        assert_eq!(g.class_count(), 1);
        assert!(g.relations().is_empty());
    }

    #[test]
    fn hierarchy_becomes_relations() {
        let doc = ":A a owl:Class . :B a owl:Class . :C a owl:Class .\n\
                   :A rdfs:subClassOf :B . :B owl:equivalentClass :C . :C rdfs:subClassOf owl:Thing .";
        let doc = format!("@prefix : <http://e.org/#> .\n{doc}");
        let g = parse_turtle(&doc, "t").unwrap();
        let edges: Vec<_> = g
            .relations()
            .iter()
            .map(|e| format!("{}-{}->{}", e.source, e.label, e.target))
            .collect();
        assert_eq!(edges, vec!["A-subClassOf->B", "B-equivalentClass->C"]);
    }

    #[test]
    fn numeric_membership_literal() {
        let doc = "@prefix : <http://e.org/#> .\n:A a owl:Class ; swes:membership 0.5.";
        let g = parse_turtle(doc, "t").unwrap();
        assert_eq!(g.class_membership(&n("A")).unwrap().value(), 0.5);
    }

    #[test]
    fn errors_report_positions() {
        let err = parse_turtle(":A a owl:Class .", "t").unwrap_err();
        assert!(
            matches!(err, OntologyError::Syntax { position, .. } if position == Position { line: 1, column: 1 }),
            "{err}"
        );

        let doc = "@prefix : <http://e.org/#> .\n:A a owl:Class\n:B a owl:Class .";
        let err = parse_turtle(doc, "t").unwrap_err();
        assert!(
            matches!(err, OntologyError::Syntax { position, .. } if position.line == 3),
            "{err}"
        );

        let doc = "@prefix : <http://e.org/#> .\n:A a owl:Class .\n:p a owl:DatatypeProperty ; rdfs:domain :Nope .";
        let err = parse_turtle(doc, "t").unwrap_err();
        assert!(
            matches!(&err, OntologyError::UndeclaredClass { name, position: Some(p) } if name == "Nope" && p.line == 3),
            "{err}"
        );

        let doc = "@prefix : <http://e.org/#> .\n:A a owl:Class .\n:A swes:membership \"1.2\"^^xsd:decimal .";
        let err = parse_turtle(doc, "t").unwrap_err();
        assert!(
            matches!(&err, OntologyError::MembershipOutOfRange { position: Some(p), .. } if p.line == 3),
            "{err}"
        );

        let doc = "@prefix : <http://e.org/#> .\n:A a owl:Class .\n:p a owl:DatatypeProperty ; rdfs:domain :A .\n:p rdfs:domain :A .";
        let err = parse_turtle(doc, "t").unwrap_err();
        assert!(
            matches!(&err, OntologyError::DuplicateProperty { position: Some(p), .. } if p.line == 4),
            "{err}"
        );
    }

    #[test]
    fn unsupported_constructs() {
        assert!(parse_turtle("[] a owl:Class .", "t").is_err());
        assert!(parse_turtle("@base <http://e.org/> .", "t").is_err());
        assert!(parse_turtle("<http://e/#A> a owl:Class ; rdfs:subClassOf _:b .", "t").is_err());
    }

    #[test]
    fn annotation_on_unknown_element() {
        let doc = "@prefix : <http://e.org/#> .\n:Z swes:membership 0.4 .";
        assert!(matches!(
            parse_turtle(doc, "t"),
            Err(OntologyError::UndeclaredElement { .. })
        ));
    }
}
