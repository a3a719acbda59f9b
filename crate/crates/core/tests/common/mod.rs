//! Test-only oracles and generators. Nothing here calls into the code paths
//! it is used to check: row enumeration works from the generator's own
//! description of a graph, and rule statistics are recomputed by scanning
//! plain value tuples.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use ontorules::{AttributeName, Cell, DataSet, ElementName, Membership, Value};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data_path(name)).unwrap()
}

pub fn name(s: &str) -> ElementName {
    ElementName::new(s).unwrap()
}

pub fn mu(v: f64) -> Membership {
    Membership::new(v).unwrap()
}

pub fn value(s: &str) -> Value {
    if s == "∅" {
        Value::Absent
    } else {
        Value::Named(name(s))
    }
}

/// A dataset from `(name, μ)` tuples; `"∅"` is the absent sentinel.
pub fn dataset(rows: &[[(&str, f64); 4]]) -> DataSet {
    DataSet::from_cells(
        "test",
        rows.iter().map(|r| {
            r.map(|(v, m)| match value(v) {
                Value::Absent => Cell::absent(),
                Value::Named(n) => Cell::named(n, mu(m)),
            })
        }),
    )
    .unwrap()
}

pub fn crisp_dataset(rows: &[[&str; 4]]) -> DataSet {
    let rows: Vec<[(&str, f64); 4]> = rows.iter().map(|r| r.map(|v| (v, 1.0))).collect();
    dataset(&rows)
}

/// The eight rows of class House, in extraction order.
pub const HOUSE_ROWS: [[&str; 4]; 8] = [
    ["House", "Door", "liveIn", "partOf"],
    ["House", "Door", "builds", "partOf"],
    ["House", "Door", "liveIn", "equivalentOf"],
    ["House", "Door", "builds", "equivalentOf"],
    ["House", "Window", "liveIn", "partOf"],
    ["House", "Window", "builds", "partOf"],
    ["House", "Window", "liveIn", "equivalentOf"],
    ["House", "Window", "builds", "equivalentOf"],
];

/// Membership of each element in house_fuzzy.ttl.
pub fn house_mu(element: &str) -> f64 {
    match element {
        "House" => 1.0,
        "Door" => 0.95,
        "Window" => 0.9,
        "liveIn" => 0.7,
        "builds" => 0.8,
        "partOf" => 0.85,
        "equivalentOf" => 0.65,
        other => panic!("no membership for: {other}"),
    }
}

pub fn house_fuzzy_dataset() -> DataSet {
    let rows: Vec<[(&str, f64); 4]> = HOUSE_ROWS
        .iter()
        .map(|r| r.map(|v| (v, house_mu(v))))
        .collect();
    dataset(&rows)
}

/// Twelve rows where outgoing is partOf exactly when incoming is liveIn.
pub fn dependent_rows() -> Vec<[&'static str; 4]> {
    let mut rows = Vec::new();
    for class in ["A", "B", "C"] {
        for prop in ["p", "q"] {
            for incoming in ["liveIn", "builds"] {
                let outgoing = if incoming == "liveIn" {
                    "partOf"
                } else {
                    "equivalentOf"
                };
                rows.push([class, prop, incoming, outgoing]);
            }
        }
    }
    rows
}

// ---------------------------------------------------------------------------
// Random ontologies with a brute-force row enumerator.

#[derive(Debug, Clone)]
pub struct GraphSpec {
    pub classes: Vec<String>,
    pub properties: Vec<Vec<String>>,
    /// (source index, target index, label)
    pub edges: Vec<(usize, usize, String)>,
}

impl GraphSpec {
    pub fn random(rng: &mut StdRng, max_classes: usize, max_per_category: usize) -> Self {
        let n = rng.gen_range(1..=max_classes);
        let classes: Vec<String> = (0..n).map(|i| format!("C{i}")).collect();
        let properties = (0..n)
            .map(|i| {
                let k = rng.gen_range(0..=max_per_category);
                (0..k).map(|j| format!("p{i}_{j}")).collect()
            })
            .collect();
        let labels = ["r0", "r1", "r2", "r3", "r4", "r5", "r6"];
        let mut edges: Vec<(usize, usize, String)> = Vec::new();
        for _ in 0..rng.gen_range(0..=n * max_per_category) {
            let s = rng.gen_range(0..n);
            let t = rng.gen_range(0..n);
            let label = labels.choose(rng).unwrap().to_string();
            if edges
                .iter()
                .any(|(a, b, l)| *a == s && *b == t && *l == label)
            {
                continue;
            }
            let mut trial = edges.clone();
            trial.push((s, t, label.clone()));
            let spec = GraphSpec {
                classes: classes.clone(),
                properties: Vec::new(),
                edges: trial,
            };
            if spec.incoming(t).len() <= max_per_category
                && spec.outgoing(s).len() <= max_per_category
            {
                edges.push((s, t, label));
            }
        }
        GraphSpec {
            classes,
            properties,
            edges,
        }
    }

    fn distinct_labels(&self, pick: impl Fn(&(usize, usize, String)) -> bool) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in self.edges.iter().filter(|e| pick(e)) {
            if !out.contains(&e.2) {
                out.push(e.2.clone());
            }
        }
        out
    }

    pub fn incoming(&self, class: usize) -> Vec<String> {
        self.distinct_labels(|e| e.1 == class)
    }

    pub fn outgoing(&self, class: usize) -> Vec<String> {
        self.distinct_labels(|e| e.0 == class)
    }

    pub fn to_json(&self) -> String {
        let classes: Vec<_> = self
            .classes
            .iter()
            .map(|c| serde_json::json!({"name": c}))
            .collect();
        let mut props = Vec::new();
        for (i, ps) in self.properties.iter().enumerate() {
            for p in ps {
                props.push(serde_json::json!({"class": self.classes[i], "name": p}));
            }
        }
        let rels: Vec<_> = self
            .edges
            .iter()
            .map(|(s, t, l)| {
                serde_json::json!({"source": self.classes[*s], "target": self.classes[*t], "label": l})
            })
            .collect();
        serde_json::json!({"classes": classes, "properties": props, "relations": rels}).to_string()
    }

    /// Every row of `class`, enumerated with explicit nested loops.
    pub fn brute_force_rows(&self, class: usize) -> Vec<[Option<String>; 4]> {
        let widen = |v: Vec<String>| -> Vec<Option<String>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.into_iter().map(Some).collect()
            }
        };
        let props = widen(self.properties[class].clone());
        let ins = widen(self.incoming(class));
        let outs = widen(self.outgoing(class));
        let mut rows = Vec::new();
        for p in &props {
            for o in &outs {
                for i in &ins {
                    rows.push([
                        Some(self.classes[class].clone()),
                        p.clone(),
                        i.clone(),
                        o.clone(),
                    ]);
                }
            }
        }
        rows
    }
}

pub fn row_tuple(row: &ontorules::DataRow) -> [Option<String>; 4] {
    AttributeName::ALL.map(|a| row.value(a).name().map(|n| n.to_string()))
}

// ---------------------------------------------------------------------------
// Random small datasets and an exhaustive conjunction enumerator.

pub fn random_dataset(
    rng: &mut StdRng,
    max_rows: usize,
    max_values: usize,
    fuzzy: bool,
) -> DataSet {
    let n = rng.gen_range(1..=max_rows);
    let prefixes = ["c", "p", "i", "o"];
    let degrees = [0.2, 0.5, 0.7, 0.9, 1.0];
    let widths: Vec<usize> = (0..4).map(|_| rng.gen_range(1..=max_values)).collect();
    let rows = (0..n).map(|_| {
        let mut cells = Vec::with_capacity(4);
        for (a, prefix) in prefixes.iter().enumerate() {
            let k = rng.gen_range(0..widths[a]);
            // absent takes the last slot of non-class columns now and then
            if a > 0 && k == 3 {
                cells.push(Cell::absent());
                continue;
            }
            let m = if fuzzy {
                *degrees.choose(rng).unwrap()
            } else {
                1.0
            };
            cells.push(Cell::named(name(&format!("{prefix}{k}")), mu(m)));
        }
        [
            cells[0].clone(),
            cells[1].clone(),
            cells[2].clone(),
            cells[3].clone(),
        ]
    });
    DataSet::from_cells("random", rows.collect::<Vec<_>>()).unwrap()
}

pub type Tuple = [Value; 4];
pub type OracleConj = Vec<(AttributeName, Value)>;

pub fn tuples(d: &DataSet) -> Vec<Tuple> {
    d.rows()
        .iter()
        .map(|r| AttributeName::ALL.map(|a| r.value(a).clone()))
        .collect()
}

pub fn covers(conj: &OracleConj, t: &Tuple) -> bool {
    conj.iter().all(|(a, v)| t[a.index()] == *v)
}

/// (covered, correct) of `conj => target=value` over `rows`.
pub fn oracle_stats(
    rows: &[Tuple],
    conj: &OracleConj,
    target: AttributeName,
    value: &Value,
) -> (usize, usize) {
    let mut covered = 0;
    let mut correct = 0;
    for t in rows {
        if covers(conj, t) {
            covered += 1;
            if t[target.index()] == *value {
                correct += 1;
            }
        }
    }
    (covered, correct)
}

/// Every conjunction over non-target attributes with at most `max_len`
/// selectors, using values that occur in `rows`; selectors are listed in
/// attribute order. Shorter conjunctions come first.
pub fn all_conjunctions(rows: &[Tuple], target: AttributeName, max_len: usize) -> Vec<OracleConj> {
    let free: Vec<AttributeName> = AttributeName::ALL
        .into_iter()
        .filter(|a| *a != target)
        .collect();
    let values: Vec<Vec<Value>> = AttributeName::ALL
        .iter()
        .map(|a| {
            rows.iter()
                .map(|t| t[a.index()].clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for len in 0..=max_len {
        for mask in 0u32..(1 << free.len()) {
            if mask.count_ones() as usize != len {
                continue;
            }
            let attrs: Vec<AttributeName> = free
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, a)| *a)
                .collect();
            let mut partial: Vec<OracleConj> = vec![Vec::new()];
            for a in &attrs {
                let mut next = Vec::new();
                for p in &partial {
                    for v in &values[a.index()] {
                        let mut c = p.clone();
                        c.push((*a, v.clone()));
                        next.push(c);
                    }
                }
                partial = next;
            }
            out.extend(partial);
        }
    }
    out
}

/// Laplace comparison without division: is (c1+1)/(n1+2) > (c2+1)/(n2+2)?
pub fn laplace_gt(c1: usize, n1: usize, c2: usize, n2: usize) -> bool {
    (c1 + 1) * (n2 + 2) > (c2 + 1) * (n1 + 2)
}

pub fn laplace_eq(c1: usize, n1: usize, c2: usize, n2: usize) -> bool {
    (c1 + 1) * (n2 + 2) == (c2 + 1) * (n1 + 2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRule {
    pub antecedent: OracleConj,
    pub consequent: Value,
    pub covered: usize,
    pub correct: usize,
}

/// Covering with an exhaustive search in place of the beam: each step
/// takes the globally best eligible conjunction.
pub fn exhaustive_cover(
    d: &DataSet,
    target: AttributeName,
    min_coverage: usize,
    min_laplace: f64,
    max_len: usize,
) -> Vec<OracleRule> {
    let all = tuples(d);
    let conjs = all_conjunctions(&all, target, max_len);
    let targets: BTreeSet<Value> = all.iter().map(|t| t[target.index()].clone()).collect();
    let mut rules = Vec::new();
    for v in targets {
        let mut working = all.clone();
        loop {
            if !working.iter().any(|t| t[target.index()] == v) {
                break;
            }
            let mut best: Option<(OracleConj, usize, usize)> = None;
            for c in &conjs {
                let (n, k) = oracle_stats(&working, c, target, &v);
                if n < min_coverage || k == 0 {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((bc, bn, bk)) => {
                        laplace_gt(k, n, *bk, *bn)
                            || (laplace_eq(k, n, *bk, *bn)
                                && (n > *bn || (n == *bn && c.len() < bc.len())))
                    }
                };
                if better {
                    best = Some((c.clone(), n, k));
                }
            }
            let Some((c, n, k)) = best else { break };
            if ((k as f64 + 1.0) / (n as f64 + 2.0)) < min_laplace {
                break;
            }
            working.retain(|t| !(covers(&c, t) && t[target.index()] == v));
            rules.push(OracleRule {
                antecedent: c,
                consequent: v.clone(),
                covered: n,
                correct: k,
            });
        }
    }
    rules
}

pub fn as_oracle(rule: &ontorules::Rule) -> OracleRule {
    OracleRule {
        antecedent: rule
            .antecedent
            .selectors()
            .iter()
            .map(|s| (s.attribute, s.value.clone()))
            .collect(),
        consequent: rule.consequent.value.clone(),
        covered: rule.stats.covered,
        correct: rule.stats.correct,
    }
}

/// Replays the covering steps of `rules` (learned for `target`) and checks
/// each rule against exhaustive enumeration on the rows that were still
/// uncovered at its acceptance. Returns a description of the first
/// disagreement.
pub fn check_against_enumeration(
    d: &DataSet,
    rules: &[ontorules::Rule],
    target: AttributeName,
    min_coverage: usize,
    min_laplace: f64,
    max_len: usize,
) -> Result<(), String> {
    let all = tuples(d);
    let conjs = all_conjunctions(&all, target, max_len);
    let targets: Vec<Value> = all
        .iter()
        .map(|t| t[target.index()].clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut idx = 0;
    for v in &targets {
        let mut working = all.clone();
        while idx < rules.len() && rules[idx].consequent.value == *v {
            let rule = as_oracle(&rules[idx]);
            if rules[idx].consequent.attribute != target {
                return Err(format!("rule {idx} predicts the wrong attribute"));
            }
            if !conjs.contains(&rule.antecedent) {
                return Err(format!(
                    "rule {idx} antecedent not enumerable: {:?}",
                    rule.antecedent
                ));
            }
            let (n, k) = oracle_stats(&working, &rule.antecedent, target, v);
            if (n, k) != (rule.covered, rule.correct) {
                return Err(format!(
                    "rule {idx} stats {:?} differ from enumeration {:?}",
                    (rule.covered, rule.correct),
                    (n, k)
                ));
            }
            if n < min_coverage || ((k as f64 + 1.0) / (n as f64 + 2.0)) < min_laplace || k == 0 {
                return Err(format!("rule {idx} does not meet the thresholds"));
            }
            // generalizations with at most one selector are always examined
            // by the search, so none of them may rank above the rule
            for g in conjs
                .iter()
                .filter(|c| c.len() <= 1 && c.len() < rule.antecedent.len())
            {
                if !g.iter().all(|s| rule.antecedent.contains(s)) {
                    continue;
                }
                let (gn, gk) = oracle_stats(&working, g, target, v);
                if laplace_gt(gk, gn, k, n) || laplace_eq(gk, gn, k, n) {
                    return Err(format!(
                        "rule {idx} is dominated by its generalization {g:?}"
                    ));
                }
            }
            let before = working.iter().filter(|t| t[target.index()] == *v).count();
            working.retain(|t| !(covers(&rule.antecedent, t) && t[target.index()] == *v));
            let after = working.iter().filter(|t| t[target.index()] == *v).count();
            if after >= before {
                return Err(format!("rule {idx} covered no new rows"));
            }
            idx += 1;
        }
    }
    if idx != rules.len() {
        return Err(format!("rules out of target-value order at {idx}"));
    }
    Ok(())
}

/// Statement pool for inference tests; attributes rotate so rules can use
/// several statements in one antecedent.
pub fn statement(k: usize) -> ontorules::Selector {
    ontorules::Selector::new(AttributeName::ALL[k % 4], value(&format!("s{k}")))
}

pub fn fuzzy_rule(
    ante: &[ontorules::Selector],
    cons: ontorules::Selector,
    a: f64,
    b: f64,
) -> ontorules::FuzzyRule {
    let base = ontorules::Rule {
        antecedent: ontorules::Conjunction::new(ante.iter().cloned()).unwrap(),
        consequent: cons,
        stats: ontorules::RuleStats::new(1, 1).unwrap(),
    };
    ontorules::FuzzyRule::new(base, mu(a), mu(b))
}

const DEGREES: [f64; 8] = [0.1, 0.25, 0.4, 0.5, 0.65, 0.8, 0.9, 1.0];

/// Up to `max_rules` rules over up to `max_statements` statements. Cycles
/// arise freely since any statement may be both premise and conclusion.
pub fn random_rule_set(
    rng: &mut StdRng,
    max_rules: usize,
    max_statements: usize,
) -> Vec<ontorules::FuzzyRule> {
    let statements = rng.gen_range(1..=max_statements);
    let n = rng.gen_range(0..=max_rules);
    (0..n)
        .map(|_| {
            let cons = rng.gen_range(0..statements);
            let mut used = vec![cons % 4];
            let mut ante = Vec::new();
            for _ in 0..rng.gen_range(0..=2) {
                let k = rng.gen_range(0..statements);
                if !used.contains(&(k % 4)) {
                    used.push(k % 4);
                    ante.push(statement(k));
                }
            }
            let a = if ante.is_empty() {
                1.0
            } else {
                *DEGREES.choose(rng).unwrap()
            };
            fuzzy_rule(&ante, statement(cons), a, *DEGREES.choose(rng).unwrap())
        })
        .collect()
}

pub fn random_facts(rng: &mut StdRng, max_statements: usize) -> Vec<ontorules::Fact> {
    (0..rng.gen_range(0..=4))
        .map(|_| {
            ontorules::Fact::new(
                statement(rng.gen_range(0..max_statements)),
                mu(*DEGREES.choose(rng).unwrap()),
            )
        })
        .collect()
}

/// Least fixpoint by in-place (asynchronous) iteration over plain maps.
pub fn naive_closure(
    rules: &[ontorules::FuzzyRule],
    initial: &[ontorules::Fact],
) -> std::collections::BTreeMap<String, f64> {
    let mut facts: std::collections::BTreeMap<String, f64> = std::collections::BTreeMap::new();
    for f in initial {
        let e = facts.entry(f.statement.to_string()).or_insert(0.0);
        *e = e.max(f.mu.value());
    }
    loop {
        let mut changed = false;
        for r in rules {
            let mut s = r.a().value();
            let mut ok = true;
            for p in r.base.antecedent.selectors() {
                match facts.get(&p.to_string()) {
                    Some(&m) => s = s.min(m),
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let c = s.min(r.b().value());
            let key = r.base.consequent.to_string();
            if facts.get(&key).is_none_or(|&old| old < c) {
                facts.insert(key, c);
                changed = true;
            }
        }
        if !changed {
            return facts;
        }
    }
}

pub fn fact_map(facts: &ontorules::FactBase) -> std::collections::BTreeMap<String, f64> {
    facts
        .iter()
        .map(|(s, m)| (s.to_string(), m.value()))
        .collect()
}
