//! JSON persistence, Graphviz export and ASCII mass diagrams.
//!
//! The JSON document looks like
//!
//! ```json
//! {
//!   "version": "1",
//!   "root": 0,
//!   "nodes": [
//!     { "id": 0, "statements": [{ "var": "O", "val": 1 }],
//!       "transitions": [{ "p": "1/2", "child": 1 }, { "p": 0.5, "child": 2 }] }
//!   ]
//! }
//! ```
//!
//! `p` may be a `"num/den"` string, a decimal string or a JSON number;
//! decimals are read as exact fractions. Saving always writes `"num/den"`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Map, Value as Json};

use crate::error::{Error, Result};
use crate::event::{CriticalSet, MinCut};
use crate::prob::Prob;
use crate::tree::{validate_tree, Node, NodeId, ProbabilityTree, Statement, Transition, Value};

pub const SCHEMA_VERSION: &str = "1";

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn field<'a>(obj: &'a Map<String, Json>, key: &str, at: &str) -> Result<&'a Json> {
    obj.get(key).ok_or_else(|| schema(format!("{at}: missing \"{key}\"")))
}

fn object<'a>(v: &'a Json, at: &str) -> Result<&'a Map<String, Json>> {
    v.as_object().ok_or_else(|| schema(format!("{at}: expected an object")))
}

fn array<'a>(v: &'a Json, at: &str) -> Result<&'a [Json]> {
    v.as_array()
        .map(Vec::as_slice)
        .ok_or_else(|| schema(format!("{at}: expected an array")))
}

fn node_id(v: &Json, at: &str) -> Result<NodeId> {
    v.as_u64()
        .map(NodeId)
        .ok_or_else(|| schema(format!("{at}: expected a non-negative integer id")))
}

fn statement(v: &Json, at: &str) -> Result<Statement> {
    let obj = object(v, at)?;
    let var = field(obj, "var", at)?
        .as_str()
        .ok_or_else(|| schema(format!("{at}: \"var\" must be a string")))?;
    let val = match field(obj, "val", at)? {
        Json::String(s) => Value::Str(s.clone()),
        Json::Number(n) => Value::Int(
            n.as_i64()
                .ok_or_else(|| schema(format!("{at}: \"val\" must be an integer or string")))?,
        ),
        _ => return Err(schema(format!("{at}: \"val\" must be an integer or string"))),
    };
    Ok(Statement::new(var, val))
}

fn transition(v: &Json, at: &str) -> Result<Transition> {
    let obj = object(v, at)?;
    let prob = match field(obj, "p", at)? {
        Json::String(s) => Prob::parse(s)?,
        Json::Number(n) => Prob::parse(&n.to_string())?,
        _ => return Err(schema(format!("{at}: \"p\" must be a string or number"))),
    };
    Ok(Transition::new(prob, node_id(field(obj, "child", at)?, at)?))
}

fn node(v: &Json, index: usize) -> Result<Node> {
    let at = format!("nodes[{index}]");
    let obj = object(v, &at)?;
    let id = node_id(field(obj, "id", &at)?, &at)?;
    let list = |key: &str| -> Result<&[Json]> {
        match obj.get(key) {
            None => Ok(&[]),
            Some(v) => array(v, &format!("{at}.{key}")),
        }
    };
    let statements = list("statements")?
        .iter()
        .enumerate()
        .map(|(i, s)| statement(s, &format!("{at}.statements[{i}]")))
        .collect::<Result<_>>()?;
    let transitions = list("transitions")?
        .iter()
        .enumerate()
        .map(|(i, t)| transition(t, &format!("{at}.transitions[{i}]")))
        .collect::<Result<_>>()?;
    Ok(Node::new(id, statements, transitions))
}

/// Parses a tree document and validates it. Validation failures come back as
/// [`Error::Invalid`] carrying the full report.
pub fn load_json(text: &str) -> Result<ProbabilityTree> {
    let doc: Json = serde_json::from_str(text)?;
    let obj = object(&doc, "document")?;
    match field(obj, "version", "document")? {
        Json::String(v) if v == SCHEMA_VERSION => {}
        other => return Err(schema(format!("unsupported version {other}"))),
    }
    let root = node_id(field(obj, "root", "document")?, "root")?;
    let nodes = array(field(obj, "nodes", "document")?, "nodes")?
        .iter()
        .enumerate()
        .map(|(i, n)| node(n, i))
        .collect::<Result<Vec<_>>>()?;
    let tree = ProbabilityTree::new(root, nodes);
    let report = validate_tree(&tree);
    if !report.ok {
        return Err(Error::Invalid(report));
    }
    let root_ok = tree
        .root_node()
        .is_some_and(|n| n.statements.iter().any(|s| *s == Statement::new("O", 1)));
    if !root_ok {
        log::warn!("root node {} does not bind O=1", tree.root());
    }
    Ok(tree)
}

#[derive(Serialize)]
struct DocOut<'a> {
    version: &'a str,
    root: u64,
    nodes: Vec<NodeOut<'a>>,
}

#[derive(Serialize)]
struct NodeOut<'a> {
    id: u64,
    statements: Vec<StatementOut<'a>>,
    transitions: Vec<TransitionOut>,
}

#[derive(Serialize)]
struct StatementOut<'a> {
    var: &'a str,
    val: Json,
}

#[derive(Serialize)]
struct TransitionOut {
    p: String,
    child: u64,
}

/// Serializes in canonical form: nodes in stored order, probabilities as
/// `"num/den"` strings, two-space indentation.
pub fn save_json(tree: &ProbabilityTree) -> String {
    let nodes = tree
        .nodes()
        .iter()
        .map(|n| NodeOut {
            id: n.id.0,
            statements: n
                .statements
                .iter()
                .map(|s| StatementOut {
                    var: &s.variable,
                    val: match &s.value {
                        Value::Int(i) => json!(i),
                        Value::Str(v) => json!(v),
                    },
                })
                .collect(),
            transitions: n
                .transitions
                .iter()
                .map(|t| TransitionOut {
                    p: t.prob.to_string(),
                    child: t.child.0,
                })
                .collect(),
        })
        .collect();
    let doc = DocOut {
        version: SCHEMA_VERSION,
        root: tree.root().0,
        nodes,
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("tree documents always serialize");
    out.push('\n');
    out
}

pub fn load_json_file(path: impl AsRef<std::path::Path>) -> Result<ProbabilityTree> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| schema(format!("cannot read {}: {e}", path.as_ref().display())))?;
    load_json(&text)
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn node_label(node: &Node) -> String {
    let stmts: Vec<String> = node.statements.iter().map(ToString::to_string).collect();
    if stmts.is_empty() {
        node.id.to_string()
    } else {
        format!("{}: {}", node.id, stmts.join(", "))
    }
}

/// Graphviz digraph of `tree`. True-set nodes are filled green, false-set
/// nodes red, critical nodes get a purple outline. Output is sorted by id.
pub fn export_dot(tree: &ProbabilityTree, cut: Option<&MinCut>, crit: Option<&CriticalSet>) -> String {
    let mut nodes: Vec<&Node> = tree.nodes().iter().collect();
    nodes.sort_by_key(|n| n.id);
    let mut out = String::from("digraph probtree {\n  node [shape=box];\n");
    for n in &nodes {
        let mut attrs = vec![format!("label=\"{}\"", dot_escape(&node_label(n)))];
        match cut.and_then(|c| c.side(n.id)) {
            Some(true) => attrs.push("style=filled, fillcolor=palegreen".into()),
            Some(false) => attrs.push("style=filled, fillcolor=lightcoral".into()),
            None => {}
        }
        if crit.is_some_and(|c| c.nodes.contains(&n.id)) {
            attrs.push("color=purple, penwidth=3".into());
        }
        let _ = writeln!(out, "  n{} [{}];", n.id, attrs.join(", "));
    }
    for n in &nodes {
        let mut edges: Vec<&Transition> = n.transitions.iter().collect();
        edges.sort_by_key(|t| t.child);
        for t in edges {
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", n.id, t.child, t.prob);
        }
    }
    out.push_str("}\n");
    out
}

/// One box of a mass diagram. `start` and `height` are in character cells;
/// a box with zero height is drawn as a marker line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MassBox {
    pub node: NodeId,
    pub label: String,
    pub mass: Prob,
    pub start: usize,
    pub height: usize,
    /// A leaf from a shallower column extended to keep rows aligned.
    pub carried: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MassDiagram {
    pub width: usize,
    pub columns: Vec<Vec<MassBox>>,
}

/// Splits `total` cells in proportion to `weights` with largest-remainder
/// rounding; ties go to the earlier entry.
fn apportion(total: usize, weights: &[Prob]) -> Vec<usize> {
    let sum: Prob = weights.iter().sum();
    if sum.is_zero() {
        return vec![0; weights.len()];
    }
    let quotas: Vec<Prob> = weights.iter().map(|w| w * &Prob::new(total as i64, 1) / &sum).collect();
    let mut cells: Vec<usize> = quotas
        .iter()
        .map(|q| q.as_ratio().floor().to_integer().to_usize().unwrap_or(0))
        .collect();
    let given: usize = cells.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    let remainder = |i: usize| quotas[i].as_ratio() - quotas[i].as_ratio().floor();
    order.sort_by(|&a, &b| remainder(b).cmp(&remainder(a)).then(a.cmp(&b)));
    for &i in order.iter().take(total.saturating_sub(given)) {
        cells[i] += 1;
    }
    cells
}

impl MassDiagram {
    /// Lays out `tree` in `width` rows. Each node's cells are split among
    /// its children, so every column sums to `width` and boxes line up with
    /// their parents.
    pub fn build(tree: &ProbabilityTree, width: usize) -> Self {
        let mut columns: Vec<Vec<MassBox>> = Vec::new();
        let mut leaves: Vec<(usize, MassBox)> = Vec::new();
        let mut stack = vec![(tree.root(), 0usize, Prob::one(), 0usize, width)];
        while let Some((id, depth, mass, start, height)) = stack.pop() {
            let Some(node) = tree.node(id) else { continue };
            let stmts: Vec<String> = node.statements.iter().map(ToString::to_string).collect();
            let label = format!("{} {}", stmts.join(","), mass);
            if columns.len() <= depth {
                columns.resize_with(depth + 1, Vec::new);
            }
            let b = MassBox {
                node: id,
                label,
                mass: mass.clone(),
                start,
                height,
                carried: false,
            };
            if node.is_leaf() {
                leaves.push((depth, b.clone()));
            }
            columns[depth].push(b);
            let probs: Vec<Prob> = node.transitions.iter().map(|t| t.prob.clone()).collect();
            let cells = apportion(height, &probs);
            let mut at = start;
            let mut frames = Vec::with_capacity(cells.len());
            for (t, h) in node.transitions.iter().zip(cells) {
                frames.push((t.child, depth + 1, &mass * &t.prob, at, h));
                at += h;
            }
            stack.extend(frames.into_iter().rev());
        }
        for (depth, leaf) in leaves {
            for column in columns.iter_mut().skip(depth + 1) {
                column.push(MassBox {
                    carried: true,
                    ..leaf.clone()
                });
            }
        }
        for column in &mut columns {
            column.sort_by_key(|b| (b.start, b.height != 0));
        }
        MassDiagram { width, columns }
    }

    pub fn render(&self) -> String {
        let widths: Vec<usize> = self
            .columns
            .iter()
            .map(|c| {
                c.iter()
                    .filter(|b| !b.carried)
                    .map(|b| b.label.chars().count() + 3)
                    .max()
                    .unwrap_or(3)
            })
            .collect();
        let covers = |col: &[MassBox], row: usize| {
            col.iter()
                .find(|b| b.height > 0 && b.start <= row && row < b.start + b.height)
                .cloned()
        };
        let mut lines: Vec<String> = Vec::new();
        for row in 0..=self.width {
            // Zero-height boxes sitting at this row boundary.
            let markers: Vec<Vec<&MassBox>> = self
                .columns
                .iter()
                .map(|c| {
                    c.iter()
                        .filter(|b| b.height == 0 && !b.carried && b.start == row)
                        .collect()
                })
                .collect();
            let extra = markers.iter().map(Vec::len).max().unwrap_or(0);
            for k in 0..extra {
                let mut line = String::new();
                for (ci, col) in self.columns.iter().enumerate() {
                    let cell = match markers[ci].get(k) {
                        Some(b) => format!("x {}", b.label),
                        None => match row.checked_sub(1).and_then(|r| covers(col, r)) {
                            Some(b) if !b.carried => "|".to_string(),
                            _ => String::new(),
                        },
                    };
                    let _ = write!(line, "{cell:<w$}", w = widths[ci]);
                }
                lines.push(line.trim_end().to_string());
            }
            if row == self.width {
                break;
            }
            let mut line = String::new();
            for (ci, col) in self.columns.iter().enumerate() {
                let cell = match covers(col, row) {
                    Some(b) if b.carried => String::new(),
                    Some(b) if b.start == row => format!("+ {}", b.label),
                    Some(_) => "|".to_string(),
                    None => String::new(),
                };
                let _ = write!(line, "{cell:<w$}", w = widths[ci]);
            }
            lines.push(line.trim_end().to_string());
        }
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}

/// ASCII mass diagram: one column per depth, box heights proportional to
/// probability mass with `width` rows in total.
pub fn render_mass_diagram(tree: &ProbabilityTree, width: usize) -> String {
    MassDiagram::build(tree, width).render()
}

/// Ids of the nodes whose transitions differ between two trees of the same
/// shape, with old and new probabilities per changed edge.
pub fn changed_edges(before: &ProbabilityTree, after: &ProbabilityTree) -> Vec<(NodeId, NodeId, Prob, Prob)> {
    let mut out = Vec::new();
    let ids: BTreeSet<NodeId> = before.nodes().iter().map(|n| n.id).collect();
    for id in ids {
        let (Some(a), Some(b)) = (before.node(id), after.node(id)) else {
            continue;
        };
        for (ta, tb) in a.transitions.iter().zip(&b.transitions) {
            if ta.prob != tb.prob {
                out.push((id, ta.child, ta.prob.clone(), tb.prob.clone()));
            }
        }
    }
    out
}
