//! The probability-tree data model.
//!
//! A tree is a flat list of [`Node`]s addressed by [`NodeId`]. Each node
//! carries the statements it binds when the process enters it and an ordered
//! list of transitions to its children. Trees are immutable values: every
//! transform in this crate returns a fresh tree.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::Prob;
use crate::walk;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for NodeId {
    fn from(id: u64) -> Self {
        NodeId(id)
    }
}

/// The value side of a statement: an integer or a string atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Str(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

/// A binding `variable = value`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Statement {
    pub variable: String,
    pub value: Value,
}

impl Statement {
    pub fn new(variable: impl Into<String>, value: impl Into<Value>) -> Self {
        Statement {
            variable: variable.into(),
            value: value.into(),
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.variable, self.value)
    }
}

/// `[A-Za-z_][A-Za-z0-9_]*` followed by any number of `*` scope markers.
pub fn is_valid_variable_name(name: &str) -> bool {
    let base = name.trim_end_matches('*');
    let mut chars = base.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub prob: Prob,
    pub child: NodeId,
}

impl Transition {
    pub fn new(prob: Prob, child: impl Into<NodeId>) -> Self {
        Transition {
            prob,
            child: child.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub statements: Vec<Statement>,
    pub transitions: Vec<Transition>,
}

impl Node {
    pub fn new(id: impl Into<NodeId>, statements: Vec<Statement>, transitions: Vec<Transition>) -> Self {
        Node {
            id: id.into(),
            statements,
            transitions,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.transitions.is_empty()
    }

    /// The first statement on this node binding `variable`.
    pub fn binding(&self, variable: &str) -> Option<&Statement> {
        self.statements.iter().find(|s| s.variable == variable)
    }
}

/// A candidate or validated probability tree.
///
/// Construction never fails so that malformed inputs can still be handed to
/// [`validate_tree`]; lookups resolve to the first node carrying an id.
#[derive(Clone)]
pub struct ProbabilityTree {
    root: NodeId,
    nodes: Vec<Node>,
    index: HashMap<NodeId, usize>,
}

impl ProbabilityTree {
    pub fn new(root: impl Into<NodeId>, nodes: Vec<Node>) -> Self {
        let mut index = HashMap::with_capacity(nodes.len());
        for (at, node) in nodes.iter().enumerate() {
            index.entry(node.id).or_insert(at);
        }
        ProbabilityTree {
            root: root.into(),
            nodes,
            index,
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn root_node(&self) -> Option<&Node> {
        self.node(self.root)
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.index.get(&id).map(|&at| &self.nodes[at])
    }

    pub(crate) fn require(&self, id: NodeId) -> Result<&Node> {
        self.node(id).ok_or(Error::UnknownNode(id))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    /// Nodes in storage order (the order of the source document).
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Every variable name bound anywhere in the tree.
    pub fn variables(&self) -> BTreeSet<&str> {
        self.nodes
            .iter()
            .flat_map(|n| n.statements.iter().map(|s| s.variable.as_str()))
            .collect()
    }

    /// Same tree with the transition probabilities of selected nodes
    /// replaced. Each replacement must list one probability per child.
    pub(crate) fn with_probabilities(&self, updates: &HashMap<NodeId, Vec<Prob>>) -> Self {
        let nodes = self
            .nodes
            .iter()
            .map(|node| match updates.get(&node.id) {
                Some(probs) => {
                    debug_assert_eq!(probs.len(), node.transitions.len());
                    Node {
                        id: node.id,
                        statements: node.statements.clone(),
                        transitions: node
                            .transitions
                            .iter()
                            .zip(probs)
                            .map(|(t, p)| Transition::new(p.clone(), t.child))
                            .collect(),
                    }
                }
                None => node.clone(),
            })
            .collect();
        ProbabilityTree::new(self.root, nodes)
    }
}

impl PartialEq for ProbabilityTree {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.nodes == other.nodes
    }
}

impl Eq for ProbabilityTree {}

impl fmt::Debug for ProbabilityTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProbabilityTree")
            .field("root", &self.root)
            .field("nodes", &self.nodes)
            .finish()
    }
}

/// Indented text rendering, one node per line in depth-first order.
impl fmt::Display for ProbabilityTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut stack = vec![(self.root, 0usize, None::<&Prob>)];
        while let Some((id, depth, prob)) = stack.pop() {
            let Some(node) = self.node(id) else {
                writeln!(f, "{:indent$}<missing {id}>", "", indent = depth * 2)?;
                continue;
            };
            write!(f, "{:indent$}", "", indent = depth * 2)?;
            if let Some(p) = prob {
                write!(f, "[{p}] ")?;
            }
            write!(f, "{id}:")?;
            for s in &node.statements {
                write!(f, " {s}")?;
            }
            writeln!(f)?;
            for t in node.transitions.iter().rev() {
                stack.push((t.child, depth + 1, Some(&t.prob)));
            }
        }
        Ok(())
    }
}

/// A total realization: a root-to-leaf path and its probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub path: Vec<NodeId>,
    pub prob: Prob,
}

impl Realization {
    pub fn leaf(&self) -> NodeId {
        *self.path.last().expect("realization paths are never empty")
    }
}

impl fmt::Display for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(|id| id.to_string()).collect();
        write!(f, "{}: {}", path.join("→"), self.prob)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IssueKind {
    MissingRoot,
    DuplicateId,
    MissingChild,
    MultipleParents,
    RootHasParent,
    Unreachable,
    InvalidProbability,
    Normalization,
    InvalidVariableName,
    VariableRebound,
    VariableUnbound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub node: NodeId,
    pub kind: IssueKind,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn from_issues(issues: Vec<Issue>) -> Self {
        ValidationReport {
            ok: issues.is_empty(),
            issues,
        }
    }

    pub fn has(&self, kind: IssueKind) -> bool {
        self.issues.iter().any(|i| i.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return write!(f, "ok");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "node {}: {:?}: {}", issue.node, issue.kind, issue.message)?;
        }
        Ok(())
    }
}

fn path_string(path: &[NodeId]) -> String {
    path.iter().map(|id| id.to_string()).collect::<Vec<_>>().join("→")
}

/// Checks normalization, tree shape, and well-formedness of every variable.
///
/// Shape problems (missing children, shared children, unreachable nodes)
/// suppress the per-path checks, which need a sound tree to terminate.
pub fn validate_tree(tree: &ProbabilityTree) -> ValidationReport {
    let mut issues = Vec::new();
    let mut issue = |node: NodeId, kind: IssueKind, message: String| {
        issues.push(Issue { node, kind, message });
    };

    let mut seen = HashSet::new();
    for node in tree.nodes() {
        if !seen.insert(node.id) {
            issue(
                node.id,
                IssueKind::DuplicateId,
                format!("node id {} appears more than once", node.id),
            );
        }
    }
    if !tree.contains(tree.root()) {
        issue(
            tree.root(),
            IssueKind::MissingRoot,
            format!("root {} is not a node of the tree", tree.root()),
        );
        return ValidationReport::from_issues(issues);
    }

    let mut parents: HashMap<NodeId, NodeId> = HashMap::new();
    let mut shape_ok = seen.len() == tree.len();
    for node in tree.nodes() {
        for s in &node.statements {
            if !is_valid_variable_name(&s.variable) {
                issue(
                    node.id,
                    IssueKind::InvalidVariableName,
                    format!("invalid variable name {:?}", s.variable),
                );
            }
        }
        if node.transitions.is_empty() {
            continue;
        }
        let mut total = Prob::zero();
        for t in &node.transitions {
            if !t.prob.in_unit_interval() {
                issue(
                    node.id,
                    IssueKind::InvalidProbability,
                    format!("probability {} to child {} outside [0, 1]", t.prob, t.child),
                );
            }
            total = total + &t.prob;
            if !tree.contains(t.child) {
                shape_ok = false;
                issue(
                    node.id,
                    IssueKind::MissingChild,
                    format!("child {} does not exist", t.child),
                );
            } else if t.child == tree.root() {
                shape_ok = false;
                issue(
                    node.id,
                    IssueKind::RootHasParent,
                    format!("root {} listed as a child", t.child),
                );
            } else if let Some(prev) = parents.insert(t.child, node.id) {
                shape_ok = false;
                issue(
                    t.child,
                    IssueKind::MultipleParents,
                    format!("node {} has parents {} and {}", t.child, prev, node.id),
                );
            }
        }
        if !total.is_one() {
            issue(
                node.id,
                IssueKind::Normalization,
                format!("probabilities sum to {} ≠ 1 at node {}", total, node.id),
            );
        }
    }
    if !shape_ok {
        return ValidationReport::from_issues(issues);
    }

    // Well-formedness scan: one DFS keeping per-variable binding counts for
    // the current path. A leaf is complete when it has seen every variable.
    let all_vars: Vec<&str> = tree.variables().into_iter().collect();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut distinct = 0usize;
    let mut path: Vec<NodeId> = Vec::new();
    let mut reached = 0usize;
    // (node, entering?) pairs; exiting pops the node's bindings.
    let mut stack = vec![(tree.root(), true)];
    while let Some((id, entering)) = stack.pop() {
        let node = tree.node(id).expect("shape checked");
        if entering {
            reached += 1;
            path.push(id);
            for s in &node.statements {
                let count = counts.entry(s.variable.as_str()).or_insert(0);
                *count += 1;
                if *count == 1 {
                    distinct += 1;
                } else if *count == 2 {
                    issue(
                        id,
                        IssueKind::VariableRebound,
                        format!("variable {} re-bound on path {}", s.variable, path_string(&path)),
                    );
                }
            }
            if node.is_leaf() && distinct < all_vars.len() {
                for var in &all_vars {
                    if counts.get(var).copied().unwrap_or(0) == 0 {
                        issue(
                            id,
                            IssueKind::VariableUnbound,
                            format!("variable {} unbound on realization {}", var, path_string(&path)),
                        );
                    }
                }
            }
            stack.push((id, false));
            for t in node.transitions.iter().rev() {
                stack.push((t.child, true));
            }
        } else {
            for s in &node.statements {
                let count = counts.get_mut(s.variable.as_str()).expect("entered");
                *count -= 1;
                if *count == 0 {
                    distinct -= 1;
                }
            }
            path.pop();
        }
    }
    if reached < tree.len() {
        let mut reachable = HashSet::new();
        let mut todo = vec![tree.root()];
        while let Some(id) = todo.pop() {
            reachable.insert(id);
            todo.extend(
                tree.node(id)
                    .into_iter()
                    .flat_map(|n| n.transitions.iter().map(|t| t.child)),
            );
        }
        for node in tree.nodes() {
            if !reachable.contains(&node.id) {
                issue(
                    node.id,
                    IssueKind::Unreachable,
                    format!("node {} is not reachable from the root", node.id),
                );
            }
        }
    }
    ValidationReport::from_issues(issues)
}

/// All total realizations in depth-first child order.
pub fn enumerate_realizations(tree: &ProbabilityTree) -> Vec<Realization> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut probs = vec![Prob::one()];
    let mut stack = vec![(tree.root(), true, Prob::one())];
    while let Some((id, entering, edge)) = stack.pop() {
        if !entering {
            path.pop();
            probs.pop();
            continue;
        }
        let Some(node) = tree.node(id) else { continue };
        let mass = probs.last().expect("non-empty") * &edge;
        path.push(id);
        if node.is_leaf() {
            out.push(Realization {
                path: path.clone(),
                prob: mass,
            });
            path.pop();
            continue;
        }
        probs.push(mass);
        stack.push((id, false, Prob::zero()));
        for t in node.transitions.iter().rev() {
            stack.push((t.child, true, t.prob.clone()));
        }
    }
    out
}

/// Maps every non-root node to its unique parent.
pub fn parent_map(tree: &ProbabilityTree) -> HashMap<NodeId, NodeId> {
    tree.nodes()
        .iter()
        .flat_map(|n| n.transitions.iter().map(move |t| (t.child, n.id)))
        .collect()
}

/// Product of the transition probabilities from the root to `id`.
pub fn node_mass(tree: &ProbabilityTree, id: NodeId) -> Result<Prob> {
    tree.require(id)?;
    let parents = parent_map(tree);
    let mut mass = Prob::one();
    let mut at = id;
    while let Some(&parent) = parents.get(&at) {
        let edge = tree
            .require(parent)?
            .transitions
            .iter()
            .find(|t| t.child == at)
            .expect("parent map built from transitions");
        mass = mass * &edge.prob;
        at = parent;
    }
    Ok(mass)
}

/// Masses of every node reachable from the root, in one top-down pass.
pub fn node_masses(tree: &ProbabilityTree) -> HashMap<NodeId, Prob> {
    let mut masses = HashMap::with_capacity(tree.len());
    let mut stack = vec![(tree.root(), Prob::one())];
    while let Some((id, mass)) = stack.pop() {
        let Some(node) = tree.node(id) else { continue };
        walk::note_visit();
        for t in &node.transitions {
            stack.push((t.child, &mass * &t.prob));
        }
        masses.insert(id, mass);
    }
    masses
}
