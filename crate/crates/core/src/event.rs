//! Events and their min-cuts.
//!
//! An event is described by an [`EventExpr`] over statements with negation,
//! conjunction, disjunction and causal precedence. Its [`MinCut`] is the
//! frontier of nodes where the event's truth first becomes settled on every
//! path: the true set where it becomes true, the false set where it becomes
//! false. Min-cuts depend only on the tree's skeleton and statements, never
//! on its probabilities.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::Prob;
use crate::tree::{node_masses, parent_map, Node, NodeId, ProbabilityTree, Statement, Transition, Value};
use crate::walk::{self, Descent, Visit};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EventExpr {
    Atom(Statement),
    Not(Box<EventExpr>),
    And(Box<EventExpr>, Box<EventExpr>),
    Or(Box<EventExpr>, Box<EventExpr>),
    /// `cause` resolves true strictly before `effect` resolves, and `effect`
    /// then resolves true.
    Prec {
        cause: Box<EventExpr>,
        effect: Box<EventExpr>,
    },
}

impl EventExpr {
    pub fn atom(variable: impl Into<String>, value: impl Into<Value>) -> Self {
        EventExpr::Atom(Statement::new(variable, value))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: EventExpr) -> Self {
        EventExpr::Not(Box::new(e))
    }

    pub fn and(a: EventExpr, b: EventExpr) -> Self {
        EventExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: EventExpr, b: EventExpr) -> Self {
        EventExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn prec(cause: EventExpr, effect: EventExpr) -> Self {
        EventExpr::Prec {
            cause: Box::new(cause),
            effect: Box::new(effect),
        }
    }

    /// Nesting depth; an atom has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            EventExpr::Atom(_) => 0,
            EventExpr::Not(e) => 1 + e.depth(),
            EventExpr::And(a, b) | EventExpr::Or(a, b) => 1 + a.depth().max(b.depth()),
            EventExpr::Prec { cause, effect } => 1 + cause.depth().max(effect.depth()),
        }
    }
}

impl fmt::Display for EventExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::query::format_event(self))
    }
}

impl FromStr for EventExpr {
    type Err = crate::error::ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        crate::query::parse_event(s)
    }
}

/// A pair of disjoint node sets: where the event becomes true and where it
/// becomes false. Serializes as `{"true": [ids], "false": [ids]}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MinCut {
    #[serde(rename = "true")]
    pub true_set: BTreeSet<NodeId>,
    #[serde(rename = "false")]
    pub false_set: BTreeSet<NodeId>,
}

impl MinCut {
    pub fn new(true_set: impl IntoIterator<Item = u64>, false_set: impl IntoIterator<Item = u64>) -> Self {
        MinCut {
            true_set: true_set.into_iter().map(NodeId).collect(),
            false_set: false_set.into_iter().map(NodeId).collect(),
        }
    }

    fn settled_true(id: NodeId) -> Self {
        MinCut {
            true_set: BTreeSet::from([id]),
            false_set: BTreeSet::new(),
        }
    }

    fn settled_false(id: NodeId) -> Self {
        MinCut {
            true_set: BTreeSet::new(),
            false_set: BTreeSet::from([id]),
        }
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.true_set.contains(&id) || self.false_set.contains(&id)
    }

    /// Some(true/false) if `id` is in the true/false set.
    pub fn side(&self, id: NodeId) -> Option<bool> {
        if self.true_set.contains(&id) {
            Some(true)
        } else if self.false_set.contains(&id) {
            Some(false)
        } else {
            None
        }
    }
}

impl fmt::Display for MinCut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "true: {}  false: {}",
            id_list(&self.true_set),
            id_list(&self.false_set)
        )
    }
}

pub(crate) fn id_list(ids: &BTreeSet<NodeId>) -> String {
    let items: Vec<String> = ids.iter().map(|id| id.to_string()).collect();
    format!("[{}]", items.join(", "))
}

/// Parents of the false-set nodes: the mechanisms that decide whether the
/// event can still happen.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalSet {
    pub nodes: BTreeSet<NodeId>,
}

impl fmt::Display for CriticalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&id_list(&self.nodes))
    }
}

/// Unions child cuts (largest set absorbs the rest) and collapses to `u`
/// when the children agree.
fn consolidate(u: NodeId, children: Vec<MinCut>) -> MinCut {
    fn merge(sets: Vec<BTreeSet<NodeId>>) -> BTreeSet<NodeId> {
        let mut sets = sets;
        let Some(largest) = (0..sets.len()).max_by_key(|&i| sets[i].len()) else {
            return BTreeSet::new();
        };
        let mut acc = std::mem::take(&mut sets[largest]);
        for set in sets {
            acc.extend(set);
        }
        acc
    }
    let (trues, falses): (Vec<_>, Vec<_>) = children.into_iter().map(|c| (c.true_set, c.false_set)).unzip();
    let true_set = merge(trues);
    let false_set = merge(falses);
    if false_set.is_empty() {
        MinCut::settled_true(u)
    } else if true_set.is_empty() {
        MinCut::settled_false(u)
    } else {
        MinCut { true_set, false_set }
    }
}

struct PropCut<'a> {
    statement: &'a Statement,
}

impl Descent for PropCut<'_> {
    type State = ();
    type Output = MinCut;

    fn enter(&mut self, node: &Node, _: ()) -> Result<Visit<(), MinCut>> {
        if let Some(bound) = node.binding(&self.statement.variable) {
            return Ok(Visit::Resolve(if bound.value == self.statement.value {
                MinCut::settled_true(node.id)
            } else {
                MinCut::settled_false(node.id)
            }));
        }
        if node.is_leaf() {
            return Err(Error::Unresolvable {
                statement: self.statement.clone(),
                leaf: node.id,
            });
        }
        Ok(Visit::Descend(()))
    }

    fn child_state(&mut self, _: &(), _: &Transition) {}

    fn exit(&mut self, node: &Node, _: (), children: Vec<MinCut>) -> Result<MinCut> {
        Ok(consolidate(node.id, children))
    }
}

/// Min-cut of the simple event `s`.
pub fn mincut_prop(tree: &ProbabilityTree, s: &Statement) -> Result<MinCut> {
    walk::descend(tree, &mut PropCut { statement: s }, ())
}

pub fn mincut_neg(cut: &MinCut) -> MinCut {
    MinCut {
        true_set: cut.false_set.clone(),
        false_set: cut.true_set.clone(),
    }
}

struct AndCut<'a> {
    first: &'a MinCut,
    second: &'a MinCut,
}

impl Descent for AndCut<'_> {
    /// Whether each operand has already been seen true on the current path.
    type State = (bool, bool);
    type Output = MinCut;

    fn enter(&mut self, node: &Node, (mut e1, mut e2): (bool, bool)) -> Result<Visit<(bool, bool), MinCut>> {
        let u = node.id;
        if self.first.false_set.contains(&u) || self.second.false_set.contains(&u) {
            return Ok(Visit::Resolve(MinCut::settled_false(u)));
        }
        e1 |= self.first.true_set.contains(&u);
        e2 |= self.second.true_set.contains(&u);
        if e1 && e2 {
            return Ok(Visit::Resolve(MinCut::settled_true(u)));
        }
        Ok(Visit::Descend((e1, e2)))
    }

    fn child_state(&mut self, state: &(bool, bool), _: &Transition) -> (bool, bool) {
        *state
    }

    fn exit(&mut self, node: &Node, _: (bool, bool), children: Vec<MinCut>) -> Result<MinCut> {
        Ok(consolidate(node.id, children))
    }
}

pub fn mincut_and(tree: &ProbabilityTree, c1: &MinCut, c2: &MinCut) -> Result<MinCut> {
    walk::descend(tree, &mut AndCut { first: c1, second: c2 }, (false, false))
}

pub fn mincut_or(tree: &ProbabilityTree, c1: &MinCut, c2: &MinCut) -> Result<MinCut> {
    Ok(mincut_neg(&mincut_and(tree, &mincut_neg(c1), &mincut_neg(c2))?))
}

struct PrecCut<'a> {
    cause: &'a MinCut,
    effect: &'a MinCut,
}

impl Descent for PrecCut<'_> {
    /// Whether the cause has already resolved true on the current path.
    type State = bool;
    type Output = MinCut;

    fn enter(&mut self, node: &Node, mut cause_seen: bool) -> Result<Visit<bool, MinCut>> {
        let u = node.id;
        if !cause_seen {
            if self.effect.contains(u) || self.cause.false_set.contains(&u) {
                return Ok(Visit::Resolve(MinCut::settled_false(u)));
            }
            cause_seen = self.cause.true_set.contains(&u);
        } else {
            match self.effect.side(u) {
                Some(true) => return Ok(Visit::Resolve(MinCut::settled_true(u))),
                Some(false) => return Ok(Visit::Resolve(MinCut::settled_false(u))),
                None => {}
            }
        }
        Ok(Visit::Descend(cause_seen))
    }

    fn child_state(&mut self, state: &bool, _: &Transition) -> bool {
        *state
    }

    fn exit(&mut self, node: &Node, _: bool, children: Vec<MinCut>) -> Result<MinCut> {
        Ok(consolidate(node.id, children))
    }
}

/// Min-cut of "`cause` precedes `effect`".
pub fn mincut_prec(tree: &ProbabilityTree, cause: &MinCut, effect: &MinCut) -> Result<MinCut> {
    walk::descend(tree, &mut PrecCut { cause, effect }, false)
}

pub fn mincut_of_expr(tree: &ProbabilityTree, e: &EventExpr) -> Result<MinCut> {
    match e {
        EventExpr::Atom(s) => mincut_prop(tree, s),
        EventExpr::Not(inner) => Ok(mincut_neg(&mincut_of_expr(tree, inner)?)),
        EventExpr::And(a, b) => mincut_and(tree, &mincut_of_expr(tree, a)?, &mincut_of_expr(tree, b)?),
        EventExpr::Or(a, b) => mincut_or(tree, &mincut_of_expr(tree, a)?, &mincut_of_expr(tree, b)?),
        EventExpr::Prec { cause, effect } => {
            mincut_prec(tree, &mincut_of_expr(tree, cause)?, &mincut_of_expr(tree, effect)?)
        }
    }
}

pub fn critical_set(tree: &ProbabilityTree, cut: &MinCut) -> CriticalSet {
    let parents = parent_map(tree);
    CriticalSet {
        nodes: cut.false_set.iter().filter_map(|u| parents.get(u).copied()).collect(),
    }
}

/// Sum of the masses of the true-set nodes.
pub fn event_probability(tree: &ProbabilityTree, cut: &MinCut) -> Result<Prob> {
    let masses = node_masses(tree);
    cut.true_set
        .iter()
        .map(|u| masses.get(u).cloned().ok_or(Error::UnknownNode(*u)))
        .sum()
}
