//! Brute-force reference implementations for differential testing.
//!
//! Everything here works from enumerated realizations: an event's truth is
//! computed per leaf, and the min-cut is read off as the shallowest nodes
//! whose leaves all agree. Nothing in this module calls into the min-cut or
//! transform code it is meant to check. Costs are quadratic or worse; use it
//! on small trees only.

mod gen;

use std::collections::{BTreeSet, HashMap, HashSet};

pub use gen::{random_expr, random_tree, GenParams};

use crate::error::{Error, Result};
use crate::event::{EventExpr, MinCut};
use crate::prob::Prob;
use crate::tree::{
    enumerate_realizations, parent_map, Node, NodeId, ProbabilityTree, Realization, Statement, Transition,
};

/// A node where an event's truth becomes settled on a path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResolutionPoint {
    pub node: NodeId,
    pub value: bool,
}

/// Realizations in depth-first order and, for every node, the half-open
/// range of realization indices passing through it.
struct Layout {
    realizations: Vec<Realization>,
    span: HashMap<NodeId, (usize, usize)>,
}

impl Layout {
    fn new(tree: &ProbabilityTree) -> Self {
        let realizations = enumerate_realizations(tree);
        let mut span: HashMap<NodeId, (usize, usize)> = HashMap::new();
        for (i, r) in realizations.iter().enumerate() {
            for id in &r.path {
                let entry = span.entry(*id).or_insert((i, i + 1));
                entry.1 = i + 1;
            }
        }
        Layout { realizations, span }
    }

    fn index_of(&self, r: &Realization) -> Option<usize> {
        self.realizations.iter().position(|x| x.path == r.path)
    }
}

/// Per-realization truth of an event with prefix counts for O(1) constancy
/// checks over a node's leaf range.
struct Truth {
    values: Vec<bool>,
    prefix: Vec<usize>,
}

impl Truth {
    fn new(values: Vec<bool>) -> Self {
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(0);
        for &v in &values {
            prefix.push(prefix.last().unwrap() + usize::from(v));
        }
        Truth { values, prefix }
    }

    /// Some(value) when every realization in the range agrees.
    fn constant(&self, (lo, hi): (usize, usize)) -> Option<bool> {
        match self.prefix[hi] - self.prefix[lo] {
            0 => Some(false),
            n if n == hi - lo => Some(true),
            _ => None,
        }
    }

    /// First node on realization `i`'s path where the truth is settled.
    fn resolution(&self, layout: &Layout, i: usize) -> (usize, ResolutionPoint) {
        let path = &layout.realizations[i].path;
        for (depth, id) in path.iter().enumerate() {
            if let Some(value) = self.constant(layout.span[id]) {
                return (depth, ResolutionPoint { node: *id, value });
            }
        }
        unreachable!("a leaf's own range is a single realization")
    }
}

fn atom_truth(tree: &ProbabilityTree, layout: &Layout, s: &Statement) -> Result<Vec<bool>> {
    layout
        .realizations
        .iter()
        .map(|r| {
            let bound = r
                .path
                .iter()
                .filter_map(|id| tree.node(*id))
                .flat_map(|n| n.statements.iter())
                .find(|b| b.variable == s.variable);
            match bound {
                Some(b) => Ok(b.value == s.value),
                None => Err(Error::Unresolvable {
                    statement: s.clone(),
                    leaf: r.leaf(),
                }),
            }
        })
        .collect()
}

fn truth(tree: &ProbabilityTree, layout: &Layout, e: &EventExpr) -> Result<Truth> {
    let values = match e {
        EventExpr::Atom(s) => atom_truth(tree, layout, s)?,
        EventExpr::Not(inner) => truth(tree, layout, inner)?.values.iter().map(|v| !v).collect(),
        EventExpr::And(a, b) => {
            let (a, b) = (truth(tree, layout, a)?, truth(tree, layout, b)?);
            a.values.iter().zip(&b.values).map(|(x, y)| *x && *y).collect()
        }
        EventExpr::Or(a, b) => {
            let (a, b) = (truth(tree, layout, a)?, truth(tree, layout, b)?);
            a.values.iter().zip(&b.values).map(|(x, y)| *x || *y).collect()
        }
        EventExpr::Prec { cause, effect } => {
            let (cause, effect) = (truth(tree, layout, cause)?, truth(tree, layout, effect)?);
            (0..layout.realizations.len())
                .map(|i| {
                    let (cause_depth, cause_at) = cause.resolution(layout, i);
                    let (effect_depth, effect_at) = effect.resolution(layout, i);
                    cause_at.value && effect_at.value && cause_depth < effect_depth
                })
                .collect()
        }
    };
    Ok(Truth::new(values))
}

/// Whether `e` holds on realization `r` of `tree`.
pub fn oracle_event_truth(tree: &ProbabilityTree, e: &EventExpr, r: &Realization) -> Result<bool> {
    let layout = Layout::new(tree);
    let i = layout
        .index_of(r)
        .ok_or_else(|| Error::OracleUndefined("not a realization of this tree".to_string()))?;
    Ok(truth(tree, &layout, e)?.values[i])
}

/// Where `e` becomes settled along realization `r`.
pub fn oracle_resolution(tree: &ProbabilityTree, e: &EventExpr, r: &Realization) -> Result<ResolutionPoint> {
    let layout = Layout::new(tree);
    let i = layout
        .index_of(r)
        .ok_or_else(|| Error::OracleUndefined("not a realization of this tree".to_string()))?;
    Ok(truth(tree, &layout, e)?.resolution(&layout, i).1)
}

/// Min-cut by exhaustive constancy scan: nodes whose leaves agree on `e`
/// while their parent's leaves do not.
pub fn oracle_mincut(tree: &ProbabilityTree, e: &EventExpr) -> Result<MinCut> {
    let layout = Layout::new(tree);
    let truth = truth(tree, &layout, e)?;
    let parents = parent_map(tree);
    let mut cut = MinCut::default();
    for (id, range) in &layout.span {
        let Some(value) = truth.constant(*range) else { continue };
        let parent_settled = parents
            .get(id)
            .is_some_and(|p| truth.constant(layout.span[p]).is_some());
        if !parent_settled {
            if value {
                cut.true_set.insert(*id);
            } else {
                cut.false_set.insert(*id);
            }
        }
    }
    Ok(cut)
}

fn positive(realizations: Vec<Realization>) -> Vec<Realization> {
    realizations.into_iter().filter(|r| r.prob.is_positive()).collect()
}

/// Global filter-and-renormalize over realizations. Returns the
/// positive-mass realizations where `e` holds.
pub fn oracle_condition_distribution(tree: &ProbabilityTree, e: &EventExpr) -> Result<Vec<Realization>> {
    let layout = Layout::new(tree);
    let truth = truth(tree, &layout, e)?;
    let kept: Vec<Realization> = layout
        .realizations
        .into_iter()
        .zip(&truth.values)
        .filter_map(|(r, &t)| t.then_some(r))
        .collect();
    let total: Prob = kept.iter().map(|r| &r.prob).sum();
    if total.is_zero() {
        return Err(Error::OracleUndefined(
            "zero-probability conditioning excluded from differential tests".to_string(),
        ));
    }
    Ok(positive(
        kept.into_iter()
            .map(|r| Realization {
                prob: &r.prob / &total,
                path: r.path,
            })
            .collect(),
    ))
}

fn critical_nodes(tree: &ProbabilityTree, cut: &MinCut) -> BTreeSet<NodeId> {
    let parents = parent_map(tree);
    cut.false_set.iter().filter_map(|u| parents.get(u).copied()).collect()
}

/// Copy of `tree` with edges into the false set zeroed and the remaining
/// edges out of each critical node rescaled to sum to one.
fn reweighted(tree: &ProbabilityTree, cut: &MinCut) -> Result<ProbabilityTree> {
    if cut.true_set.is_empty() {
        return Err(Error::OracleUndefined(
            "intervention on a logically false event".to_string(),
        ));
    }
    let critical = critical_nodes(tree, cut);
    let mut nodes = Vec::with_capacity(tree.len());
    for node in tree.nodes() {
        if !critical.contains(&node.id) {
            nodes.push(node.clone());
            continue;
        }
        let retained: Prob = node
            .transitions
            .iter()
            .filter(|t| !cut.false_set.contains(&t.child))
            .map(|t| &t.prob)
            .sum();
        if retained.is_zero() {
            return Err(Error::OracleUndefined(format!(
                "critical node {} retains no mass",
                node.id
            )));
        }
        let transitions = node
            .transitions
            .iter()
            .map(|t| {
                let p = if cut.false_set.contains(&t.child) {
                    Prob::zero()
                } else {
                    &t.prob / &retained
                };
                Transition::new(p, t.child)
            })
            .collect();
        nodes.push(Node::new(node.id, node.statements.clone(), transitions));
    }
    Ok(ProbabilityTree::new(tree.root(), nodes))
}

/// Local reweighting at the critical set; returns the positive-mass
/// realizations of the reweighted tree.
pub fn oracle_intervention_distribution(tree: &ProbabilityTree, e: &EventExpr) -> Result<Vec<Realization>> {
    let cut = oracle_mincut(tree, e)?;
    Ok(positive(enumerate_realizations(&reweighted(tree, &cut)?)))
}

/// Counterfactual tree composed edge by edge: an edge leaving a node that is
/// a critical node of `e` (on `reference`), or lies below one, takes the
/// intervened probability; every other edge takes the factual one. Variables
/// bound strictly below a critical node get the `*` suffix everywhere.
pub fn oracle_counterfactual(
    reference: &ProbabilityTree,
    factual: &ProbabilityTree,
    e: &EventExpr,
) -> Result<ProbabilityTree> {
    let cut = oracle_mincut(reference, e)?;
    let intervened = reweighted(reference, &cut)?;
    let critical = critical_nodes(reference, &cut);
    let parents = parent_map(reference);
    let ancestors = |id: NodeId| {
        let mut out = Vec::new();
        let mut at = id;
        while let Some(&p) = parents.get(&at) {
            out.push(p);
            at = p;
        }
        out
    };

    let mut rescoped: HashSet<&str> = HashSet::new();
    for node in reference.nodes() {
        if ancestors(node.id).iter().any(|a| critical.contains(a)) {
            rescoped.extend(node.statements.iter().map(|s| s.variable.as_str()));
        }
    }

    let mut nodes = Vec::with_capacity(reference.len());
    for node in reference.nodes() {
        let downstream = critical.contains(&node.id) || ancestors(node.id).iter().any(|a| critical.contains(a));
        let source = if downstream { &intervened } else { factual };
        let transitions = source
            .node(node.id)
            .ok_or_else(|| Error::OracleUndefined(format!("node {} missing from factual tree", node.id)))?
            .transitions
            .clone();
        let statements = node
            .statements
            .iter()
            .map(|s| {
                if rescoped.contains(s.variable.as_str()) {
                    Statement::new(format!("{}*", s.variable), s.value.clone())
                } else {
                    s.clone()
                }
            })
            .collect();
        nodes.push(Node::new(node.id, statements, transitions));
    }
    Ok(ProbabilityTree::new(reference.root(), nodes))
}
