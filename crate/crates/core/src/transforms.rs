//! The three causal-hierarchy transforms.
//!
//! * [`see`] conditions on an event: mass of realizations where the event is
//!   false is removed and the rest renormalized globally, which only touches
//!   transitions upstream of the event's min-cut.
//! * [`do_intervention`] forces an event: transitions into the false set are
//!   zeroed and renormalized locally at each critical node.
//! * [`counterfactual`] composes a factual tree (reference plus see/do
//!   steps) with an intervened reference: factual probabilities above the
//!   critical bifurcations, intervened ones at and below them. Variables
//!   bound below a bifurcation get a `*` suffix to mark the new scope.
//!
//! All three keep ids, topology, and child order. When every true-reaching
//! child of a node has zero mass the transforms spread probability uniformly
//! over those children.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::event::{event_probability, mincut_of_expr, EventExpr, MinCut};
use crate::prob::Prob;
use crate::tree::{Node, NodeId, ProbabilityTree, Statement, Transition};
use crate::walk::{self, Descent, Visit};

/// One child's contribution when renormalizing a node's transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizeEntry {
    pub child: NodeId,
    /// Whether the child can reach the true set.
    pub reaches_true: bool,
    /// Mass routed toward the true set through this child.
    pub mass: Prob,
}

/// New transitions proportional to `mass / sigma_p`, or uniform over the
/// true-reaching children when `sigma_p` is zero.
pub fn normalize(entries: &[NormalizeEntry], sigma_l: usize, sigma_p: &Prob) -> Result<Vec<Transition>> {
    if sigma_l == 0 {
        return Err(Error::Unreachable(None));
    }
    let transitions = if sigma_p.is_positive() {
        entries
            .iter()
            .map(|e| Transition::new(&e.mass / sigma_p, e.child))
            .collect()
    } else {
        let share = Prob::new(1, sigma_l as i64);
        entries
            .iter()
            .map(|e| Transition::new(if e.reaches_true { share.clone() } else { Prob::zero() }, e.child))
            .collect()
    };
    Ok(transitions)
}

/// Sums the entries and normalizes them, recording the uniform fallback.
fn renormalize(node: &Node, entries: &[NormalizeEntry], uniform_at: &mut BTreeSet<NodeId>) -> Result<Vec<Prob>> {
    let sigma_l = entries.iter().filter(|e| e.reaches_true).count();
    let sigma_p: Prob = entries.iter().map(|e| &e.mass).sum();
    if sigma_l == 0 {
        return Err(Error::Unreachable(Some(node.id)));
    }
    if sigma_p.is_zero() {
        uniform_at.insert(node.id);
    }
    Ok(normalize(entries, sigma_l, &sigma_p)?
        .into_iter()
        .map(|t| t.prob)
        .collect())
}

/// A transformed tree plus the nodes where the uniform version of the
/// renormalization had to be used because no positive mass was left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transformed {
    pub tree: ProbabilityTree,
    pub uniform_at: BTreeSet<NodeId>,
}

struct Condition<'a> {
    cut: &'a MinCut,
    updates: HashMap<NodeId, Vec<Prob>>,
    uniform_at: BTreeSet<NodeId>,
}

impl Descent for Condition<'_> {
    /// Mass of the path from the root to this node.
    type State = Prob;
    /// (reaches true set, true mass below).
    type Output = (bool, Prob);

    fn enter(&mut self, node: &Node, q: Prob) -> Result<Visit<Prob, (bool, Prob)>> {
        Ok(match self.cut.side(node.id) {
            Some(true) => Visit::Resolve((true, q)),
            Some(false) => Visit::Resolve((false, Prob::zero())),
            None => Visit::Descend(q),
        })
    }

    fn child_state(&mut self, q: &Prob, edge: &Transition) -> Prob {
        q * &edge.prob
    }

    fn exit(&mut self, node: &Node, _: Prob, children: Vec<(bool, Prob)>) -> Result<(bool, Prob)> {
        let entries: Vec<NormalizeEntry> = node
            .transitions
            .iter()
            .zip(children)
            .map(|(t, (reaches_true, mass))| NormalizeEntry {
                child: t.child,
                reaches_true,
                mass,
            })
            .collect();
        let total: Prob = entries.iter().map(|e| &e.mass).sum();
        let probs = renormalize(node, &entries, &mut self.uniform_at)?;
        self.updates.insert(node.id, probs);
        Ok((true, total))
    }
}

pub fn see_traced(tree: &ProbabilityTree, cut: &MinCut) -> Result<Transformed> {
    if cut.true_set.is_empty() {
        return Err(Error::LogicallyFalse("conditioning"));
    }
    let mut pass = Condition {
        cut,
        updates: HashMap::new(),
        uniform_at: BTreeSet::new(),
    };
    walk::descend(tree, &mut pass, Prob::one())?;
    Ok(Transformed {
        tree: tree.with_probabilities(&pass.updates),
        uniform_at: pass.uniform_at,
    })
}

/// Conditions `tree` on the event whose min-cut is `cut`.
pub fn see(tree: &ProbabilityTree, cut: &MinCut) -> Result<ProbabilityTree> {
    Ok(see_traced(tree, cut)?.tree)
}

struct Intervene<'a> {
    cut: &'a MinCut,
    updates: HashMap<NodeId, Vec<Prob>>,
    uniform_at: BTreeSet<NodeId>,
}

impl Descent for Intervene<'_> {
    type State = ();
    /// Whether the subtree can still reach the true set.
    type Output = bool;

    fn enter(&mut self, node: &Node, _: ()) -> Result<Visit<(), bool>> {
        Ok(match self.cut.side(node.id) {
            Some(side) => Visit::Resolve(side),
            None => Visit::Descend(()),
        })
    }

    fn child_state(&mut self, _: &(), _: &Transition) {}

    fn exit(&mut self, node: &Node, _: (), children: Vec<bool>) -> Result<bool> {
        // Nodes without a false child renormalize to themselves.
        if children.iter().all(|&b| b) {
            return Ok(true);
        }
        let entries: Vec<NormalizeEntry> = node
            .transitions
            .iter()
            .zip(children)
            .map(|(t, reaches_true)| NormalizeEntry {
                child: t.child,
                reaches_true,
                mass: if reaches_true { t.prob.clone() } else { Prob::zero() },
            })
            .collect();
        let probs = renormalize(node, &entries, &mut self.uniform_at)?;
        self.updates.insert(node.id, probs);
        Ok(true)
    }
}

pub fn do_intervention_traced(tree: &ProbabilityTree, cut: &MinCut) -> Result<Transformed> {
    if cut.true_set.is_empty() {
        return Err(Error::LogicallyFalse("intervening"));
    }
    let mut pass = Intervene {
        cut,
        updates: HashMap::new(),
        uniform_at: BTreeSet::new(),
    };
    walk::descend(tree, &mut pass, ())?;
    Ok(Transformed {
        tree: tree.with_probabilities(&pass.updates),
        uniform_at: pass.uniform_at,
    })
}

/// Intervenes on `tree` so that the event whose min-cut is `cut` holds.
pub fn do_intervention(tree: &ProbabilityTree, cut: &MinCut) -> Result<ProbabilityTree> {
    Ok(do_intervention_traced(tree, cut)?.tree)
}

/// Where a node's outgoing probabilities come from in a counterfactual.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Source {
    /// This node and its whole subtree follow the factual tree.
    FactualSubtree,
    /// Only this node's transitions follow the factual tree.
    Factual,
    /// This node and its whole subtree follow the intervened tree.
    IntervenedSubtree,
}

struct Bifurcations<'a> {
    cut: &'a MinCut,
    sources: HashMap<NodeId, Source>,
    found: Vec<NodeId>,
}

impl Descent for Bifurcations<'_> {
    type State = ();
    /// False when the node is in the false set.
    type Output = bool;

    fn enter(&mut self, node: &Node, _: ()) -> Result<Visit<(), bool>> {
        Ok(match self.cut.side(node.id) {
            Some(true) => {
                self.sources.insert(node.id, Source::FactualSubtree);
                Visit::Resolve(true)
            }
            Some(false) => {
                self.sources.insert(node.id, Source::IntervenedSubtree);
                Visit::Resolve(false)
            }
            None => Visit::Descend(()),
        })
    }

    fn child_state(&mut self, _: &(), _: &Transition) {}

    fn exit(&mut self, node: &Node, _: (), children: Vec<bool>) -> Result<bool> {
        if children.iter().any(|&b| !b) {
            self.sources.insert(node.id, Source::IntervenedSubtree);
            self.found.push(node.id);
        } else {
            self.sources.insert(node.id, Source::Factual);
        }
        Ok(true)
    }
}

fn check_same_topology(reference: &ProbabilityTree, factual: &ProbabilityTree) -> Result<()> {
    if reference.root() != factual.root() {
        return Err(Error::TopologyMismatch {
            node: reference.root(),
            detail: format!("factual tree is rooted at {}", factual.root()),
        });
    }
    if reference.len() != factual.len() {
        return Err(Error::TopologyMismatch {
            node: reference.root(),
            detail: format!("{} nodes in reference, {} in factual", reference.len(), factual.len()),
        });
    }
    for node in reference.nodes() {
        let Some(other) = factual.node(node.id) else {
            return Err(Error::TopologyMismatch {
                node: node.id,
                detail: "missing from factual tree".to_string(),
            });
        };
        let same_children = node.transitions.len() == other.transitions.len()
            && node
                .transitions
                .iter()
                .zip(&other.transitions)
                .all(|(a, b)| a.child == b.child);
        if !same_children {
            return Err(Error::TopologyMismatch {
                node: node.id,
                detail: "children differ".to_string(),
            });
        }
    }
    Ok(())
}

/// [`counterfactual`] with a custom scope suffix.
pub fn counterfactual_with_suffix(
    reference: &ProbabilityTree,
    factual: &ProbabilityTree,
    cut: &MinCut,
    suffix: &str,
) -> Result<ProbabilityTree> {
    check_same_topology(reference, factual)?;
    let intervened = do_intervention(reference, cut)?;

    let mut pass = Bifurcations {
        cut,
        sources: HashMap::new(),
        found: Vec::new(),
    };
    walk::descend(&intervened, &mut pass, ())?;
    let bifurcations: HashSet<NodeId> = pass.found.into_iter().collect();

    // Top-down: resolve each node's source, and collect the variables bound
    // strictly below a bifurcation.
    let mut chosen: HashMap<NodeId, &Node> = HashMap::with_capacity(reference.len());
    let mut rescoped: HashSet<&str> = HashSet::new();
    let mut stack = vec![(reference.root(), None::<Source>, false)];
    while let Some((id, inherited, below_bifurcation)) = stack.pop() {
        let source = inherited
            .or_else(|| pass.sources.get(&id).copied())
            .unwrap_or(Source::Factual);
        let node = match source {
            Source::Factual | Source::FactualSubtree => factual.require(id)?,
            Source::IntervenedSubtree => intervened.require(id)?,
        };
        if below_bifurcation {
            rescoped.extend(intervened.require(id)?.statements.iter().map(|s| s.variable.as_str()));
        }
        chosen.insert(id, node);
        let passed_down = match source {
            Source::Factual => None,
            subtree => Some(subtree),
        };
        let child_below = below_bifurcation || bifurcations.contains(&id);
        for t in &node.transitions {
            stack.push((t.child, passed_down, child_below));
        }
    }

    let nodes = reference
        .nodes()
        .iter()
        .map(|orig| {
            let transitions = chosen
                .get(&orig.id)
                .map_or_else(|| orig.transitions.clone(), |n| n.transitions.clone());
            let statements = orig
                .statements
                .iter()
                .map(|s| {
                    if rescoped.contains(s.variable.as_str()) {
                        Statement {
                            variable: format!("{}{}", s.variable, suffix),
                            value: s.value.clone(),
                        }
                    } else {
                        s.clone()
                    }
                })
                .collect();
            Node {
                id: orig.id,
                statements,
                transitions,
            }
        })
        .collect();
    Ok(ProbabilityTree::new(reference.root(), nodes))
}

/// Counterfactual tree for "had the event with min-cut `cut` been true",
/// given the factual tree derived from `reference`.
pub fn counterfactual(reference: &ProbabilityTree, factual: &ProbabilityTree, cut: &MinCut) -> Result<ProbabilityTree> {
    counterfactual_with_suffix(reference, factual, cut, "*")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PipelineStep {
    See(EventExpr),
    Do(EventExpr),
    Cf(EventExpr),
}

impl PipelineStep {
    pub fn event(&self) -> &EventExpr {
        match self {
            PipelineStep::See(e) | PipelineStep::Do(e) | PipelineStep::Cf(e) => e,
        }
    }
}

impl fmt::Display for PipelineStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineStep::See(e) => write!(f, "see({e})"),
            PipelineStep::Do(e) => write!(f, "do({e})"),
            PipelineStep::Cf(e) => write!(f, "cf({e})"),
        }
    }
}

/// The (reference, current) pair threaded through a sequence of steps.
/// A counterfactual step makes its result the new reference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineState {
    pub reference: ProbabilityTree,
    pub current: ProbabilityTree,
}

impl PipelineState {
    pub fn new(tree: ProbabilityTree) -> Self {
        PipelineState {
            reference: tree.clone(),
            current: tree,
        }
    }

    /// Applies one step. On error the state is left unchanged.
    pub fn apply(&mut self, step: &PipelineStep) -> Result<()> {
        match step {
            PipelineStep::See(e) => {
                self.current = see(&self.current, &mincut_of_expr(&self.current, e)?)?;
            }
            PipelineStep::Do(e) => {
                self.current = do_intervention(&self.current, &mincut_of_expr(&self.current, e)?)?;
            }
            PipelineStep::Cf(e) => {
                let cut = mincut_of_expr(&self.reference, e)?;
                let result = counterfactual(&self.reference, &self.current, &cut)?;
                self.reference = result.clone();
                self.current = result;
            }
        }
        Ok(())
    }

    pub fn probability(&self, target: &EventExpr) -> Result<Prob> {
        event_probability(&self.current, &mincut_of_expr(&self.current, target)?)
    }
}

pub fn apply_steps(reference: &ProbabilityTree, steps: &[PipelineStep]) -> Result<PipelineState> {
    let mut state = PipelineState::new(reference.clone());
    for step in steps {
        state.apply(step)?;
    }
    Ok(state)
}

/// Folds `steps` over `reference` and evaluates `target` on the result.
pub fn apply_pipeline(
    reference: &ProbabilityTree,
    steps: &[PipelineStep],
    target: &EventExpr,
) -> Result<(Prob, ProbabilityTree)> {
    let state = apply_steps(reference, steps)?;
    let prob = state.probability(target)?;
    Ok((prob, state.current))
}
