//! Depth-first descent with an explicit stack.
//!
//! Every tree algorithm in the crate has the same shape: descend from the
//! root carrying some state, stop early at nodes that resolve the question,
//! and combine child results on the way back up. [`descend`] runs that
//! pattern without recursion so chain-shaped trees of any depth are safe.
//!
//! Each node entered bumps a thread-local visit counter; [`count_visits`]
//! exposes it for complexity checks.

use std::cell::Cell;

use crate::error::Result;
use crate::tree::{Node, ProbabilityTree, Transition};

thread_local! {
    static VISITS: Cell<u64> = const { Cell::new(0) };
}

pub(crate) fn note_visit() {
    VISITS.with(|v| v.set(v.get() + 1));
}

/// Runs `f` and returns its result with the number of tree nodes the
/// crate's algorithms visited on this thread meanwhile.
pub fn count_visits<R>(f: impl FnOnce() -> R) -> (R, u64) {
    let before = VISITS.with(Cell::get);
    let out = f();
    let after = VISITS.with(Cell::get);
    (out, after - before)
}

pub(crate) enum Visit<S, R> {
    /// The node settles the result for its whole subtree.
    Resolve(R),
    /// Continue into the children with this state.
    Descend(S),
}

pub(crate) trait Descent {
    type State;
    type Output;

    fn enter(&mut self, node: &Node, state: Self::State) -> Result<Visit<Self::State, Self::Output>>;

    fn child_state(&mut self, state: &Self::State, edge: &Transition) -> Self::State;

    /// `children` holds one output per transition, in child order.
    fn exit(&mut self, node: &Node, state: Self::State, children: Vec<Self::Output>) -> Result<Self::Output>;
}

struct Frame<'t, S, R> {
    node: &'t Node,
    state: S,
    next: usize,
    results: Vec<R>,
}

pub(crate) fn descend<D: Descent>(tree: &ProbabilityTree, descent: &mut D, init: D::State) -> Result<D::Output> {
    let root = tree.require(tree.root())?;
    note_visit();
    let state = match descent.enter(root, init)? {
        Visit::Resolve(out) => return Ok(out),
        Visit::Descend(state) => state,
    };
    let mut stack = vec![Frame {
        node: root,
        state,
        next: 0,
        results: Vec::with_capacity(root.transitions.len()),
    }];
    loop {
        let top = stack.last_mut().expect("stack non-empty until the root exits");
        if let Some(edge) = top.node.transitions.get(top.next) {
            top.next += 1;
            let child = tree.require(edge.child)?;
            let child_state = descent.child_state(&top.state, edge);
            note_visit();
            match descent.enter(child, child_state)? {
                Visit::Resolve(out) => top.results.push(out),
                Visit::Descend(state) => stack.push(Frame {
                    node: child,
                    state,
                    next: 0,
                    results: Vec::with_capacity(child.transitions.len()),
                }),
            }
        } else {
            let frame = stack.pop().expect("checked above");
            let out = descent.exit(frame.node, frame.state, frame.results)?;
            match stack.last_mut() {
                Some(parent) => parent.results.push(out),
                None => return Ok(out),
            }
        }
    }
}
