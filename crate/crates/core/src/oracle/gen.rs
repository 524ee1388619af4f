//! Seeded generators for well-formed trees and event expressions.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::event::EventExpr;
use crate::prob::Prob;
use crate::tree::{Node, NodeId, ProbabilityTree, Statement, Transition, Value};

#[derive(Clone, Debug)]
pub struct GenParams {
    /// Number of levels below the root; each level binds at least one variable.
    pub max_depth: usize,
    /// Children per interior node, at least 2.
    pub max_branching: usize,
    /// Variables take values in `0..value_range`.
    pub value_range: i64,
    /// When false, some transitions get probability zero.
    pub strictly_positive: bool,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_depth: 3,
            max_branching: 3,
            value_range: 2,
            strictly_positive: true,
            seed: 0,
        }
    }
}

struct Pending {
    slot: usize,
    remaining: Vec<String>,
    depth: usize,
}

/// A random well-formed tree. Every realization binds the same variable set,
/// but the binding order is chosen per node, so orders differ between
/// branches. Node ids are a random permutation, unrelated to depth.
pub fn random_tree(params: &GenParams) -> ProbabilityTree {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let branching = params.max_branching.max(2);
    let value_range = params.value_range.max(1);
    let nvars = rng.gen_range(1..=params.max_depth.max(1));
    let vars: Vec<String> = (0..nvars).map(variable_name).collect();

    // Slots are filled in depth-first order; ids are assigned afterwards.
    let mut statements: Vec<Vec<Statement>> = vec![vec![Statement::new("O", 1)]];
    let mut children: Vec<Vec<(u64, usize)>> = vec![Vec::new()];
    let mut stack = vec![Pending {
        slot: 0,
        remaining: vars,
        depth: 0,
    }];
    while let Some(Pending { slot, remaining, depth }) = stack.pop() {
        if remaining.is_empty() || depth >= params.max_depth {
            continue;
        }
        let shared = rng.gen_range(0..remaining.len());
        let count = rng.gen_range(2..=branching);
        let mut frames = Vec::with_capacity(count);
        for _ in 0..count {
            let mut left = remaining.clone();
            let pick = if rng.gen_bool(0.2) {
                rng.gen_range(0..left.len())
            } else {
                shared
            };
            let mut bound = vec![left.remove(pick)];
            if left.len() > 1 && rng.gen_bool(0.1) {
                let extra = rng.gen_range(0..left.len());
                bound.push(left.remove(extra));
            }
            // Levels are limited, so any variables left at the last level
            // are bound there.
            if depth + 1 >= params.max_depth {
                bound.append(&mut left);
            }
            let stmts = bound
                .into_iter()
                .map(|v| Statement::new(v, rng.gen_range(0..value_range)))
                .collect();
            let weight = if params.strictly_positive {
                rng.gen_range(1..=5)
            } else {
                rng.gen_range(0..=5)
            };
            let child = statements.len();
            statements.push(stmts);
            children.push(Vec::new());
            children[slot].push((weight, child));
            frames.push(Pending {
                slot: child,
                remaining: left,
                depth: depth + 1,
            });
        }
        if children[slot].iter().all(|(w, _)| *w == 0) {
            let i = rng.gen_range(0..children[slot].len());
            children[slot][i].0 = 1;
        }
        stack.extend(frames.into_iter().rev());
    }

    let mut ids: Vec<u64> = (0..statements.len() as u64).collect();
    ids.shuffle(&mut rng);
    let nodes = statements
        .into_iter()
        .zip(&children)
        .enumerate()
        .map(|(slot, (stmts, kids))| {
            let total: u64 = kids.iter().map(|(w, _)| w).sum();
            let transitions = kids
                .iter()
                .map(|&(w, c)| Transition::new(Prob::new(w as i64, total as i64), ids[c]))
                .collect();
            Node::new(ids[slot], stmts, transitions)
        })
        .collect();
    ProbabilityTree::new(NodeId(ids[0]), nodes)
}

fn variable_name(i: usize) -> String {
    const LETTERS: &[u8] = b"ABCDEFGHJKLMN";
    let letter = LETTERS[i % LETTERS.len()] as char;
    match i / LETTERS.len() {
        0 => letter.to_string(),
        n => format!("{letter}{n}"),
    }
}

/// A random event over the variables of `tree`, nested at most `depth`
/// operators deep. Atoms mostly use values that occur in the tree; a few use
/// a value that never occurs.
pub fn random_expr(tree: &ProbabilityTree, depth: usize, seed: u64) -> EventExpr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: BTreeMap<String, BTreeSet<Value>> = BTreeMap::new();
    for node in tree.nodes() {
        for s in &node.statements {
            values.entry(s.variable.clone()).or_default().insert(s.value.clone());
        }
    }
    let mut pool: Vec<(String, Vec<Value>)> = values.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect();
    if pool.len() > 1 {
        pool.retain(|(k, _)| k != "O");
    }
    expr(&mut rng, &pool, depth)
}

fn expr(rng: &mut ChaCha8Rng, pool: &[(String, Vec<Value>)], depth: usize) -> EventExpr {
    if depth == 0 || rng.gen_bool(0.3) {
        return atom(rng, pool);
    }
    match rng.gen_range(0..7) {
        0 => EventExpr::not(expr(rng, pool, depth - 1)),
        1 | 2 => EventExpr::and(expr(rng, pool, depth - 1), expr(rng, pool, depth - 1)),
        3 | 4 => EventExpr::or(expr(rng, pool, depth - 1), expr(rng, pool, depth - 1)),
        _ => EventExpr::prec(expr(rng, pool, depth - 1), expr(rng, pool, depth - 1)),
    }
}

fn atom(rng: &mut ChaCha8Rng, pool: &[(String, Vec<Value>)]) -> EventExpr {
    let (var, vals) = &pool[rng.gen_range(0..pool.len())];
    if rng.gen_bool(0.08) {
        let unseen = vals
            .iter()
            .filter_map(|v| match v {
                Value::Int(i) => Some(*i),
                Value::Str(_) => None,
            })
            .max()
            .map_or(0, |m| m + 1);
        return EventExpr::atom(var.clone(), unseen);
    }
    EventExpr::atom(var.clone(), vals[rng.gen_range(0..vals.len())].clone())
}
