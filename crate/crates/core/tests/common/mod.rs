#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use probtree::io::load_json_file;
use probtree::oracle::{random_expr, random_tree, GenParams};
use probtree::tree::parent_map;
use probtree::{EventExpr, MinCut, Node, NodeId, Prob, ProbabilityTree, Realization, Statement, Transition};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture(name: &str) -> ProbabilityTree {
    load_json_file(fixtures_dir().join(format!("{name}.json"))).unwrap()
}

pub fn atom(var: &str, val: i64) -> EventExpr {
    EventExpr::atom(var, val)
}

/// A tree and event drawn from `seed`. Trees have depth at most 5 and
/// branching at most 3; events nest at most 3 operators.
pub fn random_case(seed: u64, strictly_positive: bool) -> (ProbabilityTree, EventExpr) {
    let params = GenParams {
        max_depth: 1 + (seed % 5) as usize,
        max_branching: 3,
        value_range: 2 + (seed % 2) as i64,
        strictly_positive,
        seed,
    };
    let tree = random_tree(&params);
    let expr = random_expr(&tree, 3, seed.wrapping_mul(0x9e37_79b9).wrapping_add(1));
    (tree, expr)
}

/// Realizations with positive probability.
pub fn support(tree: &ProbabilityTree) -> Vec<Realization> {
    probtree::enumerate_realizations(tree)
        .into_iter()
        .filter(|r| r.prob.is_positive())
        .collect()
}

/// Removes trailing `*` scope markers from every variable.
pub fn strip_stars(tree: &ProbabilityTree) -> ProbabilityTree {
    let nodes = tree
        .nodes()
        .iter()
        .map(|n| {
            let statements = n
                .statements
                .iter()
                .map(|s| Statement::new(s.variable.trim_end_matches('*'), s.value.clone()))
                .collect();
            Node::new(n.id, statements, n.transitions.clone())
        })
        .collect();
    ProbabilityTree::new(tree.root(), nodes)
}

/// Nodes strictly above some node of the cut.
pub fn above_cut(tree: &ProbabilityTree, cut: &MinCut) -> BTreeSet<NodeId> {
    let parents = parent_map(tree);
    let mut out = BTreeSet::new();
    for id in cut.true_set.iter().chain(&cut.false_set) {
        let mut at = *id;
        while let Some(&p) = parents.get(&at) {
            if !out.insert(p) {
                break;
            }
            at = p;
        }
    }
    out
}

/// Rebuilds transition probabilities from a realization distribution over
/// the same tree. Nodes without mass keep their old transitions.
pub fn tree_from_distribution(tree: &ProbabilityTree, dist: &[Realization]) -> ProbabilityTree {
    let mut mass: HashMap<NodeId, Prob> = HashMap::new();
    for r in dist {
        for id in &r.path {
            let m = mass.entry(*id).or_insert_with(Prob::zero);
            *m = &*m + &r.prob;
        }
    }
    let nodes = tree
        .nodes()
        .iter()
        .map(|n| {
            let here = mass.get(&n.id).cloned().unwrap_or_else(Prob::zero);
            if here.is_zero() {
                return n.clone();
            }
            let transitions = n
                .transitions
                .iter()
                .map(|t| {
                    let child = mass.get(&t.child).cloned().unwrap_or_else(Prob::zero);
                    Transition::new(child / &here, t.child)
                })
                .collect();
            Node::new(n.id, n.statements.clone(), transitions)
        })
        .collect();
    ProbabilityTree::new(tree.root(), nodes)
}

/// Total probability of the realizations in `dist` on which `e` holds,
/// judged on `tree`.
pub fn mass_where(tree: &ProbabilityTree, dist: &[Realization], e: &EventExpr) -> Prob {
    dist.iter()
        .filter(|r| probtree::oracle::oracle_event_truth(tree, e, r).unwrap())
        .map(|r| &r.prob)
        .sum()
}

/// `n / 2` spine nodes, each with a leaf child binding `T=k` (k the spine
/// position) and, except the last, a next spine node. Probabilities
/// telescope so every leaf has mass `2/n`, keeping rationals small.
pub fn caterpillar(n: usize) -> ProbabilityTree {
    let spine = n / 2;
    let mut nodes = Vec::with_capacity(2 * spine);
    // Spine ids 0..spine; the leaf of spine node k is spine + k.
    for k in 0..spine {
        let id = k as u64;
        let leaf = (spine + k) as u64;
        let left = (spine - k) as i64;
        let stmts = if k == 0 { vec![Statement::new("O", 1)] } else { vec![] };
        let mut transitions = vec![Transition::new(Prob::new(1, left), leaf)];
        if left > 1 {
            transitions.push(Transition::new(Prob::new(left - 1, left), id + 1));
        }
        nodes.push(Node::new(id, stmts, transitions));
        nodes.push(Node::new(leaf, vec![Statement::new("T", k as i64)], vec![]));
    }
    ProbabilityTree::new(0, nodes)
}

/// A unary path of `n` nodes; node k binds `V{k}=0`.
pub fn chain(n: usize) -> ProbabilityTree {
    let nodes = (0..n)
        .map(|k| {
            let mut stmts = vec![Statement::new(format!("V{k}"), 0)];
            if k == 0 {
                stmts.push(Statement::new("O", 1));
            }
            let transitions = if k + 1 < n {
                vec![Transition::new(Prob::one(), (k + 1) as u64)]
            } else {
                vec![]
            };
            Node::new(k as u64, stmts, transitions)
        })
        .collect();
    ProbabilityTree::new(0, nodes)
}
