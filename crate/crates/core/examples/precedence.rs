//! The precedence relation `A ~> B`: A is settled strictly before B.
//!
//! In this tree the order in which X and Y are decided depends on a coin
//! flip, so "X=1 before Y=1" differs from plain "X=1 and Y=1".

use probtree::{event_probability, mincut_of_expr, parse_event, Node, Prob, ProbabilityTree, Statement, Transition};

fn leaf(id: u64, var: &str, value: i64) -> Node {
    Node::new(id, vec![Statement::new(var, value)], vec![])
}

fn branch(id: u64, stmt: Statement, children: [(i64, i64, u64); 2]) -> Node {
    let transitions = children
        .iter()
        .map(|&(n, d, child)| Transition::new(Prob::new(n, d), child))
        .collect();
    Node::new(id, vec![stmt], transitions)
}

fn main() -> probtree::Result<()> {
    let tree = ProbabilityTree::new(
        0,
        vec![
            branch(0, Statement::new("O", 1), [(1, 2, 1), (1, 2, 2)]),
            // Left: X first, then Y.
            branch(1, Statement::new("First", "x"), [(1, 3, 3), (2, 3, 4)]),
            branch(3, Statement::new("X", 0), [(1, 2, 7), (1, 2, 8)]),
            branch(4, Statement::new("X", 1), [(1, 2, 9), (1, 2, 10)]),
            leaf(7, "Y", 0),
            leaf(8, "Y", 1),
            leaf(9, "Y", 0),
            leaf(10, "Y", 1),
            // Right: Y first, then X.
            branch(2, Statement::new("First", "y"), [(1, 2, 5), (1, 2, 6)]),
            branch(5, Statement::new("Y", 0), [(1, 3, 11), (2, 3, 12)]),
            branch(6, Statement::new("Y", 1), [(1, 3, 13), (2, 3, 14)]),
            leaf(11, "X", 0),
            leaf(12, "X", 1),
            leaf(13, "X", 0),
            leaf(14, "X", 1),
        ],
    );
    let report = probtree::validate_tree(&tree);
    assert!(report.ok, "{report}");

    for text in ["X=1 & Y=1", "X=1 ~> Y=1", "Y=1 ~> X=1", "X=1 prec Y=1 | Y=1 prec X=1"] {
        let cut = mincut_of_expr(&tree, &parse_event(text)?)?;
        println!("{text:<28} P = {:<6} {cut}", event_probability(&tree, &cut)?);
    }
    Ok(())
}
