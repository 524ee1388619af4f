//! Conditioning rewrites the probabilities above the min-cut.
//!
//! On a zero-probability event the uniform version spreads the mass evenly
//! over the children that can still reach the true set.

use probtree::io::{changed_edges, load_json_file};
use probtree::transforms::see_traced;
use probtree::{mincut_of_expr, parse_event};

fn fixture(name: &str) -> probtree::Result<probtree::ProbabilityTree> {
    load_json_file(format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR")))
}

fn main() -> probtree::Result<()> {
    for (name, text) in [("t1", "Y=1"), ("t1", "X=0 | Y=0"), ("t2", "X=0"), ("zero3", "!X=3")] {
        let tree = fixture(name)?;
        let cut = mincut_of_expr(&tree, &parse_event(text)?)?;
        let out = see_traced(&tree, &cut)?;
        println!("see({text}) on {name}:");
        for (parent, child, old, new) in changed_edges(&tree, &out.tree) {
            println!("  {parent} -> {child}: {old} => {new}");
        }
        if !out.uniform_at.is_empty() {
            println!("  uniform version used at {:?}", out.uniform_at);
        }
    }

    let t1 = fixture("t1")?;
    let contradiction = mincut_of_expr(&t1, &parse_event("X=0 & X=1")?)?;
    if let Err(e) = probtree::see(&t1, &contradiction) {
        println!("see(X=0 & X=1): {e}");
    }
    Ok(())
}
