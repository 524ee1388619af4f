//! Interventions only touch the critical set, so conditioning and
//! intervening do not commute.
//!
//! On the three-variable tree in `fixtures/fig1d.json`, intervening on Y and
//! then observing Z differs from observing Z and then intervening on Y.

use probtree::io::{changed_edges, load_json_file};
use probtree::{apply_pipeline, critical_set, do_intervention, mincut_of_expr, parse_event, parse_query, see};

fn main() -> probtree::Result<()> {
    let tree = load_json_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/fig1d.json"))?;

    for text in [
        "P(X=0 | do(Y=1); Z=0)",
        "P(X=0 | see(Z=0); do(Y=1))",
        "P(X=0 | Y=1)",
        "P(X=0 | do(Y=1))",
    ] {
        let q = parse_query(text)?;
        let (p, _) = apply_pipeline(&tree, &q.steps, &q.target)?;
        println!("{text:<28} = {p}");
    }

    let y1 = mincut_of_expr(&tree, &parse_event("Y=1")?)?;
    println!("\ncritical set of Y=1: {}", critical_set(&tree, &y1));
    println!("edges changed by do(Y=1):");
    for (parent, child, old, new) in changed_edges(&tree, &do_intervention(&tree, &y1)?) {
        println!("  {parent} -> {child}: {old} => {new}");
    }
    println!("edges changed by see(Y=1):");
    for (parent, child, old, new) in changed_edges(&tree, &see(&tree, &y1)?) {
        println!("  {parent} -> {child}: {old} => {new}");
    }
    Ok(())
}
