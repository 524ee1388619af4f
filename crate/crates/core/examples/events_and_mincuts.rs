//! Min-cuts, critical sets and event probabilities on a small tree.
//!
//! ```text
//! cargo run --example events_and_mincuts
//! ```

use probtree::io::load_json_file;
use probtree::{critical_set, event_probability, mincut_of_expr, parse_event};

fn main() -> probtree::Result<()> {
    let tree = load_json_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/t1.json"))?;
    print!("{tree}");
    println!();

    for text in ["X=0", "Y=1", "X=0 & Y=1", "X=0 | Y=1", "!(X=0 | X=1)", "X=2"] {
        let event = parse_event(text)?;
        let cut = mincut_of_expr(&tree, &event)?;
        let crit = critical_set(&tree, &cut);
        let p = event_probability(&tree, &cut)?;
        println!("{text:<14} {cut}  critical: {crit}  P = {p}");
    }

    // Atoms over variables that some path never binds are rejected.
    match mincut_of_expr(&tree, &parse_event("W=0")?) {
        Err(e) => println!("\nW=0: {e}"),
        Ok(cut) => println!("\nW=0 unexpectedly resolved: {cut}"),
    }
    Ok(())
}
