//! JSON, Graphviz and ASCII output.
//!
//! ```text
//! cargo run --example export > t1.dot && dot -Tsvg t1.dot -o t1.svg
//! ```

use probtree::io::load_json_file;
use probtree::{critical_set, export_dot, mincut_of_expr, parse_event, render_mass_diagram, save_json};

fn main() -> probtree::Result<()> {
    let tree = load_json_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/t1.json"))?;
    let cut = mincut_of_expr(&tree, &parse_event("Y=1")?)?;
    let crit = critical_set(&tree, &cut);
    print!("{}", export_dot(&tree, Some(&cut), Some(&crit)));
    eprintln!("{}", render_mass_diagram(&tree, 16));
    eprintln!("{}", &save_json(&tree)[..120]);
    Ok(())
}
