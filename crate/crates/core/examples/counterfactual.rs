//! Counterfactuals: "Y turned out 0; what if it had been 1?"
//!
//! Probabilities above the critical set come from the factual tree, those
//! below from the intervened one, and variables decided after the
//! intervention point are renamed with a `*`.

use probtree::io::load_json_file;
use probtree::{apply_pipeline, counterfactual, mincut_of_expr, parse_event, parse_query, see};

fn main() -> probtree::Result<()> {
    let t1 = load_json_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/t1.json"))?;
    let factual = see(&t1, &mincut_of_expr(&t1, &parse_event("Y=0")?)?)?;
    let cf = counterfactual(&t1, &factual, &mincut_of_expr(&t1, &parse_event("Y=1")?)?)?;
    println!("factual premise Y=0, counterfactual Y=1:");
    print!("{cf}");

    let fig = load_json_file(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/fig1d.json"))?;
    for text in [
        "P(X=0 | Z=0)",
        "P(X*=0 | Z=0; cf(X=1))",
        "P(Z*=0 | Z=0; cf(Y=1))",
        "P(Z*=0 | Z=1; cf(Y=1))",
    ] {
        let q = parse_query(text)?;
        let (p, _) = apply_pipeline(&fig, &q.steps, &q.target)?;
        println!("{text:<26} = {p}");
    }
    Ok(())
}
