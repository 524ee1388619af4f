//! Parsing and printing events and queries.

use probtree::{format_event, parse_event, parse_query};

fn main() {
    for text in [
        "X=0 & (Y=1 | !Z=2)",
        "not X=0 and Y=1 or Z=0",
        "X=0 ~> Y=1 ~> Z=0",
        "Name=\"a \\\"quoted\\\" value\"",
    ] {
        match parse_event(text) {
            Ok(e) => println!("{text:<34} => {}", format_event(&e)),
            Err(err) => println!("{text:<34} => {err}"),
        }
    }
    println!();
    for text in [
        "P(X=0)",
        "P(X=0 | do(Y=1); Z=0)",
        "P((X=0 | X=1) | see(Y=1 | Z=0); cf(Y=0))",
        "P(X=0 | do(Y=))",
        "P(X=0",
    ] {
        match parse_query(text) {
            Ok(q) => println!("{text:<42} => {q}  [{} step(s)]", q.steps.len()),
            Err(err) => println!("{text:<42} => {err}"),
        }
    }
}
