//! Cross-checks the engine against the brute-force oracle on random trees.
//!
//! ```text
//! cargo run --release --example oracle_check -- 5000
//! ```

use probtree::oracle::{
    oracle_condition_distribution, oracle_intervention_distribution, oracle_mincut, random_expr, random_tree, GenParams,
};
use probtree::{do_intervention, enumerate_realizations, mincut_of_expr, see, Realization};

fn support(tree: &probtree::ProbabilityTree) -> Vec<Realization> {
    enumerate_realizations(tree)
        .into_iter()
        .filter(|r| r.prob.is_positive())
        .collect()
}

fn main() {
    let cases: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let (mut cuts, mut sees, mut dos, mut skipped) = (0, 0, 0, 0);
    for seed in 0..cases {
        let tree = random_tree(&GenParams {
            max_depth: 5,
            max_branching: 3,
            value_range: 3,
            strictly_positive: true,
            seed,
        });
        let e = random_expr(&tree, 3, seed);
        let cut = mincut_of_expr(&tree, &e).expect("generated trees are well formed");
        assert_eq!(cut, oracle_mincut(&tree, &e).unwrap(), "seed {seed}: {e}");
        cuts += 1;
        if cut.true_set.is_empty() {
            skipped += 1;
            continue;
        }
        assert_eq!(
            support(&see(&tree, &cut).unwrap()),
            oracle_condition_distribution(&tree, &e).unwrap()
        );
        sees += 1;
        assert_eq!(
            support(&do_intervention(&tree, &cut).unwrap()),
            oracle_intervention_distribution(&tree, &e).unwrap()
        );
        dos += 1;
    }
    println!("{cuts} min-cuts, {sees} conditionings, {dos} interventions agree; {skipped} events were unsatisfiable");
}
