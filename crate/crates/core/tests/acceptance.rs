//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; the process fails if any criterion does.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use probtree::event::critical_set;
use probtree::oracle::{
    oracle_condition_distribution, oracle_counterfactual, oracle_intervention_distribution, oracle_mincut, random_expr,
    random_tree, GenParams,
};
use probtree::transforms::{counterfactual, do_intervention_traced, see_traced};
use probtree::{
    apply_pipeline, count_visits, do_intervention, event_probability, export_dot, format_event, load_json, mincut_and,
    mincut_of_expr, mincut_or, mincut_prec, mincut_prop, parse_event, parse_query, save_json, see, EventExpr, MinCut,
    Prob, ProbabilityTree, Statement,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn query(tree: &ProbabilityTree, text: &str) -> Result<Prob, String> {
    let q = parse_query(text).map_err(|e| e.to_string())?;
    apply_pipeline(tree, &q.steps, &q.target)
        .map(|(p, _)| p)
        .map_err(|e| e.to_string())
}

fn root_probs(tree: &ProbabilityTree) -> Vec<Prob> {
    tree.root_node()
        .unwrap()
        .transitions
        .iter()
        .map(|t| t.prob.clone())
        .collect()
}

fn non_commutation() -> Check {
    let start = Instant::now();
    let tree = fixture("fig1d");
    let do_then_see = query(&tree, "P(X=0 | do(Y=1); Z=0)")?;
    let see_then_do = query(&tree, "P(X=0 | see(Z=0); do(Y=1))")?;
    ensure!(
        do_then_see == Prob::new(5, 8),
        "do(Y=1); Z=0 gave {do_then_see}, expected 5/8"
    );
    ensure!(
        see_then_do == Prob::new(3, 5),
        "see(Z=0); do(Y=1) gave {see_then_do}, expected 3/5"
    );
    let elapsed = start.elapsed();

    // Same two numbers through the oracle: reweight, then filter, and the
    // other way round.
    let (x0, y1, z0) = (atom("X", 0), atom("Y", 1), atom("Z", 0));
    let intervened = oracle_intervention_distribution(&tree, &y1).map_err(|e| e.to_string())?;
    let oracle_a =
        mass_where(&tree, &intervened, &EventExpr::and(x0.clone(), z0.clone())) / mass_where(&tree, &intervened, &z0);
    let conditioned = oracle_condition_distribution(&tree, &z0).map_err(|e| e.to_string())?;
    let conditioned = tree_from_distribution(&tree, &conditioned);
    let then_do = oracle_intervention_distribution(&conditioned, &y1).map_err(|e| e.to_string())?;
    let oracle_b = mass_where(&tree, &then_do, &x0);
    ensure!(oracle_a == do_then_see, "oracle gives {oracle_a} for do-then-see");
    ensure!(oracle_b == see_then_do, "oracle gives {oracle_b} for see-then-do");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("5/8 vs 3/5 exactly, oracle agrees, {elapsed:?}"))
}

fn mincut_equivalence() -> Check {
    let start = Instant::now();
    let mut agree = 0;
    for seed in 0..1000u64 {
        let (tree, expr) = random_case(seed, seed % 3 != 0);
        let engine = mincut_of_expr(&tree, &expr).map_err(|e| e.to_string());
        let oracle = oracle_mincut(&tree, &expr).map_err(|e| e.to_string());
        ensure!(
            engine == oracle,
            "seed {seed}: {expr} engine {engine:?} oracle {oracle:?}"
        );
        agree += 1;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{agree}/1000 exact, {elapsed:?}"))
}

/// An event on `tree` with a non-empty true set, trying a few expression
/// seeds.
fn satisfiable_expr(tree: &ProbabilityTree, seed: u64) -> Option<(EventExpr, MinCut)> {
    (0..32u64).find_map(|k| {
        let e = random_expr(tree, 3, seed * 64 + k);
        let cut = mincut_of_expr(tree, &e).ok()?;
        (!cut.true_set.is_empty()).then_some((e, cut))
    })
}

fn positive_tree(seed: u64) -> ProbabilityTree {
    random_case(seed, true).0
}

fn condition_intervene_equivalence() -> Check {
    let start = Instant::now();
    let mut trees = 0;
    for seed in 10_000..10_500u64 {
        let tree = positive_tree(seed);
        let (e, cut) = satisfiable_expr(&tree, seed).ok_or(format!("seed {seed}: no satisfiable event"))?;
        let seen = see(&tree, &cut).map_err(|err| format!("seed {seed}: see: {err}"))?;
        let oracle = oracle_condition_distribution(&tree, &e).map_err(|err| err.to_string())?;
        ensure!(support(&seen) == oracle, "seed {seed}: see({e}) distribution differs");
        let done = do_intervention(&tree, &cut).map_err(|err| format!("seed {seed}: do: {err}"))?;
        let oracle = oracle_intervention_distribution(&tree, &e).map_err(|err| err.to_string())?;
        ensure!(support(&done) == oracle, "seed {seed}: do({e}) distribution differs");
        trees += 1;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{trees}/500 trees, see and do exact, {elapsed:?}"))
}

struct Composed {
    ab: ProbabilityTree,
    ba: ProbabilityTree,
    /// Some application needed the uniform version.
    uniform: bool,
}

/// Applies `op` as `a` then `b` and as `b` then `a`; None when either order
/// fails.
fn both_orders(
    tree: &ProbabilityTree,
    a: &EventExpr,
    b: &EventExpr,
    op: fn(&ProbabilityTree, &MinCut) -> probtree::Result<probtree::transforms::Transformed>,
) -> Option<Composed> {
    let step = |t: &ProbabilityTree, e: &EventExpr| op(t, &mincut_of_expr(t, e).ok()?).ok();
    let run = |first: &EventExpr, second: &EventExpr| {
        let one = step(tree, first)?;
        let two = step(&one.tree, second)?;
        Some((two.tree, !one.uniform_at.is_empty() || !two.uniform_at.is_empty()))
    };
    let (ab, uniform_ab) = run(a, b)?;
    let (ba, uniform_ba) = run(b, a)?;
    Some(Composed {
        ab,
        ba,
        uniform: uniform_ab || uniform_ba,
    })
}

/// Triples whose sequential conditionings are all defined without the
/// uniform version must commute as trees. Triples that need the uniform
/// version are counted separately; for those the conditioned distributions
/// must still agree.
fn commutativity() -> Check {
    let mut admitted = 0;
    let mut undefined = 0;
    let mut uniform = 0;
    let mut uniform_equal = 0;
    let mut seed = 20_000u64;
    while admitted < 200 {
        seed += 1;
        ensure!(seed < 40_000, "only {admitted} admissible triples found");
        let tree = positive_tree(seed);
        let (Some((a, _)), Some((b, _))) = (satisfiable_expr(&tree, seed * 2), satisfiable_expr(&tree, seed * 2 + 1))
        else {
            undefined += 1;
            continue;
        };
        let (Some(s), Some(d)) = (
            both_orders(&tree, &a, &b, see_traced),
            both_orders(&tree, &a, &b, do_intervention_traced),
        ) else {
            undefined += 1;
            continue;
        };
        if s.uniform || d.uniform {
            uniform += 1;
            if s.ab == s.ba && d.ab == d.ba {
                uniform_equal += 1;
            }
            let both = EventExpr::and(a.clone(), b.clone());
            let p_both = event_probability(&tree, &mincut_of_expr(&tree, &both).unwrap()).unwrap();
            if p_both.is_positive() {
                ensure!(
                    support(&s.ab) == support(&s.ba),
                    "seed {seed}: see({a}), see({b}) distributions differ"
                );
            }
            continue;
        }
        ensure!(s.ab == s.ba, "seed {seed}: see({a}) and see({b}) do not commute");
        ensure!(d.ab == d.ba, "seed {seed}: do({a}) and do({b}) do not commute");
        admitted += 1;
    }
    Ok(format!(
        "{admitted}/200 triples commute for see and do; skipped {undefined} undefined and {uniform} needing the uniform version ({uniform_equal} of those still commute as trees, distributions agree whenever P(A and B) > 0)"
    ))
}

fn locality() -> Check {
    let mut cases = 0;
    let mut seed = 30_000u64;
    while cases < 200 {
        seed += 1;
        let (tree, _) = random_case(seed, seed.is_multiple_of(2));
        let Some((e, cut)) = satisfiable_expr(&tree, seed) else {
            continue;
        };
        let (Ok(seen), Ok(done)) = (see(&tree, &cut), do_intervention(&tree, &cut)) else {
            continue;
        };
        let crit = critical_set(&tree, &cut);
        for (parent, child, _, _) in probtree::io::changed_edges(&tree, &done) {
            ensure!(
                crit.nodes.contains(&parent),
                "seed {seed}: do({e}) changed {parent}->{child} outside the critical set"
            );
        }
        let upstream = above_cut(&tree, &cut);
        for (parent, child, _, _) in probtree::io::changed_edges(&tree, &seen) {
            ensure!(
                upstream.contains(&parent),
                "seed {seed}: see({e}) changed {parent}->{child} below the cut"
            );
        }
        cases += 1;
    }
    Ok(format!("{cases}/200 cases local"))
}

fn uniform_version() -> Check {
    let t2 = fixture("t2");
    let seen = see(&t2, &mincut_prop(&t2, &Statement::new("X", 0)).unwrap()).map_err(|e| e.to_string())?;
    let got = root_probs(&seen);
    ensure!(got == vec![Prob::one(), Prob::zero()], "T2 root became {got:?}");

    let zero3 = fixture("zero3");
    let cut = mincut_of_expr(&zero3, &EventExpr::not(atom("X", 3))).unwrap();
    let seen = see(&zero3, &cut).map_err(|e| e.to_string())?;
    let got = root_probs(&seen);
    let third = Prob::new(1, 3);
    ensure!(
        got == vec![third.clone(), third.clone(), third, Prob::zero()],
        "three-zero root became {got:?}"
    );
    Ok("T2 root (1, 0); three zero branches (1/3, 1/3, 1/3, 0)".to_string())
}

fn counterfactual_consistency() -> Check {
    let mut cases = 0;
    let mut seed = 50_000u64;
    while cases < 200 {
        seed += 1;
        let (tree, _) = random_case(seed, seed.is_multiple_of(2));
        let Some((e, cut)) = satisfiable_expr(&tree, seed) else {
            continue;
        };
        let Ok(done) = do_intervention(&tree, &cut) else {
            continue;
        };
        let cf = counterfactual(&tree, &tree, &cut).map_err(|err| format!("seed {seed}: {err}"))?;
        ensure!(strip_stars(&cf) == done, "seed {seed}: cf(t, t, {e}) differs from do");
        cases += 1;
    }

    let t1 = fixture("t1");
    let factual = see(&t1, &mincut_prop(&t1, &Statement::new("Y", 0)).unwrap()).unwrap();
    let cut = mincut_prop(&t1, &Statement::new("Y", 1)).unwrap();
    let cf = counterfactual(&t1, &factual, &cut).map_err(|e| e.to_string())?;
    let got = root_probs(&cf);
    ensure!(
        got == vec![Prob::new(3, 11), Prob::new(8, 11)],
        "worked example root {got:?}"
    );
    let oracle = oracle_counterfactual(&t1, &factual, &atom("Y", 1)).map_err(|e| e.to_string())?;
    ensure!(cf == oracle, "worked example differs from the compositional oracle");
    Ok(format!(
        "{cases}/200 cf(t, t, c) = do(t, c); worked example root (3/11, 8/11) matches oracle"
    ))
}

fn post_conditions() -> Check {
    let mut cases = 0;
    let mut seed = 60_000u64;
    while cases < 200 {
        seed += 1;
        let (tree, _) = random_case(seed, seed.is_multiple_of(2));
        let Some((e, cut)) = satisfiable_expr(&tree, seed) else {
            continue;
        };
        let (Ok(seen), Ok(done)) = (see(&tree, &cut), do_intervention(&tree, &cut)) else {
            continue;
        };
        for (name, out) in [("see", &seen), ("do", &done)] {
            let p = event_probability(out, &mincut_of_expr(out, &e).unwrap()).unwrap();
            ensure!(p.is_one(), "seed {seed}: P({e}) = {p} after {name}");
        }
        cases += 1;
    }
    Ok(format!("{cases}/200 cases reach P = 1 after see and do"))
}

const VISIT_FACTOR: u64 = 3;

fn complexity() -> Check {
    const N: usize = 10_000;
    let mut report = Vec::new();
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    let mut check = |label: &str, n: usize, f: &mut dyn FnMut() -> probtree::Result<()>| -> Result<(), String> {
        let start = Instant::now();
        let (result, visits) = count_visits(&mut *f);
        let elapsed = start.elapsed();
        result.map_err(|e| format!("{label}: {e}"))?;
        ensure!(
            visits <= VISIT_FACTOR * n as u64,
            "{label}: {visits} visits for {n} nodes"
        );
        ensure!(elapsed < Duration::from_secs(1), "{label}: took {elapsed:?}");
        worst = worst.max(visits as f64 / n as f64);
        slowest = slowest.max(elapsed);
        report.push(label.to_string());
        Ok(())
    };

    for (shape, tree, s, b) in [
        (
            "caterpillar",
            caterpillar(N),
            Statement::new("T", 1234),
            atom("T", 4321),
        ),
        (
            "chain",
            chain(N),
            Statement::new(format!("V{}", N - 1), 0),
            atom("V5000", 0),
        ),
    ] {
        let a = EventExpr::Atom(s.clone());
        let n = tree.len();
        ensure!(n == N, "{shape} has {n} nodes");
        let cut_a = mincut_of_expr(&tree, &a).unwrap();
        let cut_b = mincut_of_expr(&tree, &b).unwrap();
        let not_b = probtree::mincut_neg(&cut_b);
        check(&format!("{shape} prop"), n, &mut || mincut_prop(&tree, &s).map(drop))?;
        check(&format!("{shape} and"), n, &mut || {
            mincut_and(&tree, &cut_a, &not_b).map(drop)
        })?;
        check(&format!("{shape} or"), n, &mut || {
            mincut_or(&tree, &cut_a, &cut_b).map(drop)
        })?;
        let root = mincut_of_expr(&tree, &atom("O", 1)).unwrap();
        check(&format!("{shape} prec"), n, &mut || {
            mincut_prec(&tree, &root, &cut_a).map(drop)
        })?;
        check(&format!("{shape} probability"), n, &mut || {
            event_probability(&tree, &cut_a).map(drop)
        })?;
        check(&format!("{shape} see"), n, &mut || see(&tree, &cut_a).map(drop))?;
        check(&format!("{shape} do"), n, &mut || {
            do_intervention(&tree, &cut_a).map(drop)
        })?;
        let premise = if not_b.true_set.is_empty() { &cut_b } else { &not_b };
        let factual = see(&tree, premise).unwrap();
        check(&format!("{shape} cf"), n, &mut || {
            counterfactual(&tree, &factual, &cut_a).map(drop)
        })?;
    }
    Ok(format!(
        "{} operations on 10^4-node trees, at most {worst:.2} visits per node (bound {VISIT_FACTOR}), slowest {slowest:?}",
        report.len()
    ))
}

fn round_trips() -> Check {
    let mut fixtures = 0;
    for entry in std::fs::read_dir(fixtures_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|x| x != "json") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let tree = load_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        ensure!(save_json(&tree) == text, "{} is not canonical", path.display());
        ensure!(
            load_json(&save_json(&tree)).unwrap() == tree,
            "{} does not round-trip",
            path.display()
        );
        fixtures += 1;
    }

    let mut exprs = 0;
    for seed in 0..500u64 {
        let tree = random_tree(&GenParams {
            max_depth: 4,
            max_branching: 3,
            value_range: 3,
            strictly_positive: true,
            seed,
        });
        let e = random_expr(&tree, 5, seed + 7);
        let text = format_event(&e);
        let back = parse_event(&text).map_err(|err| format!("{text:?}: {err}"))?;
        ensure!(back == e, "{text:?} parsed back as {back:?}");
        exprs += 1;
    }

    let t1 = fixture("t1");
    let cut = mincut_prop(&t1, &Statement::new("Y", 1)).unwrap();
    let crit = critical_set(&t1, &cut);
    let dot = export_dot(&t1, Some(&cut), Some(&crit));
    ensure!(
        dot == export_dot(&t1, Some(&cut), Some(&crit)),
        "DOT differs between calls"
    );
    let golden = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/t1_y1.dot")).unwrap();
    ensure!(dot == golden, "DOT differs from the stored golden file");
    Ok(format!("{fixtures} fixtures, {exprs}/500 expressions, DOT byte-stable"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("see/do non-commutation", non_commutation),
        ("min-cut oracle equivalence", mincut_equivalence),
        (
            "condition/intervene oracle equivalence",
            condition_intervene_equivalence,
        ),
        ("commutativity", commutativity),
        ("locality", locality),
        ("zero-probability uniform version", uniform_version),
        ("counterfactual consistency", counterfactual_consistency),
        ("post-conditions", post_conditions),
        ("complexity", complexity),
        ("round-trips", round_trips),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
