//! Causal reasoning over finite probability trees.
//!
//! A [`ProbabilityTree`] describes a discrete stochastic process: every node
//! binds some variables, and its transitions say which child comes next and
//! with what probability. On top of that model the crate provides
//!
//! * events built from `X=v` atoms with not, and, or and precedence, and
//!   their min-cuts ([`event`]),
//! * conditioning, intervention and counterfactuals as tree transforms
//!   ([`transforms`]),
//! * a small query language, `P(X=0 | do(Y=1); Z=0)` ([`query`]),
//! * JSON, Graphviz and ASCII output ([`io`]),
//! * a brute-force reference implementation for testing ([`oracle`]).
//!
//! All probabilities are exact rationals ([`Prob`]).
//!
//! ```
//! use probtree::{apply_pipeline, parse_query, ProbabilityTree, Node, Statement, Transition, Prob};
//!
//! let leaf = |id: u64, v: i64| Node::new(id, vec![Statement::new("X", v)], vec![]);
//! let tree = ProbabilityTree::new(0, vec![
//!     Node::new(0, vec![Statement::new("O", 1)], vec![
//!         Transition::new(Prob::new(1, 3), 1u64),
//!         Transition::new(Prob::new(2, 3), 2u64),
//!     ]),
//!     leaf(1, 0),
//!     leaf(2, 1),
//! ]);
//! let q = parse_query("P(X=0 | do(X=0))").unwrap();
//! let (p, _) = apply_pipeline(&tree, &q.steps, &q.target).unwrap();
//! assert_eq!(p, Prob::one());
//! ```

pub mod cli;
pub mod error;
pub mod event;
pub mod io;
pub mod oracle;
pub mod prob;
pub mod query;
pub mod transforms;
pub mod tree;
mod walk;

pub use error::{Error, ParseError, ProbError, Result};
pub use event::{
    critical_set, event_probability, mincut_and, mincut_neg, mincut_of_expr, mincut_or, mincut_prec, mincut_prop,
    CriticalSet, EventExpr, MinCut,
};
pub use io::{export_dot, load_json, render_mass_diagram, save_json, MassDiagram};
pub use prob::Prob;
pub use query::{format_event, parse_event, parse_query, parse_step, QueryAst};
pub use transforms::{
    apply_pipeline, apply_steps, counterfactual, do_intervention, normalize, see, NormalizeEntry, PipelineState,
    PipelineStep,
};
pub use tree::{
    enumerate_realizations, validate_tree, Node, NodeId, ProbabilityTree, Realization, Statement, Transition,
    ValidationReport, Value,
};
pub use walk::count_visits;
