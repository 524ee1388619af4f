//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input (syntax, schema or
//! validation), 3 evaluation error.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::event::{critical_set, mincut_of_expr, EventExpr};
use crate::io::{changed_edges, export_dot, load_json, render_mass_diagram, save_json};
use crate::prob::Prob;
use crate::query::{parse_event, parse_query, parse_step};
use crate::transforms::{apply_steps, PipelineState, PipelineStep};
use crate::tree::ProbabilityTree;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_EVAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "probtree", version, about = "Causal queries over probability trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a tree file and print the validation report
    Validate { tree: PathBuf },
    /// Evaluate a query such as "P(X=0 | do(Y=1); Z=0)"
    Query {
        tree: PathBuf,
        query: String,
        #[arg(long)]
        json: bool,
    },
    /// Print the min-cut and critical set of an event
    Mincut {
        tree: PathBuf,
        event: String,
        #[arg(long, value_name = "OUT")]
        dot: Option<PathBuf>,
    },
    /// Apply steps in order and write the resulting tree
    Transform {
        tree: PathBuf,
        #[arg(long = "op", value_name = "STEP")]
        ops: Vec<String>,
        #[arg(short = 'o', long = "output", value_name = "OUT")]
        output: PathBuf,
    },
    /// Print an ASCII probability-mass diagram
    Mass {
        tree: PathBuf,
        #[arg(long, default_value_t = 24)]
        width: usize,
    },
    /// Interactive session over one tree
    Repl { tree: PathBuf },
}

/// Failure inside a subcommand, tagged with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_input_error() { EXIT_INPUT } else { EXIT_EVAL },
            message: e.to_string(),
        }
    }
}

impl From<crate::error::ParseError> for Failure {
    fn from(e: crate::error::ParseError) -> Self {
        Error::from(e).into()
    }
}

fn io_failure(what: &str, path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_EVAL,
        message: format!("cannot {what} {}: {e}", path.display()),
    }
}

fn read_tree(path: &Path) -> std::result::Result<ProbabilityTree, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    Ok(load_json(&text)?)
}

fn write_file(path: &Path, contents: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| io_failure("write", path, e))
}

pub fn format_prob(p: &Prob) -> String {
    format!("{p} ({:.6})", p.to_f64())
}

/// Runs the tool on `args` (including the program name) against the given
/// streams and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let outcome = match cli.command {
        Command::Validate { tree } => validate(&tree, stdout),
        Command::Query { tree, query, json } => run_query(&tree, &query, json, stdout),
        Command::Mincut { tree, event, dot } => mincut(&tree, &event, dot.as_deref(), stdout),
        Command::Transform { tree, ops, output } => transform(&tree, &ops, &output),
        Command::Mass { tree, width } => read_tree(&tree).map(|t| {
            let _ = write!(stdout, "{}", render_mass_diagram(&t, width));
        }),
        Command::Repl { tree } => read_tree(&tree).map(|t| repl(t, stdin, stdout)),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn validate(path: &Path, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    match read_tree(path) {
        Ok(_) => {
            let _ = writeln!(stdout, "ok");
            Ok(())
        }
        Err(f) => Err(f),
    }
}

fn run_query(path: &Path, text: &str, json: bool, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let tree = read_tree(path)?;
    let query = parse_query(text)?;
    let state = apply_steps(&tree, &query.steps)?;
    let p = state.probability(&query.target)?;
    if json {
        #[derive(serde::Serialize)]
        struct Answer {
            prob: String,
            decimal: f64,
        }
        let answer = Answer {
            prob: p.to_string(),
            decimal: p.to_f64(),
        };
        let _ = writeln!(stdout, "{}", serde_json::to_string(&answer).expect("plain struct"));
    } else {
        let _ = writeln!(stdout, "{}", format_prob(&p));
    }
    Ok(())
}

fn mincut(path: &Path, text: &str, dot: Option<&Path>, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let tree = read_tree(path)?;
    let event: EventExpr = parse_event(text)?;
    let cut = mincut_of_expr(&tree, &event)?;
    let crit = critical_set(&tree, &cut);
    let _ = writeln!(stdout, "{cut}  critical: {crit}");
    if let Some(out) = dot {
        write_file(out, &export_dot(&tree, Some(&cut), Some(&crit)))?;
    }
    Ok(())
}

fn transform(path: &Path, ops: &[String], output: &Path) -> std::result::Result<(), Failure> {
    let tree = read_tree(path)?;
    let steps = ops
        .iter()
        .map(|s| parse_step(s))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let state = apply_steps(&tree, &steps)?;
    write_file(output, &save_json(&state.current))
}

/// REPL state: the loaded tree plus the steps applied so far. The current
/// tree is always recomputed from the reference by replaying the history.
#[derive(Clone, Debug)]
pub struct ReplState {
    pub reference: ProbabilityTree,
    pub current: ProbabilityTree,
    pub history: Vec<PipelineStep>,
}

impl ReplState {
    pub fn new(tree: ProbabilityTree) -> Self {
        ReplState {
            current: tree.clone(),
            reference: tree,
            history: Vec::new(),
        }
    }

    fn replay(&self, history: &[PipelineStep]) -> Result<PipelineState> {
        apply_steps(&self.reference, history)
    }

    /// Appends a step; on error nothing changes.
    pub fn push(&mut self, step: PipelineStep) -> Result<()> {
        let mut history = self.history.clone();
        history.push(step);
        self.current = self.replay(&history)?.current;
        self.history = history;
        Ok(())
    }

    /// Drops the last step. Returns false when the history is empty.
    pub fn undo(&mut self) -> Result<bool> {
        if self.history.pop().is_none() {
            return Ok(false);
        }
        self.current = self.replay(&self.history)?.current;
        Ok(true)
    }

    pub fn reset(&mut self) {
        self.history.clear();
        self.current = self.reference.clone();
    }
}

fn print_changes(before: &ProbabilityTree, after: &ProbabilityTree, out: &mut dyn Write) {
    let changes = changed_edges(before, after);
    if changes.is_empty() {
        let _ = writeln!(out, "no edges changed");
    }
    for (parent, child, old, new) in changes {
        let _ = writeln!(out, "  {parent} -> {child}: {old} => {new}");
    }
}

const REPL_HELP: &str =
    "commands: see <event> | do <event> | cf <event> | p <event> | undo | show | dot <file> | reset | quit";

fn repl(tree: ProbabilityTree, stdin: &mut dyn BufRead, out: &mut dyn Write) {
    let mut state = ReplState::new(tree);
    let mut line = String::new();
    loop {
        let _ = write!(out, "> ");
        let _ = out.flush();
        line.clear();
        match stdin.read_line(&mut line) {
            Ok(0) | Err(_) => {
                let _ = writeln!(out);
                return;
            }
            Ok(_) => {}
        }
        let input = line.trim();
        let (cmd, rest) = input.split_once(char::is_whitespace).unwrap_or((input, ""));
        let rest = rest.trim();
        let before = state.current.clone();
        let result: Result<bool> = (|| {
            match cmd {
                "" => {}
                "quit" | "exit" => return Ok(true),
                "see" | "do" | "cf" => {
                    let e = parse_event(rest)?;
                    let step = match cmd {
                        "see" => PipelineStep::See(e),
                        "do" => PipelineStep::Do(e),
                        _ => PipelineStep::Cf(e),
                    };
                    state.push(step)?;
                    print_changes(&before, &state.current, out);
                }
                "p" => {
                    let e = parse_event(rest)?;
                    let p = crate::event::event_probability(&state.current, &mincut_of_expr(&state.current, &e)?)?;
                    let _ = writeln!(out, "{}", format_prob(&p));
                }
                "undo" => {
                    if state.undo()? {
                        print_changes(&before, &state.current, out);
                    } else {
                        let _ = writeln!(out, "nothing to undo");
                    }
                }
                "show" => {
                    for step in &state.history {
                        let _ = writeln!(out, "# {step}");
                    }
                    let _ = write!(out, "{}", state.current);
                }
                "dot" => {
                    if rest.is_empty() {
                        let _ = write!(out, "{}", export_dot(&state.current, None, None));
                    } else if let Err(e) = std::fs::write(rest, export_dot(&state.current, None, None)) {
                        let _ = writeln!(out, "error: cannot write {rest}: {e}");
                    } else {
                        let _ = writeln!(out, "wrote {rest}");
                    }
                }
                "reset" => {
                    state.reset();
                    print_changes(&before, &state.current, out);
                }
                "help" => {
                    let _ = writeln!(out, "{REPL_HELP}");
                }
                other => {
                    let _ = writeln!(out, "unknown command {other:?}; {REPL_HELP}");
                }
            }
            Ok(false)
        })();
        match result {
            Ok(false) => {}
            Ok(true) => return,
            Err(e) => {
                let _ = writeln!(out, "error: {e}");
            }
        }
    }
}
