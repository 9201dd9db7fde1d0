//! The `dblcat` command line: free constructions on graph and polynomial
//! files, law suites on the span and polynomial double categories.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use dblcat::doublecat::MonadData;
use dblcat::lawcheck::{
    check_double_axioms, check_framed, check_theorem_pipeline, check_universal_property, InstanceSampler, LawReport,
    Sampling,
};
use dblcat::mnd::{all_hold, free_monad_adjunction, monad_law_equations, Endo, ENUMERATION_LIMIT};
use dblcat::poly::{
    compose_polys, enumerate_poly_monads, free_poly_monad, parse_poly, poly_instance, trees, Polynomial, Tree,
    DEFAULT_MAX_DEPTH,
};
use dblcat::span::{
    compose_spans, enumerate_categories_up_to_iso, free_category, named_set, parse_graph, render_path, span_instance,
    Graph, ParseError, DEFAULT_MAX_LEN,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_LAW_FAILURE: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "dblcat", version, about = "Monads in double categories of spans and polynomials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// The free category on a graph.
    FreeCat {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
        max_length: usize,
    },
    /// The free polynomial monad on a polynomial endomorphism.
    FreeMonad {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
    },
    /// Double category axioms and framing on random and exhaustive cells.
    Laws {
        instance: Instance,
        #[arg(long, default_value_t = 3)]
        size: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The universal property of the free monad against small targets.
    CheckUniversal {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        target_size: usize,
    },
    /// The composite of two spans (graph files) or two polynomials.
    Compose { first: PathBuf, second: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Instance {
    Span,
    Poly,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Library(#[from] dblcat::Error),
}

enum Input {
    Graph(Graph),
    Poly(Polynomial),
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_error(path: &Path, source: ParseError) -> CliError {
    CliError::Parse {
        path: path.display().to_string(),
        source,
    }
}

fn load_graph(path: &Path) -> Result<Graph, CliError> {
    parse_graph(&read(path)?).map_err(|e| parse_error(path, e))
}

fn load_poly(path: &Path) -> Result<Polynomial, CliError> {
    parse_poly(&read(path)?).map_err(|e| parse_error(path, e))
}

/// Dispatches on the header word of the file.
fn load_any(path: &Path) -> Result<Input, CliError> {
    let text = read(path)?;
    let header = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .unwrap_or("");
    match header {
        "poly" => parse_poly(&text).map(Input::Poly).map_err(|e| parse_error(path, e)),
        _ => parse_graph(&text).map(Input::Graph).map_err(|e| parse_error(path, e)),
    }
}

/// Writes a report without timings, so output depends only on the inputs.
fn render_report(out: &mut String, r: &LawReport) {
    let _ = writeln!(
        out,
        "{}: {} checks, {} failures{}",
        r.suite,
        r.checks,
        r.failures.len(),
        if r.partial { " (partial: enumeration bound hit)" } else { "" }
    );
    for fail in &r.failures {
        let _ = writeln!(out, "  FAIL {}: {}", fail.check, fail.detail);
        for line in fail.cells.iter().flat_map(|c| c.lines()) {
            let _ = writeln!(out, "    {line}");
        }
    }
    let _ = writeln!(out, "{}", r.machine_line());
}

fn free_cat(out: &mut String, file: &Path, max_length: usize) -> Result<i32, CliError> {
    let g = load_graph(file)?;
    let free = free_category(&g, max_length)?;
    let cat = &free.cat;
    let nodes: Vec<String> = g.nodes.iter().map(|x| x.to_string()).collect();
    let _ = writeln!(out, "objects: {}", nodes.join(" "));
    let edges = &cat.carrier.edges;
    let _ = writeln!(out, "morphisms: {}", cat.morphisms().len());
    for (i, m) in cat.morphisms().iter().enumerate() {
        let (s, t) = (edges.left().at(i), edges.right().at(i));
        let _ = writeln!(out, "  {} : {} -> {}", render_path(m), g.nodes.elem(s), g.nodes.elem(t));
    }
    let _ = writeln!(out, "composition:");
    for a in cat.morphisms().iter() {
        for b in cat.morphisms().iter() {
            if let Some(c) = cat.compose(a, b) {
                let _ = writeln!(out, "  {} ; {} = {}", render_path(a), render_path(b), render_path(c));
            }
        }
    }
    let _ = writeln!(out, "exact: {}", free.exact);
    Ok(EXIT_OK)
}

/// A composite in `M;M` together with its image under `μ`, preferring one
/// where both the outer tree and some inner tree are non-trivial.
fn sample_grafting(m: &MonadData<dblcat::poly::PolyDouble>) -> Option<(String, String)> {
    let node = |t: &Tree| matches!(t, Tree::Node(..));
    let mut best: Option<(usize, String, String)> = None;
    for op in m.mult.top().ops().iter() {
        let Some(parts) = op.as_tuple() else { continue };
        let (Some(outer), Some(inner)) = (Tree::from_elem(&parts[0]), parts[1].as_seq()) else {
            continue;
        };
        let Some(inner) = inner.iter().map(Tree::from_elem).collect::<Option<Vec<_>>>() else {
            continue;
        };
        let score = usize::from(node(&outer)) + usize::from(inner.iter().any(node));
        if score == 0 || best.as_ref().is_some_and(|b| b.0 >= score) {
            continue;
        }
        let Some(image) = m.mult.phi().apply(op).and_then(Tree::from_elem) else {
            continue;
        };
        let shown: Vec<String> = inner.iter().map(|t| t.to_string()).collect();
        best = Some((score, format!("{outer} <- [{}]", shown.join(", ")), image.to_string()));
    }
    best.map(|(_, from, to)| (from, to))
}

fn free_monad(out: &mut String, file: &Path, max_depth: usize) -> Result<i32, CliError> {
    let q = load_poly(file)?;
    let free = free_poly_monad(&q, max_depth)?;
    let all = trees(&free);
    let arrow = &free.monad.endo.arrow;
    let _ = writeln!(out, "tree ops: {}", all.len());
    for (b, t) in all.iter().enumerate() {
        let ins: String = arrow
            .fiber(b)
            .iter()
            .map(|&e| format!("{} ", arrow.src().elem(arrow.sigma().at(e))))
            .collect();
        let _ = writeln!(
            out,
            "  {t} : {ins}-> {}  (arity {})",
            arrow.tgt().elem(arrow.tau().at(b)),
            arrow.arity(b)
        );
    }
    match sample_grafting(&free.monad) {
        Some((from, to)) => {
            let _ = writeln!(out, "mu: {from} = {to}");
        }
        None => {
            let _ = writeln!(out, "mu: no non-trivial grafting within depth {max_depth}");
        }
    }
    let _ = writeln!(out, "exact: {}", free.exact);
    Ok(EXIT_OK)
}

/// Largest random polynomial used by the law suites. Four-fold composites
/// of polynomials with more ops grow too large to compare exhaustively.
const MAX_POLY_OPS: usize = 2;

fn laws_on<C: Sampling>(out: &mut String, c: C, size: usize, max_apex: usize, trials: usize, seed: u64) -> i32 {
    let sampler = InstanceSampler::new(c.clone(), size, max_apex, seed);
    let axioms = check_double_axioms(&sampler, trials);
    let framed = check_framed(&c, size.min(2));
    render_report(out, &axioms);
    render_report(out, &framed);
    if axioms.passed() && framed.passed() {
        EXIT_OK
    } else {
        EXIT_LAW_FAILURE
    }
}

fn universal_on<C: Sampling>(out: &mut String, c: &C, e: Endo<C>, bound: usize, targets: &[MonadData<C>]) -> Result<i32, CliError> {
    let bundle = match free_monad_adjunction(c, &e, bound) {
        Ok(b) => b,
        Err(dblcat::Error::Truncated(_)) => {
            let _ = writeln!(out, "free monad is truncated at bound {bound}; universal property not checked");
            return Ok(EXIT_LAW_FAILURE);
        }
        Err(err) => return Err(err.into()),
    };
    let _ = writeln!(out, "targets: {}", targets.len());
    let up = check_universal_property(c, &bundle, targets, ENUMERATION_LIMIT);
    let pipe = check_theorem_pipeline(c, &bundle, targets, ENUMERATION_LIMIT);
    render_report(out, &up);
    render_report(out, &pipe);
    Ok(if up.passed() && pipe.passed() { EXIT_OK } else { EXIT_LAW_FAILURE })
}

fn check_universal(out: &mut String, file: &Path, size: usize) -> Result<i32, CliError> {
    if size == 0 {
        return Err(CliError::Input("--target-size must be at least 1".into()));
    }
    match load_any(file)? {
        Input::Graph(g) => {
            let mut targets = Vec::new();
            for n in 1..=size {
                for cat in enumerate_categories_up_to_iso(&named_set("x", n), size)? {
                    targets.push(cat.to_monad());
                }
            }
            let e = Endo {
                obj: g.nodes.clone(),
                arrow: g.edges.clone(),
            };
            universal_on(out, &span_instance(), e, DEFAULT_MAX_LEN, &targets)
        }
        Input::Poly(q) => {
            let c = poly_instance();
            let targets = enumerate_poly_monads(size, 2, |m| Ok(all_hold(&c, &monad_law_equations(&c, m))))?;
            let e = Endo {
                obj: q.src().clone(),
                arrow: q,
            };
            universal_on(out, &c, e, DEFAULT_MAX_DEPTH, &targets)
        }
    }
}

fn compose(out: &mut String, first: &Path, second: &Path) -> Result<i32, CliError> {
    match (load_any(first)?, load_any(second)?) {
        (Input::Graph(f), Input::Graph(g)) => {
            let _ = writeln!(out, "{}", compose_spans(&g.edges, &f.edges)?);
        }
        (Input::Poly(p), Input::Poly(q)) => {
            let _ = writeln!(out, "{}", compose_polys(&q, &p)?);
        }
        _ => return Err(CliError::Input("cannot compose a graph with a polynomial".into())),
    }
    Ok(EXIT_OK)
}

fn execute(out: &mut String, cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::FreeCat { file, max_length } => free_cat(out, &file, max_length),
        Command::FreeMonad { file, max_depth } => free_monad(out, &file, max_depth),
        Command::Laws {
            instance,
            size,
            trials,
            seed,
        } => {
            if size == 0 {
                return Err(CliError::Input("--size must be at least 1".into()));
            }
            Ok(match instance {
                Instance::Span => laws_on(out, span_instance(), size, size, trials, seed),
                Instance::Poly => laws_on(out, poly_instance(), size, size.min(MAX_POLY_OPS), trials, seed),
            })
        }
        Command::CheckUniversal { file, target_size } => check_universal(out, &file, target_size),
        Command::Compose { first, second } => compose(out, &first, &second),
    }
}

/// Runs the command line `args` (program name first), writing results to
/// `stdout` and diagnostics to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT_ERROR } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let mut out = String::new();
    let result = execute(&mut out, cli);
    let _ = stdout.write_all(out.as_bytes());
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_library() {
        let cli = Cli::try_parse_from(["dblcat", "laws", "poly"]).unwrap();
        match cli.command {
            Command::Laws {
                instance,
                size,
                trials,
                seed,
            } => assert_eq!((instance, size, trials, seed), (Instance::Poly, 3, 200, 0)),
            other => panic!("parsed {other:?}"),
        }
        let cli = Cli::try_parse_from(["dblcat", "free-cat", "g"]).unwrap();
        assert!(matches!(cli.command, Command::FreeCat { max_length: 16, .. }));
        let cli = Cli::try_parse_from(["dblcat", "free-monad", "p"]).unwrap();
        assert!(matches!(cli.command, Command::FreeMonad { max_depth: 8, .. }));
    }

    #[test]
    fn reports_render_without_timings() {
        let mut r = LawReport::new("demo", 4);
        r.check("always", true, String::new, Vec::new);
        let mut out = String::new();
        render_report(&mut out, &r);
        assert_eq!(out, "demo: 1 checks, 0 failures\nSUITE demo PASS 1 0 seed=4\n");
    }
}
