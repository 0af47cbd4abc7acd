//! `qbd`: solve, inspect and generate QBF instances with small
//! clause-covering backdoors.
//!
//! Exit status: 10 when `solve` finds the formula true, 20 when false,
//! 1 on any error, 0 otherwise.

mod bench;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use qbd_core::affine::kernelize_formula;
use qbd_core::algebra::{classify, Relation};
use qbd_core::backdoor::{detect_cc_backdoor, BaseClass};
use qbd_core::io::{parse_qdimacs_with, parse_relations, write_qdimacs, ParseOptions};
use qbd_core::oracle::{extract_strategy_capped, DEFAULT_CAP};
use qbd_core::reductions::{
    dualize, gen_random, horn_to_3horn, mis_to_horn, mis_to_ihsb_minus, random_graph, GenParams, PartitionedGraph,
    PrefixPattern,
};
use qbd_core::special::{dispatch, Algorithm, DispatchConfig};
use qbd_core::QbfFormula;

const EXIT_TRUE: u8 = 10;
const EXIT_FALSE: u8 = 20;

#[derive(Parser)]
#[command(name = "qbd", version, about = "QBF evaluation with clause-covering backdoors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a QDIMACS file; the first output line is `s TRUE` or `s FALSE`.
    Solve(SolveArgs),
    /// Print the smallest backdoor to a base class.
    Detect {
        #[arg(long)]
        class: BaseClass,
        file: PathBuf,
    },
    /// Shrink the parity part of a formula to its kernel.
    Kernelize {
        file: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Classify a constraint language read from a relation file.
    Classify {
        file: PathBuf,
        /// Largest threshold arity to try; defaults to the widest relation, at least 3.
        #[arg(long)]
        max_d: Option<usize>,
    },
    /// Write a generated instance.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Rewrite a formula.
    Transform(TransformArgs),
    /// Cross-check solvers on a generated suite and append JSON lines.
    Bench(bench::BenchArgs),
    /// Check a JSON-lines bench file for disagreements and budget overruns.
    BenchVerify { file: PathBuf },
}

#[derive(Args)]
struct SolveArgs {
    /// auto, 2cnf, aff, posneg, dual-posneg or brute.
    #[arg(long, default_value = "auto")]
    algorithm: String,
    /// Split the matrix against this class instead of the file's partition.
    #[arg(long)]
    class: Option<BaseClass>,
    /// Write a winning strategy tree for the exhaustive evaluator.
    #[arg(long)]
    emit_strategy: Option<PathBuf>,
    #[arg(long, env = "QBD_BRUTE_CAP", default_value_t = DEFAULT_CAP)]
    brute_cap: usize,
    file: PathBuf,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Horn formula with a one-clause backdoor, false iff the graph has a
    /// multipartite independent set.
    MisHorn(GraphArgs),
    /// The same with an IHSB- tractable part.
    MisIhsb(GraphArgs),
    /// Random formula with a planted backdoor.
    Random(RandomArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Graph file: a `parts 1 2 | 3 4` line and one edge per line. A random
    /// graph is drawn when absent.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    vertices: usize,
    #[arg(long, default_value_t = 2)]
    parts: usize,
    #[arg(long, default_value_t = 0.4)]
    edge_prob: f64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value = "2cnf")]
    class: BaseClass,
    #[arg(long, default_value_t = 8)]
    atoms: usize,
    #[arg(long, default_value_t = 2)]
    backdoor_clauses: usize,
    #[arg(long, default_value_t = 4)]
    max_width: usize,
    /// `alternating`, `existential`, or the probability of a universal.
    #[arg(long, default_value = "0.3")]
    prefix: String,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("rewrite").required(true).args(["to_3horn", "dualize"])))]
struct TransformArgs {
    /// Split Horn clauses to at most three literals.
    #[arg(long)]
    to_3horn: bool,
    /// Flip every literal.
    #[arg(long)]
    dualize: bool,
    /// Split against this class before rewriting.
    #[arg(long)]
    class: Option<BaseClass>,
    file: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Solve(args) => solve(args),
        Command::Detect { class, file } => {
            let f = read_formula(&file, None)?;
            let atoms: Vec<_> = f.matrix.atoms().collect();
            let d = detect_cc_backdoor(&atoms, class)?;
            let vars: Vec<String> = d.backdoor_vars.iter().map(|v| v.to_string()).collect();
            if vars.is_empty() {
                println!("k=0");
            } else {
                println!("k={}: {}", d.k(), vars.join(" "));
            }
            Ok(0)
        }
        Command::Kernelize { file, out } => {
            let f = read_formula(&file, Some(BaseClass::Aff))?;
            emit(out.as_deref(), &write_qdimacs(&kernelize_formula(&f)?))?;
            Ok(0)
        }
        Command::Classify { file, max_d } => classify_file(&file, max_d),
        Command::Generate { kind } => generate(kind),
        Command::Transform(args) => {
            let f = read_formula(&args.file, args.class)?;
            let g = if args.to_3horn { horn_to_3horn(&f)? } else { dualize(&f) };
            emit(args.out.as_deref(), &write_qdimacs(&g))?;
            Ok(0)
        }
        Command::Bench(args) => bench::bench(args),
        Command::BenchVerify { file } => bench::verify(&file),
    }
}

fn read_formula(path: &Path, class: Option<BaseClass>) -> Result<QbfFormula> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed =
        parse_qdimacs_with(&text, &ParseOptions { class }).with_context(|| format!("parsing {}", path.display()))?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    Ok(parsed.formula)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn solve(args: SolveArgs) -> Result<u8> {
    let forced = match args.algorithm.as_str() {
        "auto" => None,
        tag => Some(tag.parse::<Algorithm>()?),
    };
    let f = read_formula(&args.file, args.class)?;
    let cfg = DispatchConfig {
        brute_cap: args.brute_cap,
        ..DispatchConfig::default()
    };
    let start = Instant::now();
    let v = dispatch(&f, forced, &cfg)?;
    let elapsed = start.elapsed();
    println!("s {}", if v.value { "TRUE" } else { "FALSE" });
    println!("c algorithm {}", v.algorithm);
    if let Some(c) = v.class {
        println!("c class {c}");
    }
    println!("c k {}", v.k);
    println!("c vars {}", f.num_vars());
    println!("c leaves {}", v.stats.leaves);
    println!("c branch-nodes {}", v.stats.branch_nodes);
    println!("c max-depth {}", v.stats.max_depth);
    println!("c time-ms {:.3}", elapsed.as_secs_f64() * 1e3);
    if let Some(note) = &v.note {
        println!("c note {note}");
    }
    if let Some(path) = &args.emit_strategy {
        let strategy = extract_strategy_capped(&f, args.brute_cap)?;
        fs::write(path, format!("{strategy}\n")).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if v.value { EXIT_TRUE } else { EXIT_FALSE })
}

fn classify_file(path: &Path, max_d: Option<usize>) -> Result<u8> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = parse_relations(&text).with_context(|| format!("parsing {}", path.display()))?;
    let gamma = file.relations();
    let widest = gamma.iter().map(Relation::arity).max().unwrap_or(1);
    let verdict = classify(&gamma, max_d.unwrap_or(widest.max(3)))?;
    println!("{}", verdict.status);
    for w in &verdict.witnesses {
        let name = w.function.name();
        match &w.broken {
            None => println!("  {name}: preserves every relation"),
            Some((i, cx)) => {
                let r = &gamma[*i];
                let rows: Vec<String> = cx.rows.iter().map(|&t| r.format_tuple(t)).collect();
                println!(
                    "  {name}: breaks {} on rows {} giving {}",
                    file.entries[*i].name,
                    rows.join(" "),
                    r.format_tuple(cx.image)
                );
            }
        }
    }
    Ok(0)
}

fn prefix_pattern(s: &str) -> Result<PrefixPattern> {
    Ok(match s {
        "alternating" => PrefixPattern::Alternating,
        "existential" => PrefixPattern::Existential,
        p => PrefixPattern::Random {
            forall: p.parse().with_context(|| format!("bad prefix pattern '{p}'"))?,
        },
    })
}

fn generate(kind: GenerateKind) -> Result<u8> {
    let (formula, out) = match kind {
        GenerateKind::MisHorn(g) => (mis_to_horn(&load_graph(&g)?)?, g.out),
        GenerateKind::MisIhsb(g) => (mis_to_ihsb_minus(&load_graph(&g)?)?, g.out),
        GenerateKind::Random(r) => {
            let params = GenParams {
                n: r.n,
                k: r.k,
                class: r.class,
                tractable_atoms: r.atoms,
                backdoor_clauses: r.backdoor_clauses,
                max_width: r.max_width,
                prefix: prefix_pattern(&r.prefix)?,
            };
            (gen_random(&params, r.seed)?, r.out)
        }
    };
    emit(out.as_deref(), &write_qdimacs(&formula))?;
    Ok(0)
}

fn load_graph(args: &GraphArgs) -> Result<PartitionedGraph> {
    match &args.graph {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(text.parse().with_context(|| format!("parsing {}", path.display()))?)
        }
        None => {
            if args.parts == 0 {
                bail!("a graph needs at least one part");
            }
            Ok(random_graph(args.vertices, args.parts, args.edge_prob, args.seed)?)
        }
    }
}
