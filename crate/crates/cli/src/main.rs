use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use fairmpdag::ancestry::{relations_of, AncestralRelation};
use fairmpdag::experiment::{run_experiment, write_outputs, ExperimentConfig};
use fairmpdag::graph::{parse_background, parse_graph, Pdag, VertexSet};
use fairmpdag::ident::{
    enumerate_valid_orientations, identification_formula, is_identifiable, pco,
};
use fairmpdag::meek::{construct_mpdag, cpdag_from_dag, BackgroundKnowledge, MeekError};

#[derive(Parser)]
#[command(
    name = "fairmpdag",
    version,
    about = "Causal fairness with partially directed graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CPDAG of a DAG.
    Cpdag {
        dag: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// MPDAG from a CPDAG and a background-knowledge file of `S -> T` lines.
    Mpdag {
        cpdag: PathBuf,
        background: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Partial causal ordering.
    Pco {
        graph: PathBuf,
        /// Comma-separated subset to order (default: all vertices).
        #[arg(long, value_delimiter = ',')]
        nodes: Vec<String>,
    },
    /// Identification formula of the effect of an intervention.
    Identify {
        graph: PathBuf,
        #[arg(long = "do", value_delimiter = ',', required = true)]
        intervened: Vec<String>,
        /// Print each candidate MPDAG when the effect is not identifiable.
        #[arg(long)]
        list: bool,
    },
    /// Ancestral relation of every vertex to the sensitive vertex.
    Relations {
        graph: PathBuf,
        #[arg(long)]
        sensitive: String,
    },
    /// Full trade-off experiment from a JSON config.
    Experiment {
        config: PathBuf,
        #[arg(short, long, default_value = "results")]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("{}: cannot read", path.display()))
}

fn load_graph(path: &Path) -> Result<Pdag> {
    parse_graph(&read(path)?).map_err(|e| anyhow!("{}:{}: {}", path.display(), e.line, e.message))
}

/// Line of `tail -> head` in a background file, for error messages.
fn bk_line(text: &str, tail: &str, head: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let body = l.split('#').next().unwrap_or("");
            body.split_whitespace().collect::<Vec<_>>() == [tail, "->", head]
        })
        .map(|i| i + 1)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("{}: cannot write", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn names_to_set(g: &Pdag, names: &[String], path: &Path) -> Result<VertexSet> {
    g.vertices_named(names.iter().map(String::as_str))
        .map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Cpdag { dag, out } => {
            let g = load_graph(&dag)?;
            let c = cpdag_from_dag(&g).map_err(|e| anyhow!("{}: {e}", dag.display()))?;
            emit(&c.to_string(), out.as_deref())?;
        }
        Command::Mpdag {
            cpdag,
            background,
            out,
        } => {
            let g = load_graph(&cpdag)?;
            let text = read(&background)?;
            let pairs = parse_background(&text, &g)
                .map_err(|e| anyhow!("{}:{}: {}", background.display(), e.line, e.message))?;
            let located = |err: MeekError| match &err {
                MeekError::Contradictory(a, b) | MeekError::Inconsistent { tail: a, head: b } => {
                    match bk_line(&text, a, b).or_else(|| bk_line(&text, b, a)) {
                        Some(line) => anyhow!("{}:{line}: {err}", background.display()),
                        None => anyhow!("{}: {err}", background.display()),
                    }
                }
                _ => anyhow!("{}: {err}", background.display()),
            };
            let bk = BackgroundKnowledge::new(&g, pairs).map_err(located)?;
            let m = construct_mpdag(&g, &bk).map_err(located)?;
            emit(&m.to_string(), out.as_deref())?;
        }
        Command::Pco { graph, nodes } => {
            let g = load_graph(&graph)?;
            let set = if nodes.is_empty() {
                g.vertex_set()
            } else {
                names_to_set(&g, &nodes, &graph)?
            };
            let o = pco(&set, &g).map_err(|e| anyhow!("{}: {e}", graph.display()))?;
            println!("{}", o.render(&g));
        }
        Command::Identify {
            graph,
            intervened,
            list,
        } => {
            let g = load_graph(&graph)?;
            let s = names_to_set(&g, &intervened, &graph)?;
            if is_identifiable(&g, &s) {
                let f = identification_formula(&g, &s)
                    .map_err(|e| anyhow!("{}: {e}", graph.display()))?;
                println!("{f}");
                println!("identifiable");
            } else {
                let cands = enumerate_valid_orientations(&g, &s)
                    .map_err(|e| anyhow!("{}: {e}", graph.display()))?;
                println!("not identifiable: {} candidate MPDAGs", cands.len());
                if list {
                    for (i, c) in cands.iter().enumerate() {
                        println!("# candidate {}", i + 1);
                        print!("{c}");
                    }
                }
            }
        }
        Command::Relations { graph, sensitive } => {
            let g = load_graph(&graph)?;
            let a = g
                .vertex(&sensitive)
                .ok_or_else(|| anyhow!("{}: unknown vertex `{sensitive}`", graph.display()))?;
            for (v, rel) in relations_of(&g, a) {
                let label = match rel {
                    AncestralRelation::DefiniteDescendant => "definite-descendant",
                    AncestralRelation::DefiniteNonDescendant => "definite-non-descendant",
                    AncestralRelation::PossibleDescendant => "possible-descendant",
                };
                println!("{} {label}", g.name(v));
            }
        }
        Command::Experiment { config, out } => {
            let text = read(&config)?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)
                .map_err(|e| anyhow!("{}:{}: {e}", config.display(), e.line()))?;
            let report = run_experiment(&cfg).map_err(|e| anyhow!("{}: {e}", config.display()))?;
            write_outputs(&report, &cfg, &out)
                .with_context(|| format!("{}: cannot write outputs", out.display()))?;
            eprintln!(
                "{} rows, {} failures written to {}",
                report.rows.len(),
                report.failures.len(),
                out.display()
            );
            if !report.failures.is_empty() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
