use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use canonical_ramsey::adversary::{generate_colouring, AdversaryKind, AdversarySpec};
use canonical_ramsey::erdos_rado::{er_find_with, ErConfig, SequenceBuild};
use canonical_ramsey::harness::{self, ExperimentConfig};
use canonical_ramsey::search::{arrows_mono, find_canonical_copy, find_rainbow_copy, ArrowQuery, ArrowVerdict, DEFAULT_NODE_BUDGET};
use canonical_ramsey::{gnp_generate, CanonicalWitness, EdgeColouring, OrderedGraph};

#[derive(Parser)]
#[command(name = "canonical-ramsey", version, about = "Canonical Ramsey patterns in edge-coloured graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample G(n, p) and write it in the edge-list format.
    Gnp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the ell-clean subgraph of a graph.
    Clean {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Look for a canonical (or rainbow) K_ell in a coloured graph.
    Find {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        colouring: PathBuf,
        #[arg(long)]
        ell: usize,
        /// Only accept rainbow copies.
        #[arg(long)]
        rainbow: bool,
    },
    /// Decide G -> (K_ell)_r by backtracking.
    Arrow {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        ell: usize,
        #[arg(long, default_value_t = 2)]
        colours: usize,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
        /// Where to write an avoiding colouring, if one is found.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// Run the Erdős–Rado procedure on a coloured K_n.
    ErDemo {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ell: usize,
        /// random:R, injective, min_order, max_order, greedy_proper, bounded_random:L[:R]
        #[arg(long, default_value = "random:3")]
        adversary: AdversaryKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a Monte Carlo sweep described by a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Per-trial CSV.
        #[arg(long)]
        out: PathBuf,
        /// Full JSON output (records, summary, config).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Per-cell summary CSV.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Gnp { n, p, seed, out } => {
            let sample = gnp_generate(n, p, seed)?;
            with_output(out.as_deref(), |w| Ok(sample.graph.write_to(w)?))
        }
        Command::Clean { graph, ell, out } => {
            let g = read_graph(&graph)?;
            let cleaned = g.clean_subgraph(ell)?;
            log::info!("removed {} of {} edges", g.edge_count() - cleaned.edge_count(), g.edge_count());
            with_output(out.as_deref(), |w| Ok(cleaned.write_to(w)?))
        }
        Command::Find { graph, colouring, ell, rainbow } => {
            let g = read_graph(&graph)?;
            let file = File::open(&colouring).with_context(|| format!("opening {}", colouring.display()))?;
            let phi = EdgeColouring::read_from(&g, BufReader::new(file))?;
            let outcome = if rainbow {
                find_rainbow_copy(&phi, ell, None)?
            } else {
                find_canonical_copy(&phi, ell, None)?
            };
            match outcome.witness {
                Some(w) => print_witness(&w),
                None => println!("no {} K_{ell} ({} nodes)", if rainbow { "rainbow" } else { "canonical" }, outcome.nodes_explored),
            }
            Ok(())
        }
        Command::Arrow { graph, ell, colours, budget, witness_out } => {
            let g = read_graph(&graph)?;
            let verdict = arrows_mono(&g, ArrowQuery::new(ell, colours)?, budget)?;
            match &verdict {
                ArrowVerdict::Arrows { nodes_explored } => {
                    println!("arrows: every {colours}-colouring has a monochromatic K_{ell} ({nodes_explored} nodes)")
                }
                ArrowVerdict::Avoided { colouring, nodes_explored } => {
                    println!("avoided: found a {colours}-colouring without monochromatic K_{ell} ({nodes_explored} nodes)");
                    if let Some(path) = witness_out {
                        let phi = EdgeColouring::from_vec(&g, colouring.clone())?;
                        with_output(Some(&path), |w| Ok(phi.write_to(w)?))?;
                    }
                }
                ArrowVerdict::ResourceLimit { nodes_explored } => {
                    println!("undecided: node budget exhausted after {nodes_explored} nodes")
                }
            }
            Ok(())
        }
        Command::ErDemo { n, ell, adversary, seed } => {
            let k = OrderedGraph::complete(n);
            let phi = generate_colouring(&k, &AdversarySpec::new(adversary, seed)?);
            let config = ErConfig {
                seed,
                ..ErConfig::for_clique(ell)
            };
            let out = er_find_with(&phi, &config)?;
            println!(
                "delta = {:.3e}, L = {}, guaranteed for log2 n >= {:.0}",
                config.consts.delta,
                config.consts.steps,
                config.consts.guaranteed_n_log2()
            );
            match &out.build {
                SequenceBuild::Complete(seq) => {
                    for (i, (s, set)) in seq.steps.iter().zip(&seq.surviving).enumerate() {
                        println!("step {}: v={} c={} {} |S|={}", i + 1, s.vertex, s.colour, s.direction.symbol(), set.len());
                    }
                }
                SequenceBuild::Bounded { partial, surviving } => println!(
                    "sequence stopped after {} steps; colouring bounded on {} vertices",
                    partial.len(),
                    surviving.len()
                ),
            }
            println!("branch: {}", out.branch.name());
            print_witness(&out.witness);
            Ok(())
        }
        Command::Sweep { config, out, json, summary, threads } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            let result = match threads {
                Some(0) => bail!("--threads must be at least 1"),
                Some(t) => harness::run_sweep_with_threads(&cfg, t)?,
                None => harness::run_sweep(&cfg)?,
            };
            if cfg.clean_mode {
                let report = harness::verify_corollary_mode(&cfg, &result.records)?;
                log::info!("clean-mode invariants hold on {} trials", report.trials_checked);
            }
            with_output(Some(&out), |w| Ok(harness::write_records_csv(&result.records, w)?))?;
            if let Some(path) = summary {
                with_output(Some(&path), |w| Ok(harness::write_summary_csv(&result.summary, w)?))?;
            }
            if let Some(path) = json {
                with_output(Some(&path), |w| Ok(harness::write_json(&result, w)?))?;
            }
            harness::write_summary_csv(&result.summary, io::stdout().lock())?;
            Ok(())
        }
    }
}

fn read_graph(path: &Path) -> Result<OrderedGraph> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    OrderedGraph::read_from(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
            f(&mut w)?;
            w.flush()?;
        }
        None => f(&mut io::stdout().lock())?,
    }
    Ok(())
}

fn print_witness(w: &CanonicalWitness) {
    let tags: Vec<&str> = w.tags.iter().map(|t| t.name()).collect();
    println!("witness {:?}: {}", w.vertices, tags.join(", "));
    for (e, c) in &w.evidence {
        println!("  {e} -> {c}");
    }
}
