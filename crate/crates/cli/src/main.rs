//! `hdfol`: batch front end over documents in the line format of `hdfol::text`.
//!
//! Every command prints one JSON report on stdout. Exit status is 0 on
//! success, 1 when a refutation or failed property is found, 2 when a
//! budget ran out or the answer is unknown, 3 on bad input.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hdfol::forcing::SatBudget;

#[derive(Parser, Debug)]
#[command(name = "hdfol", version, about = "Hybrid-dynamic first-order logic toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BudgetArgs {
    /// Most worlds a searched model may have.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub worlds: u64,
    /// Default carrier bound per sort.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub carrier: u64,
    /// Per-sort carrier bound, as `SORT=N`.
    #[arg(long = "carrier-for", value_name = "SORT=N")]
    pub carrier_for: Vec<String>,
    /// Fresh constants per extended sort.
    #[arg(long, default_value_t = 1)]
    pub constants: usize,
    /// Unfoldings of `*` in witness pools.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub star_bound: u64,
    /// Depth of ground terms.
    #[arg(long, default_value_t = 2)]
    pub term_depth: usize,
    /// Search nodes per model-finder call.
    #[arg(long, default_value_t = 2_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub node_limit: u64,
}

impl BudgetArgs {
    pub fn budget(&self) -> anyhow::Result<SatBudget> {
        let mut b = SatBudget {
            max_worlds: self.worlds as usize,
            max_carrier: self.carrier as usize,
            carrier: Default::default(),
            max_constants: self.constants,
            star_bound: self.star_bound as usize,
            term_depth: self.term_depth,
            node_limit: self.node_limit,
        };
        for c in &self.carrier_for {
            let (s, n) = c.split_once('=').ok_or_else(|| anyhow::anyhow!("expected SORT=N, found `{c}`"))?;
            let n: usize = n.parse()?;
            anyhow::ensure!(n > 0, "carrier bound for `{s}` must be positive");
            b.carrier.insert(s.to_string(), n);
        }
        Ok(b)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Load a document and summarize it.
    Validate { file: PathBuf },
    /// Evaluate sentences (default: the axioms) on the document's model.
    Check {
        file: PathBuf,
        #[arg(long = "sentence", short)]
        sentences: Vec<String>,
    },
    /// Translate axioms and types along the morphism given by the target's `map` lines.
    Translate {
        file: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Write the translated document here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite `@k γ` into its rigid form for every axiom.
    Rigidify {
        file: PathBuf,
        #[arg(long)]
        nominal: String,
    },
    /// Flatten into the world-indexed signature; the model and `--family` members become one structure.
    Encode {
        file: PathBuf,
        /// Further models over the same signature, worlds and carrier.
        #[arg(long)]
        family: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the source structure at one world of a flattened model.
    Decode {
        file: PathBuf,
        /// Document whose signature is the source signature.
        #[arg(long)]
        source: PathBuf,
        #[arg(long, default_value = "")]
        world: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a model of the axioms within budget.
    Sat {
        file: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the semantic forcing property of the axioms over a witness-closed pool.
    Force {
        file: PathBuf,
        /// Pool seeds of the form `@k γ`.
        #[arg(long = "seed", required = true)]
        seeds: Vec<String>,
        /// Queries `@k γ` asked at the least condition.
        #[arg(long = "query")]
        queries: Vec<String>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Build a generic set over the pool and its generic model.
    Generic {
        file: PathBuf,
        #[arg(long = "seed", required = true)]
        seeds: Vec<String>,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a model of the axioms omitting the given types.
    Omit {
        file: PathBuf,
        /// Files of `type`/`member` lines over the same signature.
        #[arg(long = "types")]
        type_files: Vec<PathBuf>,
        /// Add the type of unnamed worlds.
        #[arg(long)]
        nominal_type: bool,
        /// Constructor operations; adds the type of unreachable elements per constrained sort.
        #[arg(long, value_delimiter = ',')]
        constructors: Vec<String>,
        /// Constructor-term depth for those types.
        #[arg(long, default_value_t = 2)]
        type_depth: usize,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the decision log here.
        #[arg(long)]
        audit: Option<PathBuf>,
    },
    /// Derive a sentence over constructor-based models.
    Entail {
        file: PathBuf,
        #[arg(long)]
        goal: String,
        #[arg(long, value_delimiter = ',', required = true)]
        constructors: Vec<String>,
        /// Constructor-term depth for instantiation.
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Also search for a constructor-based countermodel.
        #[arg(long)]
        cross_check: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, code) = match commands::run(&cli.command) {
        Ok(out) => (out.report, out.code),
        Err(e) => {
            eprintln!("error: {e:#}");
            (serde_json::json!({ "error": format!("{e:#}") }), commands::INPUT_ERROR)
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    match &cli.report {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return ExitCode::from(commands::INPUT_ERROR);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(code)
}
