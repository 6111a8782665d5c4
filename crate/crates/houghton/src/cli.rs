//! Command-line front end.
//!
//! Exit codes: 0 success / all relators hold / word trivial; 1 nontrivial
//! word or verification failure; 2 usage or parse errors; 3 runtime limits.

use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::autom::AutError;
use crate::folding;
use crate::presentation::{self, FamilySelection, VerifyOptions};
use crate::rewrite::{self, GroupWord, GroupWordError};
use crate::words::Word;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Parser)]
#[command(
    name = "houghton",
    about = "Eventually rigid automorphisms: evaluation, word problem, flux, \
             presentation verification, foldings, and rewriting growth",
    version
)]
struct Cli {
    /// Number of rays of the ambient graph.
    #[arg(long, global = true, default_value_t = 3)]
    r: u32,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for all randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Position ceiling guarding exception-table growth.
    #[arg(long, global = true, default_value_t = crate::autom::DEFAULT_CEILING)]
    ceiling: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a group word and print the element in canonical form.
    Eval { word: String },
    /// Decide whether a group word represents the identity.
    Trivial { word: String },
    /// Print the flux vector (t_2, ..., t_r) of a pure word.
    Flux {
        word: String,
        #[arg(long, value_enum, default_value_t = FluxRoute::Offsets)]
        via: FluxRoute,
    },
    /// Verify relator catalogs in the concrete group.
    Verify(VerifyArgs),
    /// Rewrite a flux-zero word into compactly supported factors.
    Rewrite { word: String },
    /// Fold basis words and print the subgroup rank.
    ///
    /// Generators are comma-separated; without commas each whitespace
    /// token is its own generator.
    Rank { words: Option<String> },
    /// Measure rewritten length and area on random flux-zero words.
    Growth {
        #[arg(long, default_value_t = 12)]
        max_len: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FluxRoute {
    Offsets,
    Corank,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Window size for the AFV family and sampling bound for the infinite
    /// conjugation families.
    #[arg(long, default_value_t = 6)]
    n: u32,
    /// Sampling bound for the auxiliary ladders.
    #[arg(long, default_value_t = 5)]
    k: i64,
    /// Write the JSON report to this path as well.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    P,
    Afv,
    Qprime,
    Aux,
    R,
    All,
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Word(#[from] GroupWordError),
    #[error(transparent)]
    Basis(#[from] crate::words::WordParseError),
    #[error(transparent)]
    Aut(#[from] AutError),
    #[error(transparent)]
    Fold(#[from] folding::FoldError),
    #[error(transparent)]
    Presentation(#[from] presentation::PresentationError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn exit_code_for(e: &CliError) -> i32 {
    match e {
        CliError::Word(GroupWordError::Eval(AutError::CeilingExceeded { .. })) => EXIT_RUNTIME,
        CliError::Word(_) => EXIT_USAGE,
        CliError::Aut(AutError::CeilingExceeded { .. }) => EXIT_RUNTIME,
        CliError::Io(_) => EXIT_RUNTIME,
        CliError::Fold(folding::FoldError::BadWindow { .. }) => EXIT_USAGE,
        CliError::Fold(_) => EXIT_RUNTIME,
        _ => EXIT_USAGE,
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Eval { word } => cmd_eval(cli, word),
        Command::Trivial { word } => cmd_trivial(cli, word),
        Command::Flux { word, via } => cmd_flux(cli, word, *via),
        Command::Verify(args) => cmd_verify(cli, args),
        Command::Rewrite { word } => cmd_rewrite(cli, word),
        Command::Rank { words } => cmd_rank(cli, words.as_deref().unwrap_or("")),
        Command::Growth { max_len, samples } => cmd_growth(cli, *max_len, *samples),
    }
}

fn parse_word(cli: &Cli, text: &str) -> Result<GroupWord, CliError> {
    Ok(GroupWord::parse(text, cli.r)?)
}

fn cmd_eval(cli: &Cli, text: &str) -> Result<i32, CliError> {
    let word = parse_word(cli, text)?;
    let elem = word.evaluate_with_ceiling(cli.ceiling)?;
    if cli.json {
        println!("{}", elem.to_json());
    } else {
        println!("{elem}");
    }
    Ok(EXIT_OK)
}

fn cmd_trivial(cli: &Cli, text: &str) -> Result<i32, CliError> {
    let word = parse_word(cli, text)?;
    if matches!(word.syntactic_flux(), Err(GroupWordError::RhoLetter)) {
        return Err(CliError::Usage("trivial requires a rho-free word".into()));
    }
    let decision = rewrite::decide_trivial(&word)?;
    let verdict = if decision.trivial {
        "trivial"
    } else {
        "nontrivial"
    };
    if cli.json {
        println!(
            "{}",
            json!({ "trivial": decision.trivial, "stage": decision.stage.to_string() })
        );
    } else {
        println!("{verdict} ({})", decision.stage);
    }
    Ok(if decision.trivial { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_flux(cli: &Cli, text: &str, via: FluxRoute) -> Result<i32, CliError> {
    let word = parse_word(cli, text)?;
    let elem = word.evaluate_with_ceiling(cli.ceiling)?;
    if !elem.is_pure() {
        return Err(CliError::Usage("flux requires a pure word".into()));
    }
    let flux = match via {
        FluxRoute::Offsets => elem.flux_offsets()?,
        FluxRoute::Corank => {
            // Window auto-sized from the element's exception bound and offsets.
            let bound = elem.exception_bound();
            let t_max = elem
                .offsets()
                .iter()
                .map(|v| v.unsigned_abs() as u32)
                .max()
                .unwrap_or(0);
            let n = bound + 1;
            let m = n + t_max + 1;
            let window = m + t_max;
            let mut out = Vec::new();
            for i in 2..=cli.r {
                out.push(folding::flux_via_corank(&elem, i, n, m, window)?);
            }
            out
        }
    };
    if cli.json {
        println!("{}", json!(flux));
    } else {
        let parts: Vec<String> = flux.iter().map(|v| v.to_string()).collect();
        println!("({})", parts.join(", "));
    }
    Ok(EXIT_OK)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<i32, CliError> {
    let selection = match args.family {
        Family::P => FamilySelection::P,
        Family::Afv => FamilySelection::Afv,
        Family::Qprime => FamilySelection::Qprime,
        Family::Aux => FamilySelection::Aux,
        Family::R => FamilySelection::Reductions,
        Family::All => FamilySelection::All,
    };
    let opts = VerifyOptions {
        r: cli.r,
        afv_n: args.n,
        n_max: args.n as i64,
        k_max: args.k,
        ceiling: cli.ceiling,
    };
    let report = presentation::verify_all(selection, &opts)?;
    let payload = report.to_json();
    if let Some(path) = &args.out {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "{payload}")?;
    }
    if cli.json {
        println!("{payload}");
    } else {
        for res in &report.results {
            if !res.holds {
                let (g, w) = res.witness.as_ref().expect("failing result has witness");
                println!(
                    "FAIL {} [{}] {} (witness {g} -> {w})",
                    res.instance.family, res.instance.params, res.instance.word
                );
            }
        }
        println!(
            "{}: {} instances checked",
            if report.all_hold { "pass" } else { "fail" },
            report.results.len()
        );
    }
    Ok(if report.all_hold { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_rewrite(cli: &Cli, text: &str) -> Result<i32, CliError> {
    let word = parse_word(cli, text)?;
    let (fact, stats) = rewrite::rewrite_to_compact(&word)?;
    if cli.json {
        println!(
            "{}",
            json!({
                "factors": fact
                    .factors
                    .iter()
                    .map(|f| json!({
                        "base": f.base.to_string(),
                        "conjugator": f.conjugator.to_string(),
                    }))
                    .collect::<Vec<_>>(),
                "residual": fact.residual,
                "input_len": stats.input_len,
                "expanded_len": stats.expanded_len,
                "area": stats.area,
                "sigma_factors": stats.sigma_factors,
            })
        );
    } else {
        for f in &fact.factors {
            if f.conjugator.is_empty() {
                println!("{}", f.base);
            } else {
                println!("{}^({})", f.base, f.conjugator);
            }
        }
        println!(
            "input {} letters, expanded {}, area {}, sigma factors {}",
            stats.input_len, stats.expanded_len, stats.area, stats.sigma_factors
        );
    }
    Ok(EXIT_OK)
}

/// Comma-separated generators; a comma-free argument is split on whitespace,
/// one generator per token.
fn split_generators(text: &str, r: u32) -> Result<Vec<Word>, CliError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let pieces: Vec<&str> = if text.contains(',') {
        text.split(',').collect()
    } else {
        text.split_whitespace().collect()
    };
    let mut out = Vec::new();
    for piece in pieces {
        out.push(Word::parse(piece, r)?);
    }
    Ok(out)
}

fn cmd_rank(cli: &Cli, text: &str) -> Result<i32, CliError> {
    let generators = split_generators(text, cli.r)?;
    let graph = folding::fold(&generators);
    if cli.json {
        println!(
            "{}",
            json!({ "rank": graph.rank(), "graph": graph.to_json() })
        );
    } else {
        println!("{}", graph.rank());
    }
    Ok(EXIT_OK)
}

fn cmd_growth(cli: &Cli, max_len: usize, samples: usize) -> Result<i32, CliError> {
    if max_len < 2 || samples == 0 {
        return Err(CliError::Usage(
            "growth needs --max-len >= 2 and --samples >= 1".into(),
        ));
    }
    let rows = rewrite::measure_growth(samples, max_len, cli.seed);
    if cli.json {
        println!("{}", json!({ "seed": cli.seed, "rows": rows }));
    } else {
        println!("seed {}", cli.seed);
        println!(
            "{:>4} {:>8} {:>14} {:>14} {:>9} {:>12} {:>10}",
            "x", "samples", "max_expanded", "mean_expanded", "max_area", "len/x^6", "area/x^2"
        );
        for row in rows {
            println!(
                "{:>4} {:>8} {:>14} {:>14.1} {:>9} {:>12.6} {:>10.4}",
                row.x,
                row.samples,
                row.max_expanded_len,
                row.mean_expanded_len,
                row.max_area,
                row.len_ratio,
                row.area_ratio
            );
        }
    }
    Ok(EXIT_OK)
}
