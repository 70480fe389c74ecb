//! `noisywmc` command-line front end.
//!
//! Exit codes: 0 answer produced, 1 I/O failure, 2 parse or spec error,
//! 3 encoding policy mismatch, 4 zero-probability evidence, 5 cap exceeded.

mod query;
mod suite;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noisywmc::count::{Counter, Heuristic, SolverConfig};
use noisywmc::encode::{encode_network, EncodeOptions, Encoding, Policy};
use noisywmc::gen::{gen_evidence, gen_multi_layer, gen_two_layer, GenSpec};
use noisywmc::infer::conditional_query_with;
use noisywmc::model::{
    brute_force_query, parse_evidence, parse_network, write_evidence, write_network, Evidence,
    Network, DEFAULT_STATE_CAP, DEFAULT_TABLE_CAP,
};
use noisywmc::wcnf::{emit_wdimacs, parse_wdimacs};
use noisywmc::Error;

const CAP_VAR: &str = "NOISYWMC_CAP";

#[derive(Parser)]
#[command(name = "noisywmc", version, about = "Exact inference in noisy-OR and noisy-MAX networks by weighted model counting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a network and evidence as a weighted CNF plus a variable sidecar.
    Encode {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        evidence: Option<PathBuf>,
        #[arg(long, default_value = "general")]
        encoding: Encoding,
        /// Output wcnf; the sidecar is written next to it with `.vars` appended.
        #[arg(long)]
        out: PathBuf,
    },
    /// Weighted model count of a wcnf file.
    Count {
        #[arg(long)]
        cnf: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Answer P(query | evidence), or P(evidence) without a query.
    Infer {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        evidence: Option<PathBuf>,
        /// e.g. `Nausea=1`, `A=1,B=0`, `A=1|!B=0`.
        #[arg(long)]
        query: Option<String>,
        #[arg(long, default_value = "general")]
        encoding: Encoding,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Answer the same question by enumerating the joint distribution.
    Oracle {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        evidence: Option<PathBuf>,
        /// A conjunction `A=1,B=0`.
        #[arg(long)]
        query: Option<String>,
    },
    /// Generate a random network, and evidence for two-layer networks.
    Gen(GenArgs),
    /// Run a suite of instances under several encodings and heuristics.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone, Copy)]
struct SolverArgs {
    #[arg(long, default_value = "vsads")]
    heuristic: Heuristic,
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    learn: bool,
}

impl SolverArgs {
    fn config(self) -> SolverConfig {
        let mut c = SolverConfig::default().with_heuristic(self.heuristic);
        if self.no_cache {
            c.cache_capacity = 0;
        }
        c.learn = self.learn;
        c
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    TwoLayer,
    MultiLayer,
}

#[derive(Clone, Copy, ValueEnum)]
enum RelationArg {
    NoisyOr,
    NoisyMax,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "noisy-or")]
    relation: RelationArg,
    /// Domain size for noisy-MAX.
    #[arg(long, default_value_t = 2)]
    domain: usize,
    #[arg(long)]
    diseases: Option<usize>,
    #[arg(long)]
    symptoms: Option<usize>,
    #[arg(long)]
    parents: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    arcs: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    param_lo: f64,
    #[arg(long, default_value_t = 0.95)]
    param_hi: f64,
    /// Positive symptoms in the generated evidence (two-layer only).
    #[arg(long)]
    positives: Option<usize>,
    /// Network file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    evidence_out: Option<PathBuf>,
}

pub(crate) enum Failure {
    /// A library error, with the file it came from if any.
    Lib { file: Option<PathBuf>, error: Error },
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib { error, .. } => match error {
                Error::Io(_) => 1,
                Error::PolicyMismatch { .. } => 3,
                Error::ZeroEvidence => 4,
                Error::CapExceeded { .. } => 5,
                _ => 2,
            },
            Failure::Usage(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Lib {
                file: Some(p),
                error: Error::Syntax { line, message },
            } => write!(f, "{}:{line}: {message}", p.display()),
            Failure::Lib { file: Some(p), error } => write!(f, "{}: {error}", p.display()),
            Failure::Lib { file: None, error } => write!(f, "{error}"),
            Failure::Usage(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure::Lib { file: None, error }
    }
}

pub(crate) type Outcome<T> = std::result::Result<T, Failure>;

pub(crate) fn at<T>(path: &Path, r: noisywmc::Result<T>) -> Outcome<T> {
    r.map_err(|error| Failure::Lib {
        file: Some(path.to_owned()),
        error,
    })
}

pub(crate) fn read(path: &Path) -> Outcome<String> {
    at(path, fs::read_to_string(path).map_err(Error::from))
}

pub(crate) fn write(path: &Path, text: &str) -> Outcome<()> {
    at(path, fs::write(path, text).map_err(Error::from))
}

pub(crate) fn load_network(path: &Path) -> Outcome<Network> {
    at(path, parse_network(&read(path)?))
}

pub(crate) fn load_evidence(path: Option<&Path>, net: &Network) -> Outcome<Evidence> {
    match path {
        Some(p) => at(p, parse_evidence(&read(p)?, net)),
        None => Ok(Evidence::new()),
    }
}

/// Cap from the environment, or `default`.
fn cap(default: u128) -> Outcome<u128> {
    match std::env::var(CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{CAP_VAR}=`{v}` is not a count"))),
        Err(_) => Ok(default),
    }
}

pub(crate) fn encode_options() -> Outcome<EncodeOptions> {
    Ok(EncodeOptions {
        table_cap: cap(DEFAULT_TABLE_CAP)?,
        ..EncodeOptions::default()
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Outcome<()> {
    match command {
        Command::Encode {
            net,
            evidence,
            encoding,
            out,
        } => {
            let network = load_network(&net)?;
            let ev = load_evidence(evidence.as_deref(), &network)?;
            let policy = Policy::uniform(&network, encoding)?;
            let encoded = encode_network(&network, &ev, &policy, &encode_options()?)?;
            write(&out, &emit_wdimacs(&encoded.cnf))?;
            let mut sidecar = out.into_os_string();
            sidecar.push(".vars");
            write(Path::new(&sidecar), &encoded.sidecar(&network))?;
            println!(
                "vars {} clauses {}",
                encoded.cnf.num_vars(),
                encoded.cnf.clauses().len()
            );
        }
        Command::Count { cnf, solver } => {
            let f = at(&cnf, parse_wdimacs(&read(&cnf)?))?;
            let (value, stats) = Counter::new(solver.config()).count(&f);
            println!("{value}");
            println!("{stats}");
        }
        Command::Infer {
            net,
            evidence,
            query,
            encoding,
            solver,
        } => {
            let network = load_network(&net)?;
            let ev = load_evidence(evidence.as_deref(), &network)?;
            let policy = Policy::uniform(&network, encoding)?;
            let Some(text) = query else {
                let encoded = encode_network(&network, &ev, &policy, &encode_options()?)?;
                let (p, stats) = Counter::new(solver.config()).count(&encoded.cnf);
                println!("probability {p}");
                println!("{stats}");
                return Ok(());
            };
            let q = query::parse(&text, &network)?;
            let r = conditional_query_with(
                &network,
                &q,
                &ev,
                &policy,
                &encode_options()?,
                &solver.config(),
            )?;
            println!("probability {}", r.probability);
            println!("numerator {}", r.numerator);
            println!("denominator {}", r.denominator);
            println!("numerator {}", r.numerator_stats);
            println!("denominator {}", r.denominator_stats);
        }
        Command::Oracle {
            net,
            evidence,
            query,
        } => {
            let network = load_network(&net)?;
            let ev = load_evidence(evidence.as_deref(), &network)?;
            let cap = cap(DEFAULT_STATE_CAP)?;
            let p = match query {
                None => brute_force_query(&network, &ev, &Evidence::new(), cap)?,
                Some(text) => match query::parse_conjunction(&text, &network)? {
                    Some(q) => brute_force_query(&network, &q, &ev, cap)?,
                    None => {
                        if brute_force_query(&network, &Evidence::new(), &ev, cap)? == 0.0 {
                            return Err(Error::ZeroEvidence.into());
                        }
                        0.0
                    }
                },
            };
            println!("probability {p}");
        }
        Command::Gen(args) => generate(&args)?,
        Command::Bench { suite, out } => suite::bench(&suite, &out)?,
    }
    Ok(())
}

fn required(value: Option<usize>, flag: &str) -> Outcome<usize> {
    value.ok_or_else(|| Error::SpecInvalid(format!("--{flag} is required for this family")).into())
}

fn generate(args: &GenArgs) -> Outcome<()> {
    let mut spec = match args.family {
        FamilyArg::TwoLayer => GenSpec::two_layer(
            required(args.diseases, "diseases")?,
            required(args.symptoms, "symptoms")?,
            required(args.parents, "parents")?,
            args.seed,
        ),
        FamilyArg::MultiLayer => GenSpec::multi_layer(
            required(args.nodes, "nodes")?,
            required(args.arcs, "arcs")?,
            args.seed,
        ),
    };
    if let RelationArg::NoisyMax = args.relation {
        spec = spec.noisy_max(args.domain);
    }
    spec.param_range = (args.param_lo, args.param_hi);
    let net = match args.family {
        FamilyArg::TwoLayer => gen_two_layer(&spec)?,
        FamilyArg::MultiLayer => gen_multi_layer(&spec)?,
    };
    let text = write_network(&net);
    match &args.out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    if args.positives.is_some() || args.evidence_out.is_some() {
        let ev = gen_evidence(&net, args.positives.unwrap_or(0))?;
        let text = write_evidence(&ev, &net);
        match &args.evidence_out {
            Some(p) => write(p, &text)?,
            None => print!("{text}"),
        }
    }
    Ok(())
}
