//! `norminf`: enumerate, check and transform transfer systems from the shell.
//!
//! Exit codes: 0 success, 1 mathematical failure (a failed check or a set
//! that is not a transfer system), 2 usage or malformed input, 3 resource
//! limits, 4 I/O failure.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use norminf::enumerate::{self, Engine, Options, DEFAULT_BRUTE_CEILING};
use norminf::io::{self as nio, CatalogueEntry, CATALOGUE_MAGIC};
use norminf::report::{self, CheckOptions};
use norminf::symmetry;
use norminf::{Error, GroupSpec, Lattice, PairSet, TransferSystem};

const THREADS_VAR: &str = "NORMINF_THREADS";

#[derive(Parser)]
#[command(name = "norminf", version, about = "Transfer systems on subgroup lattices of cyclic groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count (and optionally list) every transfer system for a group.
    Enumerate(EnumerateArgs),
    /// Smallest transfer system containing the given arrows.
    Closure(InputArgs),
    /// Check the transitivity and restriction axioms.
    CheckSystem(InputArgs),
    /// Apply the involution Φ (squarefree groups).
    Phi(InputArgs),
    /// Show G⁰, the Comp index and the facet support of a system.
    Decompose(InputArgs),
    /// Verify Φ and the support property over every system of a group.
    Verify {
        #[arg(long)]
        group: GroupSpec,
    },
    /// Render a system as a Graphviz digraph.
    ExportDot(InputArgs),
    /// Run the full verification suite.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Brute,
    Dfs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Json,
    Hex,
    None,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    group: GroupSpec,
    #[arg(long, value_enum, default_value = "dfs")]
    engine: EngineArg,
    /// List the systems: JSON lines or a hex catalogue.
    #[arg(long, value_enum, default_value = "none")]
    emit: Emit,
    /// Print the Comp table (squarefree groups).
    #[arg(long)]
    by_comp: bool,
    /// Print the Comp table as CSV.
    #[arg(long, requires = "by_comp")]
    csv: bool,
    /// Where to write emitted systems; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest pair count the brute-force engine accepts.
    #[arg(long, default_value_t = DEFAULT_BRUTE_CEILING)]
    ceiling: usize,
}

#[derive(Args)]
struct InputArgs {
    /// Group; required for hex input, checked against JSON input.
    #[arg(long)]
    group: Option<GroupSpec>,
    /// JSON system, hex bit vector or catalogue file; `-` for standard input.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Entry to read when the input is a catalogue.
    #[arg(long, default_value_t = 0)]
    entry: usize,
    /// Name subgroups C_p, C_{pq}, … instead of by order.
    #[arg(long)]
    symbolic: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Add the four-prime sweep.
    #[arg(long)]
    deep: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra groups to enumerate and check.
    #[arg(long)]
    group: Vec<GroupSpec>,
}

enum Failure {
    Lib(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotTransferSystem(_) => 1,
        Error::CeilingExceeded { .. } | Error::LatticeTooLarge { .. } => 3,
        Error::Io(_) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Closure(args) => {
            let (lattice, members) = load(&args)?;
            let closed = norminf::transfer::closure(&lattice, members);
            write_output(args.out.as_deref(), &(nio::pairs_to_json(&lattice, closed) + "\n"))
        }
        Command::CheckSystem(args) => {
            let (lattice, members) = load(&args)?;
            match norminf::transfer::check(&lattice, members) {
                Ok(()) => {
                    println!("ok");
                    Ok(())
                }
                Err(v) => Err(Failure::Check(v.describe(&lattice, args.symbolic))),
            }
        }
        Command::Phi(args) => {
            let t = load_system(&args)?;
            let image = symmetry::phi(&t)?;
            write_output(args.out.as_deref(), &(nio::to_json(&image) + "\n"))
        }
        Command::Decompose(args) => cmd_decompose(args),
        Command::Verify { group } => cmd_verify(group),
        Command::ExportDot(args) => {
            let (lattice, members) = load(&args)?;
            write_output(args.out.as_deref(), &nio::to_dot(&lattice, members, args.symbolic))
        }
        Command::Check(args) => {
            let report = report::run(&CheckOptions {
                deep: args.deep,
                seed: args.seed,
                groups: args.group,
            });
            print!("{}", report.render());
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Check("verification failed".into()))
            }
        }
    }
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<(), Failure> {
    let lattice = Arc::new(Lattice::new(args.group)?);
    let options = Options {
        engine: match args.engine {
            EngineArg::Brute => Engine::Brute,
            EngineArg::Dfs => Engine::Dfs,
        },
        brute_ceiling: args.ceiling,
        materialize: args.emit != Emit::None,
        by_comp: args.by_comp,
    };
    let result = enumerate::enumerate(&lattice, options)?;

    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{}", result.total)?;
    if let Some(by_comp) = &result.by_comp {
        if args.csv {
            write!(stdout, "{}", nio::comp_csv(by_comp))?;
        } else {
            writeln!(stdout, "d\tcount")?;
            for (d, c) in by_comp.iter().enumerate() {
                writeln!(stdout, "{d}\t{c}")?;
            }
        }
    }
    drop(stdout);

    let systems = result.systems.unwrap_or_default();
    let text = match args.emit {
        Emit::None => return Ok(()),
        Emit::Hex => {
            let entries: Vec<CatalogueEntry> = systems
                .iter()
                .map(|&members| CatalogueEntry {
                    members,
                    comp: args
                        .by_comp
                        .then(|| comp_of(&lattice, members))
                        .flatten(),
                })
                .collect();
            nio::write_catalogue(&lattice, &entries)
        }
        Emit::Json => systems
            .iter()
            .map(|&s| nio::pairs_to_json(&lattice, s) + "\n")
            .collect(),
    };
    write_output(args.out.as_deref(), &text)
}

fn comp_of(lattice: &Arc<Lattice>, members: PairSet) -> Option<usize> {
    let t = TransferSystem::new(Arc::clone(lattice), members).ok()?;
    symmetry::comp_index(&t).ok().map(|c| c.d)
}

fn cmd_decompose(args: InputArgs) -> Result<(), Failure> {
    let t = load_system(&args)?;
    let l = Arc::clone(t.lattice());
    let name = |v: usize| l.name(v, args.symbolic);
    let class = symmetry::comp_index(&t)?;
    let g0 = l.index_of(&class.g_zero)?;
    let top = l.top();
    let mut out = String::new();
    out.push_str(&format!("group {}\n", l.spec()));
    out.push_str(&format!("G0 {}\n", name(g0)));
    out.push_str(&format!("d {}\n", class.d));
    let core: Vec<String> = t
        .edges()
        .filter(|&(a, _)| l.leq(g0, a))
        .map(|(a, b)| format!("{} -> {}", name(a), name(b)))
        .collect();
    out.push_str(&format!("D0 [{}]\n", core.join(", ")));
    let facets: Vec<String> = (0..l.spec().rank())
        .filter(|&i| l.subgroup(g0).exponents()[i] > 0)
        .map(|i| format!("B_{} = [1, {}]", l.spec().factors()[i].prime, name(top - l.atom(i))))
        .collect();
    out.push_str(&format!("facets [{}]\n", facets.join(", ")));
    let holds = symmetry::support_check(&t)?;
    out.push_str(&format!("support {}\n", if holds { "holds" } else { "fails" }));
    if d_arrow_missing(&t, g0) {
        out.push_str("warning: arrow G0 -> G missing\n");
    }
    write_output(args.out.as_deref(), &out)?;
    if holds {
        Ok(())
    } else {
        Err(Failure::Check("support property fails".into()))
    }
}

fn d_arrow_missing(t: &TransferSystem, g0: usize) -> bool {
    let top = t.lattice().top();
    g0 != top && !t.contains(g0, top)
}

fn cmd_verify(group: GroupSpec) -> Result<(), Failure> {
    let lattice = Lattice::new(group)?;
    let involution = symmetry::verify_involution(&lattice)?;
    let systems = enumerate::all_systems(&lattice);
    let support = symmetry::support_failures(&lattice, &systems)?;
    println!("systems {}", involution.systems);
    println!("by_comp {:?}", involution.by_comp);
    match &involution.counterexample {
        None => println!("involution ok"),
        Some(c) => println!(
            "involution fails at {}: {:?}",
            nio::to_hex(&lattice, c.system),
            c.failure
        ),
    }
    if support.is_empty() {
        println!("support ok");
    } else {
        println!(
            "support fails at {} systems, first {}",
            support.len(),
            nio::to_hex(&lattice, support[0])
        );
    }
    if involution.passed() && support.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check("verification failed".into()))
    }
}

fn read_input(path: &Path) -> io::Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path)
            .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    }
}

/// Raw arrow set from JSON, hex or a catalogue entry.
fn load(args: &InputArgs) -> Result<(Arc<Lattice>, PairSet), Failure> {
    let text = read_input(&args.input)?;
    let given = args
        .group
        .clone()
        .map(Lattice::new)
        .transpose()?
        .map(Arc::new);
    if text.trim_start().starts_with(CATALOGUE_MAGIC) {
        let cat = nio::read_catalogue(&text)?;
        if given.as_ref().is_some_and(|g| **g != *cat.lattice) {
            return Err(Error::LatticeMismatch.into());
        }
        let entry = cat.entries.get(args.entry).ok_or_else(|| {
            Error::Parse(format!(
                "catalogue has {} entries, no entry {}",
                cat.entries.len(),
                args.entry
            ))
        })?;
        return Ok((cat.lattice, entry.members));
    }
    Ok(nio::parse_members(&text, given.as_ref())?)
}

fn load_system(args: &InputArgs) -> Result<TransferSystem, Failure> {
    let (lattice, members) = load(args)?;
    Ok(TransferSystem::new(lattice, members)?)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
