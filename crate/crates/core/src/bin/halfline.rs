use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use halfline::cli::{self, Command, Overrides, RunContext, EXIT_CONFIG};
use halfline::config::{parse_atom_family, parse_config, EvolutionMethodChoice};
use halfline::hardy::Side;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Spectral,
    Factorized,
    Cn,
    All,
}

/// Spectral transforms, resonances and time evolution on the half-line.
#[derive(Debug, Parser)]
#[command(name = "halfline", version)]
struct Args {
    /// Run configuration (`section.key = value` lines).
    config: PathBuf,
    /// jost | resonances | transform | evolve | hardy | density | roundtrip | asymmetry | verify
    command: String,
    /// Output directory; overrides $HS_OUTPUT_DIR and `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Evolution method for `evolve`.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Comma-separated times for `evolve` and `asymmetry`.
    #[arg(long = "t", value_delimiter = ',', allow_negative_numbers = true)]
    times: Option<Vec<f64>>,
    /// Atom family for `hardy`, as `halfplane:count` (e.g. `minus:5`).
    #[arg(long, value_parser = parse_atoms)]
    atoms: Option<(Side, usize)>,
}

fn parse_atoms(s: &str) -> Result<(Side, usize), String> {
    parse_atom_family(s)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    ExitCode::from(run(args) as u8)
}

fn run(args: Args) -> i32 {
    let command: Command = match args.command.parse() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}\n{}", cli::usage());
            return EXIT_CONFIG;
        }
    };
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
    };
    let config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return EXIT_CONFIG;
        }
    };
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return EXIT_CONFIG;
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("thread pool is configured once");
    }
    let overrides = Overrides {
        evolution_method: args.method.map(|m| match m {
            MethodArg::Spectral => EvolutionMethodChoice::Spectral,
            MethodArg::Factorized => EvolutionMethodChoice::Factorized,
            MethodArg::Cn => EvolutionMethodChoice::CrankNicolson,
            MethodArg::All => EvolutionMethodChoice::All,
        }),
        times: args.times,
        atoms: args.atoms,
    };
    let base = args.config.parent().map(PathBuf::from).unwrap_or_default();
    let ctx = RunContext::resolve(&config, args.out, base);
    let result = cli::run(command, &config, &overrides, &ctx);
    match &result {
        Ok(summary) => {
            for r in &summary.reports {
                let status = if r.passed { "ok" } else { "FAILED" };
                println!("{}: {status} ({:.1} s)", r.name, r.runtime);
                for t in r.failures() {
                    println!("  {} = {:e} violates {:?} {:e}", t.metric, r.metrics.get(&t.metric).copied().unwrap_or(f64::NAN), t.bound, t.value);
                }
            }
            println!("wrote {} files to {}", summary.files.len(), ctx.out_dir.display());
        }
        Err(e) => eprintln!("error: {e}"),
    }
    cli::exit_code(&result)
}
