use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dirac_fock::cli::{apply_ops, parse_op, run_scenario};
use dirac_fock::config::{bundled, ScenarioConfig, Suite, BUNDLED};
use dirac_fock::fock::{multiparticle_inner, FockSpace, FockVector, MAX_MODES};
use dirac_fock::Error;

/// Verify the Dirac-spinor field identities, evolve the Dirac equation and
/// check the conserved pairing and the fermionic Fock space.
#[derive(Debug, Parser)]
#[command(name = "dirac-fock", version)]
struct Cli {
    /// Print the bundled scenario names and exit.
    #[arg(long)]
    list_scenarios: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario: a TOML file path or the name of a bundled scenario.
    Run {
        scenario: String,
        /// Comma-separated subset of the scenario's suites.
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
        /// Output directory; defaults to the scenario's `output` or out/<name>.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Apply ladder operators to a Fock vector dump ("[i j ...] re im" lines).
    Fock {
        /// Dump file, or "-" for standard input.
        input: String,
        /// Operations applied left to right: create:i, annihilate:i, c+i, c-i.
        #[arg(long = "op")]
        ops: Vec<String>,
        /// Number of single-particle modes.
        #[arg(long, default_value_t = MAX_MODES)]
        modes: usize,
        /// Also print the pairing of the result with this dump.
        #[arg(long)]
        pair: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list_scenarios {
        for s in BUNDLED {
            let description = ScenarioConfig::from_toml(s.text).map(|c| c.description).unwrap_or_default();
            println!("{:<24} {description}", s.name);
        }
        return ExitCode::SUCCESS;
    }
    let code = match cli.command {
        Some(Command::Run { scenario, suite, out, seed }) => run(&scenario, &suite, out, seed),
        Some(Command::Fock { input, ops, modes, pair }) => fock(&input, &ops, modes, pair),
        None => {
            eprintln!("nothing to do; see --help");
            2
        }
    };
    ExitCode::from(code as u8)
}

fn load(scenario: &str) -> Result<ScenarioConfig, String> {
    let path = PathBuf::from(scenario);
    let text = if path.is_file() {
        fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?
    } else if let Some(b) = bundled(scenario) {
        b.text.to_string()
    } else {
        return Err(format!("{scenario:?} is neither a file nor a bundled scenario (try --list-scenarios)"));
    };
    ScenarioConfig::from_toml(&text).map_err(|e| e.to_string())
}

fn run(scenario: &str, suite: &[String], out: Option<PathBuf>, seed: Option<u64>) -> i32 {
    let cfg = match load(scenario) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let suites = match suite.iter().map(|s| s.parse::<Suite>()).collect::<Result<Vec<_>, Error>>() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let selected = (!suites.is_empty()).then_some(suites.as_slice());
    let report = run_scenario(&cfg, selected, seed);
    let dir = out
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
    print!("{}", report.to_text());
    if let Err(e) = report.write_to(&dir) {
        eprintln!("error: writing {}: {e}", dir.display());
        return 2;
    }
    report.exit_code()
}

fn read_dump(input: &str) -> Result<FockVector, String> {
    let text = if input == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| e.to_string())?;
        s
    } else {
        fs::read_to_string(input).map_err(|e| format!("{input}: {e}"))?
    };
    FockVector::from_text(&text).map_err(|e| e.to_string())
}

fn fock(input: &str, ops: &[String], modes: usize, pair: Option<PathBuf>) -> i32 {
    let result = (|| -> Result<(FockVector, Option<FockVector>), String> {
        let space = FockSpace::new(modes).map_err(|e| e.to_string())?;
        let v = read_dump(input)?;
        let ops = ops.iter().map(|o| parse_op(o)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
        let w = apply_ops(&space, &v, &ops).map_err(|e| e.to_string())?;
        let other = match pair {
            Some(p) => Some(read_dump(&p.to_string_lossy())?),
            None => None,
        };
        Ok((w, other))
    })();
    match result {
        Ok((w, other)) => {
            print!("{}", w.to_text());
            if let Some(o) = other {
                let z = multiparticle_inner(&o, &w);
                println!("# pairing {} {}", z.re, z.im);
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
