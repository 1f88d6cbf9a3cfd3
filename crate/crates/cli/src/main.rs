use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qanalog_cli::commands;
use qanalog_cli::config::{self, Command, ExperimentConfig, RawEntry};
use qanalog_cli::output;
use qanalog_cli::CliError;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  parse error (command line, config file or input file)
  3  numerical failure (stiffness, non-convergence, trace drift)
  4  invariant violation (invalid model, state or report)
  5  I/O error

Config files use `key = value` lines; keys are the long flag names with
`_` in place of `-`, plus `command = <subcommand>`.";

#[derive(Parser)]
#[command(name = "qanalog", version, about = "Analogue quantum simulation toolkit", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

macro_rules! flag_args {
    ($name:ident { $( $(#[$meta:meta])* $field:ident ),* $(,)? }) => {
        #[derive(Args)]
        struct $name {
            $( $(#[$meta])* #[arg(long)] $field: Option<String>, )*
            /// RNG seed (required by stochastic runs)
            #[arg(long)]
            seed: Option<String>,
            /// Output file; stdout when absent
            #[arg(long, short)]
            output: Option<PathBuf>,
        }

        impl $name {
            fn raw(&self) -> Vec<RawEntry> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$field {
                        out.push(RawEntry { key: stringify!($field).to_string(), value: v.clone(), line: None });
                    }
                )*
                if let Some(v) = &self.seed {
                    out.push(RawEntry { key: "seed".into(), value: v.clone(), line: None });
                }
                if let Some(v) = &self.output {
                    out.push(RawEntry { key: "output".into(), value: v.display().to_string(), line: None });
                }
                out
            }
        }
    };
}

flag_args!(EnaqtArgs {
    /// Site network file
    network,
    /// Initially excited site [default: 0]
    source,
    /// Site coupled to the sink
    sink,
    /// Sink transfer rate Γ [default: 1]
    trap_rate,
    /// Loss rate κ on every site [default: 0]
    recombination_rate,
    /// Smallest dephasing rate [default: 0.001]
    gamma_min,
    /// Largest dephasing rate [default: 1000]
    gamma_max,
    /// Log-spaced grid points [default: 13]
    gamma_steps,
    /// Time limit [default: 1000 / mean coupling]
    horizon,
    /// Static on-site disorder, needs --seed [default: 0]
    disorder_sigma,
    /// Tolerance [default: 1e-9]
    tol,
});

flag_args!(WalkArgs {
    /// Site network file
    network,
    /// Waveguide geometry file
    geometry,
    /// Initially excited site or guide [default: 0]
    input,
    /// Evolution time
    time,
    /// Propagation length in m, converted by t = n z / c
    length,
    /// Refractive index used with --length [default: 1.5]
    refractive_index,
    /// Per-segment random phase spread, needs --seed [default: 0]
    dephasing_sigma,
    /// Random-phase segments [default: 100]
    segments,
    /// Ensemble size [default: 1000]
    shots,
});

flag_args!(BhSpectrumArgs {
    /// Lattice sites L
    #[arg(short = 'L')]
    sites,
    /// Particle number N
    #[arg(short = 'N')]
    bosons,
    /// Hopping J
    #[arg(short = 'J')]
    hopping,
    /// Interaction U
    #[arg(short = 'U')]
    interaction,
    /// chain or plaquette [default: chain]
    lattice,
    /// Plaquette rows [default: 2]
    rows,
    /// Relative modulation depth, at most 0.1 [default: 0.05]
    delta,
    /// Lowest drive frequency
    nu_min,
    /// Highest drive frequency
    nu_max,
    /// Grid points [default: 101]
    nu_steps,
    /// Drive duration
    t_drive,
    /// Tolerance [default: 1e-9]
    tol,
});

flag_args!(BhScanArgs {
    /// Lattice sites L
    #[arg(short = 'L')]
    sites,
    /// Particle number N
    #[arg(short = 'N')]
    bosons,
    /// Interaction U [default: 1]
    #[arg(short = 'U')]
    interaction,
    /// chain or plaquette [default: chain]
    lattice,
    /// Plaquette rows [default: 2]
    rows,
    /// Ascending comma-separated J/U values
    j_ratios,
});

flag_args!(ValidateArgs {
    /// Source-form network file
    network_a,
    /// Target-form network file
    network_b,
    /// Mapping record taking network_b onto network_a
    mapping,
    /// Isomorphism tolerance [default: 1e-12]
    tol,
    /// simulation or emulation [default: simulation]
    role,
    /// Fuller target model for an external approximation check
    reference_network,
    /// Tolerance of the external check [default: 0.01]
    approximation_tol,
    /// Lowest eigenstates used by the external check [default: 3]
    states,
    /// true if the problem is proven classically hard [default: false]
    hardness_proof,
    /// true if an efficient classical algorithm is known [default: false]
    efficient_classical_known,
    /// true if the simulator scales without losing accuracy [default: false]
    scalable_accuracy,
    /// Narrative: system manipulated
    source,
    /// Narrative: system of interest
    target,
    /// Narrative: free text
    notes,
});

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a config file
    Run {
        config: PathBuf,
        /// Overrides the config's output path
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Transport efficiency against dephasing rate (CSV: gamma,eta,converged)
    EnaqtSweep(EnaqtArgs),
    /// Single-excitation walk populations (CSV: site,population)
    Walk(WalkArgs),
    /// Bose–Hubbard modulation spectroscopy (CSV: nu,absorbed_energy)
    BhSpectrum(BhSpectrumArgs),
    /// Bose–Hubbard gap and condensate fraction against J/U (CSV: j_ratio,gap,condensate_fraction)
    BhScan(BhScanArgs),
    /// Source/target correspondence report (JSON)
    Validate(ValidateArgs),
}

fn load(cmd: Cmd) -> Result<ExperimentConfig, CliError> {
    let cwd = Path::new(".");
    let (command, raw) = match cmd {
        Cmd::Run { config: path, output } => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let base = path.parent().unwrap_or(cwd);
            let mut cfg = config::parse_config(&text, base).map_err(CliError::Config)?;
            if output.is_some() {
                cfg.output = output;
            }
            return Ok(cfg);
        }
        Cmd::EnaqtSweep(a) => (Command::EnaqtSweep, a.raw()),
        Cmd::Walk(a) => (Command::Walk, a.raw()),
        Cmd::BhSpectrum(a) => (Command::BhSpectrum, a.raw()),
        Cmd::BhScan(a) => (Command::BhScan, a.raw()),
        Cmd::Validate(a) => (Command::Validate, a.raw()),
    };
    config::build(command, &raw, cwd).map_err(CliError::Config)
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let cfg = load(cli.command)?;
    let outcome = commands::run(&cfg)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    output::emit(&cfg, &outcome)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
