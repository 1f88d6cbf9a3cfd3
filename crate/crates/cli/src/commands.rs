//! Subcommand execution. Everything is computed in memory; nothing touches
//! the output location until [`crate::output`] writes the finished result.

use std::path::Path;

use qanalog_core::bose_hubbard::{enumerate_basis, modulation_absorption, scan_j_ratio, BHParams, Lattice};
use qanalog_core::format::{parse_geometry, parse_mapping, parse_network};
use qanalog_core::hamiltonians::{
    apply_static_disorder, build_tight_binding, waveguide_hamiltonian, Hamiltonian,
};
use qanalog_core::open_system::{default_horizon, goldilocks_sweep, log_grid, TransportSpec};
use qanalog_core::quantum_walk::{dephased_walk, evolve_unitary, length_to_time, DephasingEnsembleSpec};
use qanalog_core::validation::{
    approximation_bound, build_report, check_isomorphism, classify_speedup, lowest_eigenstates, Narrative,
    Role, SpeedupAnswers, ValidationReport,
};
use qanalog_core::Error;

use crate::config::{Command, ExperimentConfig};
use crate::error::{in_file, CliError};

/// Result of one run before serialization.
#[derive(Clone, Debug, PartialEq)]
pub enum Body {
    Table { columns: Vec<&'static str>, rows: Vec<Vec<String>> },
    Report(Box<ValidationReport>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub body: Body,
    pub warnings: Vec<String>,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::EnaqtSweep => enaqt_sweep(cfg),
        Command::Walk => walk(cfg),
        Command::BhSpectrum => bh_spectrum(cfg),
        Command::BhScan => bh_scan(cfg),
        Command::Validate => validate(cfg),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn network_hamiltonian(path: &Path) -> Result<Hamiltonian, CliError> {
    let net = parse_network(&read(path)?).map_err(|e| in_file(path, e))?;
    Ok(build_tight_binding(&net)?)
}

fn geometry_hamiltonian(path: &Path) -> Result<Hamiltonian, CliError> {
    let geom = parse_geometry(&read(path)?).map_err(|e| in_file(path, e))?;
    Ok(waveguide_hamiltonian(&geom)?)
}

/// Shortest representation that parses back to the same value.
pub fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

fn required<T>(v: Option<T>, key: &str) -> T {
    v.unwrap_or_else(|| panic!("validated config lacks `{key}`"))
}

fn enaqt_sweep(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut h = network_hamiltonian(required(cfg.file("network"), "network"))?;
    let sigma = required(cfg.num("disorder_sigma"), "disorder_sigma");
    if sigma > 0.0 {
        h = apply_static_disorder(&h, sigma, required(cfg.seed, "seed"))?;
    }
    let n = h.dim();
    let spec = TransportSpec::uniform(
        n,
        required(cfg.usize("source"), "source"),
        required(cfg.usize("sink"), "sink"),
        required(cfg.num("trap_rate"), "trap_rate"),
        required(cfg.num("recombination_rate"), "recombination_rate"),
        0.0,
    );
    let horizon = match cfg.num("horizon") {
        Some(t) => t,
        None => default_horizon(&h).ok_or_else(|| Error::InvalidParameter {
            name: "horizon",
            reason: "network has no couplings; set `horizon` explicitly".into(),
        })?,
    };
    let grid = log_grid(
        required(cfg.num("gamma_min"), "gamma_min"),
        required(cfg.num("gamma_max"), "gamma_max"),
        required(cfg.usize("gamma_steps"), "gamma_steps"),
    )?;
    let curve = goldilocks_sweep(&h, &spec, &grid, horizon, required(cfg.num("tol"), "tol"))?;
    let mut warnings = Vec::new();
    let stalled = curve.converged.iter().filter(|c| !**c).count();
    if stalled > 0 {
        warnings.push(format!("{stalled} grid point(s) did not converge within horizon {horizon}"));
    }
    let rows = curve
        .gamma_grid
        .iter()
        .zip(&curve.efficiencies)
        .zip(&curve.converged)
        .map(|((g, e), c)| vec![fmt_num(*g), fmt_num(*e), c.to_string()])
        .collect();
    Ok(Outcome { body: Body::Table { columns: vec!["gamma", "eta", "converged"], rows }, warnings })
}

fn walk(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let h = match (cfg.file("network"), cfg.file("geometry")) {
        (Some(p), _) => network_hamiltonian(p)?,
        (None, Some(p)) => geometry_hamiltonian(p)?,
        (None, None) => unreachable!("validated config names a Hamiltonian"),
    };
    let t = match cfg.num("time") {
        Some(t) => t,
        None => length_to_time(
            required(cfg.num("length"), "length"),
            required(cfg.num("refractive_index"), "refractive_index"),
        )?,
    };
    let input = required(cfg.usize("input"), "input");
    let sigma = required(cfg.num("dephasing_sigma"), "dephasing_sigma");
    let populations = if sigma > 0.0 {
        let spec = DephasingEnsembleSpec {
            n_segments: required(cfg.usize("segments"), "segments"),
            phase_sigma: sigma,
            shots: required(cfg.usize("shots"), "shots"),
            seed: required(cfg.seed, "seed"),
        };
        dephased_walk(&h, input, t, &spec)?
    } else {
        evolve_unitary(&h, input, t)?.populations()
    };
    let rows = populations.iter().enumerate().map(|(m, p)| vec![m.to_string(), fmt_num(*p)]).collect();
    Ok(Outcome { body: Body::Table { columns: vec!["site", "population"], rows }, warnings: Vec::new() })
}

fn lattice(cfg: &ExperimentConfig) -> Result<Lattice, CliError> {
    let sites = required(cfg.usize("sites"), "sites");
    Ok(match cfg.word("lattice") {
        Some("plaquette") => {
            let rows = required(cfg.usize("rows"), "rows");
            Lattice::plaquette(rows, sites / rows)?
        }
        _ => Lattice::chain(sites)?,
    })
}

fn bh_spectrum(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let lattice = lattice(cfg)?;
    let basis = enumerate_basis(lattice.n_sites(), required(cfg.usize("bosons"), "bosons"))?;
    let params = BHParams::new(
        required(cfg.num("hopping"), "hopping"),
        required(cfg.num("interaction"), "interaction"),
        lattice,
    )?;
    let (lo, hi) = (required(cfg.num("nu_min"), "nu_min"), required(cfg.num("nu_max"), "nu_max"));
    let steps = required(cfg.usize("nu_steps"), "nu_steps");
    let grid: Vec<f64> = (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect();
    let spectrum = modulation_absorption(
        &params,
        &basis,
        required(cfg.num("delta"), "delta"),
        &grid,
        required(cfg.num("t_drive"), "t_drive"),
        required(cfg.num("tol"), "tol"),
    )?;
    let rows = spectrum
        .nu_grid
        .iter()
        .zip(&spectrum.absorbed_energy)
        .map(|(nu, e)| vec![fmt_num(*nu), fmt_num(*e)])
        .collect();
    Ok(Outcome {
        body: Body::Table { columns: vec!["nu", "absorbed_energy"], rows },
        warnings: spectrum.warnings,
    })
}

fn bh_scan(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let lattice = lattice(cfg)?;
    let points = scan_j_ratio(
        &lattice,
        required(cfg.usize("bosons"), "bosons"),
        required(cfg.num("interaction"), "interaction"),
        required(cfg.list("j_ratios"), "j_ratios"),
    )?;
    let mut warnings = Vec::new();
    let rows = points
        .iter()
        .map(|p| {
            if p.gap.is_nan() {
                warnings.push(format!("no drive-coupled excitation at J/U = {}", p.j_ratio));
            }
            vec![fmt_num(p.j_ratio), fmt_num(p.gap), fmt_num(p.condensate_fraction)]
        })
        .collect();
    Ok(Outcome {
        body: Body::Table { columns: vec!["j_ratio", "gap", "condensate_fraction"], rows },
        warnings,
    })
}

fn validate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let h_a = network_hamiltonian(required(cfg.file("network_a"), "network_a"))?;
    let h_b = network_hamiltonian(required(cfg.file("network_b"), "network_b"))?;
    let mapping_path = required(cfg.file("mapping"), "mapping");
    let rec = parse_mapping(&read(mapping_path)?).map_err(|e| in_file(mapping_path, e))?;
    let iso = check_isomorphism(&h_a, &h_b, &rec, required(cfg.num("tol"), "tol"))?;

    let mut external = Vec::new();
    if let Some(path) = cfg.file("reference_network") {
        let reference = network_hamiltonian(path)?;
        let k = required(cfg.usize("states"), "states").min(h_a.dim());
        let states = lowest_eigenstates(&h_a, k)?;
        let tol = required(cfg.num("approximation_tol"), "approximation_tol");
        external.push(approximation_bound(&reference, &h_a, &states, tol)?);
    }
    let role = match cfg.word("role") {
        Some("emulation") => Role::Emulation,
        _ => Role::Simulation,
    };
    let speedup = classify_speedup(SpeedupAnswers {
        hardness_proof: cfg.flag("hardness_proof"),
        efficient_classical_known: cfg.flag("efficient_classical_known"),
        scalable_accuracy: cfg.flag("scalable_accuracy"),
    });
    let narrative = Narrative {
        source: cfg.word("source").unwrap_or_default().to_string(),
        target: cfg.word("target").unwrap_or_default().to_string(),
        notes: cfg.word("notes").unwrap_or_default().to_string(),
    };
    let report = build_report(role, vec![iso], external, speedup, narrative)?;
    Ok(Outcome { body: Body::Report(Box::new(report)), warnings: Vec::new() })
}
