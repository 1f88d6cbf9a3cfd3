//! Experiment configuration files.
//!
//! Same line grammar as the core parameter files (`key = value`, `#`
//! comments). A file names its subcommand with `command = <name>` and may
//! start with `format = experiment/1`. Relative paths are resolved against
//! the directory holding the config file.
//!
//! ```text
//! format      = experiment/1
//! command     = enaqt-sweep
//! network     = dimer.net
//! sink        = 1
//! gamma_steps = 25
//! output      = dimer_sweep.csv
//! ```
//!
//! Keys each subcommand accepts, with defaults, are listed by
//! [`documented_keys`] and by `qanalog <subcommand> --help`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use qanalog_core::format::parse_entries;
use sha2::{Digest, Sha256};

pub const CONFIG_FORMAT: &str = "experiment/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Command {
    EnaqtSweep,
    Walk,
    BhSpectrum,
    BhScan,
    Validate,
}

impl Command {
    pub const ALL: [Command; 5] =
        [Command::EnaqtSweep, Command::Walk, Command::BhSpectrum, Command::BhScan, Command::Validate];

    pub fn name(self) -> &'static str {
        match self {
            Command::EnaqtSweep => "enaqt-sweep",
            Command::Walk => "walk",
            Command::BhSpectrum => "bh-spectrum",
            Command::BhScan => "bh-scan",
            Command::Validate => "validate",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// A configuration problem. `line` is `None` for command-line flags and for
/// missing keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Num(Bound),
    Int(u64),
    Bool,
    Word(&'static [&'static str]),
    Text,
    /// Input file; must exist.
    File,
    /// Output file; excluded from the config hash.
    Output,
    /// Comma-separated numbers.
    List(Bound),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Bound {
    NonNeg,
    Positive,
}

impl Bound {
    fn admits(self, x: f64) -> bool {
        x.is_finite()
            && match self {
                Bound::NonNeg => x >= 0.0,
                Bound::Positive => x > 0.0,
            }
    }

    fn describe(self) -> &'static str {
        match self {
            Bound::NonNeg => "a finite number >= 0",
            Bound::Positive => "a finite number > 0",
        }
    }
}

struct KeySpec {
    key: &'static str,
    kind: Kind,
    default: Option<&'static str>,
    doc: &'static str,
}

const fn key(key: &'static str, kind: Kind, default: Option<&'static str>, doc: &'static str) -> KeySpec {
    KeySpec { key, kind, default, doc }
}

const COMMON: &[KeySpec] = &[
    key("output", Kind::Output, None, "output file; stdout when absent"),
    key("seed", Kind::Int(0), None, "RNG seed, required by stochastic runs"),
];

const ENAQT: &[KeySpec] = &[
    key("network", Kind::File, None, "site network file"),
    key("source", Kind::Int(0), Some("0"), "site initially excited"),
    key("sink", Kind::Int(0), None, "site coupled to the sink"),
    key("trap_rate", Kind::Num(Bound::Positive), Some("1"), "sink transfer rate"),
    key("recombination_rate", Kind::Num(Bound::NonNeg), Some("0"), "loss rate on every site"),
    key("gamma_min", Kind::Num(Bound::Positive), Some("0.001"), "smallest dephasing rate"),
    key("gamma_max", Kind::Num(Bound::Positive), Some("1000"), "largest dephasing rate"),
    key("gamma_steps", Kind::Int(2), Some("13"), "log-spaced grid points"),
    key("horizon", Kind::Num(Bound::Positive), None, "time limit; default 1000 / mean coupling"),
    key("disorder_sigma", Kind::Num(Bound::NonNeg), Some("0"), "static on-site disorder (needs seed)"),
    key("tol", Kind::Num(Bound::Positive), Some("1e-9"), "integrator and convergence tolerance"),
];

const WALK: &[KeySpec] = &[
    key("network", Kind::File, None, "site network file (or geometry)"),
    key("geometry", Kind::File, None, "waveguide geometry file (or network)"),
    key("input", Kind::Int(0), Some("0"), "initially excited site or guide"),
    key("time", Kind::Num(Bound::NonNeg), None, "evolution time (or length)"),
    key("length", Kind::Num(Bound::NonNeg), None, "propagation length in m, converted by t = n z / c"),
    key("refractive_index", Kind::Num(Bound::Positive), Some("1.5"), "index used with length"),
    key("dephasing_sigma", Kind::Num(Bound::NonNeg), Some("0"), "per-segment phase spread (needs seed)"),
    key("segments", Kind::Int(1), Some("100"), "segments of the random-phase ensemble"),
    key("shots", Kind::Int(1), Some("1000"), "ensemble size"),
];

const LATTICE: &[&str] = &["chain", "plaquette"];

const BH_SPECTRUM: &[KeySpec] = &[
    key("sites", Kind::Int(1), None, "lattice sites L"),
    key("bosons", Kind::Int(0), None, "particle number N"),
    key("hopping", Kind::Num(Bound::NonNeg), None, "hopping J"),
    key("interaction", Kind::Num(Bound::NonNeg), None, "on-site interaction U"),
    key("lattice", Kind::Word(LATTICE), Some("chain"), "chain or plaquette"),
    key("rows", Kind::Int(1), Some("2"), "plaquette rows"),
    key("delta", Kind::Num(Bound::NonNeg), Some("0.05"), "relative modulation depth, at most 0.1"),
    key("nu_min", Kind::Num(Bound::NonNeg), None, "lowest drive frequency"),
    key("nu_max", Kind::Num(Bound::NonNeg), None, "highest drive frequency"),
    key("nu_steps", Kind::Int(2), Some("101"), "linearly spaced grid points"),
    key("t_drive", Kind::Num(Bound::Positive), None, "drive duration"),
    key("tol", Kind::Num(Bound::Positive), Some("1e-9"), "integrator tolerance"),
];

const BH_SCAN: &[KeySpec] = &[
    key("sites", Kind::Int(1), None, "lattice sites L"),
    key("bosons", Kind::Int(1), None, "particle number N"),
    key("interaction", Kind::Num(Bound::Positive), Some("1"), "on-site interaction U"),
    key("lattice", Kind::Word(LATTICE), Some("chain"), "chain or plaquette"),
    key("rows", Kind::Int(1), Some("2"), "plaquette rows"),
    key("j_ratios", Kind::List(Bound::NonNeg), None, "ascending J/U values"),
];

const VALIDATE: &[KeySpec] = &[
    key("network_a", Kind::File, None, "source-form network"),
    key("network_b", Kind::File, None, "target-form network"),
    key("mapping", Kind::File, None, "mapping record taking b onto a"),
    key("tol", Kind::Num(Bound::NonNeg), Some("1e-12"), "isomorphism tolerance"),
    key("role", Kind::Word(&["simulation", "emulation"]), Some("simulation"), "experiment role"),
    key("reference_network", Kind::File, None, "fuller target model for an external check"),
    key("approximation_tol", Kind::Num(Bound::NonNeg), Some("0.01"), "external check tolerance"),
    key("states", Kind::Int(1), Some("3"), "lowest eigenstates used by the external check"),
    key("hardness_proof", Kind::Bool, Some("false"), "speedup question 1"),
    key("efficient_classical_known", Kind::Bool, Some("false"), "speedup question 2"),
    key("scalable_accuracy", Kind::Bool, Some("false"), "speedup question 3"),
    key("source", Kind::Text, None, "narrative: system manipulated"),
    key("target", Kind::Text, None, "narrative: system of interest"),
    key("notes", Kind::Text, None, "narrative: free text"),
];

fn specs(command: Command) -> &'static [KeySpec] {
    match command {
        Command::EnaqtSweep => ENAQT,
        Command::Walk => WALK,
        Command::BhSpectrum => BH_SPECTRUM,
        Command::BhScan => BH_SCAN,
        Command::Validate => VALIDATE,
    }
}

fn find_spec(command: Command, key: &str) -> Option<&'static KeySpec> {
    specs(command).iter().chain(COMMON).find(|s| s.key == key)
}

/// `(key, default, description)` for every key of `command`.
pub fn documented_keys(command: Command) -> Vec<(&'static str, Option<&'static str>, &'static str)> {
    specs(command).iter().chain(COMMON).map(|s| (s.key, s.default, s.doc)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Bool(bool),
    Word(String),
    Text(String),
    File { path: PathBuf, sha256: String },
    List(Vec<f64>),
}

impl Value {
    /// Form used in the config hash and metadata: numbers in shortest
    /// round-trip notation, files by content hash.
    pub fn canonical(&self) -> String {
        match self {
            Value::Num(x) => format!("{x:?}"),
            Value::Int(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Word(w) | Value::Text(w) => w.clone(),
            Value::File { sha256, .. } => format!("sha256:{sha256}"),
            Value::List(xs) => xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(","),
        }
    }
}

/// A validated experiment with every documented default filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    values: BTreeMap<&'static str, Value>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        match self.values.get(key) {
            Some(Value::Num(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn int(&self, key: &str) -> Option<u64> {
        match self.values.get(key) {
            Some(Value::Int(n)) => Some(*n),
            _ => None,
        }
    }

    pub fn usize(&self, key: &str) -> Option<usize> {
        self.int(key).map(|n| n as usize)
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(self.values.get(key), Some(Value::Bool(true)))
    }

    pub fn word(&self, key: &str) -> Option<&str> {
        match self.values.get(key) {
            Some(Value::Word(w)) | Some(Value::Text(w)) => Some(w),
            _ => None,
        }
    }

    pub fn file(&self, key: &str) -> Option<&Path> {
        match self.values.get(key) {
            Some(Value::File { path, .. }) => Some(path),
            _ => None,
        }
    }

    pub fn list(&self, key: &str) -> Option<&[f64]> {
        match self.values.get(key) {
            Some(Value::List(xs)) => Some(xs),
            _ => None,
        }
    }

    /// Canonical `key=value` lines, sorted, without the output path.
    pub fn canonical(&self) -> Vec<(String, String)> {
        let mut out = vec![("command".to_string(), self.command.name().to_string())];
        if let Some(seed) = self.seed {
            out.push(("seed".to_string(), seed.to_string()));
        }
        for (k, v) in &self.values {
            out.push((k.to_string(), v.canonical()));
        }
        out.sort();
        out
    }

    /// SHA-256 of the canonical form.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.canonical() {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// One raw `key = value` pair and where it came from.
#[derive(Clone, Debug)]
pub struct RawEntry {
    pub key: String,
    pub value: String,
    pub line: Option<usize>,
}

/// Parses a config file. `base_dir` resolves relative paths.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let (entries, syntax) = parse_entries(text);
    let mut errors: Vec<ConfigError> = syntax
        .into_iter()
        .map(|e| match e {
            qanalog_core::Error::Parse { line, message } => ConfigError { line: Some(line), message },
            other => ConfigError { line: None, message: other.to_string() },
        })
        .collect();
    let mut raw = Vec::new();
    let mut command = None;
    for e in entries {
        match e.key.as_str() {
            "format" => {
                if e.value != CONFIG_FORMAT {
                    errors.push(ConfigError {
                        line: Some(e.line),
                        message: format!("unsupported format `{}`, expected `{CONFIG_FORMAT}`", e.value),
                    });
                }
            }
            "command" => match Command::from_name(&e.value) {
                Some(c) if command.is_none() => command = Some(c),
                Some(_) => {
                    errors.push(ConfigError { line: Some(e.line), message: "`command` given twice".into() })
                }
                None => errors.push(ConfigError {
                    line: Some(e.line),
                    message: format!(
                        "unknown command `{}` (expected one of {})",
                        e.value,
                        Command::ALL.map(Command::name).join(", ")
                    ),
                }),
            },
            _ => raw.push(RawEntry { key: e.key, value: e.value, line: Some(e.line) }),
        }
    }
    let Some(command) = command else {
        errors.push(ConfigError { line: None, message: "missing required key `command`".into() });
        return Err(errors);
    };
    match build(command, &raw, base_dir) {
        Ok(cfg) if errors.is_empty() => Ok(cfg),
        Ok(_) => Err(errors),
        Err(more) => {
            errors.extend(more);
            errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
            Err(errors)
        }
    }
}

/// Validates raw entries for `command`, collecting every problem.
pub fn build(
    command: Command,
    raw: &[RawEntry],
    base_dir: &Path,
) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let mut values: BTreeMap<&'static str, Value> = BTreeMap::new();
    let mut lines: BTreeMap<&'static str, Option<usize>> = BTreeMap::new();
    let mut output = None;
    let mut seed = None;

    for e in raw {
        let err = |message: String| ConfigError { line: e.line, message };
        let Some(spec) = find_spec(command, &e.key) else {
            errors.push(err(format!("unknown key `{}` for command {}", e.key, command.name())));
            continue;
        };
        if lines.contains_key(spec.key) {
            errors.push(err(format!("key `{}` given twice", e.key)));
            continue;
        }
        lines.insert(spec.key, e.line);
        match parse_value(spec, &e.value, base_dir) {
            Ok(Value::Text(path)) if spec.kind == Kind::Output => output = Some(resolve(base_dir, &path)),
            Ok(Value::Int(n)) if spec.key == "seed" => seed = Some(n),
            Ok(v) => {
                values.insert(spec.key, v);
            }
            Err(message) => errors.push(err(format!("`{}`: {message}", e.key))),
        }
    }

    for spec in specs(command) {
        if lines.contains_key(spec.key) {
            continue;
        }
        if let Some(default) = spec.default {
            let v = parse_value(spec, default, base_dir).expect("documented defaults are valid");
            values.insert(spec.key, v);
        }
    }

    let cfg = ExperimentConfig { command, values, output, seed };
    let line_of = |k: &str| lines.get(k).copied().flatten();
    let mut fail = |line: Option<usize>, message: String| errors.push(ConfigError { line, message });
    let missing = |k: &str| cfg.get(k).is_none();
    let require = |k: &'static str, fail: &mut dyn FnMut(Option<usize>, String)| {
        if missing(k) && !lines.contains_key(k) {
            fail(None, format!("missing required key `{k}`"));
        }
    };
    let stochastic_needs_seed = |key: &str, fail: &mut dyn FnMut(Option<usize>, String)| {
        if cfg.num(key).is_some_and(|x| x > 0.0) && cfg.seed.is_none() {
            fail(line_of(key), format!("`seed` is required when `{key}` > 0"));
        }
    };

    match command {
        Command::EnaqtSweep => {
            for k in ["network", "sink"] {
                require(k, &mut fail);
            }
            if let (Some(a), Some(b)) = (cfg.num("gamma_min"), cfg.num("gamma_max")) {
                if b <= a {
                    fail(
                        line_of("gamma_max").or(line_of("gamma_min")),
                        "grid must ascend: gamma_max <= gamma_min".into(),
                    );
                }
            }
            stochastic_needs_seed("disorder_sigma", &mut fail);
        }
        Command::Walk => {
            exactly_one(&lines, ["network", "geometry"], &mut fail);
            exactly_one(&lines, ["time", "length"], &mut fail);
            stochastic_needs_seed("dephasing_sigma", &mut fail);
        }
        Command::BhSpectrum => {
            for k in ["sites", "bosons", "hopping", "interaction", "nu_min", "nu_max", "t_drive"] {
                require(k, &mut fail);
            }
            if let (Some(a), Some(b)) = (cfg.num("nu_min"), cfg.num("nu_max")) {
                if b <= a {
                    fail(
                        line_of("nu_max").or(line_of("nu_min")),
                        "grid must ascend: nu_max <= nu_min".into(),
                    );
                }
            }
            if cfg.num("delta").is_some_and(|d| d > 0.1) {
                fail(line_of("delta"), "`delta`: must be at most 0.1".into());
            }
            check_plaquette(&cfg, &lines, &mut fail);
        }
        Command::BhScan => {
            for k in ["sites", "bosons", "j_ratios"] {
                require(k, &mut fail);
            }
            if let Some(js) = cfg.list("j_ratios") {
                if js.windows(2).any(|w| w[1] <= w[0]) {
                    fail(
                        line_of("j_ratios"),
                        "grid must ascend: `j_ratios` is not strictly increasing".into(),
                    );
                }
            }
            check_plaquette(&cfg, &lines, &mut fail);
        }
        Command::Validate => {
            for k in ["network_a", "network_b", "mapping"] {
                require(k, &mut fail);
            }
        }
    }

    if errors.is_empty() {
        Ok(cfg)
    } else {
        errors.sort_by_key(|e| e.line.unwrap_or(usize::MAX));
        Err(errors)
    }
}

fn exactly_one(
    lines: &BTreeMap<&'static str, Option<usize>>,
    keys: [&str; 2],
    fail: &mut dyn FnMut(Option<usize>, String),
) {
    let given: Vec<&str> = keys.iter().copied().filter(|k| lines.contains_key(k)).collect();
    match given.len() {
        1 => {}
        0 => fail(None, format!("one of `{}` or `{}` is required", keys[0], keys[1])),
        _ => fail(
            lines.get(keys[1]).copied().flatten(),
            format!("`{}` and `{}` are mutually exclusive", keys[0], keys[1]),
        ),
    }
}

fn check_plaquette(
    cfg: &ExperimentConfig,
    lines: &BTreeMap<&'static str, Option<usize>>,
    fail: &mut dyn FnMut(Option<usize>, String),
) {
    if cfg.word("lattice") == Some("plaquette") {
        if let (Some(l), Some(r)) = (cfg.usize("sites"), cfg.usize("rows")) {
            if l % r != 0 {
                fail(
                    lines.get("rows").copied().flatten().or(lines.get("sites").copied().flatten()),
                    format!("plaquette needs `sites` ({l}) divisible by `rows` ({r})"),
                );
            }
        }
    }
}

fn resolve(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn parse_value(spec: &KeySpec, text: &str, base: &Path) -> Result<Value, String> {
    let num = |s: &str, bound: Bound| -> Result<f64, String> {
        let x: f64 = s.trim().parse().map_err(|_| format!("`{}` is not a number", s.trim()))?;
        if bound.admits(x) {
            Ok(x)
        } else {
            Err(format!("expected {}, got {x}", bound.describe()))
        }
    };
    match spec.kind {
        Kind::Num(bound) => num(text, bound).map(Value::Num),
        Kind::Int(min) => {
            let n: u64 = text.parse().map_err(|_| format!("`{text}` is not a non-negative integer"))?;
            if n < min {
                return Err(format!("must be at least {min}, got {n}"));
            }
            Ok(Value::Int(n))
        }
        Kind::Bool => match text {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(format!("expected `true` or `false`, got `{text}`")),
        },
        Kind::Word(choices) => {
            if choices.contains(&text) {
                Ok(Value::Word(text.to_string()))
            } else {
                Err(format!("expected one of {}, got `{text}`", choices.join(", ")))
            }
        }
        Kind::Text | Kind::Output => Ok(Value::Text(text.to_string())),
        Kind::File => {
            let path = resolve(base, text);
            match std::fs::read(&path) {
                Ok(bytes) => {
                    let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
                    Ok(Value::File { path, sha256 })
                }
                Err(e) => Err(format!("cannot read {}: {e}", path.display())),
            }
        }
        Kind::List(bound) => {
            let xs = text.split(',').map(|s| num(s, bound)).collect::<Result<Vec<_>, _>>()?;
            Ok(Value::List(xs))
        }
    }
}
