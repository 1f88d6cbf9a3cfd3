//! Plain-text parameter files.
//!
//! All files share one line grammar:
//!
//! ```text
//! file    := { line '\n' }
//! line    := blank | comment | entry [ comment ]
//! comment := '#' { any character }
//! entry   := key '=' value
//! key     := [a-z0-9_]+
//! value   := any text without '#', surrounding whitespace trimmed, non-empty
//! ```
//!
//! Lists inside a value are comma separated. Each file starts with a
//! `format = <kind>/<version>` entry.
//!
//! **Network** (`format = network/1`):
//!
//! ```text
//! n_sites  = 2
//! site     = 0, BChl1, 0.0     # index, label, on-site energy
//! site     = 1, BChl2, 5.0
//! coupling = 0, 1, 1.0         # m, n, V_mn (each unordered pair at most once)
//! ```
//!
//! **Geometry** (`format = geometry/1`): `n_guides`, `coupling_scale` (C0),
//! `decay_length` (d0), `guide = index, label, beta` for every guide and
//! `separation = m, n, distance` for every pair (`inf` decouples a pair).
//!
//! **Mapping** (`format = mapping/1`): `unit_scale = s` and
//! `bijection = π(0), π(1), ...`.
//!
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`, so load → save → load is bit-exact.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::hamiltonians::{MappingRecord, SiteNetwork, WaveguideGeometry};
use crate::{Error, Result};

pub const NETWORK_FORMAT: &str = "network/1";
pub const GEOMETRY_FORMAT: &str = "geometry/1";
pub const MAPPING_FORMAT: &str = "mapping/1";

/// One `key = value` line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Splits text into entries, collecting every syntax error rather than
/// stopping at the first.
pub fn parse_entries(text: &str) -> (Vec<Entry>, Vec<Error>) {
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(Error::Parse { line, message: format!("expected `key = value`, got `{content}`") });
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
            errors.push(Error::Parse { line, message: format!("invalid key `{key}`") });
            continue;
        }
        if value.is_empty() {
            errors.push(Error::Parse { line, message: format!("key `{key}` has no value") });
            continue;
        }
        entries.push(Entry { key: key.to_string(), value: value.to_string(), line });
    }
    (entries, errors)
}

fn parse_strict(text: &str) -> Result<Vec<Entry>> {
    let (entries, mut errors) = parse_entries(text);
    if errors.is_empty() {
        Ok(entries)
    } else {
        Err(errors.swap_remove(0))
    }
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn parse_f64(e: &Entry, field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| perr(e.line, format!("`{}`: `{}` is not a number", e.key, field.trim())))
}

pub fn parse_usize(e: &Entry, field: &str) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|_| perr(e.line, format!("`{}`: `{}` is not a non-negative integer", e.key, field.trim())))
}

fn fields(e: &Entry, n: usize) -> Result<Vec<&str>> {
    let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(perr(
            e.line,
            format!("`{}` expects {n} comma-separated fields, got {}", e.key, parts.len()),
        ));
    }
    Ok(parts)
}

fn check_format(entries: &[Entry], expected: &str) -> Result<()> {
    match entries.iter().find(|e| e.key == "format") {
        None => Err(perr(1, format!("missing `format = {expected}` entry"))),
        Some(e) if e.value != expected => {
            Err(perr(e.line, format!("expected format `{expected}`, found `{}`", e.value)))
        }
        Some(_) => Ok(()),
    }
}

fn single<'a>(entries: &'a [Entry], key: &str) -> Result<&'a Entry> {
    let mut it = entries.iter().filter(|e| e.key == key);
    let first = it.next().ok_or_else(|| perr(1, format!("missing `{key}` entry")))?;
    if let Some(dup) = it.next() {
        return Err(perr(dup.line, format!("`{key}` given more than once")));
    }
    Ok(first)
}

fn check_label(e: &Entry, label: &str) -> Result<String> {
    if label.is_empty() {
        return Err(perr(e.line, "empty label"));
    }
    Ok(label.to_string())
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

/// Indexed `index, label, value` rows, each index exactly once.
fn indexed_rows(entries: &[Entry], key: &str, n: usize) -> Result<(Vec<String>, Vec<f64>)> {
    let mut labels: Vec<Option<String>> = vec![None; n];
    let mut values = vec![0.0; n];
    for e in entries.iter().filter(|e| e.key == key) {
        let f = fields(e, 3)?;
        let idx = parse_usize(e, f[0])?;
        if idx >= n {
            return Err(perr(e.line, format!("`{key}` index {idx} outside 0..{n}")));
        }
        if labels[idx].is_some() {
            return Err(perr(e.line, format!("`{key}` index {idx} given twice")));
        }
        labels[idx] = Some(check_label(e, f[1])?);
        values[idx] = parse_f64(e, f[2])?;
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| perr(1, format!("no `{key}` entry for index {i}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok((labels, values))
}

fn reject_unknown(entries: &[Entry], known: &[&str]) -> Result<()> {
    match entries.iter().find(|e| !known.contains(&e.key.as_str())) {
        Some(e) => Err(perr(e.line, format!("unknown key `{}`", e.key))),
        None => Ok(()),
    }
}

fn line_error(line: usize) -> impl Fn(Error) -> Error {
    move |err| match err {
        Error::Parse { .. } => err,
        other => perr(line, other.to_string()),
    }
}

pub fn parse_network(text: &str) -> Result<SiteNetwork> {
    let entries = parse_strict(text)?;
    reject_unknown(&entries, &["format", "n_sites", "site", "coupling"])?;
    check_format(&entries, NETWORK_FORMAT)?;
    let n_entry = single(&entries, "n_sites")?;
    let n = parse_usize(n_entry, &n_entry.value)?;
    if n == 0 {
        return Err(perr(n_entry.line, "n_sites must be positive"));
    }
    let (labels, on_site) = indexed_rows(&entries, "site", n)?;
    let mut triples = Vec::new();
    let mut last_line = n_entry.line;
    for e in entries.iter().filter(|e| e.key == "coupling") {
        let f = fields(e, 3)?;
        triples.push((parse_usize(e, f[0])?, parse_usize(e, f[1])?, parse_f64(e, f[2])?));
        last_line = e.line;
        // Catch range and duplicate errors with the offending line number.
        SiteNetwork::from_triples(on_site.clone(), &triples, Some(labels.clone()))
            .map_err(line_error(e.line))?;
    }
    SiteNetwork::from_triples(on_site, &triples, Some(labels)).map_err(line_error(last_line))
}

pub fn write_network(net: &SiteNetwork) -> String {
    let mut s = String::new();
    writeln!(s, "format = {NETWORK_FORMAT}").unwrap();
    writeln!(s, "n_sites = {}", net.n_sites()).unwrap();
    for (i, (label, e)) in net.labels().iter().zip(net.on_site()).enumerate() {
        writeln!(s, "site = {i}, {label}, {}", fmt_num(*e)).unwrap();
    }
    for (a, b, v) in net.coupling_triples() {
        writeln!(s, "coupling = {a}, {b}, {}", fmt_num(v)).unwrap();
    }
    s
}

pub fn parse_geometry(text: &str) -> Result<WaveguideGeometry> {
    let entries = parse_strict(text)?;
    reject_unknown(
        &entries,
        &["format", "n_guides", "coupling_scale", "decay_length", "guide", "separation"],
    )?;
    check_format(&entries, GEOMETRY_FORMAT)?;
    let n_entry = single(&entries, "n_guides")?;
    let n = parse_usize(n_entry, &n_entry.value)?;
    if n == 0 {
        return Err(perr(n_entry.line, "n_guides must be positive"));
    }
    let c0_entry = single(&entries, "coupling_scale")?;
    let c0 = parse_f64(c0_entry, &c0_entry.value)?;
    let d0_entry = single(&entries, "decay_length")?;
    let d0 = parse_f64(d0_entry, &d0_entry.value)?;
    let (labels, betas) = indexed_rows(&entries, "guide", n)?;
    let mut sep = DMatrix::from_element(n, n, f64::NAN);
    for i in 0..n {
        sep[(i, i)] = 0.0;
    }
    for e in entries.iter().filter(|e| e.key == "separation") {
        let f = fields(e, 3)?;
        let (a, b) = (parse_usize(e, f[0])?, parse_usize(e, f[1])?);
        if a >= n || b >= n || a == b {
            return Err(perr(e.line, format!("invalid guide pair ({a}, {b})")));
        }
        if !sep[(a, b)].is_nan() {
            return Err(perr(e.line, format!("separation ({a}, {b}) given twice")));
        }
        let d = parse_f64(e, f[2])?;
        sep[(a, b)] = d;
        sep[(b, a)] = d;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if sep[(i, j)].is_nan() {
                return Err(perr(1, format!("missing separation for guides ({i}, {j})")));
            }
        }
    }
    WaveguideGeometry::new(betas, sep, c0, d0, Some(labels)).map_err(line_error(n_entry.line))
}

pub fn write_geometry(g: &WaveguideGeometry) -> String {
    let mut s = String::new();
    writeln!(s, "format = {GEOMETRY_FORMAT}").unwrap();
    writeln!(s, "n_guides = {}", g.n_guides()).unwrap();
    writeln!(s, "coupling_scale = {}", fmt_num(g.coupling_scale())).unwrap();
    writeln!(s, "decay_length = {}", fmt_num(g.decay_length())).unwrap();
    for (i, (label, b)) in g.labels().iter().zip(g.prop_constants()).enumerate() {
        writeln!(s, "guide = {i}, {label}, {}", fmt_num(*b)).unwrap();
    }
    let n = g.n_guides();
    for i in 0..n {
        for j in (i + 1)..n {
            writeln!(s, "separation = {i}, {j}, {}", fmt_num(g.separations()[(i, j)])).unwrap();
        }
    }
    s
}

pub fn parse_mapping(text: &str) -> Result<MappingRecord> {
    let entries = parse_strict(text)?;
    reject_unknown(&entries, &["format", "unit_scale", "bijection"])?;
    check_format(&entries, MAPPING_FORMAT)?;
    let s_entry = single(&entries, "unit_scale")?;
    let scale = parse_f64(s_entry, &s_entry.value)?;
    let b_entry = single(&entries, "bijection")?;
    let perm = b_entry.value.split(',').map(|f| parse_usize(b_entry, f)).collect::<Result<Vec<_>>>()?;
    MappingRecord::new(perm, scale).map_err(line_error(b_entry.line))
}

pub fn write_mapping(rec: &MappingRecord) -> String {
    let perm: Vec<String> = rec.site_bijection().iter().map(|p| p.to_string()).collect();
    format!(
        "format = {MAPPING_FORMAT}\nunit_scale = {}\nbijection = {}\n",
        fmt_num(rec.unit_scale()),
        perm.join(", ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::build_tight_binding;
    use proptest::prelude::*;

    const DIMER: &str = "\
# detuned dimer
format = network/1
n_sites = 2
site = 0, donor, 0.0
site = 1, acceptor, 5.0   # detuned
coupling = 0, 1, 1.0
";

    #[test]
    fn parses_documented_example() {
        let net = parse_network(DIMER).unwrap();
        assert_eq!(net.labels(), ["donor", "acceptor"]);
        assert_eq!(net.on_site(), [0.0, 5.0]);
        assert_eq!(net.couplings()[(1, 0)], 1.0);
    }

    #[test]
    fn entries_keep_line_numbers_and_all_errors() {
        let (entries, errors) = parse_entries("a = 1\n\nbogus line\nB = 2\nc =\n");
        assert_eq!(entries, vec![Entry { key: "a".into(), value: "1".into(), line: 1 }]);
        let lines: Vec<usize> = errors
            .iter()
            .map(|e| match e {
                Error::Parse { line, .. } => *line,
                _ => 0,
            })
            .collect();
        assert_eq!(lines, vec![3, 4, 5]);
    }

    #[test]
    fn network_errors_name_lines() {
        let text = DIMER.replace("coupling = 0, 1, 1.0", "coupling = 0, 7, 1.0");
        match parse_network(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
        let text = DIMER.replace("site = 1, acceptor, 5.0", "site = 1, acceptor, five");
        assert!(matches!(parse_network(&text), Err(Error::Parse { line: 5, .. })));
        let text = format!("{DIMER}gamm = 1\n");
        assert!(matches!(parse_network(&text), Err(Error::Parse { line: 7, .. })));
        assert!(parse_network(&DIMER.replace("network/1", "network/2")).is_err());
        assert!(parse_network(&DIMER.replace("site = 0, donor, 0.0\n", "")).is_err());
    }

    #[test]
    fn seven_site_file_entries_land_in_matrix() {
        let text = include_str!("../../../fixtures/fmo7_example.net");
        let net = parse_network(text).unwrap();
        let h = build_tight_binding(&net).unwrap();
        assert_eq!(h.dim(), 7);
        let (entries, _) = parse_entries(text);
        for e in &entries {
            let f: Vec<&str> = e.value.split(',').map(str::trim).collect();
            match e.key.as_str() {
                "site" => {
                    let i: usize = f[0].parse().unwrap();
                    assert_eq!(h.matrix()[(i, i)].re, f[2].parse::<f64>().unwrap());
                }
                "coupling" => {
                    let (a, b): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
                    let v: f64 = f[2].parse().unwrap();
                    assert_eq!(h.matrix()[(a, b)].re, v);
                    assert_eq!(h.matrix()[(b, a)].re, v);
                }
                _ => {}
            }
        }
        assert!(crate::linalg::hermiticity_defect(h.matrix()) <= 1e-12);
    }

    #[test]
    fn geometry_and_mapping_round_trip() {
        let text = "format = geometry/1\nn_guides = 3\ncoupling_scale = 0.5\ndecay_length = 7.25\n\
                    guide = 0, a, 0.1\nguide = 1, b, 0\nguide = 2, c, -0.3\n\
                    separation = 0, 1, 10\nseparation = 1, 2, 12.5\nseparation = 0, 2, inf\n";
        let g = parse_geometry(text).unwrap();
        assert_eq!(g.coupling(0, 2), 0.0);
        assert_eq!(parse_geometry(&write_geometry(&g)).unwrap(), g);
        let bad = text.replace("separation = 0, 2, inf\n", "");
        assert!(parse_geometry(&bad).is_err());
        let bad = text.replace("12.5", "0");
        assert!(parse_geometry(&bad).is_err());

        let rec = parse_mapping("format = mapping/1\nunit_scale = 1e-3\nbijection = 2, 0, 1\n").unwrap();
        assert_eq!(rec.site_bijection(), [2, 0, 1]);
        assert_eq!(parse_mapping(&write_mapping(&rec)).unwrap(), rec);
        assert!(parse_mapping("format = mapping/1\nunit_scale = 1\nbijection = 0, 0\n").is_err());
    }

    proptest! {
        #[test]
        fn network_reserialization_is_bit_exact(
            eps in proptest::collection::vec(-1e4..1e4f64, 1..6),
            vs in proptest::collection::vec(-1e3..1e3f64, 15),
        ) {
            let n = eps.len();
            let mut triples = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    triples.push((i, j, vs[k]));
                    k += 1;
                }
            }
            let net = SiteNetwork::from_triples(eps, &triples, None).unwrap();
            let text = write_network(&net);
            let back = parse_network(&text).unwrap();
            prop_assert_eq!(&back, &net);
            prop_assert_eq!(write_network(&back), text);
        }
    }
}
