//! Tight-binding Hamiltonians for excitonic site networks and evanescently
//! coupled waveguide arrays.
//!
//! Both model families share the same single-excitation form: a real
//! diagonal of on-site energies (site energies for an excitonic network,
//! propagation constants for a waveguide array) plus symmetric real hopping
//! terms. [`SiteNetwork`] is the parameter record, [`Hamiltonian`] the
//! validated dense operator everything else consumes.

use std::ops::Add;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::linalg::{hermitian_eigenvalues, hermiticity_defect, matrix_fingerprint};
use crate::{CMatrix, Error, Result, C64};

/// Entrywise tolerance for the Hermiticity check on every constructed
/// Hamiltonian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// On-site energies, symmetric couplings and labels of a tight-binding
/// network.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteNetwork {
    on_site: Vec<f64>,
    couplings: DMatrix<f64>,
    labels: Vec<String>,
}

impl SiteNetwork {
    pub fn new(on_site: Vec<f64>, couplings: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let n = on_site.len();
        if n == 0 {
            return Err(Error::InvalidNetwork("network has no sites".into()));
        }
        if couplings.nrows() != n || couplings.ncols() != n {
            return Err(Error::InvalidNetwork(format!(
                "coupling matrix is {}x{} for {n} sites",
                couplings.nrows(),
                couplings.ncols()
            )));
        }
        if labels.len() != n {
            return Err(Error::InvalidNetwork(format!("{} labels for {n} sites", labels.len())));
        }
        if let Some(e) = on_site.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidNetwork(format!("non-finite on-site energy {e}")));
        }
        for i in 0..n {
            if couplings[(i, i)] != 0.0 {
                return Err(Error::InvalidNetwork(format!("self-coupling on site {i}")));
            }
            for j in (i + 1)..n {
                let (a, b) = (couplings[(i, j)], couplings[(j, i)]);
                if !a.is_finite() {
                    return Err(Error::InvalidNetwork(format!("non-finite coupling ({i}, {j})")));
                }
                if a != b {
                    return Err(Error::InvalidNetwork(format!(
                        "couplings ({i}, {j}) = {a} and ({j}, {i}) = {b} differ"
                    )));
                }
            }
        }
        Ok(SiteNetwork { on_site, couplings, labels })
    }

    /// Builds a network from coupling triples `(m, n, V_mn)`; each unordered
    /// pair may appear at most once.
    pub fn from_triples(
        on_site: Vec<f64>,
        triples: &[(usize, usize, f64)],
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let n = on_site.len();
        let mut couplings = DMatrix::zeros(n, n);
        let mut seen = DMatrix::from_element(n, n, false);
        for &(a, b, v) in triples {
            if a >= n || b >= n {
                return Err(Error::InvalidNetwork(format!(
                    "coupling ({a}, {b}) references a site outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::InvalidNetwork(format!("self-coupling on site {a}")));
            }
            if seen[(a, b)] {
                return Err(Error::InvalidNetwork(format!("coupling ({a}, {b}) given twice")));
            }
            seen[(a, b)] = true;
            seen[(b, a)] = true;
            couplings[(a, b)] = v;
            couplings[(b, a)] = v;
        }
        let labels = labels.unwrap_or_else(|| default_labels(n));
        SiteNetwork::new(on_site, couplings, labels)
    }

    /// Open chain with uniform on-site energy and nearest-neighbour hopping.
    pub fn chain(n: usize, energy: f64, hopping: f64) -> Result<Self> {
        let triples: Vec<_> = (1..n).map(|i| (i - 1, i, hopping)).collect();
        SiteNetwork::from_triples(vec![energy; n], &triples, None)
    }

    /// Closed ring with uniform on-site energy and nearest-neighbour hopping.
    pub fn ring(n: usize, energy: f64, hopping: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidNetwork("a ring needs at least three sites".into()));
        }
        let triples: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, hopping)).collect();
        SiteNetwork::from_triples(vec![energy; n], &triples, None)
    }

    pub fn n_sites(&self) -> usize {
        self.on_site.len()
    }

    pub fn on_site(&self) -> &[f64] {
        &self.on_site
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Non-zero couplings `(m, n, V)` with `m < n` in row-major order.
    pub fn coupling_triples(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_sites();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.couplings[(i, j)];
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Mean modulus of the non-zero couplings, or `None` for a network with
    /// no couplings.
    pub fn mean_coupling(&self) -> Option<f64> {
        let t = self.coupling_triples();
        if t.is_empty() {
            None
        } else {
            Some(t.iter().map(|(_, _, v)| v.abs()).sum::<f64>() / t.len() as f64)
        }
    }
}

impl Add for &SiteNetwork {
    type Output = Result<SiteNetwork>;

    /// Entrywise sum of two networks over the same sites; labels come from
    /// the left operand.
    fn add(self, rhs: &SiteNetwork) -> Result<SiteNetwork> {
        if self.n_sites() != rhs.n_sites() {
            return Err(Error::DimensionMismatch { expected: self.n_sites(), actual: rhs.n_sites() });
        }
        let on_site = self.on_site.iter().zip(&rhs.on_site).map(|(a, b)| a + b).collect();
        SiteNetwork::new(on_site, &self.couplings + &rhs.couplings, self.labels.clone())
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

/// Validated Hermitian operator on a labelled finite basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    matrix: CMatrix,
    labels: Vec<String>,
}

impl Hamiltonian {
    pub fn new(matrix: CMatrix, labels: Vec<String>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidParameter {
                name: "matrix",
                reason: format!("expected a non-empty square matrix, got {:?}", matrix.shape()),
            });
        }
        if labels.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), actual: labels.len() });
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::param("matrix", "contains non-finite entries"));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect, tolerance: HERMITIAN_TOL });
        }
        Ok(Hamiltonian { matrix, labels })
    }

    /// Wraps a real symmetric matrix with default labels.
    pub fn from_real(matrix: &DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        Hamiltonian::new(matrix.map(|x| C64::new(x, 0.0)), default_labels(n))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Hex SHA-256 of the matrix entries; identical matrices share it.
    pub fn fingerprint(&self) -> String {
        matrix_fingerprint(&self.matrix)
    }

    pub fn max_abs_diff(&self, other: &Hamiltonian) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: other.dim() });
        }
        Ok(self.matrix.iter().zip(other.matrix.iter()).fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }
}

impl Add for &Hamiltonian {
    type Output = Result<Hamiltonian>;

    fn add(self, rhs: &Hamiltonian) -> Result<Hamiltonian> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: rhs.dim() });
        }
        Hamiltonian::new(&self.matrix + &rhs.matrix, self.labels.clone())
    }
}

/// Tight-binding Hamiltonian: `H[m][m] = ε_m`, `H[m][n] = V_mn`.
pub fn build_tight_binding(net: &SiteNetwork) -> Result<Hamiltonian> {
    let n = net.n_sites();
    let matrix = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(net.on_site[i], 0.0)
        } else {
            C64::new(net.couplings[(i, j)], 0.0)
        }
    });
    Hamiltonian::new(matrix, net.labels.clone())
}

/// Waveguide array described by propagation constants and pairwise
/// separations, with evanescent coupling `C(d) = C0 · exp(-d / d0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveguideGeometry {
    prop_constants: Vec<f64>,
    separations: DMatrix<f64>,
    coupling_scale: f64,
    decay_length: f64,
    labels: Vec<String>,
}

impl WaveguideGeometry {
    /// `separations` must be symmetric with a zero diagonal and positive
    /// off-diagonal entries; `f64::INFINITY` marks a decoupled pair.
    pub fn new(
        prop_constants: Vec<f64>,
        separations: DMatrix<f64>,
        coupling_scale: f64,
        decay_length: f64,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let n = prop_constants.len();
        if n == 0 {
            return Err(Error::InvalidGeometry("no waveguides".into()));
        }
        if separations.shape() != (n, n) {
            return Err(Error::InvalidGeometry(format!(
                "separation matrix is {:?} for {n} guides",
                separations.shape()
            )));
        }
        if !(coupling_scale > 0.0 && coupling_scale.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "coupling scale must be positive, got {coupling_scale}"
            )));
        }
        if !(decay_length > 0.0 && decay_length.is_finite()) {
            return Err(Error::InvalidGeometry(format!("decay length must be positive, got {decay_length}")));
        }
        if prop_constants.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite propagation constant".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d = separations[(i, j)];
                if d != separations[(j, i)] {
                    return Err(Error::InvalidGeometry(format!("separation ({i}, {j}) is not symmetric")));
                }
                if d.is_nan() || d <= 0.0 {
                    return Err(Error::InvalidGeometry(format!(
                        "separation ({i}, {j}) = {d} must be positive"
                    )));
                }
            }
        }
        let labels = labels.unwrap_or_else(|| (0..n).map(|i| format!("w{i}")).collect());
        if labels.len() != n {
            return Err(Error::InvalidGeometry(format!("{} labels for {n} guides", labels.len())));
        }
        Ok(WaveguideGeometry { prop_constants, separations, coupling_scale, decay_length, labels })
    }

    /// Guides on a straight line at the given transverse positions.
    pub fn linear(
        prop_constants: Vec<f64>,
        positions: &[f64],
        coupling_scale: f64,
        decay_length: f64,
    ) -> Result<Self> {
        let n = positions.len();
        let separations = DMatrix::from_fn(n, n, |i, j| (positions[i] - positions[j]).abs());
        WaveguideGeometry::new(prop_constants, separations, coupling_scale, decay_length, None)
    }

    pub fn n_guides(&self) -> usize {
        self.prop_constants.len()
    }

    pub fn prop_constants(&self) -> &[f64] {
        &self.prop_constants
    }

    pub fn separations(&self) -> &DMatrix<f64> {
        &self.separations
    }

    pub fn coupling_scale(&self) -> f64 {
        self.coupling_scale
    }

    pub fn decay_length(&self) -> f64 {
        self.decay_length
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.coupling_scale * (-self.separations[(i, j)] / self.decay_length).exp()
        }
    }
}

/// Coupled-mode Hamiltonian `H[m][m] = β_m`, `H[m][n] = C0 · exp(-d_mn / d0)`.
pub fn waveguide_hamiltonian(geom: &WaveguideGeometry) -> Result<Hamiltonian> {
    let n = geom.n_guides();
    let matrix = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(geom.prop_constants[i], 0.0)
        } else {
            C64::new(geom.coupling(i, j), 0.0)
        }
    });
    Hamiltonian::new(matrix, geom.labels.clone())
}

/// Site relabeling plus energy-unit conversion relating two Hamiltonians.
#[derive(Clone, Debug, PartialEq)]
pub struct MappingRecord {
    site_bijection: Vec<usize>,
    unit_scale: f64,
}

impl MappingRecord {
    pub fn new(site_bijection: Vec<usize>, unit_scale: f64) -> Result<Self> {
        let n = site_bijection.len();
        let mut hit = vec![false; n];
        for &p in &site_bijection {
            if p >= n || hit[p] {
                return Err(Error::InvalidMapping(format!(
                    "{site_bijection:?} is not a permutation of 0..{n}"
                )));
            }
            hit[p] = true;
        }
        if !(unit_scale > 0.0 && unit_scale.is_finite()) {
            return Err(Error::InvalidMapping(format!(
                "unit scale must be positive and finite, got {unit_scale}"
            )));
        }
        Ok(MappingRecord { site_bijection, unit_scale })
    }

    pub fn identity(n: usize) -> Self {
        MappingRecord { site_bijection: (0..n).collect(), unit_scale: 1.0 }
    }

    pub fn site_bijection(&self) -> &[usize] {
        &self.site_bijection
    }

    pub fn unit_scale(&self) -> f64 {
        self.unit_scale
    }

    pub fn len(&self) -> usize {
        self.site_bijection.len()
    }

    pub fn is_empty(&self) -> bool {
        self.site_bijection.is_empty()
    }

    /// Record undoing `self`: inverse permutation and reciprocal scale.
    pub fn inverse(&self) -> MappingRecord {
        let mut inv = vec![0; self.len()];
        for (m, &p) in self.site_bijection.iter().enumerate() {
            inv[p] = m;
        }
        MappingRecord { site_bijection: inv, unit_scale: 1.0 / self.unit_scale }
    }
}

/// Relabels and rescales: `out[π(m)][π(n)] = s · H[m][n]`.
pub fn map_network(h: &Hamiltonian, rec: &MappingRecord) -> Result<Hamiltonian> {
    let n = h.dim();
    if rec.len() != n {
        return Err(Error::InvalidMapping(format!(
            "bijection has {} entries for a {n}-site Hamiltonian",
            rec.len()
        )));
    }
    let pi = &rec.site_bijection;
    let mut matrix = CMatrix::zeros(n, n);
    let mut labels = vec![String::new(); n];
    for m in 0..n {
        labels[pi[m]] = h.labels[m].clone();
        for k in 0..n {
            matrix[(pi[m], pi[k])] = h.matrix[(m, k)] * rec.unit_scale;
        }
    }
    Hamiltonian::new(matrix, labels)
}

/// Adds independent `Normal(0, sigma²)` offsets to the diagonal only.
pub fn apply_static_disorder(h: &Hamiltonian, sigma: f64, seed: u64) -> Result<Hamiltonian> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", format!("must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(h.clone());
    }
    let normal = Normal::new(0.0, sigma).expect("sigma validated above");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = h.matrix.clone();
    for i in 0..h.dim() {
        matrix[(i, i)].re += normal.sample(&mut rng);
    }
    Hamiltonian::new(matrix, h.labels.clone())
}

/// Eigenvalues after mapping with unit scale 1 coincide with the input's;
/// exposed for checks that want the multiset directly.
pub fn spectrum(h: &Hamiltonian) -> Vec<f64> {
    h.eigenvalues()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn single_site_network() {
        let net = SiteNetwork::from_triples(vec![3.0], &[], None).unwrap();
        let h = build_tight_binding(&net).unwrap();
        assert_eq!(h.dim(), 1);
        assert_eq!(h.matrix()[(0, 0)], c(3.0));
    }

    #[test]
    fn symmetric_coupler() {
        let net = SiteNetwork::from_triples(vec![0.0, 0.0], &[(0, 1, 1.0)], None).unwrap();
        let h = build_tight_binding(&net).unwrap();
        assert_eq!(h.matrix(), &CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]));
        assert_eq!(h.labels(), net.labels());
    }

    #[test]
    fn mismatched_network_is_rejected() {
        let err = SiteNetwork::new(vec![0.0; 3], DMatrix::zeros(2, 2), default_labels(3));
        assert!(matches!(err, Err(Error::InvalidNetwork(_))));
        let err = SiteNetwork::from_triples(vec![0.0; 2], &[(0, 2, 1.0)], None);
        assert!(matches!(err, Err(Error::InvalidNetwork(_))));
        let err = SiteNetwork::from_triples(vec![0.0; 2], &[(0, 1, 1.0), (1, 0, 2.0)], None);
        assert!(matches!(err, Err(Error::InvalidNetwork(_))));
        let mut asym = DMatrix::zeros(2, 2);
        asym[(0, 1)] = 1.0;
        assert!(SiteNetwork::new(vec![0.0; 2], asym, default_labels(2)).is_err());
    }

    #[test]
    fn non_hermitian_matrix_is_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0 + 1e-9), c(0.0)]);
        assert!(matches!(Hamiltonian::new(m, default_labels(2)), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn decoupled_guides() {
        let g = WaveguideGeometry::linear(vec![0.0, 0.0], &[0.0, 100.0], 1.0, 1.0).unwrap();
        let h = waveguide_hamiltonian(&g).unwrap();
        assert!(h.matrix()[(0, 1)].re <= (-100.0f64).exp());
        assert!(h.matrix()[(0, 1)].re < 1e-40);
    }

    #[test]
    fn coupling_at_one_decay_length() {
        let g = WaveguideGeometry::linear(vec![0.5, -0.5], &[0.0, 2.5], 1.0, 2.5).unwrap();
        let h = waveguide_hamiltonian(&g).unwrap();
        assert_relative_eq!(h.matrix()[(0, 1)].re, 0.36787944117144233, epsilon = 1e-15);
        assert_eq!(h.matrix()[(0, 0)], c(0.5));
        assert_eq!(h.matrix()[(1, 1)], c(-0.5));
    }

    #[test]
    fn equally_spaced_next_neighbour_coupling() {
        let c0 = 1.7;
        let g = WaveguideGeometry::linear(vec![0.0; 3], &[0.0, 1.3, 2.6], c0, 0.9).unwrap();
        let h = waveguide_hamiltonian(&g).unwrap();
        let c12 = h.matrix()[(0, 1)].re;
        let c13 = h.matrix()[(0, 2)].re;
        assert_relative_eq!(c13, c12 * c12 / c0, max_relative = 1e-14);
    }

    #[test]
    fn non_positive_separation_is_rejected() {
        let err = WaveguideGeometry::linear(vec![0.0; 2], &[1.0, 1.0], 1.0, 1.0);
        assert!(matches!(err, Err(Error::InvalidGeometry(_))));
        let err = WaveguideGeometry::linear(vec![0.0; 2], &[0.0, 1.0], 1.0, -1.0);
        assert!(matches!(err, Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn identity_mapping() {
        let net =
            SiteNetwork::from_triples(vec![0.3, -1.0, 2.0], &[(0, 1, 0.4), (1, 2, -0.2)], None).unwrap();
        let h = build_tight_binding(&net).unwrap();
        assert_eq!(map_network(&h, &MappingRecord::identity(3)).unwrap(), h);
    }

    #[test]
    fn swap_on_symmetric_coupler() {
        let h =
            build_tight_binding(&SiteNetwork::from_triples(vec![0.0, 0.0], &[(0, 1, 1.0)], None).unwrap())
                .unwrap();
        let out = map_network(&h, &MappingRecord::new(vec![1, 0], 1.0).unwrap()).unwrap();
        assert_eq!(out.matrix(), h.matrix());
    }

    #[test]
    fn scaled_mapping() {
        let h =
            build_tight_binding(&SiteNetwork::from_triples(vec![1.0, 0.0], &[(0, 1, 0.5)], None).unwrap())
                .unwrap();
        let out = map_network(&h, &MappingRecord::new(vec![0, 1], 2.0).unwrap()).unwrap();
        assert_eq!(out.matrix(), &CMatrix::from_row_slice(2, 2, &[c(2.0), c(1.0), c(1.0), c(0.0)]));
    }

    #[test]
    fn bad_records() {
        assert!(MappingRecord::new(vec![0, 0], 1.0).is_err());
        assert!(MappingRecord::new(vec![0, 2], 1.0).is_err());
        assert!(MappingRecord::new(vec![0, 1], 0.0).is_err());
        let h = Hamiltonian::from_real(&DMatrix::identity(3, 3)).unwrap();
        assert!(matches!(map_network(&h, &MappingRecord::identity(2)), Err(Error::InvalidMapping(_))));
    }

    #[test]
    fn zero_disorder_is_bitwise_identity() {
        let h = build_tight_binding(&SiteNetwork::chain(4, 0.25, 1.0).unwrap()).unwrap();
        assert_eq!(apply_static_disorder(&h, 0.0, 9).unwrap(), h);
    }

    #[test]
    fn disorder_is_seeded_and_diagonal() {
        let h = build_tight_binding(&SiteNetwork::chain(5, 0.0, 1.0).unwrap()).unwrap();
        let a = apply_static_disorder(&h, 0.7, 42).unwrap();
        let b = apply_static_disorder(&h, 0.7, 42).unwrap();
        let other = apply_static_disorder(&h, 0.7, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert_eq!(a.matrix()[(i, j)], h.matrix()[(i, j)]);
                }
            }
            assert_eq!(a.matrix()[(i, i)].im, 0.0);
        }
        assert!(apply_static_disorder(&h, -0.1, 0).is_err());
    }

    #[test]
    fn disorder_standard_deviation() {
        let h = Hamiltonian::from_real(&DMatrix::zeros(1, 1)).unwrap();
        let samples: Vec<f64> = (0..10_000u64)
            .map(|seed| apply_static_disorder(&h, 1.0, seed).unwrap().matrix()[(0, 0)].re)
            .collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
        assert!((var.sqrt() - 1.0).abs() < 0.05, "sample std {}", var.sqrt());
    }

    fn network_strategy(n: usize) -> impl Strategy<Value = SiteNetwork> {
        (proptest::collection::vec(-5.0..5.0f64, n), proptest::collection::vec(-2.0..2.0f64, n * (n - 1) / 2))
            .prop_map(move |(eps, vs)| {
                let mut triples = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        triples.push((i, j, vs[k]));
                        k += 1;
                    }
                }
                SiteNetwork::from_triples(eps, &triples, None).unwrap()
            })
    }

    fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..n).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn tight_binding_is_linear(a in network_strategy(4), b in network_strategy(4)) {
            let sum = (&a + &b).unwrap();
            let lhs = build_tight_binding(&sum).unwrap();
            let rhs = (&build_tight_binding(&a).unwrap() + &build_tight_binding(&b).unwrap()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() == 0.0);
        }

        #[test]
        fn mapping_round_trip(net in network_strategy(5), perm in permutation(5), scale in 0.1..10.0f64) {
            let h = build_tight_binding(&net).unwrap();
            let rec = MappingRecord::new(perm, scale).unwrap();
            let back = map_network(&map_network(&h, &rec).unwrap(), &rec.inverse()).unwrap();
            prop_assert!(back.max_abs_diff(&h).unwrap() <= 1e-14 * (1.0 + h.matrix().camax()));
            prop_assert_eq!(back.labels(), h.labels());
        }

        #[test]
        fn relabeling_preserves_spectrum(net in network_strategy(5), perm in permutation(5)) {
            let h = build_tight_binding(&net).unwrap();
            let mapped = map_network(&h, &MappingRecord::new(perm, 1.0).unwrap()).unwrap();
            for (a, b) in spectrum(&h).iter().zip(spectrum(&mapped)) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
