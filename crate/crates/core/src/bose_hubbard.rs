//! Exact diagonalization of the Bose–Hubbard model on small lattices.
//!
//! ```text
//! H = -J Σ_⟨j,k⟩ w_jk (b_j† b_k + b_k† b_j) + (U/2) Σ_j n_j (n_j - 1)
//! ```
//!
//! The hopping term carries its Hermitian conjugate explicitly. Edge weights
//! `w_jk` default to one; other values model longer-range or anisotropic
//! hopping. Work happens in the fixed-`N` sector spanned by a [`FockBasis`].
//!
//! Number-conserving states have `⟨b_i⟩ = 0`, so the superfluid order
//! parameter is replaced by the condensate fraction, the largest eigenvalue
//! of the one-body density matrix divided by `N`.
//!
//! Lattice-depth modulation is modelled as a modulation of the interaction,
//! `U(t) = U (1 + δ sin 2πνt)`, which couples the ground state only to
//! excitations with a non-zero matrix element of `Σ n_j (n_j - 1) / 2`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hamiltonians::Hamiltonian;
use crate::linalg::{symmetric_eigh, CsrMatrix};
use crate::ode::{self, Control, OdeError, OdeOptions};
use crate::{Error, Result, C64};

/// Default upper bound on the number of basis states.
pub const DEFAULT_BASIS_CAP: usize = 200_000;

/// Occupation-number basis for `n_bosons` bosons on `n_sites` sites, in
/// descending lexicographic order (`(N, 0, ..)` first).
#[derive(Clone, Debug)]
pub struct FockBasis {
    n_sites: usize,
    n_bosons: usize,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

/// `C(N + L - 1, N)`, the sector dimension.
pub fn basis_size(n_sites: usize, n_bosons: usize) -> u128 {
    if n_sites == 0 {
        return u128::from(n_bosons == 0);
    }
    let k = n_bosons.min(n_sites - 1) as u128;
    let top = (n_bosons + n_sites - 1) as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (top - i) / (i + 1);
    }
    c
}

pub fn enumerate_basis(n_sites: usize, n_bosons: usize) -> Result<FockBasis> {
    enumerate_basis_with_cap(n_sites, n_bosons, DEFAULT_BASIS_CAP)
}

pub fn enumerate_basis_with_cap(n_sites: usize, n_bosons: usize, cap: usize) -> Result<FockBasis> {
    if n_sites == 0 {
        return Err(Error::param("n_sites", "must be at least 1"));
    }
    if n_bosons > u8::MAX as usize {
        return Err(Error::param("n_bosons", format!("at most {} supported", u8::MAX)));
    }
    let size = basis_size(n_sites, n_bosons);
    if size > cap as u128 {
        return Err(Error::BasisTooLarge { size, cap });
    }
    let mut states = Vec::with_capacity(size as usize);
    let mut current = vec![0u8; n_sites];
    fill(&mut states, &mut current, 0, n_bosons);
    let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    Ok(FockBasis { n_sites, n_bosons, states, index })
}

fn fill(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, site: usize, remaining: usize) {
    if site + 1 == current.len() {
        current[site] = remaining as u8;
        out.push(current.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        current[site] = k as u8;
        fill(out, current, site + 1, remaining - k);
    }
}

impl FockBasis {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_bosons(&self) -> usize {
        self.n_bosons
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Vec<u8>] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &[u8] {
        &self.states[i]
    }

    pub fn index_of(&self, occupations: &[u8]) -> Option<usize> {
        self.index.get(occupations).copied()
    }

    pub fn label(&self, i: usize) -> String {
        let occ: Vec<String> = self.states[i].iter().map(|n| n.to_string()).collect();
        format!("|{}>", occ.join(","))
    }
}

/// Undirected hopping bond with relative amplitude `weight`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    n_sites: usize,
    edges: Vec<Edge>,
}

impl Lattice {
    pub fn new(n_sites: usize, edges: Vec<Edge>) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::param("lattice", "needs at least one site"));
        }
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            if e.a >= n_sites || e.b >= n_sites {
                return Err(Error::param("lattice", format!("edge ({}, {}) outside 0..{n_sites}", e.a, e.b)));
            }
            if e.a == e.b {
                return Err(Error::param("lattice", format!("self-loop on site {}", e.a)));
            }
            if !e.weight.is_finite() {
                return Err(Error::param("lattice", "non-finite edge weight"));
            }
            if !seen.insert((e.a.min(e.b), e.a.max(e.b))) {
                return Err(Error::param("lattice", format!("edge ({}, {}) listed twice", e.a, e.b)));
            }
        }
        Ok(Lattice { n_sites, edges })
    }

    /// Open chain.
    pub fn chain(n_sites: usize) -> Result<Self> {
        let edges = (1..n_sites).map(|i| Edge { a: i - 1, b: i, weight: 1.0 }).collect();
        Lattice::new(n_sites, edges)
    }

    /// Open `rows × cols` rectangle, sites numbered row-major.
    pub fn plaquette(rows: usize, cols: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let s = r * cols + c;
                if c + 1 < cols {
                    edges.push(Edge { a: s, b: s + 1, weight: 1.0 });
                }
                if r + 1 < rows {
                    edges.push(Edge { a: s, b: s + cols, weight: 1.0 });
                }
            }
        }
        Lattice::new(rows * cols, edges)
    }

    /// Adds a bond, e.g. a weak next-nearest-neighbour hop.
    pub fn with_edge(&self, a: usize, b: usize, weight: f64) -> Result<Self> {
        let mut edges = self.edges.clone();
        edges.push(Edge { a, b, weight });
        Lattice::new(self.n_sites, edges)
    }

    /// Relabels site `i` as `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, actual: perm.len() });
        }
        let edges =
            self.edges.iter().map(|e| Edge { a: perm[e.a], b: perm[e.b], weight: e.weight }).collect();
        Lattice::new(self.n_sites, edges)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Single-particle hopping matrix `-J w` on the lattice.
    pub fn single_particle(&self, hopping: f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_sites, self.n_sites);
        for e in &self.edges {
            m[(e.a, e.b)] -= hopping * e.weight;
            m[(e.b, e.a)] -= hopping * e.weight;
        }
        m
    }
}

/// Model parameters: hopping `J`, on-site interaction `U` and the lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BHParams {
    pub hopping: f64,
    pub interaction: f64,
    pub lattice: Lattice,
}

impl BHParams {
    pub fn new(hopping: f64, interaction: f64, lattice: Lattice) -> Result<Self> {
        if !(hopping >= 0.0 && hopping.is_finite()) {
            return Err(Error::param("hopping", format!("J must be >= 0, got {hopping}")));
        }
        if !(interaction >= 0.0 && interaction.is_finite()) {
            return Err(Error::param("interaction", format!("U must be >= 0, got {interaction}")));
        }
        Ok(BHParams { hopping, interaction, lattice })
    }

    /// `J / U`, defined when `U > 0`.
    pub fn j_ratio(&self) -> Option<f64> {
        (self.interaction > 0.0).then(|| self.hopping / self.interaction)
    }
}

/// Real symmetric operator on a Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    csr: CsrMatrix<f64>,
}

impl SparseOperator {
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Self {
        SparseOperator { csr: CsrMatrix::from_triplets(dim, dim, triplets) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let t: Vec<_> = diag.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        SparseOperator::from_triplets(diag.len(), &t)
    }

    pub fn dim(&self) -> usize {
        self.csr.nrows()
    }

    pub fn csr(&self) -> &CsrMatrix<f64> {
        &self.csr
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.csr.mul_vec(x)
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.csr.mul_vec_into(x, out)
    }

    /// `out = self · x` for a complex vector.
    pub fn apply_complex_into(&self, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (c, v) in self.csr.row(r) {
                acc += x[c] * v;
            }
            *o = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.csr.to_dense()
    }

    /// Dense complex Hamiltonian with Fock-state labels.
    pub fn to_hamiltonian(&self, basis: &FockBasis) -> Result<Hamiltonian> {
        if basis.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: basis.len() });
        }
        let labels = (0..basis.len()).map(|i| basis.label(i)).collect();
        Hamiltonian::new(self.to_dense().map(|x| C64::new(x, 0.0)), labels)
    }

    /// Maximum absolute row sum, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim()).map(|r| self.csr.row(r).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let d = self.to_dense();
        (&d - d.transpose()).amax()
    }

    pub fn expectation(&self, x: &[f64]) -> f64 {
        dot(x, &self.apply(x))
    }
}

fn check_basis(params: &BHParams, basis: &FockBasis) -> Result<()> {
    if params.lattice.n_sites() != basis.n_sites() {
        return Err(Error::DimensionMismatch { expected: params.lattice.n_sites(), actual: basis.n_sites() });
    }
    Ok(())
}

/// Sparse Bose–Hubbard Hamiltonian on `basis`.
pub fn build_bh(params: &BHParams, basis: &FockBasis) -> Result<SparseOperator> {
    check_basis(params, basis)?;
    let mut triplets = Vec::new();
    let mut target = vec![0u8; basis.n_sites()];
    for (col, state) in basis.states().iter().enumerate() {
        let onsite: f64 = state.iter().map(|&n| f64::from(n) * (f64::from(n) - 1.0)).sum();
        triplets.push((col, col, 0.5 * params.interaction * onsite));
        if params.hopping == 0.0 {
            continue;
        }
        for e in params.lattice.edges() {
            for (from, to) in [(e.a, e.b), (e.b, e.a)] {
                if state[from] == 0 {
                    continue;
                }
                // b_to† b_from |.., n_from, .., n_to, ..⟩
                let amp = (f64::from(state[from]) * (f64::from(state[to]) + 1.0)).sqrt();
                target.copy_from_slice(state);
                target[from] -= 1;
                target[to] += 1;
                let row = basis.index_of(&target).expect("hopping conserves particle number");
                triplets.push((row, col, -params.hopping * e.weight * amp));
            }
        }
    }
    Ok(SparseOperator::from_triplets(basis.len(), &triplets))
}

/// Diagonal drive operator `Σ_j n_j (n_j - 1) / 2`.
pub fn interaction_operator(basis: &FockBasis) -> SparseOperator {
    let diag: Vec<f64> = basis
        .states()
        .iter()
        .map(|s| 0.5 * s.iter().map(|&n| f64::from(n) * (f64::from(n) - 1.0)).sum::<f64>())
        .collect();
    SparseOperator::from_diagonal(&diag)
}

/// Site occupation operator `n_site`.
pub fn occupation_operator(basis: &FockBasis, site: usize) -> SparseOperator {
    let diag: Vec<f64> = basis.states().iter().map(|s| f64::from(s[site])).collect();
    SparseOperator::from_diagonal(&diag)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Gram-Schmidt against `locked` and `basis`, repeated while a pass cancels
/// most of the remaining norm. Returns the final norm.
fn reorthogonalize(w: &mut [f64], locked: &[Vec<f64>], basis: &[Vec<f64>]) -> f64 {
    let mut prev = norm(w);
    for _ in 0..5 {
        for q in locked.iter().chain(basis) {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
        let n = norm(w);
        if n > 0.5 * prev {
            return n;
        }
        prev = n;
    }
    prev
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct LowSpectrumOptions {
    /// Dimensions up to this size are diagonalized densely.
    pub dense_cutoff: usize,
    /// Largest Krylov space per Lanczos run.
    pub max_krylov: usize,
    /// Explicit restarts allowed per eigenpair.
    pub max_restarts: usize,
    /// Residual target relative to `‖H‖`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for LowSpectrumOptions {
    fn default() -> Self {
        LowSpectrumOptions { dense_cutoff: 400, max_krylov: 160, max_restarts: 40, tol: 1e-10, seed: 0x5eed }
    }
}

/// Residual bound every returned pair satisfies: `‖Hv - λv‖ ≤ 1e-9 ‖H‖`.
pub const RESIDUAL_BOUND: f64 = 1e-9;

/// The `k` lowest eigenpairs in ascending order.
pub fn low_spectrum(op: &SparseOperator, k: usize) -> Result<Vec<EigenPair>> {
    low_spectrum_with(op, k, &LowSpectrumOptions::default())
}

pub fn low_spectrum_with(op: &SparseOperator, k: usize, opts: &LowSpectrumOptions) -> Result<Vec<EigenPair>> {
    let dim = op.dim();
    if k == 0 || k > dim {
        return Err(Error::param("k", format!("need 1 <= k <= {dim}, got {k}")));
    }
    if dim <= opts.dense_cutoff {
        let (values, vectors) = symmetric_eigh(&op.to_dense());
        return Ok((0..k)
            .map(|j| EigenPair { value: values[j], vector: vectors.column(j).iter().copied().collect() })
            .collect());
    }

    let scale = op.norm_bound().max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut pairs = Vec::with_capacity(k);
    for _ in 0..k {
        let mut start: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut best: Option<(f64, Vec<f64>, f64)> = None;
        let mut done = false;
        for _ in 0..=opts.max_restarts {
            let (theta, x, residual) =
                lanczos_lowest(op, &start, &locked, opts.max_krylov, opts.tol * scale)?;
            let improved = best.as_ref().is_none_or(|b| residual < b.2);
            if improved {
                best = Some((theta, x.clone(), residual));
            }
            if residual <= opts.tol * scale {
                done = true;
                break;
            }
            start = x;
        }
        let (theta, x, residual) = best.expect("at least one Lanczos run");
        if !done && residual > RESIDUAL_BOUND * scale {
            return Err(Error::NoConvergence {
                iterations: opts.max_krylov * (opts.max_restarts + 1),
                residual,
            });
        }
        locked.push(x.clone());
        pairs.push(EigenPair { value: theta, vector: x });
    }
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(pairs)
}

/// One Krylov run restricted to the orthogonal complement of `locked`.
/// Returns the lowest Ritz pair and its true residual norm.
fn lanczos_lowest(
    op: &SparseOperator,
    start: &[f64],
    locked: &[Vec<f64>],
    max_krylov: usize,
    target: f64,
) -> Result<(f64, Vec<f64>, f64)> {
    let run = KrylovRun::new(op, start, locked, max_krylov, |ritz: &RitzView<'_>| {
        ritz.residual_estimate(0) <= 0.1 * target
    })?;
    let (theta, x) = run.ritz_pair(0);
    let mut r = op.apply(&x);
    axpy(-theta, &x, &mut r);
    Ok((theta, x, norm(&r)))
}

/// Ritz data of a Krylov projection at one iteration.
struct RitzView<'a> {
    values: &'a [f64],
    vectors: &'a DMatrix<f64>,
    beta_last: f64,
}

impl RitzView<'_> {
    fn residual_estimate(&self, i: usize) -> f64 {
        let m = self.vectors.nrows();
        self.beta_last * self.vectors[(m - 1, i)].abs()
    }

    /// Squared overlap of Ritz vector `i` with the start vector.
    fn weight(&self, i: usize) -> f64 {
        self.vectors[(0, i)].powi(2)
    }
}

/// Lanczos with full reorthogonalization. The projected matrix `VᵀHV` is
/// accumulated entry by entry rather than assumed tridiagonal: with
/// degenerate spectra the Krylov space nearly closes, the next direction is
/// mostly rounding noise, and the three-term recurrence no longer describes
/// the projection.
struct KrylovRun {
    basis: Vec<Vec<f64>>,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    beta_last: f64,
}

impl KrylovRun {
    /// Grows a Krylov space from `start` until `stop` accepts the current
    /// Ritz data, the space becomes invariant, or `max_krylov` is reached.
    fn new<F>(
        op: &SparseOperator,
        start: &[f64],
        locked: &[Vec<f64>],
        max_krylov: usize,
        mut stop: F,
    ) -> Result<Self>
    where
        F: FnMut(&RitzView<'_>) -> bool,
    {
        let dim = op.dim();
        let mut v0 = start.to_vec();
        let n0 = reorthogonalize(&mut v0, locked, &[]);
        if n0 < 1e-300 {
            return Err(Error::param("start", "start vector lies in the locked subspace"));
        }
        v0.iter_mut().for_each(|x| *x /= n0);

        let limit = max_krylov.min(dim - locked.len()).max(1);
        let mut basis = vec![v0];
        // columns of the upper triangle of VᵀHV
        let mut proj: Vec<Vec<f64>> = Vec::new();
        let mut w = vec![0.0; dim];
        let scale = op.norm_bound().max(f64::MIN_POSITIVE);
        loop {
            let j = basis.len() - 1;
            op.apply_into(&basis[j], &mut w);
            proj.push(basis.iter().map(|v| dot(v, &w)).collect());
            let b = reorthogonalize(&mut w, locked, &basis);
            // when b is small the quotient amplifies what the passes left
            // behind, so the normalized vector is cleaned once more
            let mut next: Vec<f64> = Vec::new();
            let mut remainder = 0.0;
            if b > 1e-14 * scale {
                next = w.iter().map(|x| x / b).collect();
                let nb = reorthogonalize(&mut next, locked, &basis);
                remainder = b * nb;
                if nb > 1e-8 {
                    next.iter_mut().for_each(|x| *x /= nb);
                } else {
                    next.clear();
                }
            }
            let invariant = next.is_empty();
            let m = basis.len();
            let last = m >= limit || invariant;
            if last || m % 4 == 0 {
                let t = DMatrix::from_fn(m, m, |r, c| if r <= c { proj[c][r] } else { proj[r][c] });
                let (values, vectors) = symmetric_eigh(&t);
                let beta_last = if invariant { remainder } else { b };
                let accept = last || stop(&RitzView { values: &values, vectors: &vectors, beta_last });
                if accept {
                    return Ok(KrylovRun { basis, values, vectors, beta_last });
                }
            }
            basis.push(next);
        }
    }

    fn view(&self) -> RitzView<'_> {
        RitzView { values: &self.values, vectors: &self.vectors, beta_last: self.beta_last }
    }

    fn ritz_pair(&self, i: usize) -> (f64, Vec<f64>) {
        let dim = self.basis[0].len();
        let mut x = vec![0.0; dim];
        for (j, q) in self.basis.iter().enumerate() {
            axpy(self.vectors[(j, i)], q, &mut x);
        }
        let n = norm(&x);
        x.iter_mut().for_each(|v| *v /= n);
        (self.values[i], x)
    }
}

/// Lowest eigenpair.
pub fn ground_state(op: &SparseOperator) -> Result<EigenPair> {
    Ok(low_spectrum(op, 1)?.swap_remove(0))
}

/// One-body density matrix `⟨b_i† b_j⟩` of a real state.
pub fn one_body_density(state: &[f64], basis: &FockBasis) -> Result<DMatrix<f64>> {
    if state.len() != basis.len() {
        return Err(Error::DimensionMismatch { expected: basis.len(), actual: state.len() });
    }
    let l = basis.n_sites();
    let mut rho = DMatrix::zeros(l, l);
    let mut target = vec![0u8; l];
    for (col, occ) in basis.states().iter().enumerate() {
        let c = state[col];
        if c == 0.0 {
            continue;
        }
        for i in 0..l {
            rho[(i, i)] += c * c * f64::from(occ[i]);
        }
        for j in 0..l {
            if occ[j] == 0 {
                continue;
            }
            for i in 0..l {
                if i == j {
                    continue;
                }
                // ⟨s'| b_i† b_j |s⟩ with s' = s - e_j + e_i
                target.copy_from_slice(occ);
                target[j] -= 1;
                target[i] += 1;
                let row = basis.index_of(&target).expect("same particle number");
                let amp = (f64::from(occ[j]) * (f64::from(occ[i]) + 1.0)).sqrt();
                rho[(i, j)] += state[row] * c * amp;
            }
        }
    }
    Ok(rho)
}

/// Largest eigenvalue of the one-body density matrix divided by `N`.
pub fn condensate_fraction(state: &[f64], basis: &FockBasis) -> Result<f64> {
    if basis.n_bosons() == 0 {
        return Err(Error::param("n_bosons", "condensate fraction needs at least one boson"));
    }
    let nrm = norm(state);
    if (nrm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState(format!("state norm is {nrm}, expected 1")));
    }
    let rho = one_body_density(state, basis)?;
    let largest = rho.symmetric_eigenvalues().max();
    Ok((largest / basis.n_bosons() as f64).clamp(0.0, 1.0))
}

/// Lowest excitation reachable from the ground state through the drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveCoupledGap {
    pub ground_energy: f64,
    pub gap: f64,
    /// Fraction of `‖(1 - P₀) D |ψ₀⟩‖²` carried by this excitation.
    pub weight: f64,
}

/// Relative weight below which an excitation counts as decoupled.
pub const COUPLING_WEIGHT_FLOOR: f64 = 1e-10;

/// Lowest excitation `E_k - E_0` with `⟨k| Σ n(n-1)/2 |0⟩ ≠ 0`, or `None` when
/// the drive does not connect the ground state to anything.
pub fn drive_coupled_gap(params: &BHParams, basis: &FockBasis) -> Result<Option<DriveCoupledGap>> {
    drive_coupled_gap_with(params, basis, &LowSpectrumOptions::default())
}

pub fn drive_coupled_gap_with(
    params: &BHParams,
    basis: &FockBasis,
    opts: &LowSpectrumOptions,
) -> Result<Option<DriveCoupledGap>> {
    let h = build_bh(params, basis)?;
    let drive = interaction_operator(basis);
    let scale = h.norm_bound().max(f64::MIN_POSITIVE);

    if basis.len() <= opts.dense_cutoff {
        let (values, vectors) = symmetric_eigh(&h.to_dense());
        let g: Vec<f64> = vectors.column(0).iter().copied().collect();
        let dg = drive.apply(&g);
        let e0 = values[0];
        let couplings: Vec<(f64, f64)> = (1..values.len())
            .filter(|&k| values[k] - e0 > 1e-9 * scale)
            .map(|k| {
                let m: f64 = vectors.column(k).iter().zip(&dg).map(|(a, b)| a * b).sum();
                (values[k] - e0, m * m)
            })
            .collect();
        let total: f64 = couplings.iter().map(|c| c.1).sum();
        if total <= 1e-24 * scale * scale {
            return Ok(None);
        }
        return Ok(couplings
            .iter()
            .find(|c| c.1 / total > COUPLING_WEIGHT_FLOOR)
            .map(|&(gap, w)| DriveCoupledGap { ground_energy: e0, gap, weight: w / total }));
    }

    let ground = ground_state_with(&h, opts)?;
    let mut v = drive.apply(&ground.vector);
    let c = dot(&v, &ground.vector);
    axpy(-c, &ground.vector, &mut v);
    if norm(&v) <= 1e-12 * scale {
        return Ok(None);
    }
    let target = opts.tol * scale;
    let pick = |ritz: &RitzView<'_>| -> Option<usize> {
        (0..ritz.values.len()).find(|&i| ritz.weight(i) > COUPLING_WEIGHT_FLOOR)
    };
    let run = KrylovRun::new(&h, &v, &[], opts.max_krylov.max(300), |ritz| {
        pick(ritz).is_some_and(|i| ritz.residual_estimate(i) <= 0.1 * target)
    })?;
    let view = run.view();
    let Some(i) = pick(&view) else {
        return Ok(None);
    };
    let (theta, x) = run.ritz_pair(i);
    let mut r = h.apply(&x);
    axpy(-theta, &x, &mut r);
    let residual = norm(&r);
    if residual > RESIDUAL_BOUND * scale {
        return Err(Error::NoConvergence { iterations: run.basis.len(), residual });
    }
    Ok(Some(DriveCoupledGap {
        ground_energy: ground.value,
        gap: theta - ground.value,
        weight: view.weight(i),
    }))
}

fn ground_state_with(op: &SparseOperator, opts: &LowSpectrumOptions) -> Result<EigenPair> {
    Ok(low_spectrum_with(op, 1, opts)?.swap_remove(0))
}

/// Drive-active transitions from the ground state computed by dense
/// diagonalization: `(ν_k = (E_k - E_0)/2π, |⟨k|D|0⟩|)` for every excited
/// level with a non-negligible matrix element.
pub fn drive_transitions(params: &BHParams, basis: &FockBasis) -> Result<Vec<(f64, f64)>> {
    let h = build_bh(params, basis)?;
    let drive = interaction_operator(basis);
    let (values, vectors) = symmetric_eigh(&h.to_dense());
    let g: Vec<f64> = vectors.column(0).iter().copied().collect();
    let dg = drive.apply(&g);
    let scale = h.norm_bound().max(1.0);
    Ok((1..values.len())
        .filter_map(|k| {
            let m: f64 = vectors.column(k).iter().zip(&dg).map(|(a, b)| a * b).sum();
            let gap = values[k] - values[0];
            (m.abs() > 1e-8 && gap > 1e-9 * scale).then(|| (gap / (2.0 * std::f64::consts::PI), m.abs()))
        })
        .collect())
}

/// Energy absorbed under lattice modulation across a frequency grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionSpectrum {
    pub nu_grid: Vec<f64>,
    pub absorbed_energy: Vec<f64>,
    pub delta: f64,
    pub t_drive: f64,
    pub ground_energy: f64,
    /// Non-fatal conditions, e.g. a gapless spectrum probed near ν = 0.
    pub warnings: Vec<String>,
}

impl AbsorptionSpectrum {
    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        for (i, &a) in self.absorbed_energy.iter().enumerate() {
            if a > self.absorbed_energy[best] {
                best = i;
            }
        }
        best
    }

    /// Indices of strict local maxima above `floor`.
    pub fn local_maxima(&self, floor: f64) -> Vec<usize> {
        let a = &self.absorbed_energy;
        (0..a.len())
            .filter(|&i| a[i] > floor && (i == 0 || a[i] > a[i - 1]) && (i + 1 == a.len() || a[i] > a[i + 1]))
            .collect()
    }
}

/// Smallest energy accepted as negative absorption before it is an error.
pub const ABSORPTION_FLOOR: f64 = -1e-9;

/// Drives the ground state with `U(t) = U (1 + δ sin 2πνt)` for `t_drive` at
/// each frequency and records `⟨ψ(T)|H₀|ψ(T)⟩ - E₀`.
pub fn modulation_absorption(
    params: &BHParams,
    basis: &FockBasis,
    delta: f64,
    nu_grid: &[f64],
    t_drive: f64,
    tol: f64,
) -> Result<AbsorptionSpectrum> {
    if !(0.0..=0.1).contains(&delta) {
        return Err(Error::param("delta", format!("must lie in [0, 0.1], got {delta}")));
    }
    if nu_grid.is_empty() || nu_grid.iter().any(|&nu| !(nu >= 0.0 && nu.is_finite())) {
        return Err(Error::param("nu_grid", "needs finite frequencies >= 0"));
    }
    if nu_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("nu_grid", "grid must ascend"));
    }
    if !(t_drive > 0.0 && t_drive.is_finite()) {
        return Err(Error::param("t_drive", format!("must be positive, got {t_drive}")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::param("tol", "must be positive"));
    }
    let h0 = build_bh(params, basis)?;
    let drive = interaction_operator(basis);
    let scale = h0.norm_bound().max(1.0);

    let mut warnings = Vec::new();
    let levels = low_spectrum(&h0, basis.len().min(2))?;
    let ground = levels[0].clone();
    if levels.len() > 1 {
        let gap = levels[1].value - ground.value;
        let resolution = 1.0 / t_drive;
        if gap <= 1e-9 * scale && nu_grid[0] < resolution {
            warnings.push(format!(
                "spectrum is gapless (E1 - E0 = {gap:e}); absorption at nu < {resolution:e} is not resolved"
            ));
        }
    }

    let psi0: Vec<C64> = ground.vector.iter().map(|&x| C64::new(x, 0.0)).collect();
    let amplitude = delta * params.interaction;
    let e0 = ground.value;
    let opts = OdeOptions { rtol: tol, atol: tol * 1e-3, ..OdeOptions::default() };

    let absorbed: Vec<f64> = nu_grid
        .par_iter()
        .map(|&nu| -> Result<f64> {
            let omega = 2.0 * std::f64::consts::PI * nu;
            let n = psi0.len();
            let mut hx = vec![C64::new(0.0, 0.0); n];
            let mut dx = vec![C64::new(0.0, 0.0); n];
            let out = ode::integrate(
                |t, y, dy| {
                    h0.apply_complex_into(y, &mut hx);
                    if amplitude != 0.0 {
                        drive.apply_complex_into(y, &mut dx);
                        let s = amplitude * (omega * t).sin();
                        for i in 0..n {
                            hx[i] += dx[i] * s;
                        }
                    }
                    for i in 0..n {
                        dy[i] = C64::new(hx[i].im, -hx[i].re);
                    }
                },
                0.0,
                t_drive,
                &psi0,
                &opts,
                |_, _, _| Control::Continue,
            )
            .map_err(|e| match e {
                OdeError::StepUnderflow { t, h } | OdeError::StepBudget { t, h, .. } => {
                    Error::Stiffness { time: t, step: h, rates: format!("drive frequency nu = {nu:e}") }
                }
            })?;
            let mut hpsi = vec![C64::new(0.0, 0.0); n];
            h0.apply_complex_into(&out.y, &mut hpsi);
            let num: f64 = out.y.iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum();
            let den: f64 = out.y.iter().map(|a| a.norm_sqr()).sum();
            let energy = num / den - e0;
            if energy < ABSORPTION_FLOOR {
                return Err(Error::InvalidState(format!(
                    "absorbed energy {energy:e} below the ground state at nu = {nu}"
                )));
            }
            Ok(energy)
        })
        .collect::<Result<_>>()?;

    Ok(AbsorptionSpectrum {
        nu_grid: nu_grid.to_vec(),
        absorbed_energy: absorbed,
        delta,
        t_drive,
        ground_energy: e0,
        warnings,
    })
}

/// One row of an interaction sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub j_ratio: f64,
    /// Lowest drive-coupled gap in units of `U`; NaN when none exists.
    pub gap: f64,
    pub condensate_fraction: f64,
}

/// Drive-coupled gap and condensate fraction at `U = interaction` across
/// ascending `J/U` values.
pub fn scan_j_ratio(
    lattice: &Lattice,
    n_bosons: usize,
    interaction: f64,
    j_ratios: &[f64],
) -> Result<Vec<ScanPoint>> {
    if !(interaction > 0.0 && interaction.is_finite()) {
        return Err(Error::param("interaction", "scan needs U > 0"));
    }
    if j_ratios.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("j_ratios", "grid must ascend"));
    }
    let basis = enumerate_basis(lattice.n_sites(), n_bosons)?;
    j_ratios
        .iter()
        .map(|&j| {
            let params = BHParams::new(j * interaction, interaction, lattice.clone())?;
            let h = build_bh(&params, &basis)?;
            let ground = ground_state(&h)?;
            let gap = drive_coupled_gap(&params, &basis)?.map_or(f64::NAN, |g| g.gap / interaction);
            Ok(ScanPoint {
                j_ratio: j,
                gap,
                condensate_fraction: condensate_fraction(&ground.vector, &basis)?,
            })
        })
        .collect()
}

/// Dense complex view, for feeding Bose–Hubbard models into the
/// Hamiltonian-level validation checks.
pub fn dense_hamiltonian(params: &BHParams, basis: &FockBasis) -> Result<Hamiltonian> {
    build_bh(params, basis)?.to_hamiltonian(basis)
}

/// Lowest `k` eigenvectors as complex column vectors.
pub fn low_states(params: &BHParams, basis: &FockBasis, k: usize) -> Result<Vec<DVector<C64>>> {
    let pairs = low_spectrum(&build_bh(params, basis)?, k)?;
    Ok(pairs
        .into_iter()
        .map(|p| DVector::from_iterator(p.vector.len(), p.vector.into_iter().map(|x| C64::new(x, 0.0))))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dimer(j: f64, u: f64) -> (BHParams, FockBasis) {
        (BHParams::new(j, u, Lattice::chain(2).unwrap()).unwrap(), enumerate_basis(2, 2).unwrap())
    }

    fn dense_values(params: &BHParams, basis: &FockBasis) -> Vec<f64> {
        symmetric_eigh(&build_bh(params, basis).unwrap().to_dense()).0
    }

    #[test]
    fn basis_is_descending_lexicographic() {
        let b = enumerate_basis(2, 2).unwrap();
        assert_eq!(b.states(), &[vec![2, 0], vec![1, 1], vec![0, 2]]);
        let b = enumerate_basis(3, 2).unwrap();
        assert_eq!(b.state(0), &[2, 0, 0]);
        assert_eq!(b.state(b.len() - 1), &[0, 0, 2]);
        assert!(b.states().windows(2).all(|w| w[0] > w[1]));
        assert_eq!(b.index_of(&[0, 1, 1]), Some(4));
        assert_eq!(b.label(1), "|1,1,0>");
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(basis_size(8, 8), 6435);
        assert_eq!(enumerate_basis(8, 8).unwrap().len(), 6435);
        assert_eq!(basis_size(4, 0), 1);
        assert_eq!(enumerate_basis(5, 0).unwrap().len(), 1);
        assert_eq!(basis_size(1, 7), 1);
    }

    #[test]
    fn oversized_basis_is_refused() {
        let err = enumerate_basis(20, 20).unwrap_err();
        assert!(
            matches!(err, Error::BasisTooLarge { size, cap } if size == basis_size(20, 20) && cap == DEFAULT_BASIS_CAP)
        );
        assert!(enumerate_basis_with_cap(4, 4, 34).is_err());
        assert!(enumerate_basis_with_cap(4, 4, 35).is_ok());
    }

    #[test]
    fn dimer_spectra() {
        let (p, b) = dimer(0.0, 4.0);
        let v = dense_values(&p, &b);
        for (x, y) in v.iter().zip([0.0, 4.0, 4.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
        let (p, b) = dimer(1.0, 0.0);
        for (x, y) in dense_values(&p, &b).iter().zip([-2.0, 0.0, 2.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
        let (p, b) = dimer(1.0, 1.0);
        let s = 17f64.sqrt();
        for (x, y) in dense_values(&p, &b).iter().zip([(1.0 - s) / 2.0, 1.0, (1.0 + s) / 2.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn dimer_matrix_elements() {
        let (p, b) = dimer(1.0, 1.0);
        let h = build_bh(&p, &b).unwrap().to_dense();
        let r2 = 2f64.sqrt();
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, -r2, 0.0, -r2, 0.0, -r2, 0.0, -r2, 1.0]);
        assert!((h - expected).amax() < 1e-15);
    }

    #[test]
    fn free_bosons_fill_single_particle_levels() {
        let lattice = Lattice::chain(3).unwrap();
        let p = BHParams::new(0.7, 0.0, lattice.clone()).unwrap();
        let b = enumerate_basis(3, 2).unwrap();
        let (eps, _) = symmetric_eigh(&lattice.single_particle(0.7));
        let mut sums = Vec::new();
        for i in 0..3 {
            for j in i..3 {
                sums.push(eps[i] + eps[j]);
            }
        }
        sums.sort_by(f64::total_cmp);
        for (x, y) in dense_values(&p, &b).iter().zip(&sums) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn hamiltonian_is_symmetric_and_conserves_number() {
        let p = BHParams::new(0.3, 1.0, Lattice::plaquette(2, 2).unwrap()).unwrap();
        let b = enumerate_basis(4, 3).unwrap();
        let h = build_bh(&p, &b).unwrap();
        assert!(h.max_asymmetry() < 1e-15);
        let n_total: Vec<f64> =
            (0..b.len()).map(|i| b.state(i).iter().map(|&n| f64::from(n)).sum()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x: Vec<f64> = (0..b.len()).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
            let nx: Vec<f64> = x.iter().zip(&n_total).map(|(a, n)| a * n).collect();
            let hnx = h.apply(&nx);
            let hx = h.apply(&x);
            let nhx: Vec<f64> = hx.iter().zip(&n_total).map(|(a, n)| a * n).collect();
            let comm = hnx.iter().zip(&nhx).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(comm < 1e-12);
        }
        let occ_sum = (0..4)
            .map(|s| occupation_operator(&b, s).to_dense())
            .fold(DMatrix::zeros(b.len(), b.len()), |a, m| a + m);
        assert!((occ_sum - DMatrix::identity(b.len(), b.len()) * 3.0).amax() < 1e-15);
    }

    #[test]
    fn lanczos_matches_dense_with_degeneracies() {
        let p = BHParams::new(1.0, 2.0, Lattice::plaquette(2, 2).unwrap()).unwrap();
        let b = enumerate_basis(4, 4).unwrap();
        let h = build_bh(&p, &b).unwrap();
        let dense = dense_values(&p, &b);
        let opts = LowSpectrumOptions { dense_cutoff: 0, ..Default::default() };
        let pairs = low_spectrum_with(&h, 6, &opts).unwrap();
        let scale = h.norm_bound();
        for (pair, exact) in pairs.iter().zip(&dense) {
            assert_abs_diff_eq!(pair.value, *exact, epsilon = 1e-9 * scale);
            let mut r = h.apply(&pair.vector);
            axpy(-pair.value, &pair.vector, &mut r);
            assert!(norm(&r) <= RESIDUAL_BOUND * scale);
        }
        // the 2x2 plaquette has a degenerate first excited level
        assert!((dense[1] - dense[2]).abs() < 1e-9);
    }

    #[test]
    fn low_spectrum_rejects_bad_k() {
        let (p, b) = dimer(1.0, 1.0);
        let h = build_bh(&p, &b).unwrap();
        assert!(low_spectrum(&h, 0).is_err());
        assert!(low_spectrum(&h, 4).is_err());
    }

    #[test]
    fn condensate_fraction_limits() {
        let lattice = Lattice::chain(4).unwrap();
        let b = enumerate_basis(4, 4).unwrap();
        let free = BHParams::new(1.0, 0.0, lattice.clone()).unwrap();
        let g = ground_state(&build_bh(&free, &b).unwrap()).unwrap();
        assert_abs_diff_eq!(condensate_fraction(&g.vector, &b).unwrap(), 1.0, epsilon = 1e-10);
        let mott = BHParams::new(0.0, 1.0, lattice).unwrap();
        let g = ground_state(&build_bh(&mott, &b).unwrap()).unwrap();
        assert_abs_diff_eq!(condensate_fraction(&g.vector, &b).unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn condensate_fraction_grows_with_hopping() {
        let lattice = Lattice::chain(4).unwrap();
        let b = enumerate_basis(4, 4).unwrap();
        let mut prev = 0.0;
        for j in [0.0, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0] {
            let p = BHParams::new(j, 1.0, lattice.clone()).unwrap();
            let g = ground_state(&build_bh(&p, &b).unwrap()).unwrap();
            let f = condensate_fraction(&g.vector, &b).unwrap();
            assert!(f >= prev - 1e-12, "fraction fell at J/U = {j}");
            prev = f;
        }
    }

    #[test]
    fn condensate_fraction_rejects_unnormalized_state() {
        let b = enumerate_basis(2, 2).unwrap();
        assert!(condensate_fraction(&[1.0, 1.0, 0.0], &b).is_err());
        let empty = enumerate_basis(2, 0).unwrap();
        assert!(condensate_fraction(&[1.0], &empty).is_err());
    }

    #[test]
    fn dimer_drive_skips_antisymmetric_level() {
        let (p, b) = dimer(1.0, 1.0);
        let gap = drive_coupled_gap(&p, &b).unwrap().unwrap();
        assert_abs_diff_eq!(gap.gap, 17f64.sqrt(), epsilon = 1e-12);
        let t = drive_transitions(&p, &b).unwrap();
        assert_eq!(t.len(), 1);
        assert_abs_diff_eq!(t[0].0, 17f64.sqrt() / (2.0 * std::f64::consts::PI), epsilon = 1e-12);
    }

    #[test]
    fn drive_gap_krylov_matches_dense() {
        let lattice = Lattice::chain(6).unwrap();
        let b = enumerate_basis(6, 6).unwrap();
        for j in [0.05, 0.2, 0.5] {
            let p = BHParams::new(j, 1.0, lattice.clone()).unwrap();
            let dense = drive_coupled_gap(&p, &b).unwrap().unwrap();
            let opts = LowSpectrumOptions { dense_cutoff: 0, ..Default::default() };
            let krylov = drive_coupled_gap_with(&p, &b, &opts).unwrap().unwrap();
            assert_abs_diff_eq!(dense.gap, krylov.gap, epsilon = 1e-8);
            assert_abs_diff_eq!(dense.ground_energy, krylov.ground_energy, epsilon = 1e-8);
        }
    }

    #[test]
    fn decoupled_drive_reports_none() {
        let p = BHParams::new(0.0, 1.0, Lattice::chain(3).unwrap()).unwrap();
        let b = enumerate_basis(3, 3).unwrap();
        assert_eq!(drive_coupled_gap(&p, &b).unwrap(), None);
    }

    #[test]
    fn unmodulated_lattice_absorbs_nothing() {
        let (p, b) = dimer(1.0, 1.0);
        let s = modulation_absorption(&p, &b, 0.0, &[0.1, 0.5, 0.656, 1.0], 20.0, 1e-10).unwrap();
        assert!(s.absorbed_energy.iter().all(|e| e.abs() <= 1e-9));
    }

    #[test]
    fn absorption_peaks_at_drive_transition() {
        let (p, b) = dimer(1.0, 1.0);
        let nu_res = 17f64.sqrt() / (2.0 * std::f64::consts::PI);
        let grid: Vec<f64> = (0..41).map(|i| 0.4 + 0.5 * i as f64 / 40.0).collect();
        let s = modulation_absorption(&p, &b, 0.05, &grid, 30.0, 1e-9).unwrap();
        let peak = s.nu_grid[s.peak_index()];
        assert!((peak - nu_res).abs() <= 0.5 / 40.0, "peak {peak} vs {nu_res}");
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn absorption_input_checks() {
        let (p, b) = dimer(1.0, 1.0);
        assert!(modulation_absorption(&p, &b, 0.2, &[0.5], 1.0, 1e-9).is_err());
        assert!(modulation_absorption(&p, &b, 0.05, &[0.5, 0.4], 1.0, 1e-9).is_err());
        assert!(modulation_absorption(&p, &b, 0.05, &[-0.1], 1.0, 1e-9).is_err());
        assert!(modulation_absorption(&p, &b, 0.05, &[0.5], 0.0, 1e-9).is_err());
    }

    #[test]
    fn gapless_spectrum_is_flagged() {
        // two free bosons on a 3-site ring: the first excited level is degenerate with nothing,
        // but J = U = 0 makes every level degenerate.
        let p = BHParams::new(0.0, 0.0, Lattice::chain(2).unwrap()).unwrap();
        let b = enumerate_basis(2, 1).unwrap();
        let s = modulation_absorption(&p, &b, 0.05, &[0.0, 0.1], 5.0, 1e-9).unwrap();
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn lattice_validation() {
        assert!(Lattice::new(2, vec![Edge { a: 0, b: 2, weight: 1.0 }]).is_err());
        assert!(Lattice::new(2, vec![Edge { a: 1, b: 1, weight: 1.0 }]).is_err());
        let c = Lattice::chain(3).unwrap();
        assert!(c.with_edge(1, 0, 0.5).is_err());
        assert_eq!(c.with_edge(0, 2, 0.01).unwrap().edges().len(), 3);
        assert_eq!(Lattice::plaquette(2, 3).unwrap().edges().len(), 7);
        assert!(BHParams::new(-1.0, 1.0, c.clone()).is_err());
        assert!(BHParams::new(1.0, f64::NAN, c).is_err());
    }

    #[test]
    fn scan_reports_softening_gap() {
        let lattice = Lattice::chain(4).unwrap();
        let pts = scan_j_ratio(&lattice, 4, 1.0, &[0.01, 0.05, 0.2]).unwrap();
        assert!(pts[0].gap > pts[1].gap && pts[1].gap > pts[2].gap);
        assert!(pts[0].condensate_fraction < pts[2].condensate_fraction);
        assert!(scan_j_ratio(&lattice, 4, 1.0, &[0.2, 0.1]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn spectrum_invariant_under_site_relabeling(
            perm in Just((0..4usize).collect::<Vec<_>>()).prop_shuffle(),
            j in 0.0f64..2.0,
            u in 0.0f64..4.0,
            extra in 0.0f64..0.5,
        ) {
            let lattice = Lattice::chain(4).unwrap().with_edge(0, 2, extra).unwrap();
            let b = enumerate_basis(4, 3).unwrap();
            let a = dense_values(&BHParams::new(j, u, lattice.clone()).unwrap(), &b);
            let relabeled = BHParams::new(j, u, lattice.relabeled(&perm).unwrap()).unwrap();
            let c = dense_values(&relabeled, &b);
            for (x, y) in a.iter().zip(&c) {
                prop_assert!((x - y).abs() <= 1e-10);
            }
        }
    }
}
