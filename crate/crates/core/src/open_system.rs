//! Lindblad evolution of a single excitation on a site network coupled to a
//! sink (trapping) and a loss register (recombination).
//!
//! The Hilbert space is the system sites followed by two absorbing levels:
//! index `n` is the sink and `n + 1` the loss register. The generator is
//!
//! ```text
//! dρ/dt = -i[H, ρ] + Σ_m γ_m D[|m⟩⟨m|]ρ + Γ D[|sink⟩⟨s|]ρ + κ Σ_m D[|loss⟩⟨m|]ρ
//! D[A]ρ = AρA† - ½{A†A, ρ}
//! ```
//!
//! so the trace is conserved exactly and the transport efficiency is the
//! sink population.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hamiltonians::Hamiltonian;
use crate::linalg::{hermitian_eigenvalues, hermiticity_defect, CsrMatrix};
use crate::ode::{self, Control, OdeError, OdeOptions};
use crate::{CMatrix, Error, Result, C64};

/// Default per-step tolerance for evolution and efficiency runs.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default efficiency horizon in units of the inverse mean coupling.
pub const DEFAULT_HORIZON_COUPLINGS: f64 = 1e3;

pub const STATE_HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Absolute error floor of the integrator relative to the requested `tol`.
/// Once most population has left the system the explicit steps sit at their
/// stability limit and the local error floor sets the noise level of the
/// remaining small entries; a floor well below `tol` keeps that noise under
/// the positivity and convergence thresholds.
pub const ABS_TOL_FACTOR: f64 = 1e-3;

fn ode_options(tol: f64) -> OdeOptions {
    OdeOptions { rtol: tol, atol: tol * ABS_TOL_FACTOR, ..OdeOptions::default() }
}

/// Source, sink and loss channels of a transport problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportSpec {
    pub source_site: usize,
    pub sink_site: usize,
    /// Γ, transfer rate from `sink_site` into the sink register.
    pub trap_rate: f64,
    /// κ, loss rate from every system site into the loss register.
    pub recombination_rate: f64,
    /// γ_m, pure dephasing rate on each system site.
    pub dephasing_rates: Vec<f64>,
}

impl TransportSpec {
    pub fn uniform(
        n_sites: usize,
        source_site: usize,
        sink_site: usize,
        trap_rate: f64,
        recombination_rate: f64,
        dephasing: f64,
    ) -> Self {
        TransportSpec {
            source_site,
            sink_site,
            trap_rate,
            recombination_rate,
            dephasing_rates: vec![dephasing; n_sites],
        }
    }

    pub fn with_uniform_dephasing(&self, gamma: f64) -> Self {
        TransportSpec { dephasing_rates: vec![gamma; self.dephasing_rates.len()], ..self.clone() }
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.dephasing_rates.len() != n_sites {
            return Err(Error::DimensionMismatch { expected: n_sites, actual: self.dephasing_rates.len() });
        }
        for index in [self.source_site, self.sink_site] {
            if index >= n_sites {
                return Err(Error::IndexOutOfRange { index, dim: n_sites });
            }
        }
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(self.trap_rate) {
            return Err(Error::param("trap_rate", format!("must be >= 0, got {}", self.trap_rate)));
        }
        if !ok(self.recombination_rate) {
            return Err(Error::param(
                "recombination_rate",
                format!("must be >= 0, got {}", self.recombination_rate),
            ));
        }
        if let Some(g) = self.dephasing_rates.iter().find(|&&g| !ok(g)) {
            return Err(Error::param("dephasing_rates", format!("must be >= 0, got {g}")));
        }
        Ok(())
    }

    fn describe(&self) -> String {
        let gmax = self.dephasing_rates.iter().copied().fold(0.0, f64::max);
        format!(
            "max dephasing γ = {gmax:e}, trap Γ = {:e}, recombination κ = {:e}",
            self.trap_rate, self.recombination_rate
        )
    }
}

/// Density matrix over system sites ⊕ sink ⊕ loss.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_system: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Checks Hermiticity (1e-10), unit trace (1e-9) and positivity (-1e-8).
    pub fn new(n_system: usize, matrix: CMatrix) -> Result<Self> {
        let d = n_system + 2;
        if matrix.shape() != (d, d) {
            return Err(Error::InvalidState(format!(
                "expected a {d}x{d} matrix for {n_system} sites plus sink and loss, got {:?}",
                matrix.shape()
            )));
        }
        let defect = hermiticity_defect(&matrix);
        if defect > STATE_HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("Hermiticity defect {defect:e}")));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {trace} is not 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix)[0];
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(DensityMatrix { n_system, matrix })
    }

    /// Pure state with the excitation on system site `site`.
    pub fn localized(n_system: usize, site: usize) -> Result<Self> {
        if site >= n_system {
            return Err(Error::IndexOutOfRange { index: site, dim: n_system });
        }
        let d = n_system + 2;
        let mut m = CMatrix::zeros(d, d);
        m[(site, site)] = C64::new(1.0, 0.0);
        Ok(DensityMatrix { n_system, matrix: m })
    }

    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn dim(&self) -> usize {
        self.n_system + 2
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn population(&self, level: usize) -> f64 {
        self.matrix[(level, level)].re
    }

    pub fn sink_population(&self) -> f64 {
        self.population(self.n_system)
    }

    pub fn loss_population(&self) -> f64 {
        self.population(self.n_system + 1)
    }

    /// Populations of the system sites only.
    pub fn site_populations(&self) -> Vec<f64> {
        (0..self.n_system).map(|m| self.population(m)).collect()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)[0]
    }
}

/// Column-stacking vectorization: `vec(ρ)[i + j·d] = ρ[i][j]`.
pub fn vectorize(m: &CMatrix) -> Vec<C64> {
    m.as_slice().to_vec()
}

pub fn unvectorize(v: &[C64], d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v)
}

/// Lindblad generator acting on column-stacked density matrices.
#[derive(Clone, Debug)]
pub struct Superoperator {
    n_system: usize,
    matrix: CsrMatrix<C64>,
    rates: String,
}

impl Superoperator {
    pub fn n_system(&self) -> usize {
        self.n_system
    }

    /// Dimension of the underlying Hilbert space (system + sink + loss).
    pub fn hilbert_dim(&self) -> usize {
        self.n_system + 2
    }

    pub fn sink_index(&self) -> usize {
        self.n_system
    }

    pub fn loss_index(&self) -> usize {
        self.n_system + 1
    }

    pub fn matrix(&self) -> &CsrMatrix<C64> {
        &self.matrix
    }

    pub fn to_dense(&self) -> CMatrix {
        self.matrix.to_dense()
    }

    /// `L(ρ)` for an arbitrary (not necessarily physical) matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.hilbert_dim();
        assert_eq!(rho.shape(), (d, d), "operand has the wrong shape");
        unvectorize(&self.matrix.mul_vec(&vectorize(rho)), d)
    }
}

/// Assembles the generator column by column from `L(|i⟩⟨j|)`.
pub fn build_liouvillian(h: &Hamiltonian, spec: &TransportSpec) -> Result<Superoperator> {
    let n = h.dim();
    spec.validate(n)?;
    let d = n + 2;
    let sink = n;
    let loss = n + 1;

    // Jump operators |a⟩⟨b| with their rates.
    let mut jumps: Vec<(usize, usize, f64)> = Vec::new();
    for (m, &g) in spec.dephasing_rates.iter().enumerate() {
        if g > 0.0 {
            jumps.push((m, m, g));
        }
    }
    if spec.trap_rate > 0.0 {
        jumps.push((sink, spec.sink_site, spec.trap_rate));
    }
    if spec.recombination_rate > 0.0 {
        for m in 0..n {
            jumps.push((loss, m, spec.recombination_rate));
        }
    }

    let hm = h.matrix();
    let idx = |i: usize, j: usize| i + j * d;
    let minus_i = C64::new(0.0, -1.0);
    let plus_i = C64::new(0.0, 1.0);
    let mut triplets = Vec::new();
    for j in 0..d {
        for i in 0..d {
            let col = idx(i, j);
            // -i H E_ij: entries (k, j) with weight H_ki.
            if i < n {
                for k in 0..n {
                    let hki = hm[(k, i)];
                    if hki != C64::new(0.0, 0.0) {
                        triplets.push((idx(k, j), col, minus_i * hki));
                    }
                }
            }
            // +i E_ij H: entries (i, l) with weight H_jl.
            if j < n {
                for l in 0..n {
                    let hjl = hm[(j, l)];
                    if hjl != C64::new(0.0, 0.0) {
                        triplets.push((idx(i, l), col, plus_i * hjl));
                    }
                }
            }
            for &(a, b, rate) in &jumps {
                if b == i && b == j {
                    triplets.push((idx(a, a), col, C64::new(rate, 0.0)));
                }
                let anti = 0.5 * rate * (f64::from(u8::from(b == i)) + f64::from(u8::from(b == j)));
                if anti != 0.0 {
                    triplets.push((col, col, C64::new(-anti, 0.0)));
                }
            }
        }
    }
    Ok(Superoperator {
        n_system: n,
        matrix: CsrMatrix::from_triplets(d * d, d * d, &triplets),
        rates: spec.describe(),
    })
}

fn map_ode_error(err: OdeError, rates: &str) -> Error {
    match err {
        OdeError::StepUnderflow { t, h } | OdeError::StepBudget { t, h, .. } => {
            Error::Stiffness { time: t, step: h, rates: rates.to_string() }
        }
    }
}

fn check_inputs(rho0: &DensityMatrix, l: &Superoperator, t: f64, tol: f64) -> Result<()> {
    if rho0.n_system != l.n_system {
        return Err(Error::DimensionMismatch { expected: l.n_system, actual: rho0.n_system });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::param("t", format!("must be finite and >= 0, got {t}")));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    Ok(())
}

fn finish(n_system: usize, v: &[C64]) -> Result<DensityMatrix> {
    let d = n_system + 2;
    let m = unvectorize(v, d);
    let drift = (m.trace() - C64::new(1.0, 0.0)).norm();
    if drift > TRACE_TOL {
        return Err(Error::TraceDrift { drift, limit: TRACE_TOL });
    }
    DensityMatrix::new(n_system, m)
}

/// Integrates the master equation from `rho0` over `[0, t]` with per-step
/// tolerance `tol`. The trace is checked, never renormalized.
pub fn evolve(rho0: &DensityMatrix, l: &Superoperator, t: f64, tol: f64) -> Result<DensityMatrix> {
    check_inputs(rho0, l, t, tol)?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let out = ode::integrate(
        |_, y, dy| l.matrix.mul_vec_into(y, dy),
        0.0,
        t,
        &vectorize(&rho0.matrix),
        &ode_options(tol),
        |_, _, _| Control::Continue,
    )
    .map_err(|e| map_ode_error(e, &l.rates))?;
    finish(rho0.n_system, &out.y)
}

/// States at each requested time (ascending), from a single integration.
pub fn evolve_trajectory(
    rho0: &DensityMatrix,
    l: &Superoperator,
    times: &[f64],
    tol: f64,
) -> Result<Vec<DensityMatrix>> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("times", "must be ascending"));
    }
    let mut out = Vec::with_capacity(times.len());
    let mut state = rho0.clone();
    let mut t_prev = 0.0;
    for &t in times {
        if t < t_prev {
            return Err(Error::param("times", "must be >= 0"));
        }
        state = evolve(&state, l, t - t_prev, tol)?;
        t_prev = t;
        out.push(state.clone());
    }
    Ok(out)
}

/// Outcome of a single efficiency evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Efficiency {
    /// Sink population when the run ended.
    pub eta: f64,
    /// True if the run ended because the sink inflow became negligible.
    pub converged: bool,
    /// Time at which the run ended.
    pub time: f64,
}

/// Sink population at the earlier of `t_max` or convergence.
///
/// The run counts as converged once the population left in the system sites
/// drops below `tol`. Since the sink inflow is `Γ·ρ_ss ≤ Γ·P_system` and
/// `P_system` never grows, the inflow then stays below `tol·Γ` for all later
/// times and the reported `eta` is within `tol` of its asymptote. A frozen
/// network that keeps its population never converges.
pub fn transport_efficiency(
    h: &Hamiltonian,
    spec: &TransportSpec,
    t_max: f64,
    tol: f64,
) -> Result<Efficiency> {
    spec.validate(h.dim())?;
    if spec.trap_rate == 0.0 {
        return Err(Error::NoSink);
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::param("t_max", format!("must be positive, got {t_max}")));
    }
    let l = build_liouvillian(h, spec)?;
    let rho0 = DensityMatrix::localized(h.dim(), spec.source_site)?;
    check_inputs(&rho0, &l, t_max, tol)?;

    let n = h.dim();
    let d = n + 2;
    let system_population = |y: &[C64]| -> f64 { (0..n).map(|m| y[m + m * d].re).sum::<f64>() };
    let out = ode::integrate(
        |_, y, dy| l.matrix.mul_vec_into(y, dy),
        0.0,
        t_max,
        &vectorize(&rho0.matrix),
        &ode_options(tol),
        |_, y, _| if system_population(y) < tol { Control::Stop } else { Control::Continue },
    )
    .map_err(|e| map_ode_error(e, &l.rates))?;

    let converged = out.stopped || system_population(&out.y) < tol;
    let state = finish(n, &out.y)?;
    let eta = state.sink_population();
    if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&eta) {
        return Err(Error::InvalidState(format!("sink population {eta} outside [0, 1]")));
    }
    Ok(Efficiency { eta: eta.clamp(0.0, 1.0), converged, time: out.t })
}

/// `1e3 / mean |V_mn|`, the default efficiency horizon.
pub fn default_horizon(h: &Hamiltonian) -> Option<f64> {
    let n = h.dim();
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = h.matrix()[(i, j)].norm();
            if v > 0.0 {
                sum += v;
                count += 1;
            }
        }
    }
    (count > 0).then(|| DEFAULT_HORIZON_COUPLINGS * count as f64 / sum)
}

/// `n` logarithmically spaced points from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && min.is_finite() && max.is_finite()) {
        return Err(Error::param("grid", format!("need 0 < min < max, got [{min}, {max}]")));
    }
    if n < 2 {
        return Err(Error::param("grid", "need at least two points"));
    }
    let (a, b) = (min.log10(), max.log10());
    let mut grid: Vec<f64> = (0..n).map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64)).collect();
    grid[0] = min;
    grid[n - 1] = max;
    Ok(grid)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveMetadata {
    pub hamiltonian_fingerprint: String,
    pub spec: TransportSpec,
    pub horizon: f64,
    pub tol: f64,
}

/// Transport efficiency against uniform dephasing rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyCurve {
    pub gamma_grid: Vec<f64>,
    pub efficiencies: Vec<f64>,
    pub converged: Vec<bool>,
    pub metadata: CurveMetadata,
}

impl EfficiencyCurve {
    /// Index of the largest efficiency (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &e) in self.efficiencies.iter().enumerate() {
            if e > self.efficiencies[best] {
                best = i;
            }
        }
        best
    }

    /// Whether the maximum is interior and beats both endpoints by `margin`.
    pub fn has_interior_optimum(&self, margin: f64) -> bool {
        let k = self.argmax();
        let last = self.efficiencies.len() - 1;
        let peak = self.efficiencies[k];
        k > 0 && k < last && peak - self.efficiencies[0] >= margin && peak - self.efficiencies[last] >= margin
    }
}

/// Efficiency at each uniform dephasing rate of `gamma_grid`. Grid points are
/// evaluated in parallel and collected in grid order.
pub fn goldilocks_sweep(
    h: &Hamiltonian,
    template: &TransportSpec,
    gamma_grid: &[f64],
    t_max: f64,
    tol: f64,
) -> Result<EfficiencyCurve> {
    if gamma_grid.is_empty() {
        return Err(Error::param("gamma_grid", "is empty"));
    }
    if gamma_grid.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
        return Err(Error::param("gamma_grid", "entries must be positive"));
    }
    if gamma_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("gamma_grid", "must be strictly ascending"));
    }
    template.validate(h.dim())?;
    let results: Vec<Efficiency> = gamma_grid
        .par_iter()
        .map(|&g| transport_efficiency(h, &template.with_uniform_dephasing(g), t_max, tol))
        .collect::<Result<_>>()?;
    Ok(EfficiencyCurve {
        gamma_grid: gamma_grid.to_vec(),
        efficiencies: results.iter().map(|r| r.eta).collect(),
        converged: results.iter().map(|r| r.converged).collect(),
        metadata: CurveMetadata {
            hamiltonian_fingerprint: h.fingerprint(),
            spec: template.clone(),
            horizon: t_max,
            tol,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{build_tight_binding, SiteNetwork};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn dimer(eps: [f64; 2], v: f64) -> Hamiltonian {
        build_tight_binding(&SiteNetwork::from_triples(eps.to_vec(), &[(0, 1, v)], None).unwrap()).unwrap()
    }

    #[test]
    fn closed_limit_conserves_purity() {
        let h = build_tight_binding(&SiteNetwork::chain(3, 0.2, 1.0).unwrap()).unwrap();
        let spec = TransportSpec::uniform(3, 0, 2, 0.0, 0.0, 0.0);
        let l = build_liouvillian(&h, &spec).unwrap();
        let rho = evolve(&DensityMatrix::localized(3, 0).unwrap(), &l, 3.7, 1e-10).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-9);
        assert_eq!(rho.sink_population(), 0.0);
    }

    #[test]
    fn dephasing_leaves_single_site_population() {
        let h = Hamiltonian::from_real(&nalgebra::DMatrix::zeros(1, 1)).unwrap();
        let spec = TransportSpec::uniform(1, 0, 0, 0.0, 0.0, 2.5);
        let l = build_liouvillian(&h, &spec).unwrap();
        let rho = evolve(&DensityMatrix::localized(1, 0).unwrap(), &l, 10.0, 1e-9).unwrap();
        assert!((rho.population(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generator_is_traceless_on_random_operators() {
        let h = dimer([0.3, -0.7], 1.1);
        let spec = TransportSpec {
            source_site: 0,
            sink_site: 1,
            trap_rate: 0.8,
            recombination_rate: 0.1,
            dephasing_rates: vec![0.5, 1.5],
        };
        let l = build_liouvillian(&h, &spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let a = CMatrix::from_fn(4, 4, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let rho = &a + a.adjoint();
            assert!(l.apply(&rho).trace().norm() <= 1e-12);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let h = dimer([0.0, 0.0], 1.0);
        let l = build_liouvillian(&h, &TransportSpec::uniform(2, 0, 1, 1.0, 0.1, 0.3)).unwrap();
        let rho0 = DensityMatrix::localized(2, 0).unwrap();
        assert_eq!(evolve(&rho0, &l, 0.0, 1e-9).unwrap(), rho0);
    }

    #[test]
    fn coherent_coupler_transfers_fully() {
        // P_2(t) = sin²(Ct) with C = 1
        let h = dimer([0.0, 0.0], 1.0);
        let l = build_liouvillian(&h, &TransportSpec::uniform(2, 0, 1, 0.0, 0.0, 0.0)).unwrap();
        let rho = evolve(&DensityMatrix::localized(2, 0).unwrap(), &l, PI / 2.0, 1e-10).unwrap();
        assert!((rho.population(1) - 1.0).abs() < 1e-8);
        let rho = evolve(&DensityMatrix::localized(2, 0).unwrap(), &l, 0.4, 1e-10).unwrap();
        assert!((rho.population(1) - 0.4f64.sin().powi(2)).abs() < 1e-8);
    }

    #[test]
    fn disconnected_network_never_converges() {
        let h = dimer([0.0, 1.0], 0.0);
        let spec = TransportSpec::uniform(2, 0, 1, 1.0, 0.0, 0.5);
        let eff = transport_efficiency(&h, &spec, 50.0, 1e-9).unwrap();
        assert_eq!(eff.eta, 0.0);
        assert!(!eff.converged);
        assert_eq!(eff.time, 50.0);
    }

    #[test]
    fn resonant_coupler_reaches_unit_efficiency() {
        let h = dimer([0.0, 0.0], 1.0);
        let spec = TransportSpec::uniform(2, 0, 1, 1.0, 0.0, 0.0);
        let eff = transport_efficiency(&h, &spec, 100.0, 1e-9).unwrap();
        assert!(eff.eta >= 0.99, "eta = {}", eff.eta);
        assert!(eff.eta <= 1.0);
    }

    #[test]
    fn efficiency_requires_sink() {
        let h = dimer([0.0, 0.0], 1.0);
        let spec = TransportSpec::uniform(2, 0, 1, 0.0, 0.0, 0.0);
        assert!(matches!(transport_efficiency(&h, &spec, 10.0, 1e-9), Err(Error::NoSink)));
    }

    #[test]
    fn spec_errors() {
        let h = dimer([0.0, 0.0], 1.0);
        let mut spec = TransportSpec::uniform(2, 0, 2, 1.0, 0.0, 0.0);
        assert!(matches!(build_liouvillian(&h, &spec), Err(Error::IndexOutOfRange { .. })));
        spec.sink_site = 1;
        spec.recombination_rate = -1.0;
        assert!(matches!(build_liouvillian(&h, &spec), Err(Error::InvalidParameter { .. })));
        spec.recombination_rate = 0.0;
        spec.dephasing_rates = vec![0.0];
        assert!(build_liouvillian(&h, &spec).is_err());
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let h = dimer([0.0, 0.0], 1.0);
        let spec = TransportSpec::uniform(2, 0, 1, 1.0, 0.0, 0.0);
        assert!(goldilocks_sweep(&h, &spec, &[1.0, 0.5], 10.0, 1e-9).is_err());
        assert!(goldilocks_sweep(&h, &spec, &[0.0, 0.5], 10.0, 1e-9).is_err());
        assert!(goldilocks_sweep(&h, &spec, &[], 10.0, 1e-9).is_err());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1e3, 13).unwrap();
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[12], 1e3);
        assert!((g[6] - 1.0).abs() < 1e-12);
        assert!(log_grid(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn stiffness_error_names_rates() {
        let h = dimer([0.0, 0.0], 1.0);
        let spec = TransportSpec::uniform(2, 0, 1, 1.0, 0.0, 1e15);
        let l = build_liouvillian(&h, &spec).unwrap();
        let rho0 = DensityMatrix::localized(2, 0).unwrap();
        match evolve(&rho0, &l, 1e3, 1e-9) {
            Err(Error::Stiffness { rates, .. }) => assert!(rates.contains("1e15")),
            other => panic!("expected stiffness error, got {other:?}"),
        }
    }
}
