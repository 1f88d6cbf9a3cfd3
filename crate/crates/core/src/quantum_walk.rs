//! Single-particle walks on coupled-waveguide arrays.
//!
//! A photon (or, equivalently, bright classical light obeying the same
//! coupled-mode equations) injected into guide `m` evolves as
//! `|ψ(t)⟩ = exp(-iHt)|m⟩`, with propagation length and time related by
//! `z = c t / n`. On-site dephasing is emulated the way phase-shifter
//! hardware does it: the evolution is cut into segments and every segment is
//! followed by independent random phases on each guide. Averaging over shots
//! reproduces Lindblad pure dephasing at rate `γ = σ² · segments / t`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hamiltonians::Hamiltonian;
use crate::linalg::{hermitian_eigh, unitary_from_eigh, CsrMatrix};
use crate::{CMatrix, CVector, Error, Result, C64};

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Norm tolerance of a walk state.
pub const NORM_TOL: f64 = 1e-10;

/// Largest dimension propagated through an eigendecomposition; larger
/// Hamiltonians use Padé scaling-and-squaring.
pub const EIGH_MAX_DIM: usize = 512;

/// Amplitudes over guides at a given time.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    amplitudes: CVector,
    time: f64,
}

impl WalkState {
    pub fn new(amplitudes: CVector, time: f64) -> Result<Self> {
        let drift = (amplitudes.norm_squared() - 1.0).abs();
        if drift > NORM_TOL {
            return Err(Error::InvalidState(format!("walk state norm drifted by {drift:e}")));
        }
        if !(time >= 0.0 && time.is_finite()) {
            return Err(Error::param("time", format!("must be >= 0, got {time}")));
        }
        Ok(WalkState { amplitudes, time })
    }

    pub fn localized(dim: usize, mode: usize) -> Result<Self> {
        if mode >= dim {
            return Err(Error::IndexOutOfRange { index: mode, dim });
        }
        let mut a = CVector::zeros(dim);
        a[mode] = C64::new(1.0, 0.0);
        Ok(WalkState { amplitudes: a, time: 0.0 })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm_drift(&self) -> f64 {
        (self.amplitudes.norm_squared() - 1.0).abs()
    }
}

/// `exp(-iHt)` as a dense matrix.
pub fn propagator(h: &Hamiltonian, t: f64) -> CMatrix {
    if h.dim() <= EIGH_MAX_DIM {
        let (values, vectors) = hermitian_eigh(h.matrix());
        unitary_from_eigh(&values, &vectors, t)
    } else {
        (h.matrix() * C64::new(0.0, -t)).exp()
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::param("t", format!("must be finite and >= 0, got {t}")))
    }
}

/// Evolves an arbitrary state forward by `dt`.
pub fn advance(h: &Hamiltonian, state: &WalkState, dt: f64) -> Result<WalkState> {
    check_time(dt)?;
    if state.amplitudes.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), actual: state.amplitudes.len() });
    }
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let amps = if h.dim() <= EIGH_MAX_DIM {
        let (values, vectors) = hermitian_eigh(h.matrix());
        let coeffs = vectors.adjoint() * &state.amplitudes;
        let phased = CVector::from_iterator(
            values.len(),
            values.iter().zip(coeffs.iter()).map(|(&e, &c)| c * C64::from_polar(1.0, -e * dt)),
        );
        vectors * phased
    } else {
        propagator(h, dt) * &state.amplitudes
    };
    WalkState::new(amps, state.time + dt)
}

/// `exp(-iHt)|m⟩`.
pub fn evolve_unitary(h: &Hamiltonian, input_mode: usize, t: f64) -> Result<WalkState> {
    check_time(t)?;
    let start = WalkState::localized(h.dim(), input_mode)?;
    advance(h, &start, t)
}

/// Time spent by light in a guide of length `z` metres and refractive index
/// `n_index`: `t = n z / c`.
pub fn length_to_time(z: f64, n_index: f64) -> Result<f64> {
    if !(n_index > 0.0 && n_index.is_finite()) {
        return Err(Error::param("n_index", format!("must be positive, got {n_index}")));
    }
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::param("z", format!("must be finite and >= 0, got {z}")));
    }
    Ok(n_index * z / SPEED_OF_LIGHT)
}

/// Inverse of [`length_to_time`]: `z = c t / n`.
pub fn time_to_length(t: f64, n_index: f64) -> Result<f64> {
    if !(n_index > 0.0 && n_index.is_finite()) {
        return Err(Error::param("n_index", format!("must be positive, got {n_index}")));
    }
    check_time(t)?;
    Ok(SPEED_OF_LIGHT * t / n_index)
}

/// Random-phase ensemble parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DephasingEnsembleSpec {
    pub n_segments: usize,
    /// Standard deviation of each per-segment phase, radians.
    pub phase_sigma: f64,
    pub shots: usize,
    pub seed: u64,
}

impl DephasingEnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::param("shots", "must be at least 1"));
        }
        if self.n_segments == 0 {
            return Err(Error::param("n_segments", "must be at least 1"));
        }
        if !(self.phase_sigma >= 0.0 && self.phase_sigma.is_finite()) {
            return Err(Error::param("phase_sigma", format!("must be >= 0, got {}", self.phase_sigma)));
        }
        Ok(())
    }
}

/// Lindblad pure-dephasing rate reproduced on average by the ensemble over
/// total time `t`: each segment multiplies coherences by
/// `E[exp(i(φ_m - φ_n))] = exp(-σ²)`, which equals `exp(-γ t / segments)`.
pub fn matched_dephasing_rate(spec: &DephasingEnsembleSpec, t: f64) -> f64 {
    spec.phase_sigma * spec.phase_sigma * spec.n_segments as f64 / t
}

/// Inverse of [`matched_dephasing_rate`]: the per-segment phase spread that
/// emulates dephasing rate `gamma` over `t` with `n_segments` segments.
pub fn phase_sigma_for_rate(gamma: f64, t: f64, n_segments: usize) -> f64 {
    (gamma * t / n_segments as f64).sqrt()
}

/// Ensemble mean populations with their standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsemblePopulations {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub shots: usize,
}

const SHOTS_PER_CHUNK: usize = 64;

/// Per-record population sums and sums of squares.
type Moments = (Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Segment propagator with negligible entries dropped.
fn sparse_segment(h: &Hamiltonian, dt: f64) -> CsrMatrix<C64> {
    let u = propagator(h, dt);
    let cutoff = 1e-16;
    let mut triplets = Vec::new();
    for j in 0..u.ncols() {
        for i in 0..u.nrows() {
            if u[(i, j)].norm() > cutoff {
                triplets.push((i, j, u[(i, j)]));
            }
        }
    }
    CsrMatrix::from_triplets(u.nrows(), u.ncols(), &triplets)
}

/// Runs shots of the segmented random-phase walk and accumulates population
/// sums and sums of squares at the segment indices in `record` (ascending,
/// 0 meaning the initial state).
fn run_ensemble(
    seg: &CsrMatrix<C64>,
    input: usize,
    total_segments: usize,
    record: &[usize],
    phase_sigma: f64,
    shots: usize,
    seed: u64,
) -> Moments {
    let n = seg.nrows();
    let normal = Normal::new(0.0, phase_sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
    let n_chunks = shots.div_ceil(SHOTS_PER_CHUNK);

    let chunk_sums: Vec<Moments> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut sum = vec![vec![0.0; n]; record.len()];
            let mut sq = vec![vec![0.0; n]; record.len()];
            let mut psi = vec![C64::new(0.0, 0.0); n];
            let mut next = psi.clone();
            let lo = chunk * SHOTS_PER_CHUNK;
            let hi = (lo + SHOTS_PER_CHUNK).min(shots);
            for shot in lo..hi {
                // Counter-based stream per shot: results do not depend on
                // how shots are scheduled.
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(shot as u64);
                psi.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                psi[input] = C64::new(1.0, 0.0);
                let mut r = 0;
                for s in 0..=total_segments {
                    if s > 0 {
                        seg.mul_vec_into(&psi, &mut next);
                        std::mem::swap(&mut psi, &mut next);
                        if phase_sigma > 0.0 {
                            for z in psi.iter_mut() {
                                *z *= C64::from_polar(1.0, normal.sample(&mut rng));
                            }
                        }
                    }
                    while r < record.len() && record[r] == s {
                        for (m, z) in psi.iter().enumerate() {
                            let p = z.norm_sqr();
                            sum[r][m] += p;
                            sq[r][m] += p * p;
                        }
                        r += 1;
                    }
                }
            }
            (sum, sq)
        })
        .collect();

    let mut sum = vec![vec![0.0; n]; record.len()];
    let mut sq = vec![vec![0.0; n]; record.len()];
    for (cs, cq) in &chunk_sums {
        for r in 0..record.len() {
            for m in 0..n {
                sum[r][m] += cs[r][m];
                sq[r][m] += cq[r][m];
            }
        }
    }
    (sum, sq)
}

fn to_stats(sum: &[f64], sq: &[f64], shots: usize) -> Result<EnsemblePopulations> {
    let k = shots as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / k).collect();
    let std_error = if shots > 1 {
        sum.iter()
            .zip(sq)
            .map(|(s, q)| {
                let m = s / k;
                ((q / k - m * m).max(0.0) * k / (k - 1.0) / k).sqrt()
            })
            .collect()
    } else {
        vec![0.0; sum.len()]
    };
    let total: f64 = mean.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidState(format!("ensemble populations sum to {total}")));
    }
    Ok(EnsemblePopulations { mean, std_error, shots })
}

/// Mean and standard error of the ensemble populations at time `t`.
pub fn dephased_walk_stats(
    h: &Hamiltonian,
    input_mode: usize,
    t: f64,
    spec: &DephasingEnsembleSpec,
) -> Result<EnsemblePopulations> {
    spec.validate()?;
    check_time(t)?;
    if input_mode >= h.dim() {
        return Err(Error::IndexOutOfRange { index: input_mode, dim: h.dim() });
    }
    let seg = sparse_segment(h, t / spec.n_segments as f64);
    // Without noise every shot is the same trajectory.
    let shots = if spec.phase_sigma == 0.0 { 1 } else { spec.shots };
    let (sum, sq) = run_ensemble(
        &seg,
        input_mode,
        spec.n_segments,
        &[spec.n_segments],
        spec.phase_sigma,
        shots,
        spec.seed,
    );
    let mut stats = to_stats(&sum[0], &sq[0], shots)?;
    stats.shots = spec.shots;
    Ok(stats)
}

/// Ensemble-averaged populations at time `t` under random segment phases.
pub fn dephased_walk(
    h: &Hamiltonian,
    input_mode: usize,
    t: f64,
    spec: &DephasingEnsembleSpec,
) -> Result<Vec<f64>> {
    Ok(dephased_walk_stats(h, input_mode, t, spec)?.mean)
}

fn check_centered(h: &Hamiltonian, center: usize) -> Result<()> {
    let n = h.dim();
    if n.is_multiple_of(2) || center != (n - 1) / 2 {
        return Err(Error::param(
            "input",
            format!("walk must start at the centre of an odd-length chain; got site {center} of {n}"),
        ));
    }
    Ok(())
}

/// Root-mean-square displacement `sqrt(Σ_m P_m (m - m0)²)`.
pub fn rms_displacement(populations: &[f64], origin: usize) -> f64 {
    populations.iter().enumerate().map(|(m, p)| p * (m as f64 - origin as f64).powi(2)).sum::<f64>().sqrt()
}

/// Coherent spreading `(t, σ_x(t))` of a walk started at the chain centre.
pub fn spreading_stats(h: &Hamiltonian, center: usize, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_centered(h, center)?;
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("times", "must be ascending"));
    }
    let (values, vectors) = hermitian_eigh(h.matrix());
    let coeffs: Vec<C64> = (0..h.dim()).map(|k| vectors[(center, k)].conj()).collect();
    times
        .iter()
        .map(|&t| {
            check_time(t)?;
            if t == 0.0 {
                return Ok((t, 0.0));
            }
            let phased = CVector::from_iterator(
                values.len(),
                values.iter().zip(&coeffs).map(|(&e, &c)| c * C64::from_polar(1.0, -e * t)),
            );
            let state = WalkState::new(&vectors * phased, t)?;
            Ok((t, rms_displacement(&state.populations(), center)))
        })
        .collect()
}

/// Dephased spreading with a fixed segment duration, so the emulated
/// dephasing rate `σ² / segment_time` is the same at every recorded time.
/// Records `(t, σ_x)` after every `record_every` segments up to
/// `total_segments`.
#[allow(clippy::too_many_arguments)]
pub fn dephased_spreading(
    h: &Hamiltonian,
    center: usize,
    segment_time: f64,
    total_segments: usize,
    record_every: usize,
    phase_sigma: f64,
    shots: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    check_centered(h, center)?;
    check_time(segment_time)?;
    if record_every == 0 || total_segments == 0 {
        return Err(Error::param("record_every", "segments and record interval must be positive"));
    }
    DephasingEnsembleSpec { n_segments: total_segments, phase_sigma, shots, seed }.validate()?;
    let record: Vec<usize> = (0..=total_segments).step_by(record_every).collect();
    let seg = sparse_segment(h, segment_time);
    let (sum, sq) = run_ensemble(&seg, center, total_segments, &record, phase_sigma, shots, seed);
    record
        .iter()
        .enumerate()
        .map(|(r, &s)| {
            let stats = to_stats(&sum[r], &sq[r], shots)?;
            Ok((s as f64 * segment_time, rms_displacement(&stats.mean, center)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{build_tight_binding, SiteNetwork};
    use std::f64::consts::PI;

    fn coupler() -> Hamiltonian {
        build_tight_binding(&SiteNetwork::from_triples(vec![0.0, 0.0], &[(0, 1, 1.0)], None).unwrap())
            .unwrap()
    }

    #[test]
    fn zero_time_is_localized() {
        let s = evolve_unitary(&coupler(), 1, 0.0).unwrap();
        assert_eq!(s.populations(), vec![0.0, 1.0]);
    }

    #[test]
    fn balanced_splitter() {
        let p = evolve_unitary(&coupler(), 0, PI / 4.0).unwrap().populations();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn input_out_of_range() {
        assert!(matches!(evolve_unitary(&coupler(), 2, 1.0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn length_time_conversion() {
        assert_eq!(length_to_time(0.0, 1.5).unwrap(), 0.0);
        let t = length_to_time(0.03, 1.5).unwrap();
        assert!((t - 1.501038428391684e-10).abs() < 1e-24);
        let z = time_to_length(t, 1.5).unwrap();
        assert!((z - 0.03).abs() <= 1e-15 * 0.03);
        assert!(length_to_time(1.0, 0.0).is_err());
        assert!(length_to_time(1.0, -1.5).is_err());
    }

    #[test]
    fn noiseless_ensemble_matches_unitary() {
        let h = build_tight_binding(&SiteNetwork::chain(5, 0.0, 1.0).unwrap()).unwrap();
        let spec = DephasingEnsembleSpec { n_segments: 17, phase_sigma: 0.0, shots: 10, seed: 3 };
        let a = dephased_walk(&h, 1, 2.3, &spec).unwrap();
        let b = evolve_unitary(&h, 1, 2.3).unwrap().populations();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn ensemble_is_seeded() {
        let h = build_tight_binding(&SiteNetwork::ring(5, 0.0, 1.0).unwrap()).unwrap();
        let spec = DephasingEnsembleSpec { n_segments: 20, phase_sigma: 0.8, shots: 200, seed: 11 };
        let a = dephased_walk(&h, 0, 3.0, &spec).unwrap();
        let b = dephased_walk(&h, 0, 3.0, &spec).unwrap();
        assert_eq!(a, b);
        let c = dephased_walk(&h, 0, 3.0, &DephasingEnsembleSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(a, c);
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ensemble_rejects_zero_shots() {
        let spec = DephasingEnsembleSpec { n_segments: 2, phase_sigma: 0.1, shots: 0, seed: 0 };
        assert!(dephased_walk(&coupler(), 0, 1.0, &spec).is_err());
    }

    #[test]
    fn spreading_requires_centered_start() {
        let h = build_tight_binding(&SiteNetwork::chain(5, 0.0, 1.0).unwrap()).unwrap();
        assert!(spreading_stats(&h, 1, &[0.0, 1.0]).is_err());
        let even = build_tight_binding(&SiteNetwork::chain(4, 0.0, 1.0).unwrap()).unwrap();
        assert!(spreading_stats(&even, 2, &[0.0]).is_err());
        let s = spreading_stats(&h, 2, &[0.0, 0.5]).unwrap();
        assert_eq!(s[0], (0.0, 0.0));
    }

    #[test]
    fn matched_rate_round_trip() {
        let spec = DephasingEnsembleSpec {
            n_segments: 40,
            phase_sigma: phase_sigma_for_rate(0.7, 2.0, 40),
            shots: 1,
            seed: 0,
        };
        assert!((matched_dephasing_rate(&spec, 2.0) - 0.7).abs() < 1e-14);
    }
}
