//! Brute-force reference computations for the qanalog test suites.
//!
//! Nothing here calls into `qanalog-core`: every oracle rebuilds its model
//! from raw parameters by a different route (Kronecker products, Padé
//! exponentials, closed-form eigenbases, naive enumeration) so that the
//! suites compare two independent computations.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Dense Lindblad generator on column-stacked vectors from Kronecker
/// products: `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
pub fn dense_lindbladian(h: &DMatrix<C64>, jumps: &[(DMatrix<C64>, f64)]) -> DMatrix<C64> {
    let d = h.nrows();
    let id = DMatrix::<C64>::identity(d, d);
    let mut l = (kron(&id, h) - kron(&h.transpose(), &id)) * C64::new(0.0, -1.0);
    for (a, rate) in jumps {
        let ada = a.adjoint() * a;
        let term = kron(&a.conjugate(), a) - kron(&id, &ada) * c(0.5) - kron(&ada.transpose(), &id) * c(0.5);
        l += term * c(*rate);
    }
    l
}

/// Transport generator for an `n`-site system Hamiltonian padded with a sink
/// (index `n`) and a loss register (index `n + 1`).
pub fn transport_lindbladian(
    h_sys: &DMatrix<C64>,
    dephasing: &[f64],
    sink_site: usize,
    trap_rate: f64,
    recombination_rate: f64,
) -> DMatrix<C64> {
    let n = h_sys.nrows();
    let d = n + 2;
    let mut h = DMatrix::<C64>::zeros(d, d);
    h.view_mut((0, 0), (n, n)).copy_from(h_sys);
    let ket_bra = |a: usize, b: usize| {
        let mut m = DMatrix::<C64>::zeros(d, d);
        m[(a, b)] = c(1.0);
        m
    };
    let mut jumps = Vec::new();
    for (m, &g) in dephasing.iter().enumerate() {
        jumps.push((ket_bra(m, m), g));
    }
    jumps.push((ket_bra(n, sink_site), trap_rate));
    for m in 0..n {
        jumps.push((ket_bra(n + 1, m), recombination_rate));
    }
    dense_lindbladian(&h, &jumps)
}

/// `exp(L t) vec(ρ0)` through nalgebra's Padé scaling-and-squaring.
pub fn propagate_dense(l: &DMatrix<C64>, rho0: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let d = rho0.nrows();
    let v = DVector::from_column_slice(rho0.as_slice());
    let out = (l * c(t)).exp() * v;
    DMatrix::from_column_slice(d, d, out.as_slice())
}

/// Asymptotic sink population for a source-localized start, read off at a
/// horizon where the system population is negligible.
pub fn asymptotic_efficiency(
    h_sys: &DMatrix<C64>,
    dephasing: &[f64],
    source: usize,
    sink_site: usize,
    trap_rate: f64,
    recombination_rate: f64,
    horizon: f64,
) -> f64 {
    let n = h_sys.nrows();
    let l = transport_lindbladian(h_sys, dephasing, sink_site, trap_rate, recombination_rate);
    let mut rho0 = DMatrix::<C64>::zeros(n + 2, n + 2);
    rho0[(source, source)] = c(1.0);
    // Step in chunks so the exponential stays well scaled.
    let chunks = (horizon / 10.0).ceil().max(1.0) as usize;
    let step = (l * c(horizon / chunks as f64)).exp();
    let mut v = DVector::from_column_slice(rho0.as_slice());
    for _ in 0..chunks {
        v = &step * v;
    }
    v[n + n * (n + 2)].re
}

/// Closed-form eigenbasis of an open uniform chain with on-site energy `eps`
/// and hopping `v`: `E_k = eps + 2v cos(kπ/(N+1))`,
/// `φ_k(m) = sqrt(2/(N+1)) sin(kπ(m+1)/(N+1))`.
pub fn chain_populations(n: usize, eps: f64, v: f64, start: usize, t: f64) -> Vec<f64> {
    let norm = (2.0 / (n + 1) as f64).sqrt();
    let phi = |k: usize, m: usize| {
        norm * ((k as f64) * std::f64::consts::PI * (m + 1) as f64 / (n + 1) as f64).sin()
    };
    (0..n)
        .map(|m| {
            let amp: C64 = (1..=n)
                .map(|k| {
                    let e = eps + 2.0 * v * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
                    C64::from_polar(phi(k, m) * phi(k, start), -e * t)
                })
                .sum();
            amp.norm_sqr()
        })
        .collect()
}

/// Fully dephased segment walk: the ensemble mean of random-phase
/// trajectories when phases decorrelate completely between segments is the
/// Markov chain with transition probabilities `|U_seg[m][n]|²`.
pub fn markov_walk(u_seg: &DMatrix<C64>, start: usize, steps: usize) -> Vec<Vec<f64>> {
    let n = u_seg.nrows();
    let p = u_seg.map(|z| z.norm_sqr());
    let mut pop = DVector::<f64>::zeros(n);
    pop[start] = 1.0;
    let mut out = vec![pop.as_slice().to_vec()];
    for _ in 0..steps {
        pop = &p * pop;
        out.push(pop.as_slice().to_vec());
    }
    out
}

/// Dense `exp(-iHt)` via Padé, for walk oracles.
pub fn dense_unitary(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    (h * C64::new(0.0, -t)).exp()
}

/// Bose–Hubbard Hamiltonian on `l` sites with `n` bosons, assembled from
/// creation/annihilation matrices on a truncated product space and then
/// restricted to the `n`-particle sector. Returns the sector matrix and the
/// occupation tuples in the oracle's own (odometer) order.
pub fn bose_hubbard_dense(
    l: usize,
    n: usize,
    edges: &[(usize, usize, f64)],
    j: f64,
    u: f64,
) -> (DMatrix<f64>, Vec<Vec<usize>>) {
    let base = n + 1;
    let mut states = Vec::new();
    let total = base.pow(l as u32);
    for code in 0..total {
        let mut occ = Vec::with_capacity(l);
        let mut x = code;
        for _ in 0..l {
            occ.push(x % base);
            x /= base;
        }
        if occ.iter().sum::<usize>() == n {
            states.push(occ);
        }
    }
    let dim = states.len();
    let find = |occ: &Vec<usize>| states.iter().position(|s| s == occ);
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (col, s) in states.iter().enumerate() {
        h[(col, col)] += 0.5 * u * s.iter().map(|&k| (k * k.saturating_sub(1)) as f64).sum::<f64>();
        for &(a, b, w) in edges {
            for (from, to) in [(a, b), (b, a)] {
                if s[from] == 0 {
                    continue;
                }
                let mut t = s.clone();
                let amp = ((s[from] * (s[to] + 1)) as f64).sqrt();
                t[from] -= 1;
                t[to] += 1;
                let row = find(&t).expect("number conserving");
                h[(row, col)] -= j * w * amp;
            }
        }
    }
    (h, states)
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Ordinary least squares fit `y = a + b x`, returning `(a, b, R²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    (intercept, slope, sxy * sxy / (sxx * syy))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_generator_matches_direct_commutator() {
        let h = DMatrix::from_row_slice(2, 2, &[c(0.5), c(1.0), c(1.0), c(-0.5)]);
        let l = dense_lindbladian(&h, &[]);
        let rho = DMatrix::from_row_slice(2, 2, &[c(0.7), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.3)]);
        let direct = (&h * &rho - &rho * &h) * C64::new(0.0, -1.0);
        let via = l * DVector::from_column_slice(rho.as_slice());
        for (a, b) in direct.iter().zip(via.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn chain_closed_form_two_sites() {
        let p = chain_populations(2, 0.0, 1.0, 0, 0.3);
        assert!((p[1] - 0.3f64.sin().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn bose_hubbard_dimer_sector() {
        let (h, states) = bose_hubbard_dense(2, 2, &[(0, 1, 1.0)], 1.0, 1.0);
        assert_eq!(states.len(), 3);
        let e = eigenvalues(&h);
        assert!((e[0] - (1.0 - 17f64.sqrt()) / 2.0).abs() < 1e-12);
    }
}
