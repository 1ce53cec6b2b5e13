//! Symmetric subspaces, the cloning complexity bounds, and unevenness.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::{build_mu, h_upper, UniversalApprox};
use crate::dyadic::Dyadic;
use crate::elementary::PureState;
use crate::entropy::small_subspace_upper_bounds;
use crate::error::{QaeError, Result};
use crate::linalg::{jacobi_eigen, kron_vec, norm, CVector, ComplexMatrix, HermitianOperator, Tolerances};
use crate::machine::{
    decode, enumerate, semimeasure, symmetric_projector_program, Budget, MachineOutput, SemimeasureTable, DEFAULT_MAX_LEN_CAP,
};
use crate::sampling::{haar_state, random_symmetric, rng_for, LabRng};

/// Default cap on N^m.
pub const DEFAULT_DIM_CAP: usize = 1 << 12;

/// binom(n, k), exact.
pub fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// dim S_{N,m} = binom(m + N − 1, m).
pub fn symmetric_dim(n: usize, m: u32) -> u128 {
    binomial(m as u64 + n as u64 - 1, m as u64)
}

fn checked_power(n: usize, m: u32, cap: usize) -> Result<usize> {
    match n.checked_pow(m) {
        Some(d) if d <= cap => Ok(d),
        _ => Err(QaeError::Resource(format!("{n}^{m} exceeds the dimension cap {cap}"))),
    }
}

fn digits(mut x: usize, n: usize, m: u32) -> Vec<usize> {
    let mut d = vec![0; m as usize];
    for k in (0..m as usize).rev() {
        d[k] = x % n;
        x /= n;
    }
    d
}

#[derive(Debug, Clone)]
pub struct SymmetricSubspace {
    pub n: usize,
    pub m: u32,
    pub projector: HermitianOperator,
    pub dim: u128,
}

/// P_S = (1/m!) Σ_π W_π. Entry (x, y) is 1/|orbit(x)| when y permutes the
/// tensor factors of x and 0 otherwise, which is the same average.
pub fn symmetric_projector(n: usize, m: u32, cap: usize) -> Result<SymmetricSubspace> {
    let total = checked_power(n, m, cap)?;
    let keys: Vec<Vec<usize>> = (0..total)
        .map(|x| {
            let mut d = digits(x, n, m);
            d.sort_unstable();
            d
        })
        .collect();
    let mut orbit_size = std::collections::HashMap::new();
    for k in &keys {
        *orbit_size.entry(k.clone()).or_insert(0usize) += 1;
    }
    let p = ComplexMatrix::from_fn(total, |i, j| {
        if keys[i] == keys[j] {
            Complex64::new(1.0 / orbit_size[&keys[i]] as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Ok(SymmetricSubspace {
        n,
        m,
        projector: HermitianOperator::from_hermitian_part(&p),
        dim: symmetric_dim(n, m),
    })
}

/// ψ^{⊗m}
pub fn tensor_power(psi: &[Complex64], m: u32) -> CVector {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..m {
        out = kron_vec(&out, psi);
    }
    out
}

/// U^{⊗m}
pub fn operator_power(u: &ComplexMatrix, m: u32) -> ComplexMatrix {
    let mut out = ComplexMatrix::identity(1);
    for _ in 0..m {
        out = out.kron(u);
    }
    out
}

/// Permutation operator W_π on H_N^{⊗m}: factor k moves to slot perm[k].
pub fn permutation_operator(n: usize, perm: &[usize]) -> ComplexMatrix {
    let m = perm.len() as u32;
    let total = n.pow(m);
    let mut w = ComplexMatrix::zeros(total);
    for x in 0..total {
        let d = digits(x, n, m);
        let mut e = vec![0; d.len()];
        for (k, &p) in perm.iter().enumerate() {
            e[p] = d[k];
        }
        let y = e.iter().fold(0, |acc, &v| acc * n + v);
        w[(y, x)] = Complex64::new(1.0, 0.0);
    }
    w
}

#[derive(Debug, Clone)]
pub struct TwirlAverage {
    pub average: ComplexMatrix,
    /// Largest per-entry standard error of the mean.
    pub stderr: f64,
    pub samples: usize,
}

const CHUNK: usize = 256;

/// Monte-Carlo mean of |ψ⟩^{⊗m}⟨ψ|^{⊗m} over Haar ψ. Samples are drawn in
/// fixed chunks, each from its own (seed, chunk) stream, so the result is
/// independent of the thread count.
pub fn twirl_average(n: usize, m: u32, samples: usize, seed: u64, cap: usize) -> Result<TwirlAverage> {
    let total = checked_power(n, m, cap)?;
    if samples < 2 {
        return Err(QaeError::validation("twirl needs at least two samples"));
    }
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(Vec<Complex64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut sum = vec![Complex64::new(0.0, 0.0); total * total];
            let mut sq = vec![0.0; total * total];
            for _ in 0..count {
                let v = tensor_power(&haar_state(&mut rng, n), m);
                for i in 0..total {
                    for j in 0..total {
                        let x = v[i] * v[j].conj();
                        sum[i * total + j] += x;
                        sq[i * total + j] += x.norm_sqr();
                    }
                }
            }
            (sum, sq)
        })
        .collect();
    let mut sum = vec![Complex64::new(0.0, 0.0); total * total];
    let mut sq = vec![0.0; total * total];
    for (s, q) in partial {
        for k in 0..total * total {
            sum[k] += s[k];
            sq[k] += q[k];
        }
    }
    let ns = samples as f64;
    let mut stderr = 0.0f64;
    for k in 0..total * total {
        let mean = sum[k] / ns;
        let var = (sq[k] / ns - mean.norm_sqr()).max(0.0) * ns / (ns - 1.0);
        stderr = stderr.max((var / ns).sqrt());
    }
    let average = ComplexMatrix::from_row_major(sum.into_iter().map(|x| x / ns).collect())?;
    Ok(TwirlAverage {
        average,
        stderr,
        samples,
    })
}

/// Frobenius distance of the twirl average from P_S/dim at each sample
/// count, and the least-squares slope of log error against log samples.
pub fn twirl_convergence(n: usize, m: u32, counts: &[usize], seed: u64) -> Result<(Vec<(usize, f64)>, f64)> {
    let s = symmetric_projector(n, m, DEFAULT_DIM_CAP)?;
    let target = s.projector.matrix().scale(1.0 / s.dim as f64);
    let mut pts = Vec::new();
    for (k, &c) in counts.iter().enumerate() {
        let t = twirl_average(n, m, c, seed.wrapping_add(k as u64), DEFAULT_DIM_CAP)?;
        pts.push((c, (&t.average - &target).frobenius_norm()));
    }
    let xs: Vec<f64> = pts.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok((pts, num / den))
}

#[derive(Debug, Clone, Serialize)]
pub struct CloningBounds {
    pub n: usize,
    pub m: u32,
    pub binom: u128,
    pub log2_binom: f64,
    /// K_t(P_S), the length of the injected PROJ program.
    pub k_ps: usize,
    /// max over samples of H̄(ψ^{⊗m}) − (K_t(P_S) + log₂ binom); ≤ 0 in theory.
    pub upper_excess: f64,
    /// −log₂ of the Monte-Carlo mean of ⟨ψ^{⊗m}|μ|ψ^{⊗m}⟩.
    pub lower_estimate: f64,
    /// Standard error of `lower_estimate`, in bits.
    pub lower_stderr_bits: f64,
    /// −log₂(Tr(μP_S)/binom), the infinite-sample value of `lower_estimate`.
    pub lower_exact: f64,
    pub samples: usize,
}

impl CloningBounds {
    pub fn upper_holds(&self, slack: f64) -> bool {
        self.upper_excess <= slack
    }

    pub fn lower_holds(&self, margin_bits: f64) -> bool {
        self.lower_estimate >= self.log2_binom - margin_bits
    }
}

/// μ over H_N^{⊗m} with the P_S program injected into the snapshot.
pub fn cloning_setting(
    n: usize,
    m: u32,
    budget: Budget,
    eps_reg: Dyadic,
    tol: &Tolerances,
) -> Result<(UniversalApprox, SemimeasureTable, MachineOutput)> {
    let dim = checked_power(n, m, DEFAULT_DIM_CAP)?;
    let prog = symmetric_projector_program(n, m)?;
    let snap = enumerate(dim, budget, DEFAULT_MAX_LEN_CAP)?.with_programs(std::slice::from_ref(&prog))?;
    let ps = decode(&prog, dim).map_err(|r| QaeError::validation(format!("P_S program rejected: {r:?}")))?;
    Ok((build_mu(&snap, eps_reg, tol)?, semimeasure(&snap), ps))
}

pub fn cloning_bounds(
    n: usize,
    m: u32,
    budget: Budget,
    eps_reg: Dyadic,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<CloningBounds> {
    let (ua, table, ps) = cloning_setting(n, m, budget, eps_reg, tol)?;
    let binom = symmetric_dim(n, m);
    let log2_binom = (binom as f64).log2();
    let chunks = samples.div_ceil(CHUNK);
    let per_chunk: Vec<Result<(f64, f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c as u64);
            let (mut s, mut s2, mut worst) = (0.0, 0.0, f64::NEG_INFINITY);
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let psi = PureState::new(tensor_power(&haar_state(&mut rng, n), m))?;
                let e = ua.mu().expectation(psi.amplitudes());
                s += e;
                s2 += e * e;
                let r = small_subspace_upper_bounds(&ua, &table, &ps, &psi)?;
                worst = f64::max(worst, r.h_upper - (r.upper_rhs + r.c_upper));
            }
            Ok((s, s2, worst))
        })
        .collect();
    let (mut s, mut s2, mut worst) = (0.0, 0.0, f64::NEG_INFINITY);
    for r in per_chunk {
        let (a, b, w) = r?;
        s += a;
        s2 += b;
        worst = worst.max(w);
    }
    let ns = samples as f64;
    let mean = s / ns;
    let var = (s2 / ns - mean * mean).max(0.0) * ns / (ns - 1.0).max(1.0);
    let se = (var / ns).sqrt();
    let tr = ps.projector().matrix().hs_inner(ua.mu().matrix()).re;
    Ok(CloningBounds {
        n,
        m,
        binom,
        log2_binom,
        k_ps: table.complexity(&ps).expect("injected"),
        upper_excess: worst,
        lower_estimate: -mean.log2(),
        lower_stderr_bits: se / (mean * std::f64::consts::LN_2),
        lower_exact: -(tr / binom as f64).log2(),
        samples,
    })
}

/// Largest H̄(ψ⊗ψ) − H̄(ψ) over sampled ψ.
pub fn cloning_gap(single: &UniversalApprox, double: &UniversalApprox, samples: usize, seed: u64) -> Result<f64> {
    let n = single.dim();
    let mut rng = rng_for(seed, 0);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..samples {
        let v = haar_state(&mut rng, n);
        let psi = PureState::new(v.clone())?;
        let psi2 = PureState::new(tensor_power(&v, 2))?;
        best = best.max(h_upper(double, &psi2)? - h_upper(single, &psi)?);
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct UnevennessResult {
    pub n: usize,
    pub u: f64,
}

/// u(A) = ‖A†A‖ / Tr A†A for a symmetric A.
pub fn unevenness(a: &ComplexMatrix, tol: &Tolerances) -> Result<UnevennessResult> {
    if a.symmetry_defect() > tol.herm_tol {
        return Err(QaeError::validation("matrix is not symmetric"));
    }
    let f2: f64 = a.as_slice().iter().map(|c| c.norm_sqr()).sum();
    if f2 == 0.0 {
        return Err(QaeError::validation("unevenness of the zero matrix"));
    }
    let ata = HermitianOperator::from_hermitian_part(&a.adjoint().matmul(a));
    Ok(UnevennessResult {
        n: a.dim(),
        u: ata.max_eigenvalue()? / f2,
    })
}

/// Takagi top pair: σ_max and a unit z with A·z̄ = σ_max·z, read off the top
/// eigenvector (x, y) of the real symmetric [[Re A, Im A], [Im A, −Re A]] as
/// z = x + iy. Degenerate singular values need no special handling.
pub fn takagi_top(a: &ComplexMatrix) -> Result<(f64, CVector)> {
    let n = a.dim();
    let big = ComplexMatrix::from_fn(2 * n, |i, j| {
        let (bi, bj) = (i % n, j % n);
        let v = a[(bi, bj)];
        let r = match (i < n, j < n) {
            (true, true) => v.re,
            (true, false) | (false, true) => v.im,
            (false, false) => -v.re,
        };
        Complex64::new(r, 0.0)
    });
    let es = jacobi_eigen(&big)?;
    let top = es.vector(0);
    // the solver may return a complex phase on a real eigenvector
    let phase = top
        .iter()
        .copied()
        .max_by(|p, q| p.norm().total_cmp(&q.norm()))
        .map(|c| c.conj() / c.norm())
        .unwrap_or(Complex64::new(1.0, 0.0));
    let z: CVector = (0..n)
        .map(|i| Complex64::new((top[i] * phase).re, (top[i + n] * phase).re))
        .collect();
    let nz = norm(&z);
    Ok((es.values[0], z.into_iter().map(|c| c / nz).collect()))
}

/// |⟨α|φ⊗φ⟩|² = |Σ conj(A_ij) φ_i φ_j|² for Frobenius-normalized A.
pub fn product_overlap(a: &ComplexMatrix, phi: &[Complex64]) -> f64 {
    let n = a.dim();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)].conj() * phi[i] * phi[j];
        }
    }
    s.norm_sqr()
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapSupCheck {
    pub u: f64,
    pub search_max: f64,
    pub witness: f64,
}

impl OverlapSupCheck {
    pub fn holds(&self, search_tol: f64) -> bool {
        self.search_max <= self.u + 1e-9 && self.search_max >= self.u - search_tol && (self.witness - self.u).abs() <= 1e-8
    }
}

fn refine(a_bar: &ComplexMatrix, mut phi: CVector, iters: usize) -> CVector {
    // averaged ascent on |φᵀĀφ|: the phase of s keeps degenerate
    // directions from cycling between φ and conj(φ)
    for _ in 0..iters {
        let b = a_bar.apply(&phi);
        let nb = norm(&b);
        if nb == 0.0 {
            break;
        }
        let s: Complex64 = phi.iter().zip(&b).map(|(p, q)| p * q).sum();
        let rot = if s.norm() > 0.0 { s / s.norm() } else { Complex64::new(1.0, 0.0) };
        let next: CVector = phi.iter().zip(&b).map(|(p, q)| p + rot * q.conj() / nb).collect();
        let nn = norm(&next);
        if nn == 0.0 {
            break;
        }
        let next: CVector = next.into_iter().map(|c| c / nn).collect();
        let step = next.iter().zip(&phi).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>();
        phi = next;
        if step < 1e-26 {
            break;
        }
    }
    phi
}

/// sup_φ |⟨α|φ⊗φ⟩|² by sampled starts refined with an ascent toward
/// φ ∝ e^{i arg s} conj(Āφ), against u(A) and the Takagi witness.
pub fn overlap_sup_check(a: &ComplexMatrix, samples: usize, rng: &mut LabRng, tol: &Tolerances) -> Result<OverlapSupCheck> {
    let a = a.scale(1.0 / a.frobenius_norm());
    let u = unevenness(&a, tol)?.u;
    let a_bar = a.conj();
    let mut best = 0.0f64;
    for _ in 0..samples {
        let phi = refine(&a_bar, haar_state(rng, a.dim()), 5000);
        best = best.max(product_overlap(&a, &phi));
    }
    let (_, z) = takagi_top(&a)?;
    Ok(OverlapSupCheck {
        u,
        search_max: best,
        witness: product_overlap(&a, &z),
    })
}

/// N′ = N(N+1)/2, the dimension of the symmetric N×N matrices.
pub fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Frobenius-orthonormal basis of a random d-dimensional subspace of
/// complex symmetric N×N matrices.
pub fn random_symmetric_subspace(rng: &mut LabRng, n: usize, d: usize) -> Vec<ComplexMatrix> {
    let mut basis: Vec<ComplexMatrix> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut a = random_symmetric(rng, n);
        for b in &basis {
            let c = b.hs_inner(&a);
            a = &a - &b.scale_c(c);
        }
        let f = a.frobenius_norm();
        if f > 1e-8 {
            basis.push(a.scale(1.0 / f));
        }
    }
    basis
}

/// Lower estimate of u(F) = max over unit A ∈ F of u(A): alternate the
/// best coefficients for fixed φ, c ∝ conj(φᵀB_kφ), with a power step in φ.
pub fn subspace_unevenness(basis: &[ComplexMatrix], restarts: usize, rng: &mut LabRng) -> f64 {
    let n = basis[0].dim();
    let mut best = 0.0f64;
    for _ in 0..restarts {
        let mut phi = haar_state(rng, n);
        let mut val = 0.0;
        for _ in 0..200 {
            let q: Vec<Complex64> = basis
                .iter()
                .map(|b| {
                    let bphi = b.apply(&phi);
                    phi.iter().zip(&bphi).map(|(x, y)| x * y).sum()
                })
                .collect();
            let qn: f64 = q.iter().map(|c| c.norm_sqr()).sum();
            let new_val = qn;
            let qn = qn.sqrt();
            if qn == 0.0 {
                break;
            }
            let mut a = ComplexMatrix::zeros(n);
            for (b, c) in basis.iter().zip(&q) {
                a = &a + &b.scale_c(c.conj() / qn);
            }
            phi = refine(&a, phi, 1);
            if (new_val - val).abs() < 1e-15 {
                val = new_val;
                break;
            }
            val = new_val;
        }
        best = best.max(val);
    }
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraicBoundReport {
    pub n: usize,
    pub d: usize,
    pub bound: f64,
    pub trials: usize,
    /// Smallest u(F) found, an empirical estimate of u(d, N).
    pub min_found: f64,
}

impl AlgebraicBoundReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.min_found >= self.bound - tol
    }
}

/// u(F) ≥ d/N′ over random d-dimensional subspaces F.
pub fn algebraic_bound_check(n: usize, d: usize, trials: usize, restarts: usize, seed: u64) -> Result<AlgebraicBoundReport> {
    let np = sym_dim(n);
    if d == 0 || d >= np {
        return Err(QaeError::validation(format!("need 0 < d < N′ = {np}, got d = {d}")));
    }
    if n > 4 {
        return Err(QaeError::Resource("algebraic bound search is limited to N ≤ 4".into()));
    }
    let min_found = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(seed, t as u64);
            let basis = random_symmetric_subspace(&mut rng, n, d);
            subspace_unevenness(&basis, restarts, &mut rng)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(AlgebraicBoundReport {
        n,
        d,
        bound: d as f64 / np as f64,
        trials,
        min_found,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::default_eps_reg;
    use crate::sampling::haar_unitary;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn dimensions_match_binomials() {
        for (n, m, d) in [(2, 2, 3u128), (2, 3, 4), (3, 2, 6), (4, 2, 10), (2, 1, 2)] {
            assert_eq!(symmetric_dim(n, m), d);
            let s = symmetric_projector(n, m, DEFAULT_DIM_CAP).unwrap();
            assert!((s.projector.trace() - d as f64).abs() < 1e-8);
        }
        assert_eq!(binomial(10, 3), 120);
        assert!(symmetric_projector(4, 7, DEFAULT_DIM_CAP).is_err());
    }

    #[test]
    fn projector_algebra() {
        let s = symmetric_projector(2, 2, DEFAULT_DIM_CAP).unwrap();
        let p = s.projector.matrix();
        assert!(p.matmul(p).max_abs_diff(p) < 1e-12);
        assert!(p.hermiticity_defect() < 1e-15);
        // spans |00>, |11>, (|01>+|10>)/sqrt2
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let sym = [0.0, h, h, 0.0].map(|x| Complex64::new(x, 0.0));
        assert!((s.projector.expectation(&sym) - 1.0).abs() < 1e-12);
        let anti = [0.0, h, -h, 0.0].map(|x| Complex64::new(x, 0.0));
        assert!(s.projector.expectation(&anti).abs() < 1e-12);
        let id = symmetric_projector(3, 1, DEFAULT_DIM_CAP).unwrap();
        assert!(id.projector.matrix().max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
        let s3 = symmetric_projector(2, 3, DEFAULT_DIM_CAP).unwrap();
        let w = permutation_operator(2, &[1, 2, 0]);
        assert!(w.matmul(s3.projector.matrix()).max_abs_diff(s3.projector.matrix()) < 1e-12);
        let mut rng = rng_for(30, 0);
        for _ in 0..5 {
            let u = operator_power(&haar_unitary(&mut rng, 2), 3);
            let c = &u.matmul(s3.projector.matrix()) - &s3.projector.matrix().matmul(&u);
            assert!(c.max_abs() < 1e-8);
        }
    }

    #[test]
    fn twirl_matches_projector() {
        let s = symmetric_projector(2, 2, DEFAULT_DIM_CAP).unwrap();
        let t = twirl_average(2, 2, 10_000, 7, DEFAULT_DIM_CAP).unwrap();
        let target = s.projector.matrix().scale(1.0 / 3.0);
        assert!(t.average.max_abs_diff(&target) <= 5.0 * t.stderr);
        let off = &ComplexMatrix::identity(4) - s.projector.matrix();
        assert!(off.matmul(&t.average).max_abs() < 1e-12);
        let t1 = twirl_average(3, 1, 5000, 8, DEFAULT_DIM_CAP).unwrap();
        assert!(t1.average.max_abs_diff(&ComplexMatrix::identity(3).scale(1.0 / 3.0)) <= 3.0 * t1.stderr);
        // thread count must not matter
        let again = twirl_average(2, 2, 10_000, 7, DEFAULT_DIM_CAP).unwrap();
        assert_eq!(again.average, t.average);
    }

    #[test]
    fn twirl_error_decays_like_inverse_sqrt() {
        let (_, slope) = twirl_convergence(2, 2, &[100, 1000, 10_000, 100_000], 9).unwrap();
        assert!((slope + 0.5).abs() < 0.15, "slope {slope}");
    }

    #[test]
    fn cloning_bounds_two_copies() {
        let b = cloning_bounds(2, 2, Budget::new(12, 10_000), default_eps_reg(), 2000, 11, &tol()).unwrap();
        assert_eq!(b.binom, 3);
        assert!(b.upper_holds(1e-9), "{b:?}");
        assert!(b.lower_holds(0.1), "{b:?}");
        assert!(b.lower_exact >= b.log2_binom);
    }

    #[test]
    fn cloning_bounds_three_copies_and_one() {
        let b = cloning_bounds(2, 3, Budget::new(10, 10_000), default_eps_reg(), 1000, 12, &tol()).unwrap();
        assert_eq!(b.binom, 4);
        assert!(b.upper_holds(1e-9) && b.lower_holds(0.1), "{b:?}");
        let b = cloning_bounds(2, 1, Budget::new(10, 10_000), default_eps_reg(), 1000, 13, &tol()).unwrap();
        assert!(b.upper_holds(1e-9) && b.lower_holds(0.1), "{b:?}");
    }

    #[test]
    fn unevenness_examples() {
        let u = unevenness(&ComplexMatrix::identity(3), &tol()).unwrap().u;
        assert!((u - 1.0 / 3.0).abs() < 1e-15);
        let v = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0), Complex64::new(-1.0, 1.0)];
        let rank1 = ComplexMatrix::from_fn(3, |i, j| v[i] * v[j]);
        assert!((unevenness(&rank1, &tol()).unwrap().u - 1.0).abs() < 1e-12);
        assert!(unevenness(&ComplexMatrix::zeros(2), &tol()).is_err());
        let mut rng = rng_for(31, 0);
        let h = crate::sampling::random_hermitian(&mut rng, 3);
        assert!(unevenness(&h, &tol()).is_err() || h.symmetry_defect() <= tol().herm_tol);
        for _ in 0..20 {
            let a = random_symmetric(&mut rng, 4);
            let r = unevenness(&a, &tol()).unwrap();
            let (sigma, _) = takagi_top(&a).unwrap();
            assert!((r.u - sigma * sigma / a.frobenius_norm().powi(2)).abs() < 1e-10);
            assert!(r.u >= 0.25 - 1e-12 && r.u <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn overlap_sup_examples() {
        let mut rng = rng_for(32, 0);
        let e11 = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let r = overlap_sup_check(&e11, 20, &mut rng, &tol()).unwrap();
        assert!((r.search_max - 1.0).abs() < 1e-9 && r.holds(1e-6));
        let r = overlap_sup_check(&ComplexMatrix::identity(3), 20, &mut rng, &tol()).unwrap();
        assert!((r.u - 1.0 / 3.0).abs() < 1e-12 && r.holds(1e-6), "{r:?}");
        for n in 2..=4 {
            for _ in 0..20 {
                let a = random_symmetric(&mut rng, n);
                let r = overlap_sup_check(&a, 20, &mut rng, &tol()).unwrap();
                assert!(r.holds(1e-6), "{r:?}");
            }
        }
    }

    #[test]
    fn algebraic_bound() {
        for d in [1, 2] {
            let r = algebraic_bound_check(2, d, 300, 32, 40 + d as u64).unwrap();
            assert!(r.holds(1e-6), "{r:?}");
        }
        assert!(algebraic_bound_check(2, 3, 10, 4, 1).is_err());
        assert!(algebraic_bound_check(2, 0, 10, 4, 1).is_err());
    }
}
