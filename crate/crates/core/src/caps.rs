//! Sphere surface and cap volumes, the cap-fraction bound, the counting
//! bound for overlap caps, and a toy re-enactment of the Kq lower-bound
//! argument.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::density::kq_t;
use crate::elementary::{gram_span, PureState};
use crate::error::{QaeError, Result};
use crate::linalg::{inner, CVector};
use crate::machine::{enumerate, semimeasure, Budget, MachineOutput, DEFAULT_MAX_LEN_CAP};
use crate::sampling::{complex_gaussian, haar_state, real_sphere_point, rng_for};

const CHUNK: usize = 4096;

/// Default frozen constant for [`cap_fraction_bound`], fixed by
/// [`cap_constant_sweep`] on n ∈ 4..=512, y ∈ {0.05, 0.10, …, 1.0}: the
/// largest ratio there is 0.1176, at n = 4, y = 0.05.
pub const DEFAULT_CAP_CONSTANT: f64 = 0.125;

/// Default frozen constant for [`counting_lemma_fraction`], fixed by
/// [`counting_constant_sweep`] on n ≤ 6, m ≤ n, k ≤ 10 (largest ratio 0.5).
pub const DEFAULT_COUNTING_CONSTANT: f64 = 1.0;

/// ln s_n, where s_n = 2π^{n/2}/Γ(n/2) is the surface volume of the unit
/// sphere in R^n.
pub fn ln_surface(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2f64.ln() + h * PI.ln() - ln_gamma(h)
}

/// ln b_n, where b_n = π^{n/2}/Γ(n/2 + 1) is the volume of the unit ball.
pub fn ln_ball(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    h * PI.ln() - ln_gamma(h + 1.0)
}

/// s_{n−1}/s_n = Γ(n/2) / (√π Γ((n−1)/2)).
pub fn surface_ratio(n: usize) -> f64 {
    (ln_gamma(n as f64 / 2.0) - 0.5 * PI.ln() - ln_gamma((n as f64 - 1.0) / 2.0)).exp()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SurfaceIdentity {
    pub n: usize,
    /// |ln s_n − ln(n b_n)|
    pub identity_error: f64,
    /// ln s_n − ln b_{n−1}; positive when b_{n−1} < s_n.
    pub ball_margin: f64,
    /// ln((n−1) s_n) − ln s_{n−1}; positive when s_{n−1} < (n−1) s_n.
    pub surface_margin: f64,
}

pub fn surface_identity(n: usize) -> Result<SurfaceIdentity> {
    if n < 3 {
        return Err(QaeError::validation("surface identities need n >= 3"));
    }
    let s = ln_surface(n);
    Ok(SurfaceIdentity {
        n,
        identity_error: (s - ((n as f64).ln() + ln_ball(n))).abs(),
        ball_margin: s - ln_ball(n - 1),
        surface_margin: ((n - 1) as f64).ln() + s - ln_surface(n - 1),
    })
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // split once so symmetric integrands cannot fool the first estimate
    let m = 0.5 * (a + b);
    let mut total = 0.0;
    for (lo, hi) in [(a, m), (m, b)] {
        let (flo, fhi) = (f(lo), f(hi));
        let fm = f(0.5 * (lo + hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
        total += simpson(&f, lo, hi, flo, fm, fhi, whole, tol / 2.0, 48);
    }
    total
}

fn check_query(n: usize, alpha: f64) -> Result<()> {
    if n < 2 {
        return Err(QaeError::validation("cap queries need n >= 2"));
    }
    if !(0.0..=PI).contains(&alpha) {
        return Err(QaeError::validation(format!("cap half-angle {alpha} outside [0, pi]")));
    }
    Ok(())
}

/// s_n(α)/s_n = (s_{n−1}/s_n) ∫₀^α sin^{n−2}x dx.
pub fn cap_fraction_exact(n: usize, alpha: f64) -> Result<f64> {
    check_query(n, alpha)?;
    if alpha > PI / 2.0 {
        return Ok(1.0 - cap_fraction_exact(n, PI - alpha)?);
    }
    let p = (n - 2) as i32;
    let ratio = surface_ratio(n);
    let integral = adaptive_simpson(|x| x.sin().powi(p), 0.0, alpha, 1e-13 / ratio.max(1.0));
    Ok((ratio * integral).clamp(0.0, 1.0))
}

/// C·exp(−n y²/2 + ln n) for α = π/2 − y.
pub fn cap_fraction_bound(n: usize, y: f64, constant: f64) -> Result<f64> {
    if !(y > 0.0 && y <= PI / 2.0) {
        return Err(QaeError::validation(format!("y = {y} outside (0, pi/2]")));
    }
    Ok(constant * (-(n as f64) * y * y / 2.0 + (n as f64).ln()).exp())
}

/// The grid used to freeze the cap constant: n ∈ 4..=512, y = 0.05·j.
pub fn cap_sweep_grid() -> (Vec<usize>, Vec<f64>) {
    ((4..=512).collect(), (1..=20).map(|j| 0.05 * j as f64).collect())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CapSweep {
    /// max over the grid of exact / exp(−n y²/2 + ln n)
    pub max_ratio: f64,
    pub argmax: (usize, f64),
    /// points where exact exceeds the bound with the given constant
    pub violations: usize,
    /// points where the bound exceeds 1 and holds trivially
    pub trivial_points: usize,
    pub points: usize,
}

/// Exact-versus-bound sweep over a grid, with the constant under test.
pub fn cap_constant_sweep(ns: &[usize], ys: &[f64], constant: f64) -> Result<CapSweep> {
    let cells: Vec<(usize, f64)> = ns.iter().flat_map(|&n| ys.iter().map(move |&y| (n, y))).collect();
    let rows: Vec<(usize, f64, f64, f64)> = cells
        .par_iter()
        .map(|&(n, y)| {
            let exact = cap_fraction_exact(n, PI / 2.0 - y)?;
            let bound = cap_fraction_bound(n, y, constant)?;
            Ok((n, y, exact, bound))
        })
        .collect::<Result<_>>()?;
    let mut sweep = CapSweep {
        max_ratio: 0.0,
        argmax: (0, 0.0),
        violations: 0,
        trivial_points: 0,
        points: rows.len(),
    };
    for (n, y, exact, bound) in rows {
        let ratio = exact * constant / bound;
        if ratio > sweep.max_ratio {
            sweep.max_ratio = ratio;
            sweep.argmax = (n, y);
        }
        if exact > bound {
            sweep.violations += 1;
        }
        if bound >= 1.0 {
            sweep.trivial_points += 1;
        }
    }
    Ok(sweep)
}

/// g(π/2 − y) + y²/2 with g = ln sin; negative for 0 < y < π/2.
pub fn laplace_gap(y: f64) -> f64 {
    y.cos().ln() + y * y / 2.0
}

/// sin^n(π/2 − y) against e^{−n y²/2}: (lhs, rhs).
pub fn sine_power_check(n: usize, y: f64) -> (f64, f64) {
    ((PI / 2.0 - y).sin().powi(n as i32), (-(n as f64) * y * y / 2.0).exp())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    fn from_hits(hits: usize, samples: usize) -> Self {
        let p = hits as f64 / samples as f64;
        McEstimate {
            estimate: p,
            stderr: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
        }
    }

    /// |estimate − target| ≤ k·stderr, with a floor of one hit's worth.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.estimate - target).abs() <= k * self.stderr.max(1.0 / self.samples as f64)
    }
}

fn count_hits(samples: usize, seed: u64, hit: impl Fn(&mut crate::sampling::LabRng) -> bool + Sync) -> usize {
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            (0..count).filter(|_| hit(&mut rng)).count()
        })
        .sum()
}

/// Fraction of uniform unit vectors in R^n within angle α of e_1.
pub fn cap_fraction_montecarlo(n: usize, alpha: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    check_query(n, alpha)?;
    if samples == 0 {
        return Err(QaeError::validation("need at least one sample"));
    }
    let c = alpha.cos();
    let hits = count_hits(samples, seed, |rng| real_sphere_point(rng, n)[0] >= c);
    Ok(McEstimate::from_hits(hits, samples))
}

/// Fraction of unit vectors ψ ∈ C^D with |⟨φ|ψ⟩| ≥ t for a fixed φ:
/// (1 − t²)^{D−1}.
pub fn complex_cap_fraction(dim: usize, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    (1.0 - t * t).max(0.0).powi(dim as i32 - 1)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexCapCheck {
    pub qubits: u32,
    pub m: f64,
    /// samples where |⟨φ|ψ⟩| ≥ 2^{−m/2} and the real-geometry angle to the
    /// ray {e^{iθ}φ} is ≤ arccos 2^{−m/2} disagree
    pub disagreements: usize,
    pub overlap: McEstimate,
    /// (1 − 2^{−m})^{2^n − 1}
    pub exact: f64,
    /// real cap in R^{2^{n+1}} around φ alone, same half-angle
    pub single_real_cap: f64,
}

/// Samples ψ ∈ Q_n viewed in R^{2^{n+1}} and compares the overlap criterion
/// with the angle to the complex ray of φ = e_1, computed from the real
/// coordinates as arccos √(⟨u, x⟩² + ⟨iu, x⟩²).
pub fn complex_overlap_check(qubits: u32, m: f64, samples: usize, seed: u64) -> Result<ComplexCapCheck> {
    if qubits == 0 || qubits > 12 || samples == 0 {
        return Err(QaeError::validation("complex cap check needs 1 <= qubits <= 12 and samples > 0"));
    }
    let dim = 1usize << qubits;
    let t = 2f64.powf(-m / 2.0);
    let alpha = t.acos();
    let chunks = samples.div_ceil(CHUNK);
    let (hits, disagreements) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_for(seed, c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut hits = 0;
            let mut bad = 0;
            for _ in 0..count {
                let psi = haar_state(&mut rng, dim);
                let by_overlap = psi[0].norm() >= t;
                // real embedding x = (Re ψ, Im ψ); u = (e_1, 0), iu = (0, e_1)
                let (xu, xiu) = (psi[0].re, psi[0].im);
                let angle = (xu * xu + xiu * xiu).sqrt().min(1.0).acos();
                let by_angle = angle <= alpha;
                hits += by_overlap as usize;
                bad += (by_overlap != by_angle) as usize;
            }
            (hits, bad)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(ComplexCapCheck {
        qubits,
        m,
        disagreements,
        overlap: McEstimate::from_hits(hits, samples),
        exact: complex_cap_fraction(dim, t),
        single_real_cap: cap_fraction_exact(2 * dim, alpha)?,
    })
}

/// Bound of the counting lemma: exp(−2^{n−m} + k ln 2 + n).
pub fn counting_lemma_fraction(n: u32, m: f64, k: u32) -> f64 {
    (-(2f64.powf(n as f64 - m)) + k as f64 * LN_2 + n as f64).exp()
}

/// Largest Monte-Carlo workload (samples × 2^k × 2^n) accepted.
pub const COUNTING_MC_CAP: u64 = 1 << 34;

#[derive(Debug, Clone, Serialize)]
pub struct CountingCheck {
    pub n: u32,
    pub m: f64,
    pub k: u32,
    /// the lemma's bound times the frozen constant
    pub bound: f64,
    pub constant: f64,
    pub mc: McEstimate,
    /// 2^k × single-φ fraction, the union bound
    pub union_bound: f64,
    pub single_exact: f64,
}

impl CountingCheck {
    pub fn below_bound(&self, k_sigma: f64) -> bool {
        self.mc.estimate - k_sigma * self.mc.stderr <= self.bound
    }

    pub fn below_union(&self, k_sigma: f64) -> bool {
        self.mc.estimate - k_sigma * self.mc.stderr.max(1.0 / self.mc.samples as f64) <= self.union_bound
    }
}

/// Places 2^k Haar-random "program outputs" in Q_n and estimates the
/// fraction of ψ with −log₂|⟨φ_i|ψ⟩|² ≤ m for some i.
pub fn counting_montecarlo(n: u32, m: f64, k: u32, samples: usize, seed: u64, constant: f64) -> Result<CountingCheck> {
    if n == 0 || n > 12 || k > 20 || samples == 0 {
        return Err(QaeError::validation("counting scenario needs 1 <= n <= 12, k <= 20, samples > 0"));
    }
    let dim = 1usize << n;
    let r = 1usize << k;
    let work = samples as u64 * r as u64 * dim as u64;
    if work > COUNTING_MC_CAP {
        return Err(QaeError::Resource(format!("counting Monte-Carlo workload {work} exceeds {COUNTING_MC_CAP}")));
    }
    let mut rng = rng_for(seed, u64::MAX);
    let outputs: Vec<CVector> = (0..r).map(|_| haar_state(&mut rng, dim)).collect();
    let t2 = 2f64.powf(-m);
    let hits = count_hits(samples, seed, |rng| {
        let psi = haar_state(rng, dim);
        outputs.iter().any(|phi| inner(phi, &psi).norm_sqr() >= t2)
    });
    let single = complex_cap_fraction(dim, t2.sqrt());
    Ok(CountingCheck {
        n,
        m,
        k,
        bound: constant * counting_lemma_fraction(n, m, k),
        constant,
        mc: McEstimate::from_hits(hits, samples),
        union_bound: (r as f64 * single).min(1.0),
        single_exact: single,
    })
}

/// max over n ≤ 6, m ∈ 1..=n, k ≤ 10 of the union bound 2^k (1 − 2^{−m})^{2^n−1}
/// divided by the lemma's expression; the frozen constant must cover it.
pub fn counting_constant_sweep() -> f64 {
    let mut worst = 0.0f64;
    for n in 1..=6u32 {
        for m in 1..=n {
            for k in 0..=10u32 {
                let union = 2f64.powi(k as i32) * complex_cap_fraction(1 << n, 2f64.powf(-(m as f64) / 2.0));
                worst = worst.max(union / counting_lemma_fraction(n, m as f64, k));
            }
        }
    }
    worst
}

/// −n²/2 + n(2 ln 2 + 1) + c − 1
pub fn kq_exponent(n: f64, c: f64) -> f64 {
    -n * n / 2.0 + n * (2.0 * LN_2 + 1.0) + c - 1.0
}

/// Largest real root of [`kq_exponent`] in n; the exponent is negative
/// beyond it.
pub fn kq_exponent_crossing(c: f64) -> Option<f64> {
    let b = 2.0 * LN_2 + 1.0;
    let disc = b * b + 2.0 * (c - 1.0);
    (disc >= 0.0).then(|| b + disc.sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct Distribution {
    pub min: f64,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

impl Distribution {
    fn of(mut xs: Vec<f64>) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        xs.sort_by(|a, b| a.total_cmp(b));
        let finite: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
        let mean = if finite.len() == xs.len() {
            xs.iter().sum::<f64>() / xs.len() as f64
        } else {
            f64::INFINITY
        };
        Some(Distribution {
            min: xs[0],
            mean,
            median: xs[xs.len() / 2],
            max: xs[xs.len() - 1],
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KqScenario {
    pub qubits: u32,
    pub budget: Budget,
    pub threshold: u32,
    /// distinct state outputs with K_t < threshold
    pub short_outputs: usize,
    pub v_dim: usize,
    pub degenerate: bool,
    pub samples: usize,
    /// largest |⟨φ|ψ⟩|² between a sampled ψ and a short output
    pub max_short_overlap: f64,
    pub kq: Option<Distribution>,
    /// samples with Kq_t(ψ) < threshold
    pub kq_violations: usize,
    /// K_{m,t} with m = n − 2 log₂ n: shortest program within overlap 2^{−m};
    /// +∞ when no enumerated output is that close
    pub k_m_order: f64,
    pub k_m: Option<Distribution>,
    pub exponent_c: f64,
    pub exponent_at_n: f64,
    pub exponent_crossing: Option<f64>,
}

impl KqScenario {
    pub fn holds(&self) -> bool {
        !self.degenerate && self.kq_violations == 0
    }
}

/// Toy re-enactment of the Kq lower-bound argument on Q_n.
pub fn kq_lowerbound_scenario(
    qubits: u32,
    budget: Budget,
    threshold: Option<u32>,
    samples: usize,
    seed: u64,
    exponent_c: f64,
    ortho_tol: f64,
) -> Result<KqScenario> {
    if qubits == 0 || qubits > 6 {
        return Err(QaeError::validation("kq scenario runs at 1 <= qubits <= 6"));
    }
    let dim = 1usize << qubits;
    let threshold = threshold.unwrap_or(qubits.saturating_sub(1));
    let snapshot = enumerate(dim, budget, DEFAULT_MAX_LEN_CAP)?;
    let table = semimeasure(&snapshot);
    let short: Vec<CVector> = table
        .entries()
        .iter()
        .filter(|e| e.shortest < threshold as usize)
        .filter_map(|e| match &e.output {
            MachineOutput::State(v) => Some(v.to_complex()),
            MachineOutput::Projector(_) => None,
        })
        .collect();
    let short_span = gram_span(&short, ortho_tol);
    let mut seeds = short_span.clone();
    seeds.extend((0..dim).map(|i| {
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        e[i] = Complex64::new(1.0, 0.0);
        e
    }));
    let v_basis: Vec<CVector> = gram_span(&seeds, ortho_tol).split_off(short_span.len());
    let n = qubits as f64;
    let m_order = n - 2.0 * n.log2();
    let mut report = KqScenario {
        qubits,
        budget,
        threshold,
        short_outputs: short.len(),
        v_dim: v_basis.len(),
        degenerate: v_basis.is_empty(),
        samples,
        max_short_overlap: 0.0,
        kq: None,
        kq_violations: 0,
        k_m_order: m_order,
        k_m: None,
        exponent_c,
        exponent_at_n: kq_exponent(n, exponent_c),
        exponent_crossing: kq_exponent_crossing(exponent_c),
    };
    if report.degenerate {
        return Ok(report);
    }
    let states: Vec<(usize, CVector)> = table
        .entries()
        .iter()
        .filter_map(|e| match &e.output {
            MachineOutput::State(v) => v.normalize().ok().map(|p| (e.shortest, p.into_vec())),
            MachineOutput::Projector(_) => None,
        })
        .collect();
    let t_m = 2f64.powf(-m_order);
    let rows: Vec<(f64, f64, f64)> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = rng_for(seed, s as u64);
            let mut psi = vec![Complex64::new(0.0, 0.0); dim];
            for b in &v_basis {
                let g = complex_gaussian(&mut rng);
                for (x, y) in psi.iter_mut().zip(b) {
                    *x += g * y;
                }
            }
            let psi = PureState::from_unnormalized(psi)?;
            let kq = kq_t(&table, &psi)?;
            let short_ov = short_span
                .iter()
                .map(|b| inner(b, psi.amplitudes()).norm_sqr())
                .fold(0.0, f64::max);
            let k_m = states
                .iter()
                .filter(|(_, phi)| inner(phi, psi.amplitudes()).norm_sqr() >= t_m)
                .map(|(l, _)| *l as f64)
                .fold(f64::INFINITY, f64::min);
            Ok((kq, short_ov, k_m))
        })
        .collect::<Result<_>>()?;
    report.max_short_overlap = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    report.kq_violations = rows.iter().filter(|r| r.0 < threshold as f64).count();
    report.kq = Distribution::of(rows.iter().map(|r| r.0).collect());
    report.k_m = Distribution::of(rows.iter().map(|r| r.2).collect());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_on_known_integrals() {
        assert!((adaptive_simpson(|x| x.sin(), 0.0, PI, 1e-12) - 2.0).abs() < 1e-11);
        assert!((adaptive_simpson(|x| x * x, 0.0, 3.0, 1e-12) - 9.0).abs() < 1e-12);
        assert!((adaptive_simpson(|x| (-x * x).exp(), -8.0, 8.0, 1e-12) - PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn surfaces_and_balls() {
        assert!((ln_surface(3) - (4.0 * PI).ln()).abs() < 1e-14);
        assert!((ln_ball(2) - PI.ln()).abs() < 1e-14);
        assert!((surface_ratio(3) - 0.5).abs() < 1e-14);
        for n in 3..=512 {
            let s = surface_identity(n).unwrap();
            assert!(s.identity_error <= 1e-12, "{s:?}");
            assert!(s.ball_margin > 0.0 && s.surface_margin > 0.0, "{s:?}");
        }
    }

    #[test]
    fn cap_fraction_closed_forms() {
        for n in [2, 3, 7, 64, 512] {
            assert_eq!(cap_fraction_exact(n, PI).unwrap(), 1.0);
            assert_eq!(cap_fraction_exact(n, 0.0).unwrap(), 0.0);
            assert!((cap_fraction_exact(n, PI / 2.0).unwrap() - 0.5).abs() < 1e-10);
        }
        for a in [0.1, 0.7, 1.5, 2.9] {
            assert!((cap_fraction_exact(2, a).unwrap() - a / PI).abs() < 1e-12);
            // on S² the cap area is 2π(1 − cos α)
            assert!((cap_fraction_exact(3, a).unwrap() - (1.0 - a.cos()) / 2.0).abs() < 1e-11);
        }
        let mut prev = 0.0;
        for j in 1..=60 {
            let f = cap_fraction_exact(10, PI * j as f64 / 60.0).unwrap();
            assert!(f >= prev);
            prev = f;
        }
        assert!(cap_fraction_exact(1, 0.3).is_err());
        assert!(cap_fraction_exact(4, 3.5).is_err());
    }

    #[test]
    fn laplace_and_sine_power() {
        for j in 1..100 {
            let y = j as f64 * (PI / 2.0) / 100.0;
            assert!(laplace_gap(y) < 0.0);
        }
        let (l, r) = sine_power_check(100, 0.3);
        assert!(l <= r);
        assert!(cap_fraction_bound(10, 0.0, 1.0).is_err());
    }

    #[test]
    fn frozen_cap_constant_covers_a_coarse_grid() {
        let ns: Vec<usize> = (4..=512).step_by(29).collect();
        let ys: Vec<f64> = (1..=20).map(|j| 0.05 * j as f64).collect();
        let s = cap_constant_sweep(&ns, &ys, DEFAULT_CAP_CONSTANT).unwrap();
        assert_eq!(s.violations, 0, "{s:?}");
        assert!(s.max_ratio <= DEFAULT_CAP_CONSTANT);
    }

    #[test]
    fn montecarlo_cap() {
        let e = cap_fraction_montecarlo(4, PI / 2.0, 20_000, 1).unwrap();
        assert!(e.agrees_with(0.5, 4.0));
        let exact = cap_fraction_exact(4, PI / 3.0).unwrap();
        let e = cap_fraction_montecarlo(4, PI / 3.0, 100_000, 2).unwrap();
        assert!(e.agrees_with(exact, 4.0), "{e:?} vs {exact}");
        assert_eq!(cap_fraction_montecarlo(4, PI / 3.0, 100_000, 2).unwrap().estimate, e.estimate);
    }

    #[test]
    fn complex_convention() {
        let c = complex_overlap_check(3, 2.0, 50_000, 3).unwrap();
        assert_eq!(c.disagreements, 0);
        assert!(c.overlap.agrees_with(c.exact, 4.0), "{c:?}");
        assert!(c.single_real_cap <= c.exact);
    }

    #[test]
    fn counting_bound() {
        assert!(counting_constant_sweep() <= DEFAULT_COUNTING_CONSTANT);
        let c = counting_montecarlo(4, 2.0, 4, 2000, 4, DEFAULT_COUNTING_CONSTANT).unwrap();
        assert!(c.below_bound(0.0) && c.below_union(4.0), "{c:?}");
        let c0 = counting_montecarlo(4, 2.0, 0, 50_000, 5, DEFAULT_COUNTING_CONSTANT).unwrap();
        assert!(c0.mc.agrees_with(c0.single_exact, 4.0), "{c0:?}");
        assert!(counting_montecarlo(12, 1.0, 20, 10, 1, 1.0).is_err());
    }

    #[test]
    fn exponent() {
        let c = kq_exponent_crossing(0.0).unwrap();
        assert!(kq_exponent(c, 0.0).abs() < 1e-12);
        assert!((4.30..4.31).contains(&c));
        for n in 17..200 {
            assert!(kq_exponent(n as f64, 0.0) < 0.0);
        }
        // the boundary value of c at n = 16
        assert!(kq_exponent(16.0, 90.8) < 0.0 && kq_exponent(16.0, 90.9) > 0.0);
    }

    #[test]
    fn kq_scenario_small() {
        let r = kq_lowerbound_scenario(2, Budget::new(9, 100), Some(6), 200, 6, 0.0, 1e-9).unwrap();
        assert!(r.short_outputs > 0 && r.v_dim > 0 && r.v_dim < 4, "{r:?}");
        assert!(r.holds(), "{r:?}");
        assert!(r.max_short_overlap < 1e-20);
        let full = kq_lowerbound_scenario(2, Budget::new(9, 100), Some(20), 10, 6, 0.0, 1e-9).unwrap();
        assert!(full.degenerate);
    }
}
