//! Budgeted universal semi-density μ_t, its complexity operator κ_t = −log₂ μ_t,
//! and the state complexities built from them.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::elementary::{gram_span, PureState};
use crate::error::{check_dim, QaeError, Result};
use crate::linalg::{log2m, CVector, ComplexMatrix, HermitianOperator, Tolerances};
use crate::machine::{semimeasure, Budget, EnumerationSnapshot, MachineOutput, SemimeasureTable};

/// Default regularizer mass ε_reg = 2^{-16}.
pub fn default_eps_reg() -> Dyadic {
    Dyadic::pow2_neg(16).unwrap()
}

#[derive(Debug, Clone)]
pub struct UniversalApprox {
    dim: usize,
    mu: HermitianOperator,
    kappa: HermitianOperator,
    budget: Option<Budget>,
    regularizer_mass: Dyadic,
}

impl UniversalApprox {
    /// Wraps an arbitrary semi-density (used for constructed examples and
    /// conjugated copies). `regularizer_mass` is informational.
    pub fn from_operator(mu: HermitianOperator, regularizer_mass: Dyadic, tol: &Tolerances) -> Result<Self> {
        if !mu.is_psd(tol.psd_tol)? {
            return Err(QaeError::validation("mu is not positive semidefinite"));
        }
        if mu.trace() > 1.0 + tol.psd_tol {
            return Err(QaeError::validation(format!("Tr mu = {} exceeds 1", mu.trace())));
        }
        let kappa = log2m(&mu, tol)?.scale(-1.0);
        Ok(UniversalApprox {
            dim: mu.dim(),
            mu,
            kappa,
            budget: None,
            regularizer_mass,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mu(&self) -> &HermitianOperator {
        &self.mu
    }

    pub fn kappa(&self) -> &HermitianOperator {
        &self.kappa
    }

    pub fn budget(&self) -> Option<Budget> {
        self.budget
    }

    pub fn regularizer_mass(&self) -> Dyadic {
        self.regularizer_mass
    }

    /// U μ U†, with κ recomputed.
    pub fn conjugate_by(&self, u: &ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let mut out = Self::from_operator(self.mu.conjugate_by(u), self.regularizer_mass, tol)?;
        out.budget = self.budget;
        Ok(out)
    }
}

fn exceeds_one(a: Dyadic, b: Dyadic) -> bool {
    a.checked_add(b).is_none_or(|t| t > Dyadic::ONE)
}

/// μ_t from a snapshot; see [`build_mu_from_table`].
pub fn build_mu(snapshot: &EnumerationSnapshot, eps_reg: Dyadic, tol: &Tolerances) -> Result<UniversalApprox> {
    if exceeds_one(snapshot.kraft_mass(), eps_reg) {
        return Err(QaeError::validation(format!(
            "program mass {} plus regularizer {eps_reg} exceeds 1",
            snapshot.kraft_mass()
        )));
    }
    let mut ua = build_mu_from_table(&semimeasure(snapshot), eps_reg, tol)?;
    ua.budget = Some(snapshot.budget());
    Ok(ua)
}

/// μ = Σ_states m(ψ)|ψ⟩⟨ψ| + Σ_projectors m(P)·P/dim P + ε_reg·I/N.
///
/// Terms are formed in parallel and summed in table order, so the result
/// does not depend on the thread count.
pub fn build_mu_from_table(table: &SemimeasureTable, eps_reg: Dyadic, tol: &Tolerances) -> Result<UniversalApprox> {
    if exceeds_one(table.total_mass(), eps_reg) {
        return Err(QaeError::validation("table mass plus regularizer exceeds 1"));
    }
    let n = table.dim();
    let terms: Vec<ComplexMatrix> = table
        .entries()
        .par_iter()
        .map(|e| e.output.projector().matrix().scale(e.mass.to_f64() / e.output.rank() as f64))
        .collect();
    let mut mu = ComplexMatrix::zeros(n);
    for t in &terms {
        mu = &mu + t;
    }
    let reg = eps_reg.to_f64() / n as f64;
    for i in 0..n {
        mu[(i, i)] += Complex64::new(reg, 0.0);
    }
    UniversalApprox::from_operator(HermitianOperator::from_hermitian_part(&mu), eps_reg, tol)
}

/// H̲(ψ) = −log₂⟨ψ|μ|ψ⟩ in bits; +∞ when the expectation is not positive.
pub fn h_lower(ua: &UniversalApprox, psi: &PureState) -> Result<f64> {
    check_dim(ua.dim, psi.dim())?;
    let e = ua.mu.expectation(psi.amplitudes());
    Ok(if e > 0.0 { -e.log2() } else { f64::INFINITY })
}

/// H̄(ψ) = ⟨ψ|κ|ψ⟩ in bits.
pub fn h_upper(ua: &UniversalApprox, psi: &PureState) -> Result<f64> {
    check_dim(ua.dim, psi.dim())?;
    Ok(ua.kappa.expectation(psi.amplitudes()))
}

/// Kq_t(ψ) = min over enumerated states φ of K_t(φ) − log₂|⟨φ|ψ⟩|².
/// The scan is exhaustive; +∞ when every overlap vanishes.
pub fn kq_t(table: &SemimeasureTable, psi: &PureState) -> Result<f64> {
    check_dim(table.dim(), psi.dim())?;
    let mut best = f64::INFINITY;
    for e in table.entries() {
        if let MachineOutput::State(v) = &e.output {
            let phi = v.normalize()?;
            let ov = phi.overlap_sqr(psi);
            if ov > 0.0 {
                best = best.min(e.shortest as f64 - ov.log2());
            }
        }
    }
    Ok(best)
}

/// E_k: projector onto the top-k eigenvectors of μ.
#[derive(Debug, Clone)]
pub struct EigenProjector {
    pub k: usize,
    pub projector: HermitianOperator,
    /// The cut falls inside a cluster of eigenvalues closer than the
    /// degeneracy tolerance, so E_k depends on the tie-break.
    pub degenerate: bool,
}

/// E_k with a deterministic tie-break: when the cut splits an eigenvalue
/// cluster, the cluster part is spanned by the projections of e_1, e_2, …
/// onto the cluster eigenspace, taken in order.
pub fn eigen_projector(ua: &UniversalApprox, k: usize, degeneracy_tol: f64) -> Result<EigenProjector> {
    let n = ua.dim;
    if k == 0 || k > n {
        return Err(QaeError::validation(format!("k = {k} outside 1..={n}")));
    }
    let es = ua.mu.eig()?;
    let vals = &es.values;
    let mut lo = k - 1;
    while lo > 0 && (vals[lo - 1] - vals[lo]).abs() < degeneracy_tol {
        lo -= 1;
    }
    let mut hi = k - 1;
    while hi + 1 < n && (vals[hi] - vals[hi + 1]).abs() < degeneracy_tol {
        hi += 1;
    }
    let degenerate = k < n && hi >= k;
    let mut basis: Vec<CVector> = (0..lo).map(|i| es.vector(i)).collect();
    if degenerate {
        let cluster = HermitianOperator::projector_onto_span(n, &(lo..=hi).map(|i| es.vector(i)).collect::<Vec<_>>());
        let candidates: Vec<CVector> = (0..n)
            .map(|i| {
                let mut e = vec![Complex64::new(0.0, 0.0); n];
                e[i] = Complex64::new(1.0, 0.0);
                cluster.matrix().apply(&e)
            })
            .collect();
        basis.extend(gram_span(&candidates, 1e-8).into_iter().take(k - lo));
    } else {
        basis.extend((lo..k).map(|i| es.vector(i)));
    }
    Ok(EigenProjector {
        k,
        projector: HermitianOperator::projector_onto_span(n, &basis),
        degenerate,
    })
}

/// One row of the `mu` report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub state: String,
    pub h_lower: f64,
    pub h_upper: f64,
    pub kq_t: Option<f64>,
    pub k_t: Option<usize>,
}

pub fn complexity_report(
    ua: &UniversalApprox,
    table: Option<&SemimeasureTable>,
    id: &str,
    output: Option<&MachineOutput>,
    psi: &PureState,
) -> Result<ComplexityReport> {
    let kq = match table {
        Some(t) if t.entries().iter().any(|e| matches!(e.output, MachineOutput::State(_))) => {
            Some(kq_t(t, psi)?).filter(|v| v.is_finite())
        }
        _ => None,
    };
    Ok(ComplexityReport {
        state: id.to_string(),
        h_lower: h_lower(ua, psi)?,
        h_upper: h_upper(ua, psi)?,
        kq_t: kq,
        k_t: table.zip(output).and_then(|(t, o)| t.complexity(o)),
    })
}

/// Outcome of the eigen-concentration check for one state.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundCheck {
    pub lambda: f64,
    /// Smallest value of ⟨ψ|E_K|ψ⟩ − (1 − 1/λ) over the thresholds k > H̄.
    pub upper_margin: f64,
    /// Smallest value of ⟨ψ|E_K|ψ⟩ − 2^{-k}(1 − 1/λ) over the thresholds k > H̲.
    pub lower_margin: f64,
}

/// For every threshold k above H̄(ψ) (resp. H̲(ψ)), the top ⌈2^{λk}⌉
/// (resp. ⌈λ2^k⌉) eigenvectors of μ capture most of ψ. Thresholds tried:
/// just above the complexity, then each integer up to log₂N + 1.
pub fn lower_bound_check(ua: &UniversalApprox, psi: &PureState, lambda: f64) -> Result<LowerBoundCheck> {
    let n = ua.dim;
    let es = ua.mu.eig()?;
    // weights |⟨u_i|ψ⟩|² in eigen order, and their prefix sums
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    for i in 0..n {
        let c = crate::linalg::inner(&es.vector(i), psi.amplitudes()).norm_sqr();
        cum.push(cum[i] + c);
    }
    let mass_in_top = |kk: f64| -> f64 {
        let idx = if kk >= n as f64 { n } else { (kk.ceil() as usize).clamp(1, n) };
        cum[idx]
    };
    let thresholds = |h: f64| -> Vec<f64> {
        let mut ks = vec![h + 1e-9 * h.abs().max(1.0)];
        let top = (n as f64).log2().ceil() as i64 + 1;
        let mut k = h.floor() as i64 + 1;
        while k <= top {
            if (k as f64) > h {
                ks.push(k as f64);
            }
            k += 1;
        }
        ks
    };
    let hu = h_upper(ua, psi)?;
    let hl = h_lower(ua, psi)?;
    let upper_margin = thresholds(hu)
        .into_iter()
        .map(|k| mass_in_top(2f64.powf(lambda * k)) - (1.0 - 1.0 / lambda))
        .fold(f64::INFINITY, f64::min);
    let lower_margin = thresholds(hl)
        .into_iter()
        .map(|k| mass_in_top(lambda * 2f64.powf(k)) - 2f64.powf(-k) * (1.0 - 1.0 / lambda))
        .fold(f64::INFINITY, f64::min);
    Ok(LowerBoundCheck {
        lambda,
        upper_margin,
        lower_margin,
    })
}

/// Smallest eigenvalue of μ − 2^{-l}·P/dim P over the snapshot's programs,
/// together with the count of entries checked.
pub fn domination_margin(ua: &UniversalApprox, snapshot: &EnumerationSnapshot) -> Result<(f64, usize)> {
    let margins: Vec<Result<f64>> = snapshot
        .entries()
        .par_iter()
        .map(|e| {
            let w = e.weight.to_f64() / e.output.rank() as f64;
            ua.mu.sub(&e.output.projector().scale(w)).min_eigenvalue()
        })
        .collect();
    let mut worst = f64::INFINITY;
    for m in margins {
        worst = worst.min(m?);
    }
    Ok((worst, snapshot.entries().len()))
}

/// Constructed μ with top eigenvalue 1 − 1/N on |1⟩ and bottom eigenvalue
/// 1/N on |N⟩, mixed with ε_reg·I/N, and ψ = (|1⟩ + |N⟩)/√2. Here H̲(ψ) stays
/// near 1 while H̄(ψ) ≈ (log₂ N)/2.
pub fn gap_example(n: usize, eps_reg: Dyadic, tol: &Tolerances) -> Result<(UniversalApprox, PureState)> {
    if n < 2 {
        return Err(QaeError::validation("gap example needs N >= 2"));
    }
    let eps = eps_reg.to_f64();
    if eps > 1.0 {
        return Err(QaeError::validation("regularizer mass exceeds 1"));
    }
    let nf = n as f64;
    let mut diag = vec![eps / nf; n];
    diag[0] += (1.0 - eps) * (1.0 - 1.0 / nf);
    diag[n - 1] += (1.0 - eps) / nf;
    let ua = UniversalApprox::from_operator(HermitianOperator::from_real_diag(&diag), eps_reg, tol)?;
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    psi[0] = Complex64::new(1.0, 0.0);
    psi[n - 1] = Complex64::new(1.0, 0.0);
    Ok((ua, PureState::from_unnormalized(psi)?))
}
