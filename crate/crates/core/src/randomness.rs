//! Universal randomness test T″_ρ = ρ^{-1/2} μ ρ^{-1/2} and the tests it dominates.

use num_complex::Complex64;
use serde::Serialize;

use crate::density::UniversalApprox;
use crate::elementary::PureState;
use crate::entropy::DensityMatrix;
use crate::error::{check_dim, QaeError, Result};
use crate::linalg::{inner, op_func, ComplexMatrix, HermitianOperator, OffSupport, Tolerances};
use crate::machine::{MachineOutput, SemimeasureTable};

/// T″_ρ restricted to supp ρ; +∞ on anything leaving the support.
#[derive(Debug, Clone)]
pub struct TestOperator {
    pub op: HermitianOperator,
    pub support_projector: HermitianOperator,
    pub infinite_off_support: bool,
    support_tol: f64,
}

impl TestOperator {
    /// Tr(T″ρ), which is Tr(μ Π_supp) by cyclicity.
    pub fn trace_against(&self, rho: &DensityMatrix) -> f64 {
        self.op.matrix().hs_inner(rho.op().matrix()).re
    }

    /// Eigenvalues of T″ on its support, descending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(self.op.eig()?.values.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestValue {
    pub value: f64,
    /// log₂ value in bits.
    pub deficiency: f64,
}

impl TestValue {
    fn new(value: f64) -> Self {
        TestValue {
            value,
            deficiency: if value > 0.0 { value.log2() } else { f64::NEG_INFINITY },
        }
    }
}

pub fn build_test(ua: &UniversalApprox, rho: &DensityMatrix, tol: &Tolerances) -> Result<TestOperator> {
    check_dim(ua.dim(), rho.dim())?;
    let r = op_func(rho.op(), |x| 1.0 / x.sqrt(), OffSupport::Infinity, tol)?;
    let inv_sqrt = r.op.matrix();
    let op = HermitianOperator::from_hermitian_part(&inv_sqrt.matmul(ua.mu().matrix()).matmul(inv_sqrt));
    Ok(TestOperator {
        op,
        support_projector: r.support.expect("infinity policy reports the support"),
        infinite_off_support: r.infinite_part,
        support_tol: tol.psd_tol,
    })
}

pub fn evaluate_test(t: &TestOperator, psi: &PureState) -> Result<TestValue> {
    check_dim(t.op.dim(), psi.dim())?;
    let off = 1.0 - t.support_projector.expectation(psi.amplitudes());
    if off > t.support_tol {
        return Ok(TestValue::new(f64::INFINITY));
    }
    Ok(TestValue::new(t.op.expectation(psi.amplitudes()).max(0.0)))
}

/// Σ_{i,j} m_ij (p_i p_j)^{-1/2} c_i* c_j in the eigenbasis of ρ, where
/// m_ij = ⟨i|μ|j⟩ and c_i = ⟨i|ψ⟩; +∞ if ψ has weight on null eigenvectors.
pub fn evaluate_coordinates(ua: &UniversalApprox, rho: &DensityMatrix, psi: &PureState, tol: &Tolerances) -> Result<f64> {
    check_dim(ua.dim(), rho.dim())?;
    check_dim(ua.dim(), psi.dim())?;
    let es = rho.op().eig()?;
    let n = rho.dim();
    let mut support = Vec::new();
    let mut off = 0.0;
    let vecs: Vec<_> = (0..n).map(|i| es.vector(i)).collect();
    let c: Vec<Complex64> = vecs.iter().map(|v| inner(v, psi.amplitudes())).collect();
    for i in 0..n {
        if es.values[i] > tol.psd_tol {
            support.push(i);
        } else {
            off += c[i].norm_sqr();
        }
    }
    if off > tol.psd_tol {
        return Ok(f64::INFINITY);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for &i in &support {
        let mu_i = ua.mu().matrix().apply(&vecs[i]);
        for &j in &support {
            let m_ji = inner(&vecs[j], &mu_i); // ⟨j|μ|i⟩
            total += c[j].conj() * m_ji * c[i] / (es.values[i] * es.values[j]).sqrt();
        }
    }
    Ok(total.re)
}

/// Smallest c with A ≤ c·μ, as λ_max(μ^{-1/2} A μ^{-1/2}); needs μ > 0.
pub fn domination_constant(a: &HermitianOperator, mu: &HermitianOperator, tol: &Tolerances) -> Result<f64> {
    check_dim(a.dim(), mu.dim())?;
    if mu.min_eigenvalue()? <= 0.0 {
        return Err(QaeError::Domain("mu must be positive definite".into()));
    }
    let m = op_func(mu, |x| 1.0 / x.sqrt(), OffSupport::Total, tol)?.op;
    let s = m.matrix();
    HermitianOperator::from_hermitian_part(&s.matmul(a.matrix()).matmul(s)).max_eigenvalue()
}

fn sqrt_rho(rho: &DensityMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    Ok(op_func(rho.op(), |x| x.max(0.0).sqrt(), OffSupport::Zero, tol)?.op.matrix().clone())
}

#[derive(Debug, Clone, Serialize)]
pub struct MartinLofTerm {
    pub k_t: usize,
    /// Tr(Pρ)
    pub trace_p_rho: f64,
    /// log₂[2^{-K}⟨ψ|P|ψ⟩/Tr(Pρ)]; −∞ when ψ ⊥ P.
    pub deficiency: f64,
    /// log₂ of the measured c in ρ^{1/2}F_Pρ^{1/2} ≤ c·μ.
    pub log_domination: f64,
    /// A priori bound log₂(N/ε) − K on `log_domination`.
    pub log_domination_bound: f64,
    /// log₂ T″_ρ(ψ)
    pub universal_deficiency: f64,
}

impl MartinLofTerm {
    pub fn dominated(&self, slack: f64) -> bool {
        self.deficiency <= self.universal_deficiency + self.log_domination + slack
            && self.log_domination <= self.log_domination_bound + slack
    }
}

/// The projector test F_P = 2^{-K(P)}·P/Tr(Pρ) and its comparison with T″_ρ.
pub fn martin_lof_term(
    ua: &UniversalApprox,
    table: &SemimeasureTable,
    p: &MachineOutput,
    rho: &DensityMatrix,
    psi: &PureState,
    tol: &Tolerances,
) -> Result<MartinLofTerm> {
    check_dim(ua.dim(), rho.dim())?;
    let k = table
        .complexity(p)
        .ok_or_else(|| QaeError::validation("projector is not produced by any enumerated program"))?;
    let proj = p.projector();
    let tr = proj.matrix().hs_inner(rho.op().matrix()).re;
    if tr <= tol.psd_tol {
        return Err(QaeError::Domain(format!("Tr(Pρ) = {tr:e}: the term is undefined")));
    }
    let w = 2f64.powi(-(k as i32));
    let value = w * proj.expectation(psi.amplitudes()).max(0.0) / tr;
    let sq = sqrt_rho(rho, tol)?;
    let a = HermitianOperator::from_hermitian_part(&sq.matmul(proj.matrix()).matmul(&sq).scale(w / tr));
    let c = domination_constant(&a, ua.mu(), tol)?;
    let t = build_test(ua, rho, tol)?;
    let eps = ua.regularizer_mass().to_f64();
    Ok(MartinLofTerm {
        k_t: k,
        trace_p_rho: tr,
        deficiency: if value > 0.0 { value.log2() } else { f64::NEG_INFINITY },
        log_domination: c.log2(),
        log_domination_bound: (ua.dim() as f64 / eps).log2() - k as f64,
        universal_deficiency: evaluate_test(&t, psi)?.deficiency,
    })
}

/// Sum-form T′_ρ = Σ m(φ)|φ⟩⟨φ|/⟨φ|ρ|φ⟩ over the snapshot's states, and the
/// measured constant c with T′ ≤ c·T″ (equivalently ρ^{1/2}T′ρ^{1/2} ≤ c·μ).
#[derive(Debug, Clone)]
pub struct SumFormTest {
    pub op: HermitianOperator,
    pub domination: f64,
    /// a priori bound (N/ε)·Σ m(φ) on `domination`.
    pub domination_bound: f64,
}

pub fn sum_form_test(ua: &UniversalApprox, table: &SemimeasureTable, rho: &DensityMatrix, tol: &Tolerances) -> Result<SumFormTest> {
    check_dim(ua.dim(), rho.dim())?;
    if rho.op().min_eigenvalue()? <= tol.psd_tol {
        return Err(QaeError::Domain("sum-form test needs a positive definite ρ".into()));
    }
    let n = ua.dim();
    let mut op = ComplexMatrix::zeros(n);
    let mut mass = 0.0;
    for e in table.entries() {
        if let MachineOutput::State(_) = &e.output {
            let phi = e.output.state_vector().expect("state");
            let denom = rho.op().expectation(&phi);
            let m = e.mass.to_f64();
            op = &op + &ComplexMatrix::projector_onto(&phi).scale(m / denom);
            mass += m;
        }
    }
    let op = HermitianOperator::from_hermitian_part(&op);
    let sq = sqrt_rho(rho, tol)?;
    let a = HermitianOperator::from_hermitian_part(&sq.matmul(op.matrix()).matmul(&sq));
    let domination = domination_constant(&a, ua.mu(), tol)?;
    Ok(SumFormTest {
        op,
        domination,
        domination_bound: n as f64 / ua.regularizer_mass().to_f64() * mass,
    })
}
