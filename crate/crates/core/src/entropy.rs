//! Entropies and the inequalities tying them to μ and κ.
//!
//! Every "up to a constant" statement is checked with a constant assembled
//! from the machine's opcode costs and the regularizer mass, never a fitted one.

use serde::Serialize;

use crate::density::{build_mu, h_lower, h_upper, UniversalApprox};
use crate::dyadic::Dyadic;
use crate::elementary::PureState;
use crate::error::{check_dim, QaeError, Result};
use crate::linalg::{
    inner, op_func, partial_trace, tensor, ComplexMatrix, HermitianOperator, OffSupport, Tolerances, TraceSide,
};
use crate::machine::{
    elias_gamma, nontrivial_divisors, semimeasure, EnumerationSnapshot, MachineOutput, SemimeasureTable,
};

/// PSD operator with unit trace, or trace ≤ 1 for the semi-density variant.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator, tol: &Tolerances) -> Result<Self> {
        let d = Self::semi(op, tol)?;
        if (d.op.trace() - 1.0).abs() > 1e-10 {
            return Err(QaeError::validation(format!("trace {} is not 1", d.op.trace())));
        }
        Ok(d)
    }

    pub fn semi(op: HermitianOperator, tol: &Tolerances) -> Result<Self> {
        if !op.is_psd(tol.psd_tol)? {
            return Err(QaeError::validation("density matrix is not PSD"));
        }
        if op.trace() > 1.0 + tol.psd_tol {
            return Err(QaeError::validation(format!("trace {} exceeds 1", op.trace())));
        }
        Ok(DensityMatrix { op })
    }

    pub fn pure(psi: &PureState) -> Self {
        DensityMatrix { op: psi.projector() }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        DensityMatrix {
            op: HermitianOperator::identity(n).scale(1.0 / n as f64),
        }
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// S(ρ) = −Σ λ log₂ λ.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(-rho.op.eig()?.values.iter().map(|&l| xlog2x(l)).sum::<f64>())
}

/// S(ρ‖σ) = Tr ρ(log₂ρ − log₂σ); +∞ when ρ has weight outside supp σ.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    let es = sigma.op.eig()?;
    for (i, &l) in es.values.iter().enumerate() {
        if l <= tol.psd_tol && rho.op.expectation(&es.vector(i)) > tol.psd_tol {
            return Ok(f64::INFINITY);
        }
    }
    let log_sigma = op_func(&sigma.op, f64::log2, OffSupport::Infinity, tol)?.op;
    let cross = rho.op.matrix().hs_inner(log_sigma.matrix()).re;
    let self_term: f64 = rho.op.eig()?.values.iter().map(|&l| xlog2x(l)).sum();
    Ok(self_term - cross)
}

/// Both directions of "entropy equals average complexity" for one witness.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub entropy: f64,
    /// Tr ρκ
    pub avg_complexity: f64,
    /// −log₂ Tr μ, the constant in S ≤ Tr ρκ + c.
    pub c: f64,
    /// −log₂ w, the constant in Tr ρκ ≤ S + c′.
    pub c_prime: f64,
    /// Tr ρκ − S + log₂ Tr μ = S(ρ ‖ μ/Tr μ); nonnegative in theory.
    pub c_left: f64,
    /// S − log₂ w − Tr ρκ; nonnegative in theory.
    pub c_right: f64,
}

impl SandwichReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.entropy <= self.avg_complexity + self.c + slack
            && self.avg_complexity <= self.entropy + self.c_prime + slack
            && self.c_left >= -slack
            && self.c_right >= -slack
    }
}

/// Checks S(ρ) ≤ Tr ρκ + (−log₂ Tr μ) and Tr ρκ ≤ S(ρ) − log₂ w for a
/// witness with w·ρ ≤ μ.
pub fn entropy_complexity_sandwich(
    ua: &UniversalApprox,
    rho: &DensityMatrix,
    w: f64,
) -> Result<SandwichReport> {
    check_dim(ua.dim(), rho.dim())?;
    if !(w > 0.0 && w <= 1.0) {
        return Err(QaeError::validation(format!("witness weight {w} outside (0, 1]")));
    }
    let margin = ua.mu().sub(&rho.op.scale(w)).min_eigenvalue()?;
    if margin < -1e-9 {
        return Err(QaeError::validation(format!(
            "w·ρ is not dominated by mu (min eigenvalue {margin:e})"
        )));
    }
    let s = von_neumann_entropy(rho)?;
    let avg = rho.op.matrix().hs_inner(ua.kappa().matrix()).re;
    let log_tr = ua.mu().trace().log2();
    Ok(SandwichReport {
        entropy: s,
        avg_complexity: avg,
        c: -log_tr,
        c_prime: -w.log2(),
        c_left: avg - s + log_tr,
        c_right: s - w.log2() - avg,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SmallSubspaceReport {
    pub k_t: usize,
    pub rank: usize,
    /// ⟨ψ|P|ψ⟩
    pub weight: f64,
    /// K + log₂ d − log₂⟨ψ|P|ψ⟩
    pub lower_rhs: f64,
    /// K + log₂ d + (1 − ⟨ψ|P|ψ⟩)·log₂ N
    pub upper_rhs: f64,
    pub h_lower: f64,
    pub h_upper: f64,
    /// Machine constants: H̲ ≤ lower_rhs + c_lower, H̄ ≤ upper_rhs + c_upper.
    pub c_lower: f64,
    pub c_upper: f64,
}

impl SmallSubspaceReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.h_lower <= self.lower_rhs + self.c_lower + slack && self.h_upper <= self.upper_rhs + self.c_upper + slack
    }
}

/// Upper bounds on H̲ and H̄ from an enumerated projector P.
///
/// μ ≥ 2^{-K}P/d + ε(I − P)/N, an operator commuting with P, gives the
/// constants c_lower = 0 and c_upper = (1 − ⟨P⟩)·max(0, log₂(1/ε) − K − log₂ d).
pub fn small_subspace_upper_bounds(
    ua: &UniversalApprox,
    table: &SemimeasureTable,
    p: &MachineOutput,
    psi: &PureState,
) -> Result<SmallSubspaceReport> {
    check_dim(ua.dim(), psi.dim())?;
    let k = table
        .complexity(p)
        .ok_or_else(|| QaeError::validation("projector is not produced by any enumerated program"))?;
    let n = ua.dim() as f64;
    let d = p.rank();
    let log_d = (d as f64).log2();
    let weight = p.projector().expectation(psi.amplitudes()).clamp(0.0, 1.0);
    let eps = ua.regularizer_mass().to_f64();
    let c_upper = if eps > 0.0 {
        (1.0 - weight) * (-eps.log2() - k as f64 - log_d).max(0.0)
    } else {
        f64::INFINITY
    };
    Ok(SmallSubspaceReport {
        k_t: k,
        rank: d,
        weight,
        lower_rhs: k as f64 + log_d - weight.log2(),
        upper_rhs: k as f64 + log_d + (1.0 - weight) * n.log2(),
        h_lower: h_lower(ua, psi)?,
        h_upper: h_upper(ua, psi)?,
        c_lower: 0.0,
        c_upper,
    })
}

/// Bits spent by TENSOR on the split N = d·(N/d) before its two operands.
pub fn tensor_overhead(n: usize, left_dim: usize) -> Result<u32> {
    let j = nontrivial_divisors(n)
        .iter()
        .position(|&d| d == left_dim)
        .ok_or_else(|| QaeError::validation(format!("{left_dim} does not split {n}")))?;
    Ok(2 + elias_gamma(j as u64 + 1)?.len() as u32)
}

fn projector_mass(table: &SemimeasureTable) -> f64 {
    table
        .entries()
        .iter()
        .filter(|e| matches!(e.output, MachineOutput::Projector(_)))
        .map(|e| e.mass.to_f64())
        .sum()
}

fn has_states(table: &SemimeasureTable) -> bool {
    table.entries().iter().any(|e| matches!(e.output, MachineOutput::State(_)))
}

/// A scalar inequality lhs ≤ rhs + constant.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
}

impl ScalarCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + self.constant + slack
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SubadditivityReport {
    pub tensor_overhead_bits: u32,
    /// Domination constant in c·μ_X⊗μ_Y ≤ μ_XY.
    pub c: f64,
    /// Smallest eigenvalue of μ_XY − c·μ_X⊗μ_Y.
    pub operator_margin: f64,
    pub h_lower: ScalarCheck,
    pub h_upper: ScalarCheck,
}

impl SubadditivityReport {
    pub fn holds(&self, psd_tol: f64, slack: f64) -> bool {
        self.operator_margin >= -psd_tol && self.h_lower.holds(slack) && self.h_upper.holds(slack)
    }
}

/// μ_X, μ_Y, μ_XY from three snapshots at a shared regularizer.
pub struct ProductSetting {
    pub x: UniversalApprox,
    pub y: UniversalApprox,
    pub xy: UniversalApprox,
    pub table_x: SemimeasureTable,
    pub table_y: SemimeasureTable,
    pub table_xy: SemimeasureTable,
}

impl ProductSetting {
    pub fn build(
        snap_x: &EnumerationSnapshot,
        snap_y: &EnumerationSnapshot,
        snap_xy: &EnumerationSnapshot,
        eps_reg: Dyadic,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_dim(snap_x.dim() * snap_y.dim(), snap_xy.dim())?;
        Ok(ProductSetting {
            x: build_mu(snap_x, eps_reg, tol)?,
            y: build_mu(snap_y, eps_reg, tol)?,
            xy: build_mu(snap_xy, eps_reg, tol)?,
            table_x: semimeasure(snap_x),
            table_y: semimeasure(snap_y),
            table_xy: semimeasure(snap_xy),
        })
    }
}

/// c·μ_X⊗μ_Y ≤ μ_XY and H(φ⊗ψ) ≤ H(φ) + H(ψ) + log₂(1/c).
///
/// Split μ = S + Q + R into state, projector and regularizer parts. Every
/// pair of state programs reappears under TENSOR at cost t bits, so
/// S_X⊗S_Y ≤ 2^t μ_XY; R_X⊗μ_Y ≤ N_Y·R_XY and S_X⊗R_Y ≤ N_X·R_XY; any
/// projector mass q is bounded through the regularizer at N_XN_Y/ε per unit.
pub fn subadditivity_check(
    setting: &ProductSetting,
    snap_x: &EnumerationSnapshot,
    snap_y: &EnumerationSnapshot,
    snap_xy: &EnumerationSnapshot,
    phi: &PureState,
    psi: &PureState,
) -> Result<SubadditivityReport> {
    let (nx, ny) = (setting.x.dim(), setting.y.dim());
    let n = nx * ny;
    check_dim(n, setting.xy.dim())?;
    let eps = setting.xy.regularizer_mass().to_f64();
    if setting.x.regularizer_mass() != setting.xy.regularizer_mass()
        || setting.y.regularizer_mass() != setting.xy.regularizer_mass()
    {
        return Err(QaeError::validation("the three snapshots need one shared regularizer"));
    }
    let t = tensor_overhead(n, nx)?;
    let states = has_states(&setting.table_x) && has_states(&setting.table_y);
    if states {
        let (bx, by, bxy) = (snap_x.budget(), snap_y.budget(), snap_xy.budget());
        if bxy.max_len < bx.max_len + by.max_len + t || bxy.max_steps < bx.max_steps + by.max_steps + 1 {
            return Err(QaeError::validation(format!(
                "XY budget must cover TENSOR of X and Y programs: need L ≥ {}, T ≥ {}",
                bx.max_len + by.max_len + t,
                bx.max_steps + by.max_steps + 1
            )));
        }
    }
    let q = projector_mass(&setting.table_x) + projector_mass(&setting.table_y);
    let mut inv_c = nx as f64 + ny as f64;
    if states {
        inv_c += 2f64.powi(t as i32);
    }
    if q > 0.0 {
        inv_c += q * n as f64 / eps;
    }
    let c = 1.0 / inv_c;
    let prod = HermitianOperator::from_hermitian_part(&tensor(setting.x.mu().matrix(), setting.y.mu().matrix()));
    let operator_margin = setting.xy.mu().sub(&prod.scale(c)).min_eigenvalue()?;
    let joint = phi.tensor(psi);
    let log_inv_c = inv_c.log2();
    Ok(SubadditivityReport {
        tensor_overhead_bits: t,
        c,
        operator_margin,
        h_lower: ScalarCheck {
            lhs: h_lower(&setting.xy, &joint)?,
            rhs: h_lower(&setting.x, phi)? + h_lower(&setting.y, psi)?,
            constant: log_inv_c,
        },
        h_upper: ScalarCheck {
            lhs: h_upper(&setting.xy, &joint)?,
            rhs: h_upper(&setting.x, phi)? + h_upper(&setting.y, psi)?,
            constant: log_inv_c,
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    /// c₁ = ε/N_X in c₁·Tr_Y μ_XY ≤ μ_X.
    pub c1: f64,
    pub partial_trace_margin: f64,
    /// c₂ in c₂·μ_X⊗|ψ⟩⟨ψ| ≤ μ_XY (ψ enumerated); `None` if ψ is not.
    pub c2: Option<f64>,
    pub witness_margin: Option<f64>,
    /// Smallest eigenvalue of κ_XY − κ_X⊗I + log₂(N_Y/c₁).
    pub kappa_margin: f64,
    pub h_lower: ScalarCheck,
    pub h_upper: ScalarCheck,
}

impl MonotonicityReport {
    pub fn holds(&self, psd_tol: f64, slack: f64) -> bool {
        self.partial_trace_margin >= -psd_tol
            && self.witness_margin.is_none_or(|m| m >= -psd_tol)
            && self.kappa_margin >= -psd_tol
            && self.h_lower.holds(slack)
            && self.h_upper.holds(slack)
    }
}

/// Tr_Y μ_XY ≤ μ_X/c₁ and κ_XY ≥ κ_X⊗I − log₂(N_Y/c₁), with the corollary
/// H(φ) ≤ H(φ⊗ψ) + const for both complexities.
///
/// Tr_Y μ_XY has trace ≤ 1, hence is ≤ I ≤ (N_X/ε)μ_X. Together with
/// A ≤ N_Y·(Tr_Y A)⊗I for PSD A, μ_XY ≤ (N_Y/c₁)·μ_X⊗I, and the log is
/// operator monotone. When ψ is an enumerated state with shortest program q,
/// the proof's witness μ_X⊗|ψ⟩⟨ψ| is also checked with
/// 1/c₂ = 2^{t+l(q)} + N_Y + q_X·N_XN_Y/ε.
pub fn monotonicity_check(
    setting: &ProductSetting,
    snap_x: &EnumerationSnapshot,
    snap_xy: &EnumerationSnapshot,
    psi_output: Option<&MachineOutput>,
    phi: &PureState,
    psi: &PureState,
) -> Result<MonotonicityReport> {
    let (x, xy, table_x, table_y) = (&setting.x, &setting.xy, &setting.table_x, &setting.table_y);
    let nx = x.dim();
    let ny = xy.dim() / nx;
    check_dim(nx * ny, xy.dim())?;
    check_dim(ny, psi.dim())?;
    let eps = x.regularizer_mass().to_f64();
    if eps <= 0.0 {
        return Err(QaeError::validation("monotonicity constants need a positive regularizer"));
    }
    let c1 = eps / nx as f64;
    let reduced = HermitianOperator::from_hermitian_part(&partial_trace(xy.mu().matrix(), (nx, ny), TraceSide::TraceY)?);
    let partial_trace_margin = x.mu().sub(&reduced.scale(c1)).min_eigenvalue()?;

    let (c2, witness_margin) = match psi_output {
        Some(out) => {
            let lq = table_y
                .complexity(out)
                .ok_or_else(|| QaeError::validation("ψ is not an enumerated output of the Y machine"))?;
            let t = tensor_overhead(nx * ny, nx)?;
            let (bx, bxy) = (snap_x.budget(), snap_xy.budget());
            if bxy.max_len < bx.max_len + lq as u32 + t {
                return Err(QaeError::validation("XY budget too small for the TENSOR witness"));
            }
            let mut inv = 2f64.powi((t as usize + lq) as i32) + ny as f64;
            let q = projector_mass(table_x);
            if q > 0.0 {
                inv += q * (nx * ny) as f64 / eps;
            }
            let c2 = 1.0 / inv;
            let w = HermitianOperator::from_hermitian_part(&tensor(x.mu().matrix(), out.projector().matrix()));
            (Some(c2), Some(xy.mu().sub(&w.scale(c2)).min_eigenvalue()?))
        }
        None => (None, None),
    };

    let shift = (ny as f64 / c1).log2();
    let kx_i = HermitianOperator::from_hermitian_part(&tensor(x.kappa().matrix(), &ComplexMatrix::identity(ny)));
    let kappa_margin = xy
        .kappa()
        .sub(&kx_i)
        .add(&HermitianOperator::identity(nx * ny).scale(shift))
        .min_eigenvalue()?;
    let joint = phi.tensor(psi);
    Ok(MonotonicityReport {
        c1,
        partial_trace_margin,
        c2,
        witness_margin,
        kappa_margin,
        h_lower: ScalarCheck {
            lhs: h_lower(x, phi)?,
            rhs: h_lower(xy, &joint)?,
            constant: (1.0 / c1).log2(),
        },
        h_upper: ScalarCheck {
            lhs: h_upper(x, phi)?,
            rhs: h_upper(xy, &joint)?,
            constant: shift,
        },
    })
}

/// Entangled joint state whose reduced entropy exceeds the joint one.
#[derive(Debug, Clone, Serialize)]
pub struct EntanglementParadox {
    pub entropy_x: f64,
    pub entropy_xy: f64,
    /// H̄_XY(β) and Tr(ρ_X κ_X): the first may not fall below the second by
    /// more than `constant`.
    pub h_upper_xy: f64,
    pub avg_complexity_x: f64,
    pub constant: f64,
}

impl EntanglementParadox {
    pub fn entropy_monotonicity_fails(&self) -> bool {
        self.entropy_x > self.entropy_xy
    }

    pub fn complexity_monotonicity_holds(&self, slack: f64) -> bool {
        self.avg_complexity_x <= self.h_upper_xy + self.constant + slack
    }
}

pub fn entanglement_paradox(x: &UniversalApprox, xy: &UniversalApprox, beta: &PureState) -> Result<EntanglementParadox> {
    let nx = x.dim();
    let ny = xy.dim() / nx;
    check_dim(xy.dim(), beta.dim())?;
    let joint = DensityMatrix::pure(beta);
    let rho_x = DensityMatrix {
        op: HermitianOperator::from_hermitian_part(&partial_trace(joint.op.matrix(), (nx, ny), TraceSide::TraceY)?),
    };
    let c1 = x.regularizer_mass().to_f64() / nx as f64;
    Ok(EntanglementParadox {
        entropy_x: von_neumann_entropy(&rho_x)?,
        entropy_xy: von_neumann_entropy(&joint)?,
        h_upper_xy: h_upper(xy, beta)?,
        avg_complexity_x: rho_x.op.matrix().hs_inner(x.kappa().matrix()).re,
        constant: (ny as f64 / c1).log2(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ApproximationLemma {
    /// Largest eigenvalue of ρ.
    pub p1: f64,
    /// |⟨top eigenvector|ψ⟩|²
    pub overlap: f64,
}

/// If ⟨ψ|ρ|ψ⟩ ≥ 1 − ε then p₁ ≥ 1 − ε and |⟨1|ψ⟩|² ≥ 1 − 2ε.
pub fn approximation_lemma_check(rho: &DensityMatrix, psi: &PureState, eps: f64) -> Result<ApproximationLemma> {
    check_dim(rho.dim(), psi.dim())?;
    let e = rho.op.expectation(psi.amplitudes());
    if e < 1.0 - eps - 1e-12 {
        return Err(QaeError::validation(format!("⟨ψ|ρ|ψ⟩ = {e} is below 1 − ε")));
    }
    let es = rho.op.eig()?;
    let out = ApproximationLemma {
        p1: es.values[0],
        overlap: inner(&es.vector(0), psi.amplitudes()).norm_sqr(),
    };
    if out.p1 < 1.0 - eps - 1e-9 || out.overlap < 1.0 - 2.0 * eps - 1e-9 {
        return Err(QaeError::Numeric(format!("approximation lemma violated: {out:?}")));
    }
    Ok(out)
}

/// Smallest top-eigenvector overlap over the two-dimensional family
/// ρ = diag(p, 1 − p), ψ = (cos θ, sin θ) admitted by the lemma's hypothesis,
/// found by a grid in p refined by golden-section search over θ.
pub fn approximation_boundary_search(eps: f64, grid: usize) -> f64 {
    let mut worst = 1.0f64;
    for i in 0..=grid {
        let p = 0.5 + 0.5 * i as f64 / grid as f64;
        // feasibility: p c² + (1−p)(1−c²) ≥ 1 − ε, with c² = cos²θ
        let feasible = |c2: f64| p * c2 + (1.0 - p) * (1.0 - c2) >= 1.0 - eps - 1e-15;
        if !feasible(1.0) {
            continue;
        }
        // smallest feasible c² by bisection (feasibility is monotone in c² for p ≥ 1/2)
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        worst = worst.min(hi);
    }
    worst
}

/// max_i |H(e_i) − K_t(e_i)| over the basis states the snapshot reaches,
/// for H̲ and H̄ respectively.
pub fn basis_complexity_gap(ua: &UniversalApprox, table: &SemimeasureTable) -> Result<(f64, f64)> {
    let n = ua.dim();
    let (mut gl, mut gu) = (0.0f64, 0.0f64);
    for i in 1..=n {
        let e = crate::elementary::basis_state(i, n)?;
        if let Some(k) = table.complexity(&MachineOutput::State(e.clone())) {
            let psi = e.normalize()?;
            gl = gl.max((h_lower(ua, &psi)? - k as f64).abs());
            gu = gu.max((h_upper(ua, &psi)? - k as f64).abs());
        }
    }
    Ok((gl, gu))
}
