//! Dense complex linear algebra for self-adjoint operators.
//!
//! Everything downstream (universal densities, entropies, tests, cloning
//! bounds) runs on [`ComplexMatrix`] and [`HermitianOperator`]. Matrices are
//! dense and row-major; dimensions stay small (N ≤ 64 in practice), so the
//! eigensolver is a cyclic complex Jacobi iteration.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, QaeError, Result};

pub type CVector = Vec<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Sweep cap for the Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Relative off-diagonal Frobenius target at which Jacobi stops.
pub const JACOBI_OFF_TARGET: f64 = 1e-13;

/// Numerical tolerances shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub herm_tol: f64,
    pub psd_tol: f64,
    pub ortho_tol: f64,
    pub recon_tol: f64,
    pub log_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm_tol: 1e-10,
            psd_tol: 1e-10,
            ortho_tol: 1e-9,
            recon_tol: 1e-9,
            log_floor: 2f64.powi(-96),
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.herm_tol,
            self.psd_tol,
            self.ortho_tol,
            self.recon_tol,
            self.log_floor,
        ];
        if all.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(QaeError::validation("tolerances must be finite and > 0"));
        }
        if self.log_floor >= 1.0 {
            return Err(QaeError::validation("log_floor must be < 1"));
        }
        Ok(())
    }
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { dim, data }
    }

    /// Builds from row-major entries; fails unless `data.len()` is a square.
    pub fn from_row_major(data: Vec<Complex64>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim * dim != data.len() || dim == 0 {
            return Err(QaeError::validation(format!(
                "{} entries do not form a nonempty square matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(QaeError::validation("matrix has non-finite entries"));
        }
        Ok(ComplexMatrix { dim, data })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// |u⟩⟨v|
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    /// |v⟩⟨v|
    pub fn projector_onto(v: &[Complex64]) -> Self {
        Self::outer(v, v)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[CVector]) -> Self {
        let dim = cols.len();
        let mut m = Self::zeros(dim);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), dim);
            for i in 0..dim {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> CVector {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ‖M − M†‖_max
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// ‖M − Mᵀ‖_max
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)]).norm());
            }
        }
        worst
    }

    pub fn apply(&self, v: &[Complex64]) -> CVector {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let row = &self.data[i * self.dim..(i + 1) * self.dim];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// ⟨v|M|v⟩
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        inner(v, &self.apply(v))
    }

    /// Frobenius inner product Tr(A† B).
    pub fn hs_inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Kronecker product with row index `i_A·N_B + i_B`.
    pub fn kron(&self, other: &Self) -> Self {
        let (na, nb) = (self.dim, other.dim);
        Self::from_fn(na * nb, |r, c| {
            self[(r / nb, c / nb)] * other[(r % nb, c % nb)]
        })
    }

    /// Symmetrized copy (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// ⟨u|v⟩, conjugate-linear in the first argument.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Tensor product of two vectors, same index convention as [`ComplexMatrix::kron`].
pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> CVector {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Multiplies `v` by a unit phase so its first component with modulus above
/// `tol` is real and positive.
pub fn fix_phase(v: &mut [Complex64], tol: f64) {
    if let Some(z) = v.iter().find(|z| z.norm() > tol).copied() {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// Eigenvalues (descending) and orthonormal eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigensystem {
    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i)
    }

    /// Σ f(λ_i) |v_i⟩⟨v_i|
    pub fn reconstruct_with(&self, f: impl Fn(usize, f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(k, lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vi * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|_, l| l)
    }
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// The input is assumed Hermitian; only its Hermitian part is used.
pub fn jacobi_eigen(m: &ComplexMatrix) -> Result<Eigensystem> {
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    let target = JACOBI_OFF_TARGET * scale.max(f64::MIN_POSITIVE);

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(QaeError::Numeric(format!(
                "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (off-diagonal norm {:e})",
                off_norm(&a)
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Skip rotations that cannot change the diagonal in floating point.
                if sweeps > 4 && g < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                let e = apq / g;
                let tau = (aqq - app) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = D·R with D = diag(.., 1 at p, conj(e) at q, ..), R the real rotation.
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -e.conj() * s;
                let jqq = e.conj() * c;

                // A ← A·J (columns p, q)
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                // A ← J†·A (rows p, q)
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                // V ← V·J
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
        converged = off_norm(&a) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re).then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let cols: Vec<CVector> = order
        .iter()
        .map(|&k| {
            let mut col = v.column(k);
            fix_phase(&mut col, 1e-8);
            col
        })
        .collect();
    Ok(Eigensystem {
        values,
        vectors: ComplexMatrix::from_columns(&cols),
    })
}

/// Self-adjoint operator with a lazily computed eigensystem.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    eigen: OnceLock<Eigensystem>,
}

impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl HermitianOperator {
    /// Validates Hermiticity within `herm_tol` and stores the Hermitian part.
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(QaeError::validation("operator has non-finite entries"));
        }
        let defect = matrix.hermiticity_defect();
        if defect > tol.herm_tol {
            return Err(QaeError::validation(format!(
                "matrix is not Hermitian (defect {defect:e} > {:e})",
                tol.herm_tol
            )));
        }
        Ok(Self::from_hermitian_part(&matrix))
    }

    /// Stores (M + M†)/2 without checking how far M was from Hermitian.
    pub fn from_hermitian_part(matrix: &ComplexMatrix) -> Self {
        HermitianOperator {
            matrix: matrix.hermitian_part(),
            eigen: OnceLock::new(),
        }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self::from_hermitian_part(&ComplexMatrix::from_real_diag(diag))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_hermitian_part(&ComplexMatrix::identity(dim))
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_hermitian_part(&ComplexMatrix::zeros(dim))
    }

    /// |v⟩⟨v|
    pub fn projector_onto(v: &[Complex64]) -> Self {
        Self::from_hermitian_part(&ComplexMatrix::projector_onto(v))
    }

    /// Projector onto the span of orthonormal vectors.
    pub fn projector_onto_span(dim: usize, basis: &[CVector]) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        for b in basis {
            m = &m + &ComplexMatrix::projector_onto(b);
        }
        Self::from_hermitian_part(&m)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// ⟨v|H|v⟩ (real part; the imaginary part vanishes up to rounding).
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        self.matrix.expectation(v).re
    }

    pub fn eig(&self) -> Result<&Eigensystem> {
        if let Some(e) = self.eigen.get() {
            return Ok(e);
        }
        let e = jacobi_eigen(&self.matrix)?;
        Ok(self.eigen.get_or_init(|| e))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eig()?.values.last().expect("nonempty operator"))
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.values[0])
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_hermitian_part(&(&self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_hermitian_part(&(&self.matrix - &other.matrix))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_hermitian_part(&self.matrix.scale(s))
    }

    /// U H U†
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::from_hermitian_part(&u.matmul(&self.matrix).matmul(&u.adjoint()))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self::from_hermitian_part(&self.matrix.kron(&other.matrix))
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }
}

/// Off-support handling for operator functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OffSupport {
    /// Clamp eigenvalues below `log_floor` up to `log_floor` before applying f.
    Floor,
    /// Apply f on the support only; report the support projector and flag
    /// the remainder as infinite.
    Infinity,
    /// Map eigenvalues within `psd_tol` of zero to zero.
    Zero,
    /// Apply f to every eigenvalue as is.
    Total,
}

/// Result of [`op_func`].
#[derive(Debug, Clone)]
pub struct OpFuncResult {
    pub op: HermitianOperator,
    /// Projector onto the eigenvectors with eigenvalue above `psd_tol`;
    /// only populated for [`OffSupport::Infinity`].
    pub support: Option<HermitianOperator>,
    pub infinite_part: bool,
}

/// Applies a real function to the spectrum of `h`.
pub fn op_func(
    h: &HermitianOperator,
    f: impl Fn(f64) -> f64,
    policy: OffSupport,
    tol: &Tolerances,
) -> Result<OpFuncResult> {
    let es = h.eig()?;
    let mut mapped = Vec::with_capacity(es.values.len());
    let mut on_support = Vec::with_capacity(es.values.len());
    for &lam in &es.values {
        let (value, inside) = match policy {
            OffSupport::Floor => (f(lam.max(tol.log_floor)), true),
            OffSupport::Total => (f(lam), true),
            OffSupport::Infinity | OffSupport::Zero if lam.abs() <= tol.psd_tol => (0.0, false),
            OffSupport::Infinity | OffSupport::Zero => (f(lam), true),
        };
        if !value.is_finite() {
            return Err(QaeError::Domain(format!(
                "function undefined at eigenvalue {lam:e} under policy {policy:?}"
            )));
        }
        mapped.push(value);
        on_support.push(inside);
    }
    let op = HermitianOperator::from_hermitian_part(&es.reconstruct_with(|k, _| mapped[k]));
    let (support, infinite_part) = match policy {
        OffSupport::Infinity => {
            let proj = es.reconstruct_with(|k, _| if on_support[k] { 1.0 } else { 0.0 });
            (
                Some(HermitianOperator::from_hermitian_part(&proj)),
                on_support.iter().any(|s| !s),
            )
        }
        _ => (None, false),
    };
    Ok(OpFuncResult {
        op,
        support,
        infinite_part,
    })
}

/// Base-2 matrix logarithm with the floor policy.
pub fn log2m(h: &HermitianOperator, tol: &Tolerances) -> Result<HermitianOperator> {
    Ok(op_func(h, f64::log2, OffSupport::Floor, tol)?.op)
}

/// Principal square root of a PSD operator (tiny negative eigenvalues are zeroed).
pub fn sqrtm(h: &HermitianOperator, tol: &Tolerances) -> Result<HermitianOperator> {
    Ok(op_func(h, |x| x.max(0.0).sqrt(), OffSupport::Zero, tol)?.op)
}

/// A ≤ B in the Loewner order: the smallest eigenvalue of B − A is ≥ −tol.
pub fn loewner_leq(a: &HermitianOperator, b: &HermitianOperator, tol: f64) -> Result<bool> {
    check_dim(a.dim(), b.dim())?;
    Ok(b.sub(a).min_eigenvalue()? >= -tol)
}

/// Kronecker product; index convention `i_A·N_B + i_B`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Which factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSide {
    TraceY,
    TraceX,
}

/// Partial trace over one factor of H_X ⊗ H_Y.
pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), side: TraceSide) -> Result<ComplexMatrix> {
    let (nx, ny) = dims;
    if nx == 0 || ny == 0 || nx * ny != m.dim() {
        return Err(QaeError::validation(format!(
            "dimension {} does not factor as {nx}x{ny}",
            m.dim()
        )));
    }
    Ok(match side {
        TraceSide::TraceY => ComplexMatrix::from_fn(nx, |a, b| {
            (0..ny).map(|j| m[(a * ny + j, b * ny + j)]).sum()
        }),
        TraceSide::TraceX => ComplexMatrix::from_fn(ny, |a, b| {
            (0..nx).map(|i| m[(i * ny + a, i * ny + b)]).sum()
        }),
    })
}

/// A stored pair A ≤ B with exp A ≰ exp B: A = [[1,1],[1,1]], B = A + e₁e₁†.
/// The smallest eigenvalue of exp B − exp A is about −0.171.
pub fn exp_monotonicity_counterexample() -> (HermitianOperator, HermitianOperator) {
    let r = |x: f64| Complex64::new(x, 0.0);
    let a = ComplexMatrix::from_row_major(vec![r(1.0), r(1.0), r(1.0), r(1.0)]).unwrap();
    let b = ComplexMatrix::from_row_major(vec![r(2.0), r(1.0), r(1.0), r(1.0)]).unwrap();
    (HermitianOperator::from_hermitian_part(&a), HermitianOperator::from_hermitian_part(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_hermitian, random_psd, rng_for};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eig_of_diagonal_sorts_descending() {
        let h = HermitianOperator::from_real_diag(&[3.0, 1.0, 2.0]);
        let es = h.eig().unwrap();
        assert_eq!(es.values, vec![3.0, 2.0, 1.0]);
        assert_eq!(es.vector(0), vec![c(1.0), c(0.0), c(0.0)]);
        assert_eq!(es.vector(1), vec![c(0.0), c(0.0), c(1.0)]);
        assert_eq!(es.vector(2), vec![c(0.0), c(1.0), c(0.0)]);
    }

    #[test]
    fn eig_of_identity() {
        let es = jacobi_eigen(&ComplexMatrix::identity(5)).unwrap();
        assert!(es.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = rng_for(11, 0);
        for n in [2, 3, 5, 8, 16, 32] {
            let m = random_hermitian(&mut rng, n);
            let es = jacobi_eigen(&m).unwrap();
            assert!(es.reconstruct().max_abs_diff(&m) <= 1e-10, "n={n}");
            let gram = es.vectors.adjoint().matmul(&es.vectors);
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)) <= 1e-9);
            assert!(es.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = c(1.0);
        let err = HermitianOperator::new(m, &Tolerances::default()).unwrap_err();
        assert!(matches!(err, QaeError::Validation(_)));
    }

    #[test]
    fn log_of_diagonal() {
        let tol = Tolerances::default();
        let h = HermitianOperator::from_real_diag(&[1.0, 0.5]);
        let l = log2m(&h, &tol).unwrap();
        let want = ComplexMatrix::from_real_diag(&[0.0, -1.0]);
        assert!(l.matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn inverse_sqrt_with_infinity_policy() {
        let tol = Tolerances::default();
        let h = HermitianOperator::from_real_diag(&[4.0, 0.0]);
        let r = op_func(&h, |x| 1.0 / x.sqrt(), OffSupport::Infinity, &tol).unwrap();
        assert!(r.infinite_part);
        assert!(r.op.matrix().max_abs_diff(&ComplexMatrix::from_real_diag(&[0.5, 0.0])) < 1e-15);
        let supp = r.support.unwrap();
        assert!(supp.matrix().max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn zero_policy_domain_error_when_f_blows_up() {
        let tol = Tolerances::default();
        let h = HermitianOperator::from_real_diag(&[1.0, -0.5]);
        let err = op_func(&h, f64::ln, OffSupport::Zero, &tol).unwrap_err();
        assert!(matches!(err, QaeError::Domain(_)));
    }

    #[test]
    fn exp_log_round_trip() {
        let tol = Tolerances::default();
        let mut rng = rng_for(12, 0);
        for n in [2, 4, 6] {
            let p = random_psd(&mut rng, n, 1e-3);
            let h = HermitianOperator::from_hermitian_part(&p);
            let l = op_func(&h, f64::ln, OffSupport::Floor, &tol).unwrap().op;
            let back = op_func(&l, f64::exp, OffSupport::Total, &tol).unwrap().op;
            assert!(back.matrix().max_abs_diff(&p) < 1e-9);
        }
    }

    #[test]
    fn loewner_examples() {
        let mut rng = rng_for(13, 0);
        let p = HermitianOperator::from_hermitian_part(&random_psd(&mut rng, 3, 0.0));
        assert!(loewner_leq(&HermitianOperator::zero(3), &p, 1e-12).unwrap());
        let a = HermitianOperator::from_real_diag(&[1.0, 0.0]);
        let b = HermitianOperator::from_real_diag(&[0.0, 1.0]);
        assert!(!loewner_leq(&a, &b, 1e-12).unwrap());
        assert!(!loewner_leq(&b, &a, 1e-12).unwrap());
        let v = crate::sampling::haar_state(&mut rng, 3);
        let bigger = p.add(&HermitianOperator::projector_onto(&v).scale(0.3));
        assert!(loewner_leq(&p, &bigger, 1e-12).unwrap());
        assert!(matches!(
            loewner_leq(&a, &p, 1e-12),
            Err(QaeError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kron_examples() {
        assert_eq!(
            tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)),
            ComplexMatrix::identity(4)
        );
        let (a, b, cc, d) = (2.0, 3.0, 5.0, 7.0);
        let k = tensor(
            &ComplexMatrix::from_real_diag(&[a, b]),
            &ComplexMatrix::from_real_diag(&[cc, d]),
        );
        assert_eq!(k, ComplexMatrix::from_real_diag(&[a * cc, a * d, b * cc, b * d]));
    }

    #[test]
    fn log_of_tensor_splits() {
        let tol = Tolerances::default();
        let mut rng = rng_for(14, 0);
        let a = HermitianOperator::from_hermitian_part(&random_psd(&mut rng, 2, 0.05));
        let b = HermitianOperator::from_hermitian_part(&random_psd(&mut rng, 3, 0.05));
        let lhs = log2m(&a.tensor(&b), &tol).unwrap();
        let la = log2m(&a, &tol).unwrap();
        let lb = log2m(&b, &tol).unwrap();
        let rhs = la
            .tensor(&HermitianOperator::identity(3))
            .add(&HermitianOperator::identity(2).tensor(&lb));
        assert!(lhs.matrix().max_abs_diff(rhs.matrix()) <= 1e-9);
    }

    #[test]
    fn partial_trace_examples() {
        let mut rng = rng_for(15, 0);
        let rho = random_psd(&mut rng, 2, 0.0);
        let rho = rho.scale(1.0 / rho.trace().re);
        let sigma = random_psd(&mut rng, 3, 0.0);
        let sigma = sigma.scale(1.0 / sigma.trace().re);
        let t = partial_trace(&rho.kron(&sigma), (2, 3), TraceSide::TraceY).unwrap();
        assert!(t.max_abs_diff(&rho) < 1e-14);
        let t = partial_trace(&rho.kron(&sigma), (2, 3), TraceSide::TraceX).unwrap();
        assert!(t.max_abs_diff(&sigma) < 1e-14);

        // Bell pair (|00⟩+|11⟩)/√2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = vec![c(s), c(0.0), c(0.0), c(s)];
        let red = partial_trace(&ComplexMatrix::projector_onto(&bell), (2, 2), TraceSide::TraceY).unwrap();
        assert!(red.max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);

        let m = random_hermitian(&mut rng, 6);
        let t = partial_trace(&m, (3, 2), TraceSide::TraceY).unwrap();
        assert!((t.trace() - m.trace()).norm() < 1e-12);
        assert!(partial_trace(&m, (4, 2), TraceSide::TraceY).is_err());
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerances::default().validate().is_ok());
        let bad = Tolerances {
            log_floor: 2.0,
            ..Tolerances::default()
        };
        assert!(bad.validate().is_err());
        let bad = Tolerances {
            psd_tol: 0.0,
            ..Tolerances::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn exp_is_not_operator_monotone() {
        let tol = Tolerances::default();
        let (a, b) = exp_monotonicity_counterexample();
        assert!(loewner_leq(&a, &b, 1e-12).unwrap());
        let ea = op_func(&a, f64::exp, OffSupport::Total, &tol).unwrap().op;
        let eb = op_func(&b, f64::exp, OffSupport::Total, &tol).unwrap().op;
        assert!(!loewner_leq(&ea, &eb, 1e-3).unwrap());
        assert!((eb.sub(&ea).min_eigenvalue().unwrap() + 0.171).abs() < 1e-3);
    }
}
