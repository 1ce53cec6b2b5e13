//! Exact elementary states over the Gaussian rationals Q(i), canonical
//! bases, bitstring states, and the bridge to floating-point pure states.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{QaeError, Result};
use crate::linalg::{fix_phase, inner, loewner_leq, norm, CVector, ComplexMatrix, HermitianOperator, Tolerances};

/// a + b·i with a, b rational.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    /// (re_num/re_den) + (im_num/im_den)·i; panics on a zero denominator.
    pub fn from_parts(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        GaussianRational {
            re: BigRational::new(re_num.into(), re_den.into()),
            im: BigRational::new(im_num.into(), im_den.into()),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_parts(n, 1, 0, 1)
    }

    pub fn i() -> Self {
        Self::from_parts(0, 1, 1, 1)
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational::new(self.re.clone(), -self.im.clone())
    }

    /// |z|² as an exact rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(GaussianRational::new(&self.re / &n, -&self.im / &n))
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|inv| self * &inv)
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, o: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

fn fmt_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{} i", fmt_rational(&self.re), fmt_rational(&self.im))
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

impl FromStr for GaussianRational {
    type Err = QaeError;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || QaeError::validation(format!("malformed Gaussian rational {s:?}"));
        let (re, im) = s.trim().split_once('+').ok_or_else(bad)?;
        let im = im.trim().strip_suffix('i').ok_or_else(bad)?;
        Ok(GaussianRational::new(
            parse_rational(re).ok_or_else(bad)?,
            parse_rational(im).ok_or_else(bad)?,
        ))
    }
}

/// Unnormalized vector with exact Gaussian-rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ElementaryVector {
    coeffs: Vec<GaussianRational>,
}

impl ElementaryVector {
    pub fn new(coeffs: Vec<GaussianRational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(QaeError::validation("elementary vector needs dim >= 1"));
        }
        Ok(ElementaryVector { coeffs })
    }

    pub fn zero(dim: usize) -> Self {
        ElementaryVector {
            coeffs: vec![GaussianRational::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    /// Exact Σ|c_i|².
    pub fn norm2(&self) -> BigRational {
        self.coeffs
            .iter()
            .fold(BigRational::zero(), |acc, c| acc + c.norm_sqr())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(GaussianRational::is_zero)
    }

    /// Qubit count when the dimension is a power of two.
    pub fn qubits(&self) -> Option<u32> {
        self.dim().is_power_of_two().then(|| self.dim().trailing_zeros())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(QaeError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(ElementaryVector {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, s: &GaussianRational) -> Self {
        ElementaryVector {
            coeffs: self.coeffs.iter().map(|c| s * c).collect(),
        }
    }

    /// Kronecker product, row index `i_A·N_B + i_B`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut coeffs = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.coeffs {
            for b in &other.coeffs {
                coeffs.push(a * b);
            }
        }
        ElementaryVector { coeffs }
    }

    /// Exact ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> GaussianRational {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(GaussianRational::zero(), |acc, (a, b)| &acc + &(&a.conj() * b))
    }

    /// Representative of the projective class: divided by the first nonzero
    /// coefficient, so that coefficient becomes exactly 1. `None` for zero.
    pub fn canonical(&self) -> Option<Self> {
        let lead = self.coeffs.iter().find(|c| !c.is_zero())?;
        let inv = lead.inv()?;
        Some(self.scale(&inv))
    }

    /// Relabels coordinates: entry i moves to position perm[i] (0-based).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.dim())?;
        let mut coeffs = vec![GaussianRational::zero(); self.dim()];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[perm[i]] = c.clone();
        }
        Ok(ElementaryVector { coeffs })
    }

    pub fn to_complex(&self) -> CVector {
        self.coeffs.iter().map(GaussianRational::to_complex).collect()
    }

    /// Bridges to a floating unit vector; the only place the exact layer
    /// divides by √norm2.
    pub fn normalize(&self) -> Result<PureState> {
        let n2 = self.norm2();
        if n2.is_zero() {
            return Err(QaeError::validation("cannot normalize the zero vector"));
        }
        // Dividing by the leading coefficient first keeps magnitudes near 1.
        let canon = self.canonical().expect("nonzero");
        let v = canon.to_complex();
        PureState::from_unnormalized(v)
    }
}

impl fmt::Display for ElementaryVector {
    /// `N;re_num/re_den+im_num/im_den i,...`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};", self.dim())?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for ElementaryVector {
    type Err = QaeError;
    fn from_str(s: &str) -> Result<Self> {
        let (n, rest) = s
            .trim()
            .split_once(';')
            .ok_or_else(|| QaeError::validation(format!("missing dimension prefix in {s:?}")))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| QaeError::validation(format!("bad dimension in {s:?}")))?;
        let coeffs = rest
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<GaussianRational>>>()?;
        if coeffs.len() != n {
            return Err(QaeError::validation(format!(
                "dimension prefix {n} but {} coefficients",
                coeffs.len()
            )));
        }
        ElementaryVector::new(coeffs)
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n || !perm.iter().all(|&p| p < n && !std::mem::replace(&mut seen[p], true)) {
        return Err(QaeError::validation(format!("not a permutation of 0..{n}: {perm:?}")));
    }
    Ok(())
}

/// e_i in H_N, 1-based.
pub fn basis_state(i: usize, n: usize) -> Result<ElementaryVector> {
    if n == 0 || i == 0 || i > n {
        return Err(QaeError::validation(format!("basis index {i} out of range 1..={n}")));
    }
    let mut v = ElementaryVector::zero(n);
    v.coeffs[i - 1] = GaussianRational::one();
    Ok(v)
}

/// |x⟩ = ⊗|x(i)⟩; the basis index is 1 + the binary value of x.
pub fn bitstring_state(x: &str) -> Result<ElementaryVector> {
    if x.is_empty() {
        return Err(QaeError::validation("empty bitstring"));
    }
    if x.len() >= usize::BITS as usize - 1 {
        return Err(QaeError::validation("bitstring too long"));
    }
    let mut value = 0usize;
    for ch in x.chars() {
        value = value * 2
            + match ch {
                '0' => 0,
                '1' => 1,
                _ => return Err(QaeError::validation(format!("non-binary character {ch:?}"))),
            };
    }
    basis_state(value + 1, 1 << x.len())
}

/// Unit vector in C^N with the phase convention applied.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub const NORM_TOL: f64 = 1e-12;

    /// Takes a vector that must already be unit within 1e-12.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let nv = norm(&amplitudes);
        if amplitudes.is_empty() || (nv - 1.0).abs() > Self::NORM_TOL {
            return Err(QaeError::validation(format!("state norm {nv} is not 1")));
        }
        Ok(PureState { amplitudes })
    }

    /// Normalizes and fixes the phase (first nonzero amplitude real-positive).
    pub fn from_unnormalized(mut v: CVector) -> Result<Self> {
        let nv = norm(&v);
        if v.is_empty() || !(nv.is_finite() && nv > 0.0) {
            return Err(QaeError::validation("cannot normalize a zero or non-finite vector"));
        }
        for z in v.iter_mut() {
            *z /= nv;
        }
        fix_phase(&mut v, 1e-14);
        // one more pass so the norm sits within rounding of 1
        let nv = norm(&v);
        for z in v.iter_mut() {
            *z /= nv;
        }
        Ok(PureState { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_vec(self) -> CVector {
        self.amplitudes
    }

    pub fn overlap_sqr(&self, other: &PureState) -> f64 {
        inner(&self.amplitudes, &other.amplitudes).norm_sqr()
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amplitudes: crate::linalg::kron_vec(&self.amplitudes, &other.amplitudes),
        }
    }

    pub fn projector(&self) -> HermitianOperator {
        HermitianOperator::projector_onto(&self.amplitudes)
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass; inputs whose
/// residual falls below `tol` are dropped.
pub fn gram_span(vectors: &[CVector], tol: f64) -> Vec<CVector> {
    let mut basis: Vec<CVector> = Vec::new();
    for v in vectors {
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let ov = inner(b, &r);
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= ov * y;
                }
            }
        }
        let nr = norm(&r);
        if nr >= tol {
            basis.push(r.into_iter().map(|z| z / nr).collect());
        }
    }
    basis
}

/// Weak-to-strong enumeration: from an increasing sequence of PSD operators
/// approximating a projector from below, list orthonormal vectors spanning
/// the union of their ranges (each ρ_i vanishes on ker P, so its range lies
/// inside P).
pub fn span_from_psd_approximations(
    sequence: &[HermitianOperator],
    target_rank: usize,
    tol: f64,
    tols: &Tolerances,
) -> Result<Vec<CVector>> {
    for w in sequence.windows(2) {
        if !loewner_leq(&w[0], &w[1], tols.psd_tol)? {
            return Err(QaeError::validation("approximating sequence is not Loewner-increasing"));
        }
    }
    let mut candidates = Vec::new();
    for rho in sequence {
        let es = rho.eig()?;
        for (k, &lam) in es.values.iter().enumerate() {
            if lam > tol {
                candidates.push(es.vector(k));
            }
        }
    }
    let mut basis = gram_span(&candidates, tol.max(1e-8));
    basis.truncate(target_rank);
    Ok(basis)
}

/// Exact rank via row reduction over Q(i).
pub fn exact_rank(rows: &[ElementaryVector]) -> usize {
    rref(rows).len()
}

/// Reduced row echelon form of the row space (nonzero rows only). Equal
/// spans give identical output, so this is the canonical form of a subspace.
pub fn rref(rows: &[ElementaryVector]) -> Vec<ElementaryVector> {
    let mut m: Vec<Vec<GaussianRational>> = rows.iter().map(|r| r.coeffs.clone()).collect();
    let ncols = rows.first().map_or(0, |r| r.dim());
    let mut pivot_row = 0;
    for col in 0..ncols {
        let Some(sel) = (pivot_row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, sel);
        let inv = m[pivot_row][col].inv().expect("nonzero pivot");
        m[pivot_row] = m[pivot_row].iter().map(|c| c * &inv).collect();
        for r in 0..m.len() {
            if r != pivot_row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                let pivot = m[pivot_row].clone();
                for (x, p) in m[r].iter_mut().zip(&pivot) {
                    *x = &*x - &(&factor * p);
                }
            }
        }
        pivot_row += 1;
        if pivot_row == m.len() {
            break;
        }
    }
    m.truncate(pivot_row);
    m.into_iter().map(|coeffs| ElementaryVector { coeffs }).collect()
}

/// Orthogonal projector onto span(basis), assembled exactly over Q(i) by
/// unnormalized Gram–Schmidt and rounded once per entry. Permuting the
/// coordinates of the basis permutes the result entry for entry.
pub fn exact_projector(basis: &[ElementaryVector]) -> ComplexMatrix {
    let dim = basis.first().map_or(0, ElementaryVector::dim);
    let mut ortho: Vec<(ElementaryVector, BigRational)> = Vec::with_capacity(basis.len());
    for v in basis {
        let mut u = v.clone();
        for (w, w2) in &ortho {
            let c = w.inner(v);
            let coef = GaussianRational::new(-(&c.re / w2), -(&c.im / w2));
            u = u.add(&w.scale(&coef)).expect("same dimension");
        }
        let n2 = u.norm2();
        if !n2.is_zero() {
            ortho.push((u, n2));
        }
    }
    let mut entries = vec![GaussianRational::zero(); dim * dim];
    for (u, n2) in &ortho {
        for i in 0..dim {
            for j in 0..dim {
                let t = &u.coeffs[i] * &u.coeffs[j].conj();
                let t = GaussianRational::new(&t.re / n2, &t.im / n2);
                entries[i * dim + j] = &entries[i * dim + j] + &t;
            }
        }
    }
    ComplexMatrix::from_row_major(entries.iter().map(GaussianRational::to_complex).collect())
        .expect("square by construction")
}

/// Exact determinant of the Gram matrix ⟨v_i|v_j⟩ (a nonnegative rational;
/// positive iff the vectors are linearly independent).
pub fn gram_determinant(vectors: &[ElementaryVector]) -> BigRational {
    let k = vectors.len();
    let mut g: Vec<Vec<GaussianRational>> = (0..k)
        .map(|i| (0..k).map(|j| vectors[i].inner(&vectors[j])).collect())
        .collect();
    let mut det = GaussianRational::one();
    for col in 0..k {
        let Some(sel) = (col..k).find(|&r| !g[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if sel != col {
            g.swap(sel, col);
            det = -&det;
        }
        let pivot = g[col][col].clone();
        det = &det * &pivot;
        let inv = pivot.inv().expect("nonzero pivot");
        for r in col + 1..k {
            if g[r][col].is_zero() {
                continue;
            }
            let factor = &g[r][col] * &inv;
            let prow = g[col].clone();
            for (x, p) in g[r].iter_mut().zip(&prow) {
                *x = &*x - &(&factor * p);
            }
        }
    }
    debug_assert!(det.im.is_zero());
    det.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ComplexMatrix, HermitianOperator};
    use crate::sampling::{haar_state, rng_for};
    use num_traits::One;
    use proptest::prelude::*;

    fn gr(a: i64, b: i64, c: i64, d: i64) -> GaussianRational {
        GaussianRational::from_parts(a, b, c, d)
    }

    #[test]
    fn basis_states() {
        assert_eq!(basis_state(1, 2).unwrap().to_string(), "2;1/1+0/1 i,0/1+0/1 i");
        let e3 = basis_state(3, 4).unwrap();
        assert_eq!(e3.to_complex()[2], Complex64::new(1.0, 0.0));
        assert_eq!(e3.norm2(), BigRational::one());
        for i in 1..=8 {
            for j in 1..=8 {
                let ip = basis_state(i, 8).unwrap().inner(&basis_state(j, 8).unwrap());
                assert_eq!(ip, GaussianRational::from_int((i == j) as i64));
            }
        }
        assert!(basis_state(0, 2).is_err());
        assert!(basis_state(3, 2).is_err());
    }

    #[test]
    fn bitstrings() {
        assert_eq!(bitstring_state("0").unwrap(), basis_state(1, 2).unwrap());
        assert_eq!(bitstring_state("10").unwrap(), basis_state(3, 4).unwrap());
        assert_eq!(bitstring_state("111").unwrap(), basis_state(8, 8).unwrap());
        assert!(bitstring_state("").is_err());
        assert!(bitstring_state("012").is_err());
        // tensor consistency: |x⟩⊗|y⟩ = |xy⟩
        for x in ["0", "1", "01", "110"] {
            for y in ["1", "00", "101"] {
                let lhs = bitstring_state(x).unwrap().tensor(&bitstring_state(y).unwrap());
                assert_eq!(lhs, bitstring_state(&format!("{x}{y}")).unwrap());
            }
        }
    }

    #[test]
    fn normalize_examples() {
        let v = ElementaryVector::new(vec![gr(1, 1, 0, 1), gr(1, 1, 0, 1)]).unwrap();
        let s = v.normalize().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - Complex64::new(h, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - Complex64::new(h, 0.0)).norm() < 1e-15);

        let v = ElementaryVector::new(vec![gr(3, 1, 0, 1), gr(0, 1, 4, 1)]).unwrap();
        assert_eq!(v.norm2(), BigRational::from_integer(25.into()));
        let s = v.normalize().unwrap();
        assert!((s.amplitudes()[0] - Complex64::new(0.6, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - Complex64::new(0.0, 0.8)).norm() < 1e-15);

        assert!(ElementaryVector::zero(3).normalize().is_err());
    }

    #[test]
    fn phase_convention_makes_multiples_equal() {
        let v = ElementaryVector::new(vec![gr(0, 1, 0, 1), gr(1, 2, 1, 3), gr(-2, 1, 0, 1)]).unwrap();
        let w = v.scale(&gr(-3, 7, 5, 2));
        assert_eq!(v.canonical(), w.canonical());
        let (a, b) = (v.normalize().unwrap(), w.normalize().unwrap());
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-15);
        }
        assert!(a.amplitudes()[1].im.abs() < 1e-16);
    }

    #[test]
    fn gram_span_examples() {
        let e1 = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let e2 = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        assert_eq!(gram_span(&[e1.clone(), e2.clone()], 1e-12), vec![e1.clone(), e2]);
        assert_eq!(gram_span(&[e1.clone(), e1.clone()], 1e-12), vec![e1]);
    }

    #[test]
    fn gram_span_matches_gram_matrix_oracle() {
        let mut rng = rng_for(21, 0);
        let vs: Vec<CVector> = (0..3).map(|_| haar_state(&mut rng, 4)).collect();
        let basis = gram_span(&vs, 1e-10);
        assert_eq!(basis.len(), 3);
        let proj = HermitianOperator::projector_onto_span(4, &basis);

        // Oracle: the range of V V† (V = columns vs) from its eigendecomposition.
        let mut vv = ComplexMatrix::zeros(4);
        for v in &vs {
            vv = &vv + &ComplexMatrix::projector_onto(v);
        }
        let es = HermitianOperator::from_hermitian_part(&vv).eig().unwrap().clone();
        let range: Vec<CVector> = (0..4).filter(|&k| es.values[k] > 1e-10).map(|k| es.vector(k)).collect();
        let oracle = HermitianOperator::projector_onto_span(4, &range);
        assert!(proj.matrix().max_abs_diff(oracle.matrix()) <= 1e-9);

        // idempotent up to phase
        let again = gram_span(&basis, 1e-10);
        let proj2 = HermitianOperator::projector_onto_span(4, &again);
        assert!(proj.matrix().max_abs_diff(proj2.matrix()) <= 1e-12);
    }

    #[test]
    fn weak_to_strong_enumeration() {
        let tols = Tolerances::default();
        let p = HermitianOperator::from_real_diag(&[1.0, 1.0, 0.0]);
        let seq = vec![p.scale(0.5), p.scale(0.75), p.clone()];
        let basis = span_from_psd_approximations(&seq, 3, 1e-9, &tols).unwrap();
        assert_eq!(basis.len(), 2);
        let back = HermitianOperator::projector_onto_span(3, &basis);
        assert!(back.matrix().max_abs_diff(p.matrix()) < 1e-12);

        let mut rng = rng_for(22, 0);
        let psi = haar_state(&mut rng, 3);
        let seq: Vec<HermitianOperator> = [0.25, 0.5, 0.9, 1.0]
            .iter()
            .map(|&t| HermitianOperator::projector_onto(&psi).scale(t))
            .collect();
        let basis = span_from_psd_approximations(&seq, 1, 1e-9, &tols).unwrap();
        assert_eq!(basis.len(), 1);
        assert!((inner(&basis[0], &psi).norm() - 1.0).abs() < 1e-10);
        let proj = HermitianOperator::projector_onto_span(3, &basis);
        assert!(proj.matrix().max_abs_diff(seq[3].matrix()) <= 1e-8);

        let bad = vec![p.clone(), p.scale(0.5)];
        assert!(span_from_psd_approximations(&bad, 3, 1e-9, &tols).is_err());
    }

    #[test]
    fn rref_and_gram_determinant() {
        let e1 = basis_state(1, 3).unwrap();
        let e2 = basis_state(2, 3).unwrap();
        let s = e1.add(&e2).unwrap();
        assert_eq!(exact_rank(&[e1.clone(), e2.clone(), s.clone()]), 2);
        assert!(gram_determinant(&[e1.clone(), e2.clone(), s.clone()]).is_zero());
        assert_eq!(gram_determinant(&[e1.clone(), s.clone()]), BigRational::one());
        // same span, different generators → same RREF
        assert_eq!(rref(&[e1.clone(), e2.clone()]), rref(&[s, e1]));
    }

    #[test]
    fn tensor_norm_is_multiplicative() {
        let v = ElementaryVector::new(vec![gr(1, 2, 1, 1), gr(-3, 1, 0, 1)]).unwrap();
        let w = ElementaryVector::new(vec![gr(2, 1, 0, 1), gr(0, 1, 1, 5), gr(1, 1, 1, 1)]).unwrap();
        assert_eq!(v.tensor(&w).norm2(), v.norm2() * w.norm2());
    }

    fn arb_gr() -> impl Strategy<Value = GaussianRational> {
        (-50i64..50, 1i64..20, -50i64..50, 1i64..20).prop_map(|(a, b, c, d)| gr(a, b, c, d))
    }

    proptest! {
        #[test]
        fn text_encoding_round_trips(coeffs in prop::collection::vec(arb_gr(), 1..6)) {
            let v = ElementaryVector::new(coeffs).unwrap();
            let text = v.to_string();
            let back: ElementaryVector = text.parse().unwrap();
            prop_assert_eq!(&back, &v);
            prop_assert_eq!(back.to_string(), text);
        }

        #[test]
        fn exact_arithmetic_laws(a in prop::collection::vec(arb_gr(), 3), b in prop::collection::vec(arb_gr(), 2), s in arb_gr()) {
            let a = ElementaryVector::new(a).unwrap();
            let b = ElementaryVector::new(b).unwrap();
            prop_assert_eq!(a.tensor(&b).norm2(), a.norm2() * b.norm2());
            prop_assert_eq!(a.scale(&s).norm2(), a.norm2() * s.norm_sqr());
            prop_assert_eq!(a.scale(&s).tensor(&b), a.tensor(&b).scale(&s));
        }
    }
}
