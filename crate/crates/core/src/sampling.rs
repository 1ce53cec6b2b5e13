//! Seeded random objects: Haar states and unitaries, random Hermitian,
//! PSD and symmetric matrices.
//!
//! Every Monte-Carlo loop in the crate draws from [`rng_for`] with an
//! explicit `(seed, stream)` pair so results do not depend on the number of
//! worker threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{inner, norm, CVector, ComplexMatrix};

pub type LabRng = ChaCha8Rng;

/// Deterministic generator for a given seed and stream index.
pub fn rng_for(seed: u64, stream: u64) -> LabRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Uniform unit vector in C^n: normalized i.i.d. complex Gaussians.
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    loop {
        let v: CVector = (0..n).map(|_| complex_gaussian(rng)).collect();
        let nv = norm(&v);
        if nv > 1e-300 {
            return v.into_iter().map(|z| z / nv).collect();
        }
    }
}

/// Uniform unit vector on the real sphere S^{n-1} ⊂ R^n.
pub fn real_sphere_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-300 {
            return v.into_iter().map(|x| x / nv).collect();
        }
    }
}

/// Haar-distributed unitary via Gram–Schmidt on Gaussian columns.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let mut cols: Vec<CVector> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: CVector = (0..n).map(|_| complex_gaussian(rng)).collect();
        for _ in 0..2 {
            for c in &cols {
                let ov = inner(c, &v);
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= ov * y;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            cols.push(v.into_iter().map(|z| z / nv).collect());
        }
    }
    ComplexMatrix::from_columns(&cols)
}

/// Hermitian matrix with i.i.d. Gaussian entries (GUE up to scaling).
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, |_, _| complex_gaussian(rng));
    g.hermitian_part()
}

/// G G† / n + min_eig·I, so every eigenvalue is at least `min_eig`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, min_eig: f64) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, |_, _| complex_gaussian(rng));
    let p = g.matmul(&g.adjoint()).scale(1.0 / n as f64);
    (&p + &ComplexMatrix::identity(n).scale(min_eig)).hermitian_part()
}

/// Random full-rank density matrix (trace 1).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let p = random_psd(rng, n, 1e-3);
    let t = p.trace().re;
    p.scale(1.0 / t)
}

/// Complex symmetric (Aᵀ = A, not self-adjoint) Gaussian matrix.
pub fn random_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, |_, _| complex_gaussian(rng));
    let gt = g.transpose();
    (&g + &gt).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_states_are_unit() {
        let mut rng = rng_for(1, 0);
        for n in 1..10 {
            assert!((norm(&haar_state(&mut rng, n)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = rng_for(2, 0);
        let u = haar_unitary(&mut rng, 6);
        let g = u.adjoint().matmul(&u);
        assert!(g.max_abs_diff(&ComplexMatrix::identity(6)) < 1e-12);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = rng_for(3, 7).random();
        let b: u64 = rng_for(3, 7).random();
        let c: u64 = rng_for(3, 8).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
