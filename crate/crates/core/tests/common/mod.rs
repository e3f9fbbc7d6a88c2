#![allow(dead_code)]

use hhl_lab_core::hhl::{self, LinearSystem, SpectralData};
use hhl_lab_core::tensor::{self, CMatrix, CVector};
use nalgebra::QR;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_state(rng: &mut impl Rng, dim: usize) -> CVector {
    let v = CVector::from_fn(dim, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
    v.unscale(v.norm())
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
    QR::new(g).q()
}

pub fn random_density(rng: &mut impl Rng, dim: usize, rank: usize) -> CMatrix {
    let mut rho = CMatrix::zeros(dim, dim);
    for _ in 0..rank {
        let v = random_state(rng, dim);
        rho += tensor::projector(&v).scale(rng.random::<f64>());
    }
    let tr = rho.trace().re;
    rho.unscale(tr)
}

/// Hermitian `A = V diag(λ) V†` with a random unitary `V`.
pub fn matrix_with_spectrum(rng: &mut impl Rng, eigenvalues: &[f64]) -> (CMatrix, CMatrix) {
    let v = random_unitary(rng, eigenvalues.len());
    let d = CMatrix::from_diagonal(&tensor::real_vector(eigenvalues));
    let a = &v * d * v.adjoint();
    let a = (&a + a.adjoint()).scale(0.5);
    (a, v)
}

/// Distinct integer eigenvalues drawn from `1..=max`.
pub fn distinct_integers(rng: &mut impl Rng, n: usize, max: u32) -> Vec<f64> {
    let mut pool: Vec<u32> = (1..=max).collect();
    pool.shuffle(rng);
    pool[..n].iter().map(|&x| x as f64).collect()
}

/// Kind of right-hand side relative to the eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// One eigenvector.
    Single,
    /// At least two overlaps, each of magnitude ≥ 0.2; some may be exactly zero.
    Several,
}

/// Random positive-definite system with distinct integer eigenvalues, a C in
/// `[0.5, 1]·λ_min` and a right-hand side of the requested support.
pub fn random_instance(rng: &mut impl Rng, n: usize, support: Support) -> (LinearSystem, f64) {
    let lambdas = distinct_integers(rng, n, 8);
    let (a, v) = matrix_with_spectrum(rng, &lambdas);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    match support {
        Support::Single => {
            let k = rng.random_range(0..n);
            coeffs[k] = Complex64::from_polar(1.0, rng.random::<f64>() * 6.0);
        }
        Support::Several => {
            let count = rng.random_range(2..=n);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(rng);
            for &k in &idx[..count] {
                let mag = 0.2 + 0.8 * rng.random::<f64>();
                coeffs[k] = Complex64::from_polar(mag, rng.random::<f64>() * 6.0);
            }
        }
    }
    let b = &v * CVector::from_vec(coeffs);
    let lambda_min = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
    let c = lambda_min * (0.5 + 0.5 * rng.random::<f64>());
    (LinearSystem::normalized(a, b).unwrap(), c)
}

pub fn random_spec(rng: &mut impl Rng, n: usize, support: Support) -> SpectralData {
    let (sys, c) = random_instance(rng, n, support);
    hhl::spectral_decompose(&sys, c, None).unwrap()
}

pub fn paper_2d_spec(b0_sq: f64, c: f64) -> SpectralData {
    let b = tensor::real_vector(&[b0_sq.sqrt(), (1.0 - b0_sq).sqrt()]);
    let sys = LinearSystem::new(hhl::builtin_matrix("paper-2d").unwrap(), b).unwrap();
    hhl::spectral_decompose(&sys, c, None).unwrap()
}
