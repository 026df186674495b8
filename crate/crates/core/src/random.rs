//! Seeded random operators for tests, sweeps and custom scenarios.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{hermitian_part, trace, Matrix};

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn ginibre(rng: &mut impl Rng, n: usize) -> Matrix {
    Matrix::from_fn(n, n, |_, _| gaussian(rng))
}

/// Hermitian matrix `scale · (G + G†) / 2`.
pub fn random_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> Matrix {
    hermitian_part(&ginibre(rng, n)).scale(scale)
}

/// Full-rank density matrix `G G† / Tr[G G†]` (Hilbert–Schmidt measure).
pub fn random_density(rng: &mut impl Rng, n: usize) -> Matrix {
    let g = ginibre(rng, n);
    let rho = &g * g.adjoint();
    let tr = trace(&rho).re;
    hermitian_part(&rho.scale(1.0 / tr))
}

/// Haar-random pure state `|ψ⟩⟨ψ|`.
pub fn random_pure(rng: &mut impl Rng, n: usize) -> Matrix {
    let v = DVector::from_fn(n, |_, _| gaussian(rng));
    let v = v.scale(1.0 / v.norm());
    &v * v.adjoint()
}
