//! Truncated bosonic modes: ladder operators, multimode embedding, Gibbs
//! states and displacements.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_spectrum, identity, Matrix};

/// Bose–Einstein occupation `1 / (e^{βω} − 1)`.
pub fn planck_occupation(omega: f64, beta: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(invalid("omega", format!("must be positive, got {omega}")));
    }
    if !(beta > 0.0) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    Ok(1.0 / (beta * omega).exp_m1())
}

/// `coth(x / 2) = 1 + 2 / (e^x − 1)`, accurate for small and large `x`.
pub fn coth_half(x: f64) -> f64 {
    1.0 + 2.0 / x.exp_m1()
}

/// Single-mode annihilation operator on `{|0⟩, …, |n_max⟩}`.
pub fn annihilation(n_max: usize) -> Matrix {
    let d = n_max + 1;
    let mut a = Matrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn number(n_max: usize) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_fn(n_max + 1, |n, _| {
        Complex64::new(n as f64, 0.0)
    }))
}

/// Product of `modes` truncated oscillators, each with Fock states
/// `0..=n_max`. Mode 0 is the most significant tensor factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeSpace {
    modes: usize,
    n_max: usize,
    dim: usize,
}

impl ModeSpace {
    pub fn new(modes: usize, n_max: usize, max_dim: usize) -> Result<Self> {
        if modes == 0 {
            return Err(invalid("modes", "at least one mode is required"));
        }
        if n_max == 0 {
            return Err(invalid("n_max", "Fock cutoff must be at least 1"));
        }
        let mut dim: usize = 1;
        for _ in 0..modes {
            dim = dim
                .checked_mul(n_max + 1)
                .filter(|&d| d <= max_dim)
                .ok_or(Error::DimensionOverflow {
                    requested: (n_max + 1).saturating_pow(modes as u32),
                    max: max_dim,
                })?;
        }
        Ok(Self { modes, n_max, dim })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Occupation numbers of the Fock basis state with flat index `flat`.
    pub fn occupations(&self, mut flat: usize) -> Vec<usize> {
        let base = self.n_max + 1;
        let mut occ = vec![0; self.modes];
        for k in (0..self.modes).rev() {
            occ[k] = flat % base;
            flat /= base;
        }
        occ
    }

    /// Single-mode operator acting on mode `k`, identity elsewhere.
    pub fn embed(&self, op: &Matrix, k: usize) -> Matrix {
        let base = self.n_max + 1;
        let before = identity(base.pow(k as u32));
        let after = identity(base.pow((self.modes - k - 1) as u32));
        before.kronecker(op).kronecker(&after)
    }

    pub fn annihilation(&self, k: usize) -> Matrix {
        self.embed(&annihilation(self.n_max), k)
    }

    /// `Σ_k c_k a_k`.
    pub fn smeared_annihilation(&self, c: &[Complex64]) -> Matrix {
        let mut out = Matrix::zeros(self.dim, self.dim);
        for (k, ck) in c.iter().enumerate() {
            out += self.annihilation(k) * *ck;
        }
        out
    }

    /// `Σ_k ω_k a_k† a_k`.
    pub fn free_hamiltonian(&self, omegas: &[f64]) -> Matrix {
        let diag = nalgebra::DVector::from_fn(self.dim, |i, _| {
            let e: f64 = self
                .occupations(i)
                .iter()
                .zip(omegas)
                .map(|(&n, w)| n as f64 * w)
                .sum();
            Complex64::new(e, 0.0)
        });
        Matrix::from_diagonal(&diag)
    }

    /// Truncated Gibbs state `e^{−β Σ ω_k n_k} / Z`, a product over modes.
    pub fn thermal_state(&self, omegas: &[f64], beta: f64) -> Result<Matrix> {
        self.check_modes(omegas.len())?;
        if !(beta > 0.0) {
            return Err(invalid("beta", format!("must be positive, got {beta}")));
        }
        let per_mode: Vec<Vec<f64>> = omegas
            .iter()
            .map(|&w| {
                let weights: Vec<f64> = (0..=self.n_max)
                    .map(|n| if n == 0 { 1.0 } else { (-beta * w * n as f64).exp() })
                    .collect();
                let z: f64 = weights.iter().sum();
                weights.into_iter().map(|p| p / z).collect()
            })
            .collect();
        let diag = nalgebra::DVector::from_fn(self.dim, |i, _| {
            let p: f64 = self
                .occupations(i)
                .iter()
                .zip(&per_mode)
                .map(|(&n, probs)| probs[n])
                .product();
            Complex64::new(p, 0.0)
        });
        Ok(Matrix::from_diagonal(&diag))
    }

    pub fn vacuum(&self) -> Matrix {
        let mut rho = Matrix::zeros(self.dim, self.dim);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        rho
    }

    /// Displacement `exp(a†(g) − a(g))` with `a(g) = Σ_k g_k* a_k`, exact on the
    /// truncated space.
    pub fn displacement(&self, g: &[Complex64]) -> Result<Matrix> {
        self.check_modes(g.len())?;
        let conj: Vec<Complex64> = g.iter().map(|z| z.conj()).collect();
        let a_g = self.smeared_annihilation(&conj);
        let anti = a_g.adjoint() - &a_g;
        // anti is anti-Hermitian: exp(anti) = exp(-i H) with H = i·anti
        let h = anti * Complex64::i();
        Ok(hermitian_spectrum(&h)?.propagator(1.0))
    }

    /// Population of basis states in which some mode sits at the cutoff.
    pub fn cutoff_population(&self, rho: &Matrix) -> f64 {
        (0..self.dim)
            .filter(|&i| self.occupations(i).iter().any(|&n| n == self.n_max))
            .map(|i| rho[(i, i)].re)
            .sum()
    }

    /// Mean occupation `⟨a_k† a_k⟩` of mode `k`.
    pub fn mean_occupation(&self, rho: &Matrix, k: usize) -> f64 {
        (0..self.dim)
            .map(|i| self.occupations(i)[k] as f64 * rho[(i, i)].re)
            .sum()
    }

    fn check_modes(&self, n: usize) -> Result<()> {
        if n != self.modes {
            return Err(Error::DimensionMismatch(format!(
                "{n} mode parameters supplied for a {}-mode space",
                self.modes
            )));
        }
        Ok(())
    }
}
