//! Dense complex operator algebra on `S ⊗ B`.
//!
//! Operators are plain `nalgebra` matrices over `Complex64`. Composite indices
//! follow the "system factor first" Kronecker convention: the pair
//! `(i_s, i_b)` lives at flat index `i_s * dim_b + i_b`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<Complex64>;

/// Default cap on the total Hilbert-space dimension of a composite operator.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Eigenvalues below this magnitude are treated as zero inside logarithms.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Entrywise tolerance for Hermiticity, relative to `max(1, max|A_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on trace and positivity for density matrices.
pub const DENSITY_TOL: f64 = 1e-10;

/// Eigenvalues below `-NEGATIVITY_FLOOR` make entropies fail.
pub const NEGATIVITY_FLOOR: f64 = 1e-8;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

pub fn zeros(n: usize) -> Matrix {
    Matrix::zeros(n, n)
}

pub fn trace(m: &Matrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr[A B]` without forming the product.
pub fn trace_product(a: &Matrix, b: &Matrix) -> Complex64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Real part of `Tr[rho O]`.
pub fn expectation(rho: &Matrix, op: &Matrix) -> f64 {
    trace_product(rho, op).re
}

pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    a * b - b * a
}

pub fn anticommutator(a: &Matrix, b: &Matrix) -> Matrix {
    a * b + b * a
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |A - A^dag|` entrywise.
pub fn hermitian_defect(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &Matrix, tol: f64) -> bool {
    m.is_square() && hermitian_defect(m) <= tol * max_abs(m).max(1.0)
}

/// `(A + A^dag) / 2`.
pub fn hermitian_part(m: &Matrix) -> Matrix {
    (m + m.adjoint()).scale(0.5)
}

/// Trace distance `½ ‖A − B‖₁` between two Hermitian operators.
pub fn trace_distance(a: &Matrix, b: &Matrix) -> Result<f64> {
    let diff = hermitian_part(&(a - b));
    let spec = hermitian_spectrum(&diff)?;
    Ok(0.5 * spec.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}

pub fn require_square(m: &Matrix, what: &str) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "{what} is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

pub fn require_hermitian(m: &Matrix) -> Result<()> {
    require_square(m, "operator")?;
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// Checks trace, Hermiticity and positivity of a density matrix.
pub fn validate_density(rho: &Matrix) -> Result<()> {
    require_square(rho, "density matrix")?;
    let defect = hermitian_defect(rho);
    if defect > DENSITY_TOL {
        return Err(Error::InvalidDensity(format!(
            "not Hermitian (defect {defect:.3e})"
        )));
    }
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(Error::InvalidDensity(format!(
            "trace {:.12} + {:.3e}i",
            tr.re, tr.im
        )));
    }
    let spec = hermitian_spectrum(&hermitian_part(rho))?;
    let min = spec.min_eigenvalue();
    if min < -DENSITY_TOL {
        return Err(Error::InvalidDensity(format!(
            "smallest eigenvalue {min:.3e}"
        )));
    }
    Ok(())
}

/// Pauli and ladder matrices with `sigma_z = diag(1, -1)`.
///
/// The ladder operators are normalised as `sigma_± = (sigma_x ± i sigma_y) / 2`,
/// so `sigma_+ = |0⟩⟨1|` raises the `sigma_z = -1` state to `sigma_z = +1`.
pub mod pauli {
    use super::{c64, Matrix};

    pub fn sigma_x() -> Matrix {
        Matrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)])
    }

    pub fn sigma_y() -> Matrix {
        Matrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, -1.0), c64(0.0, 1.0), c64(0.0, 0.0)])
    }

    pub fn sigma_z() -> Matrix {
        Matrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)])
    }

    pub fn sigma_plus() -> Matrix {
        Matrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)])
    }

    pub fn sigma_minus() -> Matrix {
        Matrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)])
    }

    /// `½ (1 + r·σ)`.
    pub fn bloch_state(r: [f64; 3]) -> Matrix {
        let [x, y, z] = r;
        Matrix::from_row_slice(
            2,
            2,
            &[
                c64(0.5 * (1.0 + z), 0.0),
                c64(0.5 * x, -0.5 * y),
                c64(0.5 * x, 0.5 * y),
                c64(0.5 * (1.0 - z), 0.0),
            ],
        )
    }

    /// Bloch vector `(Tr ρσx, Tr ρσy, Tr ρσz)` of a qubit state.
    pub fn bloch_vector(rho: &Matrix) -> [f64; 3] {
        [
            2.0 * rho[(1, 0)].re,
            2.0 * rho[(1, 0)].im,
            (rho[(0, 0)] - rho[(1, 1)]).re,
        ]
    }
}

/// Which factor of `S ⊗ B` to keep in a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    System,
    Bath,
}

/// Dimensions of the two factors of `S ⊗ B`, system first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositeLayout {
    dim_s: usize,
    dim_b: usize,
}

impl CompositeLayout {
    pub fn new(dim_s: usize, dim_b: usize) -> Result<Self> {
        if dim_s < 2 {
            return Err(crate::error::invalid("dim_s", "system dimension must be at least 2"));
        }
        if dim_b < 1 {
            return Err(crate::error::invalid("dim_b", "bath dimension must be at least 1"));
        }
        Ok(Self { dim_s, dim_b })
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn total(&self) -> usize {
        self.dim_s * self.dim_b
    }

    #[inline]
    pub fn flat_index(&self, i_s: usize, i_b: usize) -> usize {
        i_s * self.dim_b + i_b
    }

    #[inline]
    pub fn split_index(&self, flat: usize) -> (usize, usize) {
        (flat / self.dim_b, flat % self.dim_b)
    }

    pub(crate) fn check(&self, m: &Matrix, what: &str) -> Result<()> {
        if m.nrows() != self.total() || m.ncols() != self.total() {
            return Err(Error::DimensionMismatch(format!(
                "{what} is {}x{}, layout expects {}x{}",
                m.nrows(),
                m.ncols(),
                self.total(),
                self.total()
            )));
        }
        Ok(())
    }

    /// `A ⊗ I_B`.
    pub fn lift_system(&self, a: &Matrix) -> Matrix {
        a.kronecker(&identity(self.dim_b))
    }

    /// `I_S ⊗ B`.
    pub fn lift_bath(&self, b: &Matrix) -> Matrix {
        identity(self.dim_s).kronecker(b)
    }
}

/// Kronecker product `A ⊗ B`, refusing results larger than `max_dim`.
pub fn tensor_product(a: &Matrix, b: &Matrix, max_dim: usize) -> Result<Matrix> {
    let m = require_square(a, "left factor")?;
    let n = require_square(b, "right factor")?;
    let requested = m
        .checked_mul(n)
        .ok_or(Error::DimensionOverflow { requested: usize::MAX, max: max_dim })?;
    if requested > max_dim {
        return Err(Error::DimensionOverflow { requested, max: max_dim });
    }
    Ok(a.kronecker(b))
}

/// Partial trace over the factor *not* listed in `keep`.
pub fn partial_trace(o: &Matrix, layout: &CompositeLayout, keep: Subsystem) -> Result<Matrix> {
    layout.check(o, "operator")?;
    let (ds, db) = (layout.dim_s(), layout.dim_b());
    Ok(match keep {
        Subsystem::System => Matrix::from_fn(ds, ds, |i, j| {
            (0..db).map(|b| o[(i * db + b, j * db + b)]).sum()
        }),
        Subsystem::Bath => Matrix::from_fn(db, db, |a, b| {
            (0..ds).map(|s| o[(s * db + a, s * db + b)]).sum()
        }),
    })
}

/// Eigen-decomposition `H = V diag(λ) V†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: Matrix,
}

/// Spectral decomposition of a Hermitian operator.
pub fn hermitian_spectrum(h: &Matrix) -> Result<HermitianSpectrum> {
    require_hermitian(h)?;
    let eig = SymmetricEigen::new(hermitian_part(h));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianSpectrum { eigenvalues, eigenvectors })
}

impl HermitianSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn reconstruct(&self) -> Matrix {
        self.map(|x| x)
    }

    /// `f(H) = V diag(f(λ)) V†` for a real function.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        self.map_complex(|x| Complex64::new(f(x), 0.0))
    }

    pub fn map_complex(&self, f: impl Fn(f64) -> Complex64) -> Matrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, lam) in self.eigenvalues.iter().enumerate() {
            let fl = f(*lam);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fl);
        }
        scaled * v.adjoint()
    }

    /// `e^{-iHt}`.
    pub fn propagator(&self, t: f64) -> Matrix {
        self.map_complex(|x| Complex64::from_polar(1.0, -x * t))
    }

    /// `V† A V`: an operator expressed in the eigenbasis.
    pub fn to_eigenbasis(&self, a: &Matrix) -> Matrix {
        self.eigenvectors.adjoint() * a * &self.eigenvectors
    }

    pub fn from_eigenbasis(&self, a: &Matrix) -> Matrix {
        &self.eigenvectors * a * self.eigenvectors.adjoint()
    }

    /// `e^{-iHt} ρ e^{iHt}` computed in the eigenbasis of `H`.
    pub fn evolve(&self, rho: &Matrix, t: f64) -> Matrix {
        self.from_eigenbasis(&self.rotate_eigenbasis(&self.to_eigenbasis(rho), t))
    }

    /// Phase rotation of an eigenbasis-expressed operator.
    pub(crate) fn rotate_eigenbasis(&self, rho_eig: &Matrix, t: f64) -> Matrix {
        let lam = &self.eigenvalues;
        Matrix::from_fn(rho_eig.nrows(), rho_eig.ncols(), |i, j| {
            rho_eig[(i, j)] * Complex64::from_polar(1.0, -(lam[i] - lam[j]) * t)
        })
    }

    /// `Tr[X log H]` for `H` positive semidefinite.
    ///
    /// Directions with eigenvalue below [`EIGEN_CLAMP`] are skipped when `X`
    /// carries no weight there, and give `±∞` otherwise.
    pub fn trace_with_log(&self, x: &Matrix, skip_null_space: bool) -> f64 {
        let xe = self.to_eigenbasis(x);
        let mut acc = 0.0;
        for (i, lam) in self.eigenvalues.iter().enumerate() {
            let w = xe[(i, i)].re;
            if *lam < EIGEN_CLAMP {
                if skip_null_space || w.abs() <= EIGEN_CLAMP {
                    continue;
                }
                return if w > 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
            }
            acc += w * lam.ln();
        }
        acc
    }
}

/// `e^{-iH dt} ρ e^{iH dt}` with `hbar = 1`.
pub fn evolve_unitary(rho: &Matrix, h: &Matrix, dt: f64) -> Result<Matrix> {
    let n = require_square(rho, "density matrix")?;
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "state is {n}x{n}, Hamiltonian is {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let spec = hermitian_spectrum(h)?;
    if dt == 0.0 {
        return Ok(rho.clone());
    }
    Ok(spec.evolve(rho, dt))
}

/// Von Neumann entropy `-Tr ρ ln ρ` in nats.
pub fn von_neumann_entropy(rho: &Matrix) -> Result<f64> {
    let spec = hermitian_spectrum(&hermitian_part(rho))?;
    entropy_of_spectrum(&spec)
}

pub fn entropy_of_spectrum(spec: &HermitianSpectrum) -> Result<f64> {
    let min = spec.min_eigenvalue();
    if min < -NEGATIVITY_FLOOR {
        return Err(Error::NegativeEigenvalue { value: min });
    }
    Ok(spec
        .eigenvalues
        .iter()
        .filter(|&&p| p > EIGEN_CLAMP)
        .map(|&p| -p * p.ln())
        .sum())
}

/// `dS/dτ = -Tr[ρ̇ ln ρ]` for a trace-preserving flow.
pub fn entropy_rate(rho: &Matrix, rho_dot: &Matrix) -> Result<f64> {
    let spec = hermitian_spectrum(&hermitian_part(rho))?;
    entropy_rate_of_spectrum(&spec, rho_dot)
}

pub fn entropy_rate_of_spectrum(spec: &HermitianSpectrum, rho_dot: &Matrix) -> Result<f64> {
    let min = spec.min_eigenvalue();
    if min < -NEGATIVITY_FLOOR {
        return Err(Error::NegativeEigenvalue { value: min });
    }
    Ok(-spec.trace_with_log(rho_dot, true))
}

/// Quantum relative entropy `D(ρ‖σ) = Tr ρ(ln ρ − ln σ)`.
///
/// Returns `f64::INFINITY` when the support of `ρ` is not contained in the
/// support of `σ`.
pub fn relative_entropy(rho: &Matrix, sigma: &Matrix) -> Result<f64> {
    validate_density(rho)?;
    validate_density(sigma)?;
    if rho.nrows() != sigma.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy of {}x{} against {}x{}",
            rho.nrows(),
            rho.ncols(),
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let rho_spec = hermitian_spectrum(&hermitian_part(rho))?;
    let sigma_spec = hermitian_spectrum(&hermitian_part(sigma))?;
    let neg_entropy = -entropy_of_spectrum(&rho_spec)?;
    let cross = sigma_spec.trace_with_log(rho, false);
    if cross == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    Ok(neg_entropy - cross)
}

#[cfg(test)]
mod tests {
    use super::pauli::*;
    use super::*;
    use crate::random::{random_density, random_hermitian, seeded};

    fn assert_close(a: &Matrix, b: &Matrix, tol: f64) {
        let d = max_abs(&(a - b));
        assert!(d <= tol, "matrices differ by {d:.3e} > {tol:.1e}\n{a}\n{b}");
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let out = tensor_product(&identity(2), &identity(3), DEFAULT_MAX_DIM).unwrap();
        assert_close(&out, &identity(6), 0.0);
    }

    #[test]
    fn tensor_follows_system_first_convention() {
        let out = tensor_product(&sigma_z(), &identity(2), DEFAULT_MAX_DIM).unwrap();
        let expected = Matrix::from_diagonal(&DVector::from_vec(vec![
            c64(1.0, 0.0),
            c64(1.0, 0.0),
            c64(-1.0, 0.0),
            c64(-1.0, 0.0),
        ]));
        assert_close(&out, &expected, 0.0);
    }

    #[test]
    fn tensor_trace_factorises() {
        let mut rng = seeded(11);
        let a = random_hermitian(&mut rng, 2, 1.0) + Matrix::from_element(2, 2, c64(0.1, 0.3));
        let b = random_hermitian(&mut rng, 3, 1.0);
        let ab = tensor_product(&a, &b, DEFAULT_MAX_DIM).unwrap();
        // direct multiplication oracle: sum of diagonal products
        let mut oracle = c64(0.0, 0.0);
        for i in 0..2 {
            for j in 0..3 {
                oracle += a[(i, i)] * b[(j, j)];
            }
        }
        assert!((trace(&ab) - oracle).norm() < 1e-14);
        assert!((trace(&ab) - trace(&a) * trace(&b)).norm() < 1e-14);
    }

    #[test]
    fn tensor_mixed_product_property() {
        let mut rng = seeded(12);
        let (a, c) = (random_hermitian(&mut rng, 2, 1.0), random_hermitian(&mut rng, 2, 1.0));
        let (b, d) = (random_hermitian(&mut rng, 3, 1.0), random_hermitian(&mut rng, 3, 1.0));
        let lhs = a.kronecker(&b) * c.kronecker(&d);
        let rhs = (&a * &c).kronecker(&(&b * &d));
        assert_close(&lhs, &rhs, 1e-13);
    }

    #[test]
    fn tensor_rejects_oversized_result() {
        let err = tensor_product(&identity(10), &identity(10), 64).unwrap_err();
        assert_eq!(err, Error::DimensionOverflow { requested: 100, max: 64 });
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = seeded(3);
        let rs = random_density(&mut rng, 2);
        let rb = random_density(&mut rng, 3);
        let layout = CompositeLayout::new(2, 3).unwrap();
        let joint = rs.kronecker(&rb);
        assert_close(&partial_trace(&joint, &layout, Subsystem::System).unwrap(), &rs, 1e-14);
        assert_close(&partial_trace(&joint, &layout, Subsystem::Bath).unwrap(), &rb, 1e-14);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = DVector::from_vec(vec![c64(s, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(s, 0.0)]);
        let rho = &psi * psi.adjoint();
        let layout = CompositeLayout::new(2, 2).unwrap();
        let half = identity(2).scale(0.5);
        assert_close(&partial_trace(&rho, &layout, Subsystem::System).unwrap(), &half, 1e-15);
        assert_close(&partial_trace(&rho, &layout, Subsystem::Bath).unwrap(), &half, 1e-15);
    }

    #[test]
    fn partial_trace_matches_index_sum_oracle() {
        let mut rng = seeded(5);
        let o = random_hermitian(&mut rng, 6, 1.0);
        let layout = CompositeLayout::new(2, 3).unwrap();
        let reduced = partial_trace(&o, &layout, Subsystem::System).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = c64(0.0, 0.0);
                for b in 0..3 {
                    acc += o[(3 * i + b, 3 * j + b)];
                }
                assert!((reduced[(i, j)] - acc).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn partial_trace_rejects_wrong_dimension() {
        let layout = CompositeLayout::new(2, 3).unwrap();
        assert!(matches!(
            partial_trace(&identity(4), &layout, Subsystem::System),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn layout_index_map_is_bijective() {
        let layout = CompositeLayout::new(3, 4).unwrap();
        let mut seen = vec![false; layout.total()];
        for s in 0..3 {
            for b in 0..4 {
                let f = layout.flat_index(s, b);
                assert!(!seen[f]);
                seen[f] = true;
                assert_eq!(layout.split_index(f), (s, b));
            }
        }
        assert!(CompositeLayout::new(1, 4).is_err());
        assert!(CompositeLayout::new(2, 0).is_err());
    }

    #[test]
    fn spectrum_of_pauli_matrices() {
        let z = hermitian_spectrum(&sigma_z()).unwrap();
        assert_eq!(z.eigenvalues.as_slice(), &[-1.0, 1.0]);
        let x = hermitian_spectrum(&sigma_x()).unwrap();
        assert!((x.eigenvalues[0] + 1.0).abs() < 1e-15 && (x.eigenvalues[1] - 1.0).abs() < 1e-15);
        // eigenvector for -1 is (|0> - |1>)/sqrt2 up to phase
        let v = x.eigenvectors.column(0);
        assert!((v[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((v[0] + v[1]).norm() < 1e-14);
    }

    #[test]
    fn spectrum_reconstructs_random_hermitian() {
        let mut rng = seeded(8);
        let h = random_hermitian(&mut rng, 8, 1.0);
        let spec = hermitian_spectrum(&h).unwrap();
        assert_close(&spec.reconstruct(), &h, 1e-10 * 8.0);
        let v = &spec.eigenvectors;
        assert_close(&(v.adjoint() * v), &identity(8), 1e-10);
        assert!(spec.eigenvalues.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn spectrum_rejects_non_hermitian() {
        assert!(matches!(hermitian_spectrum(&sigma_plus()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn zero_time_evolution_is_identity() {
        let mut rng = seeded(1);
        let rho = random_density(&mut rng, 4);
        let h = random_hermitian(&mut rng, 4, 1.0);
        assert_close(&evolve_unitary(&rho, &h, 0.0).unwrap(), &rho, 0.0);
    }

    #[test]
    fn half_turn_about_z_maps_plus_to_minus() {
        let plus = bloch_state([1.0, 0.0, 0.0]);
        let minus = bloch_state([-1.0, 0.0, 0.0]);
        let h = sigma_z().scale(0.5);
        let out = evolve_unitary(&plus, &h, std::f64::consts::PI).unwrap();
        assert_close(&out, &minus, 1e-14);
    }

    #[test]
    fn commuting_state_is_a_fixed_point() {
        let mut rng = seeded(2);
        let h = random_hermitian(&mut rng, 5, 1.0);
        let rho = hermitian_spectrum(&h).unwrap().map(|x| (-x).exp());
        let rho = rho.scale(1.0 / trace(&rho).re);
        assert_close(&evolve_unitary(&rho, &h, 3.7).unwrap(), &rho, 1e-13);
    }

    #[test]
    fn entropy_reference_values() {
        assert!(von_neumann_entropy(&bloch_state([0.0, 0.6, 0.8])).unwrap().abs() < 1e-12);
        let mixed = identity(2).scale(0.5);
        assert!((von_neumann_entropy(&mixed).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        // -0.9 ln 0.9 - 0.1 ln 0.1 evaluated with 50-digit arithmetic
        let diag = bloch_state([0.0, 0.0, 0.8]);
        assert!((von_neumann_entropy(&diag).unwrap() - 0.325_082_973_391_448_3).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_strongly_negative_eigenvalue() {
        let bad = bloch_state([0.0, 0.0, 1.2]);
        assert!(matches!(von_neumann_entropy(&bad), Err(Error::NegativeEigenvalue { .. })));
    }

    #[test]
    fn relative_entropy_reference_values() {
        let mut rng = seeded(4);
        let rho = random_density(&mut rng, 3);
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-12);
        let ground = bloch_state([0.0, 0.0, 1.0]);
        let mixed = identity(2).scale(0.5);
        assert!((relative_entropy(&ground, &mixed).unwrap() - std::f64::consts::LN_2).abs() < 1e-14);
        assert_eq!(relative_entropy(&mixed, &ground).unwrap(), f64::INFINITY);
    }

    #[test]
    fn relative_entropy_matches_spectral_sum_oracle() {
        let mut rng = seeded(9);
        let rho = random_density(&mut rng, 3);
        let sigma = random_density(&mut rng, 3);
        let rs = hermitian_spectrum(&rho).unwrap();
        let ss = hermitian_spectrum(&sigma).unwrap();
        // D = Σ_i p_i ln p_i − Σ_ij p_i |<r_i|s_j>|² ln q_j
        let mut oracle = 0.0;
        for i in 0..3 {
            let p = rs.eigenvalues[i];
            oracle += p * p.ln();
            for j in 0..3 {
                let q = ss.eigenvalues[j];
                let overlap = rs.eigenvectors.column(i).dotc(&ss.eigenvectors.column(j)).norm_sqr();
                oracle -= p * overlap * q.ln();
            }
        }
        let d = relative_entropy(&rho, &sigma).unwrap();
        assert!((d - oracle).abs() < 1e-12, "{d} vs {oracle}");
        assert!(d >= 0.0);
    }

    #[test]
    fn validate_density_flags_bad_trace() {
        assert!(validate_density(&identity(2)).is_err());
        assert!(validate_density(&identity(2).scale(0.5)).is_ok());
    }
}
