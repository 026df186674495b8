//! Thermalizing qubit: a two-level system coupled to bosonic modes through the
//! rotating-wave (Jaynes–Cummings) interaction
//! `λ Σ_k (f_k* σ_+ ⊗ a_k + f_k σ_− ⊗ a_k†)`.
//!
//! Besides the exact truncated model this module provides the weak-coupling
//! Markovian description (emission rate, Lamb shift, Lindblad generator and its
//! closed-form solution), second-order perturbative states and the long-time
//! thermodynamic limits of system and bath.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::accounting::BipartiteSystem;
use crate::bosonic::ModeSpace;
use crate::dynamics::LindbladGenerator;
use crate::error::{invalid, Result};
use crate::linalg::{
    c64, commutator, hermitian_part, identity, partial_trace, pauli, validate_density, CompositeLayout, Matrix,
    Subsystem, DEFAULT_MAX_DIM,
};
use crate::models::{check_common, check_modes, coth_half_at, occupation, qubit_hamiltonian, tanh_half, BathMode};
use crate::quadrature::{principal_value, PrincipalValue, Tolerance};

/// Continuum spectral density `J(ω) = |f(ω)|²`.
#[derive(Clone)]
pub enum SpectralDensity {
    /// `ω e^{−εω}`.
    Ohmic { epsilon: f64 },
    /// `value` on `[lo, hi]`, zero elsewhere.
    Flat { value: f64, lo: f64, hi: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for SpectralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ohmic { epsilon } => f.debug_struct("Ohmic").field("epsilon", epsilon).finish(),
            Self::Flat { value, lo, hi } => {
                f.debug_struct("Flat").field("value", value).field("lo", lo).field("hi", hi).finish()
            }
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl SpectralDensity {
    pub fn at(&self, omega: f64) -> f64 {
        match self {
            Self::Ohmic { epsilon } => omega * (-epsilon * omega).exp(),
            Self::Flat { value, lo, hi } => {
                if omega >= *lo && omega <= *hi {
                    *value
                } else {
                    0.0
                }
            }
            Self::Custom(j) => j(omega),
        }
    }

    /// Frequencies where the density has kinks, jumps or changes scale.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Ohmic { epsilon } if *epsilon > 0.0 => vec![1.0 / epsilon, 10.0 / epsilon, 40.0 / epsilon],
            Self::Ohmic { .. } => Vec::new(),
            Self::Flat { lo, hi, .. } => vec![*lo, *hi],
            Self::Custom(_) => Vec::new(),
        }
    }

    /// Upper edge of the support, if finite.
    fn support_end(&self) -> Option<f64> {
        match self {
            Self::Flat { hi, .. } => Some(*hi),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Ohmic { epsilon } if !(*epsilon > 0.0) || !epsilon.is_finite() => {
                Err(invalid("epsilon", format!("Ohmic cutoff must be positive, got {epsilon}")))
            }
            Self::Flat { value, lo, hi } if !(lo < hi) || *lo < 0.0 || !value.is_finite() || *value < 0.0 => {
                Err(invalid("spectral_density", format!("flat density needs 0 ≤ lo < hi and value ≥ 0, got [{lo}, {hi}] x {value}")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct JaynesCummingsSpec {
    pub omega0: f64,
    pub lambda: f64,
    /// Inverse temperature; `f64::INFINITY` is the zero-temperature bath.
    pub beta: f64,
    pub modes: Vec<BathMode>,
    pub n_max: usize,
    pub density: SpectralDensity,
    /// Principal-value excision half-width as a fraction of `omega0`.
    pub excision_fraction: f64,
    pub max_dim: usize,
}

impl JaynesCummingsSpec {
    /// Spec with an Ohmic continuum density of cutoff `epsilon`.
    pub fn new(omega0: f64, lambda: f64, beta: f64, modes: Vec<BathMode>, n_max: usize, epsilon: f64) -> Self {
        Self {
            omega0,
            lambda,
            beta,
            modes,
            n_max,
            density: SpectralDensity::Ohmic { epsilon },
            excision_fraction: 1e-3,
            max_dim: DEFAULT_MAX_DIM,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.omega0, self.lambda, self.beta)?;
        check_modes(&self.modes)?;
        if self.n_max == 0 {
            return Err(invalid("n_max", "Fock cutoff must be at least 1"));
        }
        if !(self.excision_fraction > 0.0 && self.excision_fraction < 1.0) {
            return Err(invalid("excision_fraction", format!("must lie in (0, 1), got {}", self.excision_fraction)));
        }
        self.density.validate()
    }

    pub fn mode_space(&self) -> Result<ModeSpace> {
        ModeSpace::new(self.modes.len(), self.n_max, self.max_dim / 2)
    }

    fn omegas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.omega).collect()
    }

    pub fn occupation(&self) -> Result<f64> {
        occupation(self.omega0, self.beta)
    }
}

pub fn build_jc_hamiltonians(spec: &JaynesCummingsSpec) -> Result<BipartiteSystem> {
    spec.validate()?;
    let space = spec.mode_space()?;
    let h_b = space.free_hamiltonian(&spec.omegas());
    let sp = pauli::sigma_plus();
    let sm = pauli::sigma_minus();
    let mut h_int = Matrix::zeros(2 * space.dim(), 2 * space.dim());
    for (k, mode) in spec.modes.iter().enumerate() {
        let a = space.annihilation(k);
        h_int += sp.kronecker(&a) * (mode.f.conj() * spec.lambda);
        h_int += sm.kronecker(&a.adjoint()) * (mode.f * spec.lambda);
    }
    BipartiteSystem::new(qubit_hamiltonian(spec.omega0), h_b, h_int)
}

pub fn thermal_bath_state(spec: &JaynesCummingsSpec) -> Result<Matrix> {
    spec.validate()?;
    spec.mode_space()?.thermal_state(&spec.omegas(), spec.beta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionParameters {
    /// `γ = 2πλ² J(ω₀)`.
    pub gamma: f64,
    /// `Ω = 4λ² PV∫ J(ω) coth(βω/2) / (ω₀ − ω) dω`.
    pub lamb_shift: f64,
    pub principal_value: PrincipalValue,
}

pub fn emission_rate_and_lamb_shift(spec: &JaynesCummingsSpec) -> Result<EmissionParameters> {
    spec.validate()?;
    let lam2 = spec.lambda * spec.lambda;
    let density = &spec.density;
    let beta = spec.beta;
    let gamma = 2.0 * PI * lam2 * density.at(spec.omega0);
    let g = |w: f64| {
        let j = density.at(w);
        if j == 0.0 {
            0.0
        } else {
            j * coth_half_at(beta, w)
        }
    };
    let mut points = density.breakpoints();
    if beta.is_finite() {
        points.push(1.0 / beta);
    }
    let pv = match density.support_end() {
        Some(end) if end <= 0.0 => PrincipalValue { value: 0.0, halving_change: 0.0, excision: 0.0 },
        _ => principal_value(
            g,
            spec.omega0,
            0.0,
            spec.excision_fraction * spec.omega0,
            &points,
            Tolerance::absolute(1e-11).with_rel(1e-9),
        )?,
    };
    Ok(EmissionParameters { gamma, lamb_shift: 4.0 * lam2 * pv.value, principal_value: pv })
}

/// Qubit generator with Hamiltonian `(ω₀ + Ω)σ_z/2`, emission `σ_−` at rate
/// `γ(n̄ + 1)` and absorption `σ_+` at rate `γ n̄`.
pub fn lindblad_generator_example1(spec: &JaynesCummingsSpec) -> Result<LindbladGenerator> {
    let em = emission_rate_and_lamb_shift(spec)?;
    generator_from_rates(spec.omega0, em.gamma, em.lamb_shift, spec.occupation()?)
}

pub fn generator_from_rates(omega0: f64, gamma: f64, lamb_shift: f64, nbar: f64) -> Result<LindbladGenerator> {
    LindbladGenerator::new(
        qubit_hamiltonian(omega0 + lamb_shift),
        vec![
            (pauli::sigma_minus(), gamma * (nbar + 1.0)),
            (pauli::sigma_plus(), gamma * nbar),
        ],
    )
}

/// Gibbs state of `ω₀σ_z/2`.
pub fn gibbs_qubit(omega0: f64, beta: f64) -> Matrix {
    pauli::bloch_state([0.0, 0.0, -tanh_half(beta, omega0)])
}

/// Closed-form Markovian trajectory of the qubit Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticBlochSolution {
    pub bloch0: [f64; 3],
    pub gamma: f64,
    pub gamma_tilde: f64,
    pub lamb_shift: f64,
    pub beta: f64,
    pub omega0: f64,
}

impl AnalyticBlochSolution {
    pub fn new(bloch0: [f64; 3], gamma: f64, lamb_shift: f64, beta: f64, omega0: f64) -> Result<Self> {
        let norm = bloch0.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(invalid("bloch0", format!("Bloch vector length {norm} exceeds 1")));
        }
        let gamma_tilde = gamma * coth_half_at(beta, omega0);
        Ok(Self { bloch0, gamma, gamma_tilde, lamb_shift, beta, omega0 })
    }

    pub fn from_spec(spec: &JaynesCummingsSpec, bloch0: [f64; 3]) -> Result<Self> {
        let em = emission_rate_and_lamb_shift(spec)?;
        Self::new(bloch0, em.gamma, em.lamb_shift, spec.beta, spec.omega0)
    }

    pub fn bloch(&self, tau: f64) -> [f64; 3] {
        let [x0, y0, z0] = self.bloch0;
        let decay = (-self.gamma_tilde * tau).exp();
        let t = tanh_half(self.beta, self.omega0);
        let z = z0 * decay + t * (decay - 1.0);
        // x + iy rotates as e^{i(ω₀+Ω)τ} since ρ₁₀ = (x + iy)/2
        let transverse = c64(x0, y0)
            * Complex64::from_polar((-0.5 * self.gamma_tilde * tau).exp(), (self.omega0 + self.lamb_shift) * tau);
        [transverse.re, transverse.im, z]
    }

    pub fn state(&self, tau: f64) -> Matrix {
        pauli::bloch_state(self.bloch(tau))
    }
}

pub fn analytic_solution_example1(solution: &AnalyticBlochSolution, tau: f64) -> Result<Matrix> {
    if !(tau >= 0.0) {
        return Err(invalid("tau", format!("must be nonnegative, got {tau}")));
    }
    Ok(solution.state(tau))
}

/// `m_n(x, τ) = ∫₀^τ s^n e^{ixs} ds`.
pub fn oscillatory_moment(n: u32, x: f64, tau: f64) -> Complex64 {
    if (x * tau).abs() < 1.0 {
        // Σ_j (ix)^j τ^{n+j+1} / (j! (n+j+1))
        let mut term = c64(tau.powi(n as i32 + 1), 0.0);
        let mut sum = term / (n as f64 + 1.0);
        for j in 1..60 {
            term *= c64(0.0, x * tau) / j as f64;
            let add = term / (n as f64 + j as f64 + 1.0);
            sum += add;
            if add.norm() <= 1e-18 * sum.norm() {
                break;
            }
        }
        return sum;
    }
    let ix = c64(0.0, x);
    let edge = Complex64::from_polar(1.0, x * tau);
    let mut m = (edge - 1.0) / ix;
    for k in 1..=n {
        m = (edge * tau.powi(k as i32) - m * k as f64) / ix;
    }
    m
}

/// `η(Δ, τ) = ∫₀^τ e^{iΔs} ds = (e^{iΔτ} − 1)/(iΔ)`, with `η → τ` as `Δ → 0`.
pub fn eta(detuning: f64, tau: f64) -> Complex64 {
    oscillatory_moment(0, detuning, tau)
}

/// `ξ = ∫₀^τ ds e^{iΔ s} ∫₀^s ds' e^{−iΔ' s'}` for outer detuning `Δ` and inner
/// detuning `Δ'`.
pub fn xi(outer: f64, inner: f64, tau: f64) -> Complex64 {
    if (inner * tau).abs() < 1e-6 {
        oscillatory_moment(1, outer, tau) - c64(0.0, 0.5 * inner) * oscillatory_moment(2, outer, tau)
            - oscillatory_moment(3, outer, tau) * (inner * inner / 6.0)
    } else {
        c64(0.0, 1.0 / inner) * (oscillatory_moment(0, outer - inner, tau) - oscillatory_moment(0, outer, tau))
    }
}

/// Second-order states of the thermalizing qubit.
#[derive(Debug, Clone)]
pub struct PerturbativeStates {
    pub rho_s: Matrix,
    pub rho_b: Matrix,
}

/// Per-mode thermal moments `⟨a†a⟩` and `⟨a a†⟩` of the truncated bath.
fn ladder_moments(spec: &JaynesCummingsSpec) -> Result<Vec<(f64, f64)>> {
    let single = ModeSpace::new(1, spec.n_max, spec.max_dim)?;
    let a = crate::bosonic::annihilation(spec.n_max);
    let ad = a.adjoint();
    spec.modes
        .iter()
        .map(|m| {
            let rho = single.thermal_state(&[m.omega], spec.beta)?;
            let n = crate::linalg::expectation(&rho, &(&ad * &a));
            let np1 = crate::linalg::expectation(&rho, &(&a * &ad));
            Ok((n, np1))
        })
        .collect()
}

fn check_qubit_state(rho_s0: &Matrix) -> Result<()> {
    if rho_s0.nrows() != 2 || rho_s0.ncols() != 2 {
        return Err(invalid("rho_s0", "qubit state must be 2x2"));
    }
    validate_density(rho_s0)
}

/// Second-order correction to the reduced qubit state in the interaction
/// picture, for a bath in its Gibbs state.
pub fn system_correction_example1(spec: &JaynesCummingsSpec, rho_s0: &Matrix, tau: f64) -> Result<Matrix> {
    spec.validate()?;
    check_qubit_state(rho_s0)?;
    let moments = ladder_moments(spec)?;
    let sp = pauli::sigma_plus();
    let sm = pauli::sigma_minus();
    let spsm = &sp * &sm;
    let smsp = &sm * &sp;
    let rho = rho_s0;
    let mut out = Matrix::zeros(2, 2);
    for (mode, &(n, np1)) in spec.modes.iter().zip(&moments) {
        let d = spec.omega0 - mode.omega;
        let e = eta(d, tau);
        let k = xi(d, d, tau);
        let w = mode.f.norm_sqr();
        let e2 = e.norm_sqr();
        let mut term = &sp * rho * &sm * c64(e2 * n, 0.0) + &sm * rho * &sp * c64(e2 * np1, 0.0);
        term -= (&spsm * rho * k + rho * &spsm * k.conj()) * c64(np1, 0.0);
        term -= (&smsp * rho * k.conj() + rho * &smsp * k) * c64(n, 0.0);
        out += term * c64(w, 0.0);
    }
    Ok(out)
}

/// Joint state to second order in `λ`, from the truncated Dyson series
/// `ρ(τ) = U₀ [ρ₀ − iλ[B₁, ρ₀] + λ²(B₁ρ₀B₁ − T₂ρ₀ − ρ₀T₂†)] U₀†`
/// with `B₁ = ∫H̃(s)ds` and `T₂ = ∫∫_{s'<s} H̃(s)H̃(s')`.
pub fn perturbative_joint_state(spec: &JaynesCummingsSpec, rho_s0: &Matrix, tau: f64) -> Result<Matrix> {
    let (rho0, b1, t2) = dyson_operators(spec, rho_s0, tau)?;
    let lam = spec.lambda;
    let first = commutator(&b1, &rho0) * c64(0.0, -lam);
    let second = (&b1 * &rho0 * &b1 - &t2 * &rho0 - &rho0 * t2.adjoint()) * c64(lam * lam, 0.0);
    let tilde = &rho0 + first + second;
    let system = build_jc_hamiltonians(spec)?;
    let u = free_propagator(&system, tau)?;
    Ok(hermitian_part(&(&u * tilde * u.adjoint())))
}

fn free_propagator(system: &BipartiteSystem, tau: f64) -> Result<Matrix> {
    let layout = system.layout();
    let h0 = layout.lift_system(system.h_s()) + layout.lift_bath(system.h_b());
    // H₀ is diagonal in the product Fock basis
    Ok(Matrix::from_fn(h0.nrows(), h0.ncols(), |i, j| {
        if i == j {
            Complex64::from_polar(1.0, -h0[(i, i)].re * tau)
        } else {
            c64(0.0, 0.0)
        }
    }))
}

fn dyson_operators(spec: &JaynesCummingsSpec, rho_s0: &Matrix, tau: f64) -> Result<(Matrix, Matrix, Matrix)> {
    spec.validate()?;
    check_qubit_state(rho_s0)?;
    if !(tau >= 0.0) {
        return Err(invalid("tau", format!("must be nonnegative, got {tau}")));
    }
    let space = spec.mode_space()?;
    let rho_b = space.thermal_state(&spec.omegas(), spec.beta)?;
    let rho0 = rho_s0.kronecker(&rho_b);
    let sp = pauli::sigma_plus();
    let sm = pauli::sigma_minus();
    let spsm = &sp * &sm;
    let smsp = &sm * &sp;
    let ladders: Vec<Matrix> = (0..spec.modes.len()).map(|k| space.annihilation(k)).collect();
    let detunings: Vec<f64> = spec.modes.iter().map(|m| spec.omega0 - m.omega).collect();
    let n = 2 * space.dim();
    let mut b1 = Matrix::zeros(n, n);
    for (k, mode) in spec.modes.iter().enumerate() {
        let term = sp.kronecker(&ladders[k]) * (mode.f.conj() * eta(detunings[k], tau));
        b1 += &term + term.adjoint();
    }
    let mut t2 = Matrix::zeros(n, n);
    for (k, mk) in spec.modes.iter().enumerate() {
        for (q, mq) in spec.modes.iter().enumerate() {
            let kern = xi(detunings[k], detunings[q], tau);
            let aa = &ladders[k] * ladders[q].adjoint();
            let adad = ladders[k].adjoint() * &ladders[q];
            t2 += spsm.kronecker(&aa) * (mk.f.conj() * mq.f * kern);
            t2 += smsp.kronecker(&adad) * (mk.f * mq.f.conj() * kern.conj());
        }
    }
    Ok((rho0, b1, t2))
}

/// Reduced states to `O(λ²)`: the qubit from the kernel formula, the bath from
/// the partial trace of the second-order joint state.
pub fn perturbative_states_example1(spec: &JaynesCummingsSpec, rho_s0: &Matrix, tau: f64) -> Result<PerturbativeStates> {
    let correction = system_correction_example1(spec, rho_s0, tau)?;
    let u_s = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::from_polar(1.0, -0.5 * spec.omega0 * tau),
        Complex64::from_polar(1.0, 0.5 * spec.omega0 * tau),
    ]));
    let tilde = rho_s0 + correction * c64(spec.lambda * spec.lambda, 0.0);
    let rho_s = hermitian_part(&(&u_s * tilde * u_s.adjoint()));
    let joint = perturbative_joint_state(spec, rho_s0, tau)?;
    let layout = CompositeLayout::new(2, joint.nrows() / 2)?;
    let rho_b = partial_trace(&joint, &layout, Subsystem::Bath)?;
    Ok(PerturbativeStates { rho_s, rho_b })
}

/// Long-time bath rates in the continuum limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongTimeBathRates {
    pub dq_b: f64,
    pub du_b: f64,
    pub ds_b: f64,
    /// `lim dU_B / dS_B`; `None` when the heat rate vanishes.
    pub t_b_limit: Option<f64>,
}

/// `dQ_B = 4ω₀γ[(n̄+1)ρ₀₀ − n̄ρ₁₁ − |ρ₁₀|²]`, `dU_B = 4ω₀γ[(n̄+1)ρ₀₀ − n̄ρ₁₁]`,
/// `dS_B = β dQ_B`.
pub fn longtime_bath_rates_example1(spec: &JaynesCummingsSpec, rho_s0: &Matrix) -> Result<LongTimeBathRates> {
    check_qubit_state(rho_s0)?;
    let em = emission_rate_and_lamb_shift(spec)?;
    let nbar = spec.occupation()?;
    let r00 = rho_s0[(0, 0)].re;
    let r11 = rho_s0[(1, 1)].re;
    let c2 = rho_s0[(1, 0)].norm_sqr();
    let pump = (nbar + 1.0) * r00 - nbar * r11;
    let scale = 4.0 * spec.omega0 * em.gamma;
    let dq_b = scale * (pump - c2);
    let du_b = scale * pump;
    let ds_b = spec.beta * dq_b;
    let denom = nbar * (r00 - r11) + r00 - c2;
    let t_b_limit = if denom != 0.0 && spec.beta.is_finite() {
        Some((1.0 + c2 / denom) / spec.beta)
    } else {
        None
    };
    Ok(LongTimeBathRates { dq_b, du_b, ds_b, t_b_limit })
}

/// Limit of the qubit pseudo-temperature, from
/// `1/T = β[1 − (x² + y²) coth(βω₀/2) / (2(z + tanh(βω₀/2)))]`.
pub fn pseudo_temperature_limit(omega0: f64, beta: f64, bloch0: [f64; 3]) -> Option<f64> {
    let [x, y, z] = bloch0;
    let t = tanh_half(beta, omega0);
    let denom = 2.0 * (z + t);
    if denom == 0.0 || !beta.is_finite() {
        return None;
    }
    let inv = beta * (1.0 - (x * x + y * y) * coth_half_at(beta, omega0) / denom);
    (inv != 0.0 && inv.is_finite()).then(|| 1.0 / inv)
}

/// Extended qubit temperature `1/𝒯 = −(z / (ω₀ r)) ln((1+r)/(1−r))`.
pub fn extended_temperature_from_bloch(omega0: f64, bloch: [f64; 3]) -> Option<f64> {
    let [x, y, z] = bloch;
    let r = (x * x + y * y + z * z).sqrt();
    if r <= 0.0 || r >= 1.0 {
        return None;
    }
    let inv = -(z / (omega0 * r)) * (2.0 * r.atanh());
    (inv != 0.0 && inv.is_finite()).then(|| 1.0 / inv)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemTemperatures {
    pub pseudo_limit: Option<f64>,
    pub times: Vec<f64>,
    pub extended: Vec<Option<f64>>,
}

/// Pseudo-temperature limit and extended temperature along the Markovian
/// trajectory starting from `rho_s0`.
pub fn system_temperatures_example1(
    spec: &JaynesCummingsSpec,
    rho_s0: &Matrix,
    times: &[f64],
) -> Result<SystemTemperatures> {
    check_qubit_state(rho_s0)?;
    let bloch0 = pauli::bloch_vector(rho_s0);
    let sol = AnalyticBlochSolution::from_spec(spec, bloch0)?;
    let extended = times
        .iter()
        .map(|&t| extended_temperature_from_bloch(spec.omega0, sol.bloch(t)))
        .collect();
    Ok(SystemTemperatures {
        pseudo_limit: pseudo_temperature_limit(spec.omega0, spec.beta, bloch0),
        times: times.to_vec(),
        extended,
    })
}

/// Excitation number `σ_+σ_− ⊗ I + I ⊗ Σ_k a_k†a_k`.
pub fn excitation_number(spec: &JaynesCummingsSpec) -> Result<Matrix> {
    let space = spec.mode_space()?;
    let ones = vec![1.0; spec.modes.len()];
    let sp = pauli::sigma_plus();
    let sm = pauli::sigma_minus();
    Ok((&sp * &sm).kronecker(&identity(space.dim())) + identity(2).kronecker(&space.free_hamiltonian(&ones)))
}
