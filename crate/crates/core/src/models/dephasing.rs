//! Pure-dephasing qubit: `H_int = λ σ_z ⊗ (a(f) + a†(f))` with
//! `a(f) = Σ_k f_k* a_k`. The interaction commutes with `H_S`, so populations
//! are conserved and every coherence decays as `e^{−8λ²Γ(τ)}` while the bath
//! is displaced conditionally on the qubit state.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::accounting::BipartiteSystem;
use crate::bosonic::ModeSpace;
use crate::dynamics::{propagate_lindblad, LindbladGenerator, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::linalg::{c64, pauli, validate_density, Matrix, DEFAULT_MAX_DIM};
use crate::models::{check_common, check_modes, coth_half_at, qubit_hamiltonian, BathMode};
use crate::quadrature::{integrate_pieces, integrate_to_infinity, Tolerance};

/// Largest tolerated population of the top Fock level after displacement.
pub const LEAKAGE_THRESHOLD: f64 = 1e-6;

/// Absolute tolerance of the continuum kernel quadratures.
pub const KERNEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum DephasingBath {
    Discrete { modes: Vec<BathMode>, n_max: usize },
    /// Continuum with `|f(ω)|² = ω e^{−εω}`.
    OhmicContinuum { epsilon: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DephasingSpec {
    pub omega0: f64,
    pub lambda: f64,
    /// Inverse temperature; `f64::INFINITY` is allowed.
    pub beta: f64,
    pub bath: DephasingBath,
    pub max_dim: usize,
}

impl DephasingSpec {
    pub fn discrete(omega0: f64, lambda: f64, beta: f64, modes: Vec<BathMode>, n_max: usize) -> Self {
        Self { omega0, lambda, beta, bath: DephasingBath::Discrete { modes, n_max }, max_dim: DEFAULT_MAX_DIM }
    }

    pub fn ohmic(omega0: f64, lambda: f64, beta: f64, epsilon: f64) -> Self {
        Self { omega0, lambda, beta, bath: DephasingBath::OhmicContinuum { epsilon }, max_dim: DEFAULT_MAX_DIM }
    }

    pub fn validate(&self) -> Result<()> {
        check_common(self.omega0, self.lambda, self.beta)?;
        match &self.bath {
            DephasingBath::Discrete { modes, n_max } => {
                check_modes(modes)?;
                if *n_max == 0 {
                    return Err(invalid("n_max", "Fock cutoff must be at least 1"));
                }
            }
            DephasingBath::OhmicContinuum { epsilon } => {
                if !(*epsilon > 0.0) || !epsilon.is_finite() {
                    return Err(invalid("epsilon", format!("must be positive in continuum mode, got {epsilon}")));
                }
            }
        }
        Ok(())
    }

    fn discrete_parts(&self) -> Result<(&[BathMode], ModeSpace)> {
        match &self.bath {
            DephasingBath::Discrete { modes, n_max } => {
                Ok((modes, ModeSpace::new(modes.len(), *n_max, self.max_dim / 2)?))
            }
            DephasingBath::OhmicContinuum { .. } => {
                Err(invalid("bath", "operation needs a discrete mode list"))
            }
        }
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }
}

/// `Γ(τ)`, `Δ(τ)` and their τ-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingKernels {
    pub gamma: f64,
    pub delta: f64,
    pub d_gamma: f64,
    pub d_delta: f64,
}

/// `Γ = Σ |f_k|²/ω_k² coth(βω_k/2) sin²(ω_kτ/2)` and
/// `Δ = Σ |f_k|²/ω_k sin²(ω_kτ/2)`, or their Ohmic continuum integrals.
pub fn kernels(spec: &DephasingSpec, tau: f64) -> Result<DephasingKernels> {
    spec.validate()?;
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(invalid("tau", format!("must be finite and nonnegative, got {tau}")));
    }
    if tau == 0.0 {
        return Ok(DephasingKernels { gamma: 0.0, delta: 0.0, d_gamma: 0.0, d_delta: 0.0 });
    }
    match &spec.bath {
        DephasingBath::Discrete { modes, .. } => {
            let mut k = DephasingKernels { gamma: 0.0, delta: 0.0, d_gamma: 0.0, d_delta: 0.0 };
            for m in modes {
                let w = m.omega;
                let f2 = m.f.norm_sqr();
                let c = coth_half_at(spec.beta, w);
                let s = (0.5 * w * tau).sin();
                let sin_full = (w * tau).sin();
                k.gamma += f2 / (w * w) * c * s * s;
                k.delta += f2 / w * s * s;
                k.d_gamma += 0.5 * f2 / w * c * sin_full;
                k.d_delta += 0.5 * f2 * sin_full;
            }
            Ok(k)
        }
        DephasingBath::OhmicContinuum { epsilon } => {
            let eps = *epsilon;
            let beta = spec.beta;
            let gamma = ohmic_integral(eps, beta, tau, |w| {
                let s = (0.5 * w * tau).sin();
                coth_half_at(beta, w) * s * s / w * (-eps * w).exp()
            })?;
            let d_gamma = ohmic_integral(eps, beta, tau, |w| {
                0.5 * coth_half_at(beta, w) * (w * tau).sin() * (-eps * w).exp()
            })?;
            let t2 = tau * tau;
            let e2 = eps * eps;
            Ok(DephasingKernels {
                gamma,
                delta: t2 / (2.0 * eps * (e2 + t2)),
                d_gamma,
                d_delta: eps * tau / ((t2 + e2) * (t2 + e2)),
            })
        }
    }
}

/// `∫₀^∞ g(ω) dω` for an integrand damped by `e^{−εω}` and oscillating at
/// period `2π/τ`. Breakpoints sit at `1/β`, `1/τ` and every period up to
/// `40/ε`; the remainder is mapped to a finite interval.
fn ohmic_integral(eps: f64, beta: f64, tau: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    const MAX_PANELS: usize = 50_000;
    let upper = 40.0 / eps;
    let period = 2.0 * PI / tau;
    let mut points = vec![0.0, upper, 1.0 / tau];
    if beta.is_finite() {
        points.push(1.0 / beta);
    }
    let panels = ((upper / period).ceil() as usize).min(MAX_PANELS);
    let step = upper / panels.max(1) as f64;
    points.extend((1..panels).map(|i| i as f64 * step));
    points.retain(|&p| p <= upper);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let tol = Tolerance { abs: 0.5 * KERNEL_TOL, rel: 0.0, max_intervals: 4 * MAX_PANELS + 20_000 };
    let body = integrate_pieces(&g, &points, 1, tol)?.value;
    let tail = integrate_to_infinity(&g, upper, Tolerance { abs: 0.1 * KERNEL_TOL, ..tol })?.value;
    Ok(body + tail)
}

/// `Γ(τ) ≃ πτ/(2β)`, the kernel once `τ ≫ β` and the cutoff is removed.
pub fn markovian_gamma_kernel(beta: f64, tau: f64) -> f64 {
    PI * tau / (2.0 * beta)
}

/// `H_S = ω₀σ_z/2`, `H_B = Σ ω_k a_k†a_k`, `H_int = λσ_z ⊗ (a(f) + a†(f))`.
pub fn build_dephasing_hamiltonians(spec: &DephasingSpec) -> Result<BipartiteSystem> {
    spec.validate()?;
    let (modes, space) = spec.discrete_parts()?;
    let omegas: Vec<f64> = modes.iter().map(|m| m.omega).collect();
    let coupling = field_operator(modes, &space);
    BipartiteSystem::new(
        qubit_hamiltonian(spec.omega0),
        space.free_hamiltonian(&omegas),
        pauli::sigma_z().kronecker(&coupling) * c64(spec.lambda, 0.0),
    )
}

/// `a(f) + a†(f)`.
fn field_operator(modes: &[BathMode], space: &ModeSpace) -> Matrix {
    let conj: Vec<Complex64> = modes.iter().map(|m| m.f.conj()).collect();
    let a_f = space.smeared_annihilation(&conj);
    a_f.adjoint() + a_f
}

/// Displacement amplitudes `g_k(τ) = f_k (e^{−iω_kτ} − 1)/ω_k`.
fn displacement_amplitudes(modes: &[BathMode], tau: f64) -> Vec<Complex64> {
    modes
        .iter()
        .map(|m| m.f * (Complex64::from_polar(1.0, -m.omega * tau) - 1.0) / m.omega)
        .collect()
}

fn check_qubit_state(rho_s0: &Matrix) -> Result<()> {
    if rho_s0.nrows() != 2 || rho_s0.ncols() != 2 {
        return Err(invalid("rho_s0", "qubit state must be 2x2"));
    }
    validate_density(rho_s0)
}

/// Qubit state at `τ`: populations fixed, `ρ₀₁ → ρ₀₁ e^{−iω₀τ} e^{−8λ²Γ(τ)}`.
pub fn dephased_qubit(omega0: f64, lambda: f64, gamma: f64, rho_s0: &Matrix, tau: f64) -> Matrix {
    let factor = Complex64::from_polar((-8.0 * lambda * lambda * gamma).exp(), -omega0 * tau);
    let mut rho = rho_s0.clone();
    rho[(0, 1)] = rho_s0[(0, 1)] * factor;
    rho[(1, 0)] = rho_s0[(1, 0)] * factor.conj();
    rho
}

#[derive(Debug, Clone)]
pub struct ExactReducedStates {
    pub rho_s: Matrix,
    /// Displaced-bath mixture; only available for a discrete bath.
    pub rho_b: Option<Matrix>,
    /// Top-Fock-level population of the displaced thermal states.
    pub leakage: Option<f64>,
}

/// Conditionally displaced thermal states `D_ℓ ρ_β D_ℓ†` for `ℓ = 0, 1`,
/// `D_ℓ = exp((−1)^ℓ λ[a†(g) − a(g)])`, with their cutoff leakage.
fn displaced_baths(spec: &DephasingSpec, tau: f64) -> Result<([Matrix; 2], [Matrix; 2], Matrix, f64)> {
    let (modes, space) = spec.discrete_parts()?;
    let omegas: Vec<f64> = modes.iter().map(|m| m.omega).collect();
    let rho_beta = space.thermal_state(&omegas, spec.beta)?;
    let g = displacement_amplitudes(modes, tau);
    let scaled = |s: f64| -> Vec<Complex64> { g.iter().map(|z| z * (s * spec.lambda)).collect() };
    let d0 = space.displacement(&scaled(1.0))?;
    let d1 = space.displacement(&scaled(-1.0))?;
    let b0 = &d0 * &rho_beta * d0.adjoint();
    let b1 = &d1 * &rho_beta * d1.adjoint();
    let leakage = space.cutoff_population(&b0).max(space.cutoff_population(&b1));
    Ok(([d0, d1], [b0, b1], rho_beta, leakage))
}

pub fn exact_reduced_states(spec: &DephasingSpec, rho_s0: &Matrix, tau: f64) -> Result<ExactReducedStates> {
    check_qubit_state(rho_s0)?;
    let k = kernels(spec, tau)?;
    let rho_s = dephased_qubit(spec.omega0, spec.lambda, k.gamma, rho_s0, tau);
    if let DephasingBath::OhmicContinuum { .. } = spec.bath {
        return Ok(ExactReducedStates { rho_s, rho_b: None, leakage: None });
    }
    let (_, [b0, b1], _, leakage) = displaced_baths(spec, tau)?;
    if leakage > LEAKAGE_THRESHOLD {
        return Err(Error::CutoffLeakage { leakage, threshold: LEAKAGE_THRESHOLD });
    }
    let rho_b = b0 * rho_s0[(0, 0)] + b1 * rho_s0[(1, 1)];
    Ok(ExactReducedStates { rho_s, rho_b: Some(rho_b), leakage: Some(leakage) })
}

/// `Tr[D₀ ρ_β D₁†]` on the truncated space; equals `e^{−8λ²Γ(τ)}` for an
/// untruncated bath.
pub fn coherence_overlap(spec: &DephasingSpec, tau: f64) -> Result<Complex64> {
    spec.validate()?;
    let ([d0, d1], _, rho_beta, _) = displaced_baths(spec, tau)?;
    Ok(crate::linalg::trace(&(d0 * rho_beta * d1.adjoint())))
}

/// Closed-form thermodynamics; rates are derivatives with respect to `τ`.
#[derive(Debug, Clone)]
pub struct DephasingThermo {
    pub kernels: DephasingKernels,
    pub sigma_z: f64,
    pub h_s_eff: Matrix,
    /// Only for a discrete bath.
    pub h_b_eff: Option<Matrix>,
    pub dw_s: f64,
    pub dw_b: f64,
    pub dq_s: f64,
    pub dq_b: f64,
    pub u_chi: f64,
    pub du_chi: f64,
    pub du_s: f64,
    pub du_b: f64,
    pub ds_b: f64,
    pub ds_s: f64,
    pub r_s: f64,
}

pub fn closed_form_thermo(spec: &DephasingSpec, rho_s0: &Matrix, alpha_s: f64, tau: f64) -> Result<DephasingThermo> {
    check_qubit_state(rho_s0)?;
    if !alpha_s.is_finite() {
        return Err(invalid("alpha_s", format!("must be finite, got {alpha_s}")));
    }
    let k = kernels(spec, tau)?;
    let alpha_b = 1.0 - alpha_s;
    let lam2 = spec.lambda * spec.lambda;
    let p00 = rho_s0[(0, 0)].re;
    let p11 = rho_s0[(1, 1)].re;
    let sz = p00 - p11;
    let sz2 = sz * sz;
    let open = 1.0 - sz2;

    let h_s_eff = pauli::sigma_z() * c64(0.5 * spec.omega0 - 4.0 * lam2 * sz * k.delta, 0.0)
        + crate::linalg::identity(2) * c64(4.0 * lam2 * alpha_s * sz2 * k.delta, 0.0);
    let h_b_eff = match spec.discrete_parts() {
        Ok((modes, space)) => {
            let omegas: Vec<f64> = modes.iter().map(|m| m.omega).collect();
            let n = space.dim();
            Some(
                space.free_hamiltonian(&omegas)
                    + field_operator(modes, &space) * c64(spec.lambda * sz, 0.0)
                    + crate::linalg::identity(n) * c64(4.0 * lam2 * alpha_b * sz2 * k.delta, 0.0),
            )
        }
        Err(_) => None,
    };

    let dw_b = 4.0 * lam2 * alpha_b * sz2 * k.d_delta;
    let dq_b = 4.0 * lam2 * open * k.d_delta;
    let du_chi = -dq_b;
    let decay = (-16.0 * lam2 * k.gamma).exp();
    let c2 = rho_s0[(0, 1)].norm_sqr();
    let r_s = (1.0 - 4.0 * (p00 * p11 - decay * c2)).max(0.0).sqrt();
    let ds_s = if k.d_gamma == 0.0 || c2 == 0.0 {
        0.0
    } else {
        lam2 * entropy_factor(r_s, c2, decay) * k.d_gamma
    };
    Ok(DephasingThermo {
        kernels: k,
        sigma_z: sz,
        h_s_eff,
        h_b_eff,
        dw_s: -dw_b,
        dw_b,
        dq_s: 0.0,
        dq_b,
        u_chi: -4.0 * lam2 * open * k.delta,
        du_chi,
        du_s: -dw_b,
        du_b: 4.0 * lam2 * (1.0 - alpha_s * sz2) * k.d_delta,
        ds_b: spec.beta * dq_b,
        ds_s,
        r_s,
    })
}

/// `b = 16|ρ₀₁|² e^{−16λ²Γ} ln((1+r)/(1−r)) / r`, continued to `32|ρ₀₁|² e^{−16λ²Γ}` at `r = 0`.
fn entropy_factor(r: f64, c2: f64, decay: f64) -> f64 {
    let log_ratio_over_r = if r < 1e-8 {
        2.0
    } else if r >= 1.0 {
        f64::INFINITY
    } else {
        2.0 * r.atanh() / r
    };
    16.0 * c2 * decay * log_ratio_over_r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathTemperatures {
    /// `T (1 − α_S⟨σ_z⟩²)/(1 − ⟨σ_z⟩²)`; `None` for pole states.
    pub pseudo_limit: Option<f64>,
    pub extended: f64,
    /// `dS_B − β dQ_B`.
    pub sigma_b: f64,
}

pub fn bath_temperatures_example2(
    spec: &DephasingSpec,
    rho_s0: &Matrix,
    alpha_s: f64,
    tau: f64,
) -> Result<BathTemperatures> {
    let thermo = closed_form_thermo(spec, rho_s0, alpha_s, tau)?;
    let sz2 = thermo.sigma_z * thermo.sigma_z;
    let t = spec.temperature();
    let pseudo_limit = (sz2 != 1.0).then(|| t * (1.0 - alpha_s * sz2) / (1.0 - sz2));
    Ok(BathTemperatures { pseudo_limit, extended: t, sigma_b: thermo.ds_b - spec.beta * thermo.dq_b })
}

/// `γ = 4πλ²/β`.
pub fn markovian_rate(spec: &DephasingSpec) -> f64 {
    4.0 * PI * spec.lambda * spec.lambda / spec.beta
}

/// Generator `−i[ω₀σ_z/2, ρ] + (γ/2)(σ_zρσ_z − ρ)`.
pub fn markovian_generator(spec: &DephasingSpec) -> Result<LindbladGenerator> {
    spec.validate()?;
    if !matches!(spec.bath, DephasingBath::OhmicContinuum { .. }) || spec.beta.is_infinite() {
        return Err(invalid("bath", "Markovian dephasing needs a finite-temperature Ohmic continuum"));
    }
    LindbladGenerator::new(qubit_hamiltonian(spec.omega0), vec![(pauli::sigma_z(), 0.5 * markovian_rate(spec))])
}

#[derive(Debug, Clone)]
pub struct MarkovianDephasing {
    pub generator: LindbladGenerator,
    pub gamma: f64,
    pub states: Vec<Matrix>,
}

pub fn markovian_dephasing(spec: &DephasingSpec, rho_s0: &Matrix, grid: &TimeGrid) -> Result<MarkovianDephasing> {
    check_qubit_state(rho_s0)?;
    let generator = markovian_generator(spec)?;
    let states = propagate_lindblad(&generator, rho_s0, grid)?;
    Ok(MarkovianDephasing { gamma: markovian_rate(spec), generator, states })
}
