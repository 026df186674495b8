//! The two solvable qubit–bath models: a thermalizing Jaynes–Cummings qubit
//! and a pure-dephasing qubit.

pub mod dephasing;
pub mod thermalizing;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::linalg::{pauli, Matrix};

/// One bath oscillator: frequency `omega` and coupling amplitude `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathMode {
    pub omega: f64,
    pub f: Complex64,
}

impl BathMode {
    pub fn new(omega: f64, f: Complex64) -> Self {
        Self { omega, f }
    }

    pub fn real(omega: f64, f: f64) -> Self {
        Self { omega, f: Complex64::new(f, 0.0) }
    }
}

pub(crate) fn check_common(omega0: f64, lambda: f64, beta: f64) -> Result<()> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(invalid("omega0", format!("must be positive and finite, got {omega0}")));
    }
    if !lambda.is_finite() {
        return Err(invalid("lambda", format!("must be finite, got {lambda}")));
    }
    if !(beta > 0.0) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    Ok(())
}

pub(crate) fn check_modes(modes: &[BathMode]) -> Result<()> {
    if modes.is_empty() {
        return Err(invalid("modes", "at least one bath mode is required"));
    }
    for m in modes {
        if !(m.omega > 0.0) || !m.omega.is_finite() {
            return Err(invalid("modes", format!("mode frequencies must be positive, got {}", m.omega)));
        }
        if !m.f.re.is_finite() || !m.f.im.is_finite() {
            return Err(invalid("modes", "coupling amplitudes must be finite"));
        }
    }
    Ok(())
}

/// `ω₀ σ_z / 2`.
pub fn qubit_hamiltonian(omega0: f64) -> Matrix {
    pauli::sigma_z() * Complex64::new(0.5 * omega0, 0.0)
}

/// `tanh(βω/2)`, equal to 1 at zero temperature.
pub(crate) fn tanh_half(beta: f64, omega: f64) -> f64 {
    if beta.is_infinite() {
        1.0
    } else {
        (0.5 * beta * omega).tanh()
    }
}

/// `coth(βω/2)`, equal to 1 at zero temperature.
pub(crate) fn coth_half_at(beta: f64, omega: f64) -> f64 {
    if beta.is_infinite() {
        1.0
    } else {
        crate::bosonic::coth_half(beta * omega)
    }
}

/// Bose occupation that tolerates `β = ∞`.
pub(crate) fn occupation(omega: f64, beta: f64) -> Result<f64> {
    if beta.is_infinite() {
        return Ok(0.0);
    }
    crate::bosonic::planck_occupation(omega, beta)
}
