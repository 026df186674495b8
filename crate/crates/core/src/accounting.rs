//! Energy, heat, work and entropy bookkeeping for a system `S` coupled to a
//! bath `B`.
//!
//! The interaction energy is split with real weights `α_S + α_B = 1`. The
//! effective Hamiltonians absorb the mean-field part of `H_int`, so that the
//! residual interaction has zero mean in either marginal and its expectation
//! in the correlation operator `χ = ρ_SB − ρ_S⊗ρ_B` is the binding energy.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::dynamics::LindbladGenerator;
use crate::error::{invalid, Error, Result};
use crate::linalg::{
    commutator, entropy_of_spectrum, entropy_rate_of_spectrum, hermitian_part, hermitian_spectrum,
    identity, max_abs, partial_trace, require_hermitian, trace_product, validate_density,
    CompositeLayout, HermitianSpectrum, Matrix, Subsystem, EIGEN_CLAMP,
};

/// Default threshold on `|dS/dτ|` below which temperatures are undefined.
pub const RATE_THRESHOLD: f64 = 1e-12;

/// Static problem definition: `H_tot = H_S⊗I + I⊗H_B + H_int`.
#[derive(Debug, Clone)]
pub struct BipartiteSystem {
    h_s: Matrix,
    h_b: Matrix,
    h_int: Matrix,
    layout: CompositeLayout,
}

impl BipartiteSystem {
    pub fn new(h_s: Matrix, h_b: Matrix, h_int: Matrix) -> Result<Self> {
        let layout = CompositeLayout::new(h_s.nrows(), h_b.nrows())?;
        for (m, what) in [(&h_s, "H_S"), (&h_b, "H_B")] {
            if !m.is_square() {
                return Err(Error::DimensionMismatch(format!("{what} is not square")));
            }
        }
        layout.check(&h_int, "H_int")?;
        require_hermitian(&h_s)?;
        require_hermitian(&h_b)?;
        require_hermitian(&h_int)?;
        Ok(Self { h_s, h_b, h_int, layout })
    }

    pub fn h_s(&self) -> &Matrix {
        &self.h_s
    }

    pub fn h_b(&self) -> &Matrix {
        &self.h_b
    }

    pub fn h_int(&self) -> &Matrix {
        &self.h_int
    }

    pub fn layout(&self) -> CompositeLayout {
        self.layout
    }

    pub fn h_tot(&self) -> Matrix {
        self.layout.lift_system(&self.h_s) + self.layout.lift_bath(&self.h_b) + &self.h_int
    }
}

/// Time derivatives of the three Hamiltonian blocks.
#[derive(Debug, Clone)]
pub struct HamiltonianRates {
    pub d_h_s: Matrix,
    pub d_h_b: Matrix,
    pub d_h_int: Matrix,
}

impl HamiltonianRates {
    pub fn zero(layout: CompositeLayout) -> Self {
        Self {
            d_h_s: Matrix::zeros(layout.dim_s(), layout.dim_s()),
            d_h_b: Matrix::zeros(layout.dim_b(), layout.dim_b()),
            d_h_int: Matrix::zeros(layout.total(), layout.total()),
        }
    }

    pub fn d_h_tot(&self, layout: &CompositeLayout) -> Matrix {
        layout.lift_system(&self.d_h_s) + layout.lift_bath(&self.d_h_b) + &self.d_h_int
    }
}

pub type HamiltonianHook = Arc<dyn Fn(f64) -> Result<BipartiteSystem> + Send + Sync>;
pub type DerivativeHook = Arc<dyn Fn(f64) -> Result<HamiltonianRates> + Send + Sync>;

/// A bipartite system whose Hamiltonians depend on time.
#[derive(Clone)]
pub struct DrivenSystem {
    layout: CompositeLayout,
    hook: HamiltonianHook,
    derivative: Option<DerivativeHook>,
    fd_step: f64,
}

impl fmt::Debug for DrivenSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DrivenSystem")
            .field("layout", &self.layout)
            .field("analytic_derivative", &self.derivative.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl DrivenSystem {
    pub fn new(
        layout: CompositeLayout,
        hook: impl Fn(f64) -> Result<BipartiteSystem> + Send + Sync + 'static,
    ) -> Self {
        Self { layout, hook: Arc::new(hook), derivative: None, fd_step: 1e-5 }
    }

    /// A hook returning `system` at every time.
    pub fn constant(system: BipartiteSystem) -> Self {
        let layout = system.layout();
        let zero = HamiltonianRates::zero(layout);
        Self::new(layout, move |_| Ok(system.clone()))
            .with_derivative(move |_| Ok(zero.clone()))
    }

    pub fn with_derivative(
        mut self,
        derivative: impl Fn(f64) -> Result<HamiltonianRates> + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    /// Step used by the central-difference fallback for `dH/dτ`.
    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn layout(&self) -> CompositeLayout {
        self.layout
    }

    pub fn at(&self, tau: f64) -> Result<BipartiteSystem> {
        let sys = (self.hook)(tau)?;
        if sys.layout() != self.layout {
            return Err(Error::DimensionMismatch(format!(
                "hook returned a {}x{} system at tau = {tau}, expected {}x{}",
                sys.layout().dim_s(),
                sys.layout().dim_b(),
                self.layout.dim_s(),
                self.layout.dim_b()
            )));
        }
        Ok(sys)
    }

    pub fn rates(&self, tau: f64) -> Result<HamiltonianRates> {
        if let Some(d) = &self.derivative {
            return d(tau);
        }
        let h = self.fd_step;
        let plus = self.at(tau + h)?;
        let minus = self.at(tau - h)?;
        let s = Complex64::new(0.5 / h, 0.0);
        Ok(HamiltonianRates {
            d_h_s: (plus.h_s() - minus.h_s()) * s,
            d_h_b: (plus.h_b() - minus.h_b()) * s,
            d_h_int: (plus.h_int() - minus.h_int()) * s,
        })
    }
}

/// Split of the mean interaction energy: `α_S + α_B = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySplit {
    alpha_s: f64,
}

impl EnergySplit {
    pub fn new(alpha_s: f64) -> Result<Self> {
        if !alpha_s.is_finite() {
            return Err(invalid("alpha_s", format!("must be finite, got {alpha_s}")));
        }
        Ok(Self { alpha_s })
    }

    pub fn alpha_s(&self) -> f64 {
        self.alpha_s
    }

    pub fn alpha_b(&self) -> f64 {
        1.0 - self.alpha_s
    }
}

impl Default for EnergySplit {
    fn default() -> Self {
        Self { alpha_s: 1.0 }
    }
}

/// `(ρ_S, ρ_B, χ)` for a joint density matrix.
pub fn correlation_operator(
    rho_sb: &Matrix,
    layout: &CompositeLayout,
) -> Result<(Matrix, Matrix, Matrix)> {
    layout.check(rho_sb, "joint density matrix")?;
    let rho_s = partial_trace(rho_sb, layout, Subsystem::System)?;
    let rho_b = partial_trace(rho_sb, layout, Subsystem::Bath)?;
    let chi = rho_sb - rho_s.kronecker(&rho_b);
    Ok((rho_s, rho_b, chi))
}

/// Joint density matrix together with its marginals and correlations.
#[derive(Debug, Clone)]
pub struct JointState {
    pub tau: f64,
    rho_sb: Matrix,
    rho_s: Matrix,
    rho_b: Matrix,
    chi: Matrix,
    layout: CompositeLayout,
}

impl JointState {
    pub fn new(rho_sb: Matrix, layout: CompositeLayout, tau: f64) -> Result<Self> {
        if cfg!(feature = "strict-checks") {
            validate_density(&rho_sb)?;
        }
        let (rho_s, rho_b, chi) = correlation_operator(&rho_sb, &layout)?;
        Ok(Self { tau, rho_sb, rho_s, rho_b, chi, layout })
    }

    pub fn product(rho_s: &Matrix, rho_b: &Matrix, tau: f64) -> Result<Self> {
        let layout = CompositeLayout::new(rho_s.nrows(), rho_b.nrows())?;
        Self::new(rho_s.kronecker(rho_b), layout, tau)
    }

    pub fn rho_sb(&self) -> &Matrix {
        &self.rho_sb
    }

    pub fn rho_s(&self) -> &Matrix {
        &self.rho_s
    }

    pub fn rho_b(&self) -> &Matrix {
        &self.rho_b
    }

    pub fn chi(&self) -> &Matrix {
        &self.chi
    }

    pub fn layout(&self) -> CompositeLayout {
        self.layout
    }

    fn require_layout(&self, layout: CompositeLayout) -> Result<()> {
        if layout != self.layout {
            return Err(Error::DimensionMismatch(format!(
                "state layout {}x{} does not match system layout {}x{}",
                self.layout.dim_s(),
                self.layout.dim_b(),
                layout.dim_s(),
                layout.dim_b()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EffectiveHamiltonians {
    /// `H_S + Tr_B[ρ_B H_int]`, the `α_S = 0` intermediate.
    pub h_s_prime: Matrix,
    pub h_b_prime: Matrix,
    pub h_s_eff: Matrix,
    pub h_b_eff: Matrix,
    pub h_int_eff: Matrix,
    /// `Tr[ρ_S⊗ρ_B H_int]`.
    pub mean_interaction: f64,
}

struct MeanField {
    v_s: Matrix,
    v_b: Matrix,
    mean: f64,
}

fn mean_field(h_int: &Matrix, rho_s: &Matrix, rho_b: &Matrix, layout: &CompositeLayout) -> Result<MeanField> {
    let v_s = hermitian_part(&partial_trace(&(layout.lift_bath(rho_b) * h_int), layout, Subsystem::System)?);
    let v_b = hermitian_part(&partial_trace(&(layout.lift_system(rho_s) * h_int), layout, Subsystem::Bath)?);
    let mean = trace_product(&rho_s.kronecker(rho_b), h_int).re;
    Ok(MeanField { v_s, v_b, mean })
}

pub fn effective_hamiltonians(
    system: &BipartiteSystem,
    state: &JointState,
    split: EnergySplit,
) -> Result<EffectiveHamiltonians> {
    state.require_layout(system.layout())?;
    let layout = system.layout();
    let mf = mean_field(system.h_int(), state.rho_s(), state.rho_b(), &layout)?;
    let h_s_prime = system.h_s() + &mf.v_s;
    let h_b_prime = system.h_b() + &mf.v_b;
    let shift = |n: usize, a: f64| identity(n) * Complex64::new(a * mf.mean, 0.0);
    let h_s_eff = &h_s_prime - shift(layout.dim_s(), split.alpha_s());
    let h_b_eff = &h_b_prime - shift(layout.dim_b(), split.alpha_b());
    let h_int_eff = system.h_int() - layout.lift_system(&mf.v_s) - layout.lift_bath(&mf.v_b)
        + shift(layout.total(), 1.0);
    Ok(EffectiveHamiltonians {
        h_s_prime,
        h_b_prime,
        h_s_eff,
        h_b_eff,
        h_int_eff,
        mean_interaction: mf.mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalEnergies {
    pub u_s: f64,
    pub u_b: f64,
    /// Binding energy carried by correlations.
    pub u_chi: f64,
    pub u_tot: f64,
}

pub fn internal_energies(
    system: &BipartiteSystem,
    state: &JointState,
    split: EnergySplit,
) -> Result<InternalEnergies> {
    let eff = effective_hamiltonians(system, state, split)?;
    Ok(energies_from(&eff, system, state))
}

fn energies_from(eff: &EffectiveHamiltonians, system: &BipartiteSystem, state: &JointState) -> InternalEnergies {
    InternalEnergies {
        u_s: trace_product(state.rho_s(), &eff.h_s_eff).re,
        u_b: trace_product(state.rho_b(), &eff.h_b_eff).re,
        u_chi: trace_product(state.chi(), &eff.h_int_eff).re,
        u_tot: trace_product(state.rho_sb(), &system.h_tot()).re,
    }
}

/// Instantaneous energy-flow rates.
///
/// `dw_*` is the work exchanged through the interaction; `drive_*` is
/// `Tr[ρ_X dH_X/dτ]`, the work done by an external drive on the bare
/// Hamiltonian, and vanishes for static systems. Per subsystem,
/// `du = dq + dw + drive`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FluxRates {
    pub du_s: f64,
    pub dq_s: f64,
    pub dw_s: f64,
    pub drive_s: f64,
    pub du_b: f64,
    pub dq_b: f64,
    pub dw_b: f64,
    pub drive_b: f64,
    pub du_chi: f64,
    /// `Tr[χ̇ H_int]`; equals `du_chi` for static systems.
    pub dq_chi: f64,
    pub du_tot: f64,
    /// `Tr[ρ_S⊗ρ_B dH_int/dτ]`, the sum `dw_s + dw_b`.
    pub coupling_drive: f64,
}

impl FluxRates {
    pub fn total_work_s(&self) -> f64 {
        self.dw_s + self.drive_s
    }

    pub fn total_work_b(&self) -> f64 {
        self.dw_b + self.drive_b
    }
}

/// `dρ_SB/dτ = −i[H_tot, ρ_SB]`.
pub fn liouvillian_rate(h_tot: &Matrix, rho: &Matrix) -> Matrix {
    commutator(h_tot, rho) * Complex64::new(0.0, -1.0)
}

struct RateParts {
    rates: FluxRates,
    rho_dot: Matrix,
    rho_s_dot: Matrix,
    rho_b_dot: Matrix,
}

fn rate_parts(
    system: &BipartiteSystem,
    dh: &HamiltonianRates,
    state: &JointState,
    split: EnergySplit,
) -> Result<(RateParts, EffectiveHamiltonians)> {
    state.require_layout(system.layout())?;
    let layout = system.layout();
    let eff = effective_hamiltonians(system, state, split)?;
    let h_int = system.h_int();
    let rho_dot = liouvillian_rate(&system.h_tot(), state.rho_sb());
    let rho_s_dot = partial_trace(&rho_dot, &layout, Subsystem::System)?;
    let rho_b_dot = partial_trace(&rho_dot, &layout, Subsystem::Bath)?;
    let (rho_s, rho_b) = (state.rho_s(), state.rho_b());

    let a = trace_product(&rho_s.kronecker(&rho_b_dot), h_int).re;
    let b = trace_product(&rho_s_dot.kronecker(rho_b), h_int).re;
    let c = trace_product(&rho_s.kronecker(rho_b), &dh.d_h_int).re;
    let (al_s, al_b) = (split.alpha_s(), split.alpha_b());

    let minus_i = Complex64::new(0.0, -1.0);
    let heat = |h_lifted: Matrix| (trace_product(state.chi(), &commutator(&h_lifted, h_int)) * minus_i).re;
    let dq_s = heat(layout.lift_system(&eff.h_s_eff));
    let dq_b = heat(layout.lift_bath(&eff.h_b_eff));

    let drive_s = trace_product(rho_s, &dh.d_h_s).re;
    let drive_b = trace_product(rho_b, &dh.d_h_b).re;
    let du_s = trace_product(&rho_s_dot, system.h_s()).re + drive_s + al_b * (a + b + c);
    let du_b = trace_product(&rho_b_dot, system.h_b()).re + drive_b + al_s * (a + b + c);

    let chi_dot = &rho_dot - rho_s_dot.kronecker(rho_b) - rho_s.kronecker(&rho_b_dot);
    let dq_chi = trace_product(&chi_dot, h_int).re;
    let du_chi = trace_product(&chi_dot, &eff.h_int_eff).re + trace_product(state.chi(), &dh.d_h_int).re;
    let du_tot = trace_product(state.rho_sb(), &dh.d_h_tot(&layout)).re;

    let rates = FluxRates {
        du_s,
        dq_s,
        dw_s: al_b * (a + c) - al_s * b,
        drive_s,
        du_b,
        dq_b,
        dw_b: al_s * (b + c) - al_b * a,
        drive_b,
        du_chi,
        dq_chi,
        du_tot,
        coupling_drive: c,
    };
    Ok((RateParts { rates, rho_dot, rho_s_dot, rho_b_dot }, eff))
}

/// Rates for a time-independent system.
pub fn flux_rates(system: &BipartiteSystem, state: &JointState, split: EnergySplit) -> Result<FluxRates> {
    let zero = HamiltonianRates::zero(system.layout());
    Ok(rate_parts(system, &zero, state, split)?.0.rates)
}

/// Rates for a driven system at `state.tau`, with `dH/dτ` from the analytic
/// derivative hook if present and a central difference otherwise.
pub fn flux_rates_time_dependent(
    driven: &DrivenSystem,
    state: &JointState,
    split: EnergySplit,
) -> Result<FluxRates> {
    let system = driven.at(state.tau)?;
    let dh = driven.rates(state.tau)?;
    flux_rates_with_derivative(&system, &dh, state, split)
}

pub fn flux_rates_with_derivative(
    system: &BipartiteSystem,
    dh: &HamiltonianRates,
    state: &JointState,
    split: EnergySplit,
) -> Result<FluxRates> {
    Ok(rate_parts(system, dh, state, split)?.0.rates)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropies {
    pub s_s: f64,
    pub s_b: f64,
    pub s_sb: f64,
    /// Mutual information `S_S + S_B − S_SB`.
    pub s_chi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRates {
    pub ds_s: f64,
    pub ds_b: f64,
    pub ds_sb: f64,
    pub ds_chi: f64,
}

pub fn entropies(state: &JointState) -> Result<Entropies> {
    let s_s = entropy_of_spectrum(&spectrum_of(state.rho_s())?)?;
    let s_b = entropy_of_spectrum(&spectrum_of(state.rho_b())?)?;
    let s_sb = entropy_of_spectrum(&spectrum_of(state.rho_sb())?)?;
    Ok(Entropies { s_s, s_b, s_sb, s_chi: s_s + s_b - s_sb })
}

fn spectrum_of(rho: &Matrix) -> Result<HermitianSpectrum> {
    hermitian_spectrum(&hermitian_part(rho))
}

/// `T = dU/dS`, or `None` when `|dS| < threshold`.
pub fn pseudo_temperature(ds_rate: f64, du_rate: f64, threshold: f64) -> Option<f64> {
    (ds_rate.abs() >= threshold).then(|| du_rate / ds_rate)
}

/// `dΣ̃ = dS − dQ/T` with `T` the pseudo-temperature.
pub fn entropy_production_tilde(ds_rate: f64, dq_rate: f64, t_pseudo: Option<f64>) -> Result<f64> {
    match t_pseudo {
        Some(t) if t != 0.0 && t.is_finite() => Ok(ds_rate - dq_rate / t),
        Some(t) => Err(Error::Undefined(format!("pseudo-temperature {t} cannot divide heat"))),
        None => Err(Error::Undefined("pseudo-temperature is undefined".into())),
    }
}

/// `dΣ = dS − dQ/T_ref` at a fixed reference temperature.
pub fn entropy_production_fixed_t(ds_rate: f64, dq_rate: f64, t_ref: f64) -> Result<f64> {
    if !(t_ref > 0.0) || !t_ref.is_finite() {
        return Err(invalid("t_ref", format!("must be positive and finite, got {t_ref}")));
    }
    Ok(ds_rate - dq_rate / t_ref)
}

/// Extended temperature `𝒯 = dQ/dS` under the assumption `dΣ = 0`.
///
/// `None` when either rate is below `threshold`: with `dQ = 0` and `dS ≠ 0`
/// the entropy change is pure production and `𝒯` has no meaning.
pub fn extended_temperature_estimate(
    ds_rate: f64,
    dq_rate: f64,
    assume_zero_production: bool,
    threshold: f64,
) -> Result<Option<f64>> {
    if !assume_zero_production {
        return Err(invalid(
            "assume_zero_production",
            "only the zero-production estimate is available; use entropy_production_fixed_t for a known temperature",
        ));
    }
    if ds_rate.abs() < threshold || dq_rate.abs() < threshold {
        return Ok(None);
    }
    Ok(Some(dq_rate / ds_rate))
}

/// Tolerance on `‖L[ρ_ref]‖` for the reference to count as stationary.
pub const STATIONARITY_TOL: f64 = 1e-8;

/// `dΣ = −Tr[L[ρ](ln ρ − ln ρ_ref)]` for a generator fixing `ρ_ref`.
///
/// Returns `+∞` when `L[ρ]` feeds weight into the kernel of `ρ`.
pub fn lindblad_entropy_production(
    rho: &Matrix,
    generator: &LindbladGenerator,
    reference: &Matrix,
) -> Result<f64> {
    validate_density(rho)?;
    validate_density(reference)?;
    let residual = max_abs(&generator.apply(reference)?);
    if residual > STATIONARITY_TOL {
        return Err(Error::ReferenceNotStationary { residual });
    }
    let ref_spec = spectrum_of(reference)?;
    if ref_spec.min_eigenvalue() < EIGEN_CLAMP {
        return Err(invalid(
            "reference",
            format!("must be full rank, smallest eigenvalue {:.3e}", ref_spec.min_eigenvalue()),
        ));
    }
    let flow = generator.apply(rho)?;
    let rho_spec = spectrum_of(rho)?;
    let own = rho_spec.trace_with_log(&flow, false);
    if own == f64::NEG_INFINITY {
        return Ok(f64::INFINITY);
    }
    let value = -own + ref_spec.trace_with_log(&flow, false);
    if value < -1e-9 {
        return Err(Error::Undefined(format!("negative entropy production {value:.3e}")));
    }
    Ok(value.max(0.0))
}

/// Settings for building snapshots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccountingConfig {
    pub split: EnergySplit,
    /// Threshold on rates below which temperatures are undefined.
    pub threshold: f64,
    /// Reference bath temperature for `dΣ = dS − dQ/T_ref`.
    pub t_ref: Option<f64>,
}

impl Default for AccountingConfig {
    fn default() -> Self {
        Self { split: EnergySplit::default(), threshold: RATE_THRESHOLD, t_ref: None }
    }
}

/// Every bookkeeping quantity at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoSnapshot {
    pub tau: f64,
    pub energies: InternalEnergies,
    pub entropies: Entropies,
    pub rates: FluxRates,
    pub entropy_rates: EntropyRates,
    pub t_pseudo_s: Option<f64>,
    pub t_pseudo_b: Option<f64>,
    /// `dU_χ / dS_χ`.
    pub t_chi: Option<f64>,
    pub t_ext_s: Option<f64>,
    pub t_ext_b: Option<f64>,
    pub sigma_tilde_s: Option<f64>,
    pub sigma_tilde_b: Option<f64>,
    /// `dS − dQ/T_ref`, present when a reference temperature is configured.
    pub sigma_s: Option<f64>,
    pub sigma_b: Option<f64>,
}

/// Snapshot for a time-independent system.
pub fn snapshot(system: &BipartiteSystem, state: &JointState, config: &AccountingConfig) -> Result<ThermoSnapshot> {
    snapshot_with_derivative(system, &HamiltonianRates::zero(system.layout()), state, config)
}

/// Snapshot for a driven system at `state.tau`.
pub fn snapshot_driven(driven: &DrivenSystem, state: &JointState, config: &AccountingConfig) -> Result<ThermoSnapshot> {
    let system = driven.at(state.tau)?;
    let dh = driven.rates(state.tau)?;
    snapshot_with_derivative(&system, &dh, state, config)
}

pub fn snapshot_with_derivative(
    system: &BipartiteSystem,
    dh: &HamiltonianRates,
    state: &JointState,
    config: &AccountingConfig,
) -> Result<ThermoSnapshot> {
    let (parts, eff) = rate_parts(system, dh, state, config.split)?;
    let energies = energies_from(&eff, system, state);
    let rates = parts.rates;

    let spec_s = spectrum_of(state.rho_s())?;
    let spec_b = spectrum_of(state.rho_b())?;
    let spec_sb = spectrum_of(state.rho_sb())?;
    let (s_s, s_b, s_sb) = (
        entropy_of_spectrum(&spec_s)?,
        entropy_of_spectrum(&spec_b)?,
        entropy_of_spectrum(&spec_sb)?,
    );
    let entropies = Entropies { s_s, s_b, s_sb, s_chi: s_s + s_b - s_sb };
    let (ds_s, ds_b, ds_sb) = (
        entropy_rate_of_spectrum(&spec_s, &parts.rho_s_dot)?,
        entropy_rate_of_spectrum(&spec_b, &parts.rho_b_dot)?,
        entropy_rate_of_spectrum(&spec_sb, &parts.rho_dot)?,
    );
    let entropy_rates = EntropyRates { ds_s, ds_b, ds_sb, ds_chi: ds_s + ds_b - ds_sb };

    let thr = config.threshold;
    let t_pseudo_s = pseudo_temperature(ds_s, rates.du_s, thr);
    let t_pseudo_b = pseudo_temperature(ds_b, rates.du_b, thr);
    let t_chi = pseudo_temperature(entropy_rates.ds_chi, rates.du_chi, thr);
    let t_ext_s = extended_temperature_estimate(ds_s, rates.dq_s, true, thr)?;
    let t_ext_b = extended_temperature_estimate(ds_b, rates.dq_b, true, thr)?;
    let sigma_tilde_s = entropy_production_tilde(ds_s, rates.dq_s, t_pseudo_s).ok();
    let sigma_tilde_b = entropy_production_tilde(ds_b, rates.dq_b, t_pseudo_b).ok();
    let (sigma_s, sigma_b) = match config.t_ref {
        Some(t) => (
            Some(entropy_production_fixed_t(ds_s, rates.dq_s, t)?),
            Some(entropy_production_fixed_t(ds_b, rates.dq_b, t)?),
        ),
        None => (None, None),
    };

    Ok(ThermoSnapshot {
        tau: state.tau,
        energies,
        entropies,
        rates,
        entropy_rates,
        t_pseudo_s,
        t_pseudo_b,
        t_chi,
        t_ext_s,
        t_ext_b,
        sigma_tilde_s,
        sigma_tilde_b,
        sigma_s,
        sigma_b,
    })
}

/// Outcome of the energy-transport relation at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransportCheck {
    /// `dU_χ` is not negligible or a pseudo-temperature is undefined.
    NotApplicable,
    /// `T_S ≈ T_B`: the relation degenerates to `dS_χ = dU_tot / T_S`.
    EqualPseudoTemperatures,
    Residual { absolute: f64, relative: f64 },
}

/// Residual of `dU_B = T_S T_B / (T_S − T_B) · (dS_χ − dU_tot / T_S)` at steps
/// with `|dU_χ| < tol`. The `dU_tot` term vanishes for static systems.
pub fn energy_transport_check(snapshots: &[ThermoSnapshot], tol: f64) -> Vec<TransportCheck> {
    snapshots
        .iter()
        .map(|snap| {
            let r = &snap.rates;
            let (Some(ts), Some(tb)) = (snap.t_pseudo_s, snap.t_pseudo_b) else {
                return TransportCheck::NotApplicable;
            };
            if r.du_chi.abs() >= tol {
                return TransportCheck::NotApplicable;
            }
            if (ts - tb).abs() <= tol * (1.0 + ts.abs().max(tb.abs())) {
                return TransportCheck::EqualPseudoTemperatures;
            }
            let rhs = ts * tb / (ts - tb) * (snap.entropy_rates.ds_chi - r.du_tot / ts);
            let absolute = r.du_b - rhs;
            let scale = r.du_b.abs().max(rhs.abs());
            let relative = if scale > 0.0 { absolute.abs() / scale } else { 0.0 };
            TransportCheck::Residual { absolute, relative }
        })
        .collect()
}
