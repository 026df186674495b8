//! Propagation of joint and reduced states, and per-step ledgers.

use num_complex::Complex64;

use crate::accounting::{
    snapshot, snapshot_driven, AccountingConfig, BipartiteSystem, DrivenSystem, JointState,
    ThermoSnapshot,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::{
    anticommutator, commutator, hermitian_part, hermitian_spectrum, require_hermitian, trace,
    validate_density, CompositeLayout, Matrix, NEGATIVITY_FLOOR,
};

/// Uniform grid `t0, t0 + dt, …, t1` with `steps + 1` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t0: f64,
    t1: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 {
            return Err(invalid("grid", format!("need finite t1 > t0, got t0 = {t0}, t1 = {t1}")));
        }
        if steps == 0 {
            return Err(invalid("steps", "must be at least 1"));
        }
        Ok(Self { t0, t1, steps })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps {
            self.t1
        } else {
            self.t0 + (self.t1 - self.t0) * (i as f64 / self.steps as f64)
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.time(i)).collect()
    }
}

/// `L[ρ] = −i[H, ρ] + Σ_k γ_k (L_k ρ L_k† − ½{L_k† L_k, ρ})`.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    hamiltonian: Matrix,
    jumps: Vec<(Matrix, f64)>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: Matrix, jumps: Vec<(Matrix, f64)>) -> Result<Self> {
        require_hermitian(&hamiltonian)?;
        let n = hamiltonian.nrows();
        for (op, rate) in &jumps {
            if op.nrows() != n || op.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "jump operator is {}x{}, Hamiltonian is {n}x{n}",
                    op.nrows(),
                    op.ncols()
                )));
            }
            if !(*rate >= 0.0) || !rate.is_finite() {
                return Err(invalid("rate", format!("jump rates must be finite and nonnegative, got {rate}")));
            }
        }
        Ok(Self { hamiltonian, jumps })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &Matrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[(Matrix, f64)] {
        &self.jumps
    }

    pub fn apply(&self, rho: &Matrix) -> Result<Matrix> {
        let n = self.dim();
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "state is {}x{}, generator acts on {n}x{n}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(self.apply_unchecked(rho))
    }

    fn apply_unchecked(&self, rho: &Matrix) -> Matrix {
        let mut out = commutator(&self.hamiltonian, rho) * Complex64::new(0.0, -1.0);
        for (l, rate) in &self.jumps {
            if *rate == 0.0 {
                continue;
            }
            let ld = l.adjoint();
            let gain = l * rho * &ld;
            let loss = anticommutator(&(&ld * l), rho) * Complex64::new(0.5, 0.0);
            out += (gain - loss) * Complex64::new(*rate, 0.0);
        }
        out
    }
}

/// Exact unitary evolution under a static Hamiltonian; one spectral
/// decomposition serves every grid point.
pub fn propagate_exact(system: &BipartiteSystem, rho0: &Matrix, grid: &TimeGrid) -> Result<Vec<JointState>> {
    let layout = system.layout();
    layout.check(rho0, "initial state")?;
    validate_density(rho0)?;
    let spec = hermitian_spectrum(&system.h_tot())?;
    let rho_eig = spec.to_eigenbasis(rho0);
    grid.times()
        .into_iter()
        .map(|t| {
            let rho = spec.from_eigenbasis(&spec.rotate_eigenbasis(&rho_eig, t - grid.t0()));
            JointState::new(hermitian_part(&rho), layout, t)
        })
        .collect()
}

/// Exponential midpoint rule: each step uses `H` frozen at the step midpoint.
pub fn propagate_piecewise(driven: &DrivenSystem, rho0: &Matrix, grid: &TimeGrid) -> Result<Vec<JointState>> {
    let layout = driven.layout();
    layout.check(rho0, "initial state")?;
    validate_density(rho0)?;
    let dt = grid.dt();
    let mut out = Vec::with_capacity(grid.steps() + 1);
    let mut rho = rho0.clone();
    out.push(JointState::new(rho.clone(), layout, grid.t0())?);
    for i in 0..grid.steps() {
        let mid = 0.5 * (grid.time(i) + grid.time(i + 1));
        let spec = hermitian_spectrum(&driven.at(mid)?.h_tot())?;
        rho = hermitian_part(&spec.evolve(&rho, dt));
        out.push(JointState::new(rho.clone(), layout, grid.time(i + 1))?);
    }
    Ok(out)
}

/// Classical fourth-order Runge–Kutta integration of a Lindblad equation.
///
/// The smallest eigenvalue is monitored after every step; dropping below
/// `−1e−8` aborts with [`Error::StepTooCoarse`].
pub fn propagate_lindblad(generator: &LindbladGenerator, rho0: &Matrix, grid: &TimeGrid) -> Result<Vec<Matrix>> {
    validate_density(rho0)?;
    generator.apply(rho0)?;
    let dt = grid.dt();
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let mut out = Vec::with_capacity(grid.steps() + 1);
    let mut rho = rho0.clone();
    out.push(rho.clone());
    for i in 0..grid.steps() {
        let k1 = generator.apply_unchecked(&rho);
        let k2 = generator.apply_unchecked(&(&rho + &k1 * half));
        let k3 = generator.apply_unchecked(&(&rho + &k2 * half));
        let k4 = generator.apply_unchecked(&(&rho + &k3 * full));
        rho = hermitian_part(&(&rho + (k1 + k2 * two + k3 * two + k4) * sixth));
        let min = hermitian_spectrum(&rho)?.min_eigenvalue();
        if min < -NEGATIVITY_FLOOR {
            return Err(Error::StepTooCoarse {
                tau: grid.time(i + 1),
                min_eigenvalue: min,
                suggested_dt: 0.25 * dt,
            });
        }
        if cfg!(feature = "strict-checks") {
            validate_density(&rho)?;
        }
        out.push(rho.clone());
    }
    Ok(out)
}

/// States along a run: joint states from exact propagation or reduced
/// system states from a master equation.
#[derive(Debug, Clone)]
pub enum Trajectory {
    Joint(Vec<JointState>),
    Reduced(Vec<Matrix>),
}

impl Trajectory {
    pub fn len(&self) -> usize {
        match self {
            Trajectory::Joint(v) => v.len(),
            Trajectory::Reduced(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The Hamiltonian a ledger is evaluated against.
#[derive(Debug, Clone, Copy)]
pub enum Dynamics<'a> {
    Static(&'a BipartiteSystem),
    Driven(&'a DrivenSystem),
}

impl Dynamics<'_> {
    fn layout(&self) -> CompositeLayout {
        match self {
            Dynamics::Static(s) => s.layout(),
            Dynamics::Driven(d) => d.layout(),
        }
    }
}

/// Time-integrated quantities of a ledger.
///
/// Heat, work and `ΔU_χ` come from trapezoidal integration of the rates; the
/// `net_*` fields are endpoint differences of the state functions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LedgerTotals {
    pub dq_s: f64,
    pub dq_b: f64,
    /// Work including any external drive on the bare Hamiltonian.
    pub dw_s: f64,
    pub dw_b: f64,
    pub du_chi: f64,
    pub dq_chi: f64,
    pub ds_s: f64,
    pub ds_b: f64,
    pub net_u_s: f64,
    pub net_u_b: f64,
    pub net_u_chi: f64,
    pub net_s_s: f64,
    pub net_s_b: f64,
}

/// Largest violations of the bookkeeping identities along a ledger.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantResiduals {
    /// `max |dU_X − dQ_X − dW_X|` over steps and both parties.
    pub first_law_step: f64,
    /// `max_X |ΔU_X − ΔQ_X − ΔW_X| / (1 + |ΔU_X|)`.
    pub first_law_integrated: f64,
    /// `max |dW_S + dW_B − Tr[ρ_S⊗ρ_B dH_int/dτ]|`.
    pub work_antisymmetry: f64,
    /// `max |dQ_S + dQ_B + dQ_χ|`.
    pub heat_balance_step: f64,
    /// `|ΔQ_S + ΔQ_B + ΔQ_χ|`.
    pub heat_balance_integrated: f64,
    /// `min_τ S_χ(τ)`, nonnegative by subadditivity.
    pub min_mutual_information: f64,
    /// `max |U_S + U_B + U_χ − U_tot|`.
    pub energy_sum: f64,
}

#[derive(Debug, Clone)]
pub struct ThermoLedger {
    pub grid: TimeGrid,
    pub snapshots: Vec<ThermoSnapshot>,
    pub totals: LedgerTotals,
}

impl ThermoLedger {
    pub fn residuals(&self) -> InvariantResiduals {
        let mut r = InvariantResiduals { min_mutual_information: f64::INFINITY, ..Default::default() };
        for s in &self.snapshots {
            let f = &s.rates;
            r.first_law_step = r
                .first_law_step
                .max((f.du_s - f.dq_s - f.total_work_s()).abs())
                .max((f.du_b - f.dq_b - f.total_work_b()).abs());
            r.work_antisymmetry = r.work_antisymmetry.max((f.dw_s + f.dw_b - f.coupling_drive).abs());
            r.heat_balance_step = r.heat_balance_step.max((f.dq_s + f.dq_b + f.dq_chi).abs());
            r.min_mutual_information = r.min_mutual_information.min(s.entropies.s_chi);
            let e = &s.energies;
            r.energy_sum = r.energy_sum.max((e.u_s + e.u_b + e.u_chi - e.u_tot).abs());
        }
        let t = &self.totals;
        r.first_law_integrated = ((t.net_u_s - t.dq_s - t.dw_s).abs() / (1.0 + t.net_u_s.abs()))
            .max((t.net_u_b - t.dq_b - t.dw_b).abs() / (1.0 + t.net_u_b.abs()));
        r.heat_balance_integrated = (t.dq_s + t.dq_b + t.dq_chi).abs();
        r
    }
}

fn trapezoid(taus: &[f64], values: impl Fn(usize) -> f64) -> f64 {
    taus.windows(2)
        .enumerate()
        .map(|(i, w)| 0.5 * (values(i) + values(i + 1)) * (w[1] - w[0]))
        .sum()
}

/// Snapshot at every trajectory point plus trapezoidal totals.
pub fn build_ledger(
    trajectory: &Trajectory,
    dynamics: Dynamics<'_>,
    grid: &TimeGrid,
    config: &AccountingConfig,
) -> Result<ThermoLedger> {
    let Trajectory::Joint(states) = trajectory else {
        return Err(Error::ReducedTrajectory);
    };
    if states.len() != grid.steps() + 1 {
        return Err(Error::DimensionMismatch(format!(
            "trajectory has {} states for a grid of {} points",
            states.len(),
            grid.steps() + 1
        )));
    }
    if let Some(st) = states.first() {
        if st.layout() != dynamics.layout() {
            return Err(Error::DimensionMismatch("trajectory and system layouts differ".into()));
        }
    }
    let snapshots = states
        .iter()
        .map(|st| match dynamics {
            Dynamics::Static(sys) => snapshot(sys, st, config),
            Dynamics::Driven(d) => snapshot_driven(d, st, config),
        })
        .collect::<Result<Vec<_>>>()?;
    let taus: Vec<f64> = snapshots.iter().map(|s| s.tau).collect();
    let integrate = |f: fn(&ThermoSnapshot) -> f64| trapezoid(&taus, |i| f(&snapshots[i]));
    let (first, last) = (&snapshots[0], &snapshots[snapshots.len() - 1]);
    let totals = LedgerTotals {
        dq_s: integrate(|s| s.rates.dq_s),
        dq_b: integrate(|s| s.rates.dq_b),
        dw_s: integrate(|s| s.rates.total_work_s()),
        dw_b: integrate(|s| s.rates.total_work_b()),
        du_chi: integrate(|s| s.rates.du_chi),
        dq_chi: integrate(|s| s.rates.dq_chi),
        ds_s: integrate(|s| s.entropy_rates.ds_s),
        ds_b: integrate(|s| s.entropy_rates.ds_b),
        net_u_s: last.energies.u_s - first.energies.u_s,
        net_u_b: last.energies.u_b - first.energies.u_b,
        net_u_chi: last.energies.u_chi - first.energies.u_chi,
        net_s_s: last.entropies.s_s - first.entropies.s_s,
        net_s_b: last.entropies.s_b - first.entropies.s_b,
    };
    Ok(ThermoLedger { grid: *grid, snapshots, totals })
}

/// Trace of `L[ρ]`, which vanishes for a valid generator.
pub fn trace_defect(generator: &LindbladGenerator, rho: &Matrix) -> Result<f64> {
    Ok(trace(&generator.apply(rho)?).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accounting::EnergySplit;
    use crate::linalg::{c64, expectation, max_abs, pauli, trace_product, von_neumann_entropy};
    use crate::random::{random_density, random_hermitian, seeded};

    #[test]
    fn grid_endpoints_are_exact() {
        let g = TimeGrid::new(0.1, 0.7, 3).unwrap();
        assert_eq!(g.times().len(), 4);
        assert_eq!(g.time(0), 0.1);
        assert_eq!(g.time(3), 0.7);
        assert!(TimeGrid::new(1.0, 1.0, 5).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn generator_rejects_negative_rate() {
        assert!(LindbladGenerator::new(pauli::sigma_z(), vec![(pauli::sigma_minus(), -0.1)]).is_err());
    }

    #[test]
    fn generator_preserves_trace() {
        let mut rng = seeded(5);
        let g = LindbladGenerator::new(
            random_hermitian(&mut rng, 3, 1.0),
            vec![(random_hermitian(&mut rng, 3, 1.0), 0.3), (crate::random::ginibre(&mut rng, 3), 0.7)],
        )
        .unwrap();
        for _ in 0..100 {
            let rho = random_density(&mut rng, 3);
            assert!(trace_defect(&g, &rho).unwrap() < 1e-12);
        }
    }

    #[test]
    fn commuting_initial_state_is_stationary() {
        let mut rng = seeded(6);
        let h_s = pauli::sigma_z();
        let h_b = random_hermitian(&mut rng, 3, 1.0);
        let sys = BipartiteSystem::new(h_s, h_b, Matrix::zeros(6, 6)).unwrap();
        let spec = hermitian_spectrum(&sys.h_tot()).unwrap();
        let rho0 = spec.map(|e| (-e).exp());
        let rho0 = &rho0 * c64(1.0 / trace(&rho0).re, 0.0);
        let traj = propagate_exact(&sys, &rho0, &TimeGrid::new(0.0, 3.0, 30).unwrap()).unwrap();
        for st in &traj {
            assert!(max_abs(&(st.rho_sb() - &rho0)) < 1e-12);
        }
    }

    #[test]
    fn single_excitation_rabi_oscillation() {
        // H_int = g(σ+⊗σ− + σ−⊗σ+) on resonance: |1_S 0_B⟩ ↔ |0_S 1_B⟩ with
        // populations cos²(gt), sin²(gt); index convention |0⟩ = excited.
        let g = 0.7;
        let hs = pauli::sigma_z() * c64(0.5, 0.0);
        let hint = (pauli::sigma_plus().kronecker(&pauli::sigma_minus())
            + pauli::sigma_minus().kronecker(&pauli::sigma_plus()))
            * c64(g, 0.0);
        let sys = BipartiteSystem::new(hs.clone(), hs, hint).unwrap();
        let mut rho0 = Matrix::zeros(4, 4);
        rho0[(1, 1)] = c64(1.0, 0.0); // S excited, B ground
        let grid = TimeGrid::new(0.0, 4.0, 40).unwrap();
        let traj = propagate_exact(&sys, &rho0, &grid).unwrap();
        for st in traj {
            let t = st.tau;
            assert!((st.rho_sb()[(1, 1)].re - (g * t).cos().powi(2)).abs() < 1e-12);
            assert!((st.rho_sb()[(2, 2)].re - (g * t).sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_propagation_conserves_spectrum() {
        let mut rng = seeded(7);
        let sys = BipartiteSystem::new(
            random_hermitian(&mut rng, 2, 1.0),
            random_hermitian(&mut rng, 3, 1.0),
            random_hermitian(&mut rng, 6, 0.5),
        )
        .unwrap();
        let rho0 = random_density(&mut rng, 6);
        let s0 = von_neumann_entropy(&rho0).unwrap();
        let p0 = trace_product(&rho0, &rho0).re;
        let traj = propagate_exact(&sys, &rho0, &TimeGrid::new(0.0, 50.0, 10_000).unwrap()).unwrap();
        for st in traj.iter().step_by(500) {
            assert!((von_neumann_entropy(st.rho_sb()).unwrap() - s0).abs() < 1e-8);
            assert!((trace_product(st.rho_sb(), st.rho_sb()).re - p0).abs() < 1e-8);
        }
    }

    fn driven(omega: f64, amp: f64) -> DrivenSystem {
        let layout = CompositeLayout::new(2, 2).unwrap();
        let xx = pauli::sigma_x().kronecker(&pauli::sigma_x());
        DrivenSystem::new(layout, move |t| {
            BipartiteSystem::new(
                pauli::sigma_z() * c64(0.5, 0.0),
                pauli::sigma_z() * c64(0.6, 0.0),
                &xx * c64(0.2 + amp * (omega * t).sin(), 0.0),
            )
        })
    }

    #[test]
    fn constant_hook_matches_exact() {
        let mut rng = seeded(8);
        let sys = BipartiteSystem::new(
            random_hermitian(&mut rng, 2, 1.0),
            random_hermitian(&mut rng, 2, 1.0),
            random_hermitian(&mut rng, 4, 0.5),
        )
        .unwrap();
        let rho0 = random_density(&mut rng, 4);
        let grid = TimeGrid::new(0.0, 2.0, 50).unwrap();
        let a = propagate_exact(&sys, &rho0, &grid).unwrap();
        let b = propagate_piecewise(&DrivenSystem::constant(sys), &rho0, &grid).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(max_abs(&(x.rho_sb() - y.rho_sb())) < 1e-10);
        }
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        let d = driven(2.0, 0.5);
        let rho0 = random_density(&mut seeded(9), 4);
        let end = |steps| {
            let g = TimeGrid::new(0.0, 2.0, steps).unwrap();
            propagate_piecewise(&d, &rho0, &g).unwrap().last().unwrap().rho_sb().clone()
        };
        let reference = end(6400);
        let e1 = max_abs(&(end(100) - &reference));
        let e2 = max_abs(&(end(200) - &reference));
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn slow_ramp_is_adiabatic() {
        // H(t) = cos θ σ_z + sin θ σ_x on S with θ ramped over a long time; S
        // starts in the instantaneous ground state and stays there.
        let layout = CompositeLayout::new(2, 2).unwrap();
        let horizon = 400.0;
        let d = DrivenSystem::new(layout, move |t| {
            let th = 0.5 * std::f64::consts::PI * t / horizon;
            let h = pauli::sigma_z() * c64(th.cos(), 0.0) + pauli::sigma_x() * c64(th.sin(), 0.0);
            BipartiteSystem::new(h, pauli::sigma_z(), Matrix::zeros(4, 4))
        });
        let mut rho0 = Matrix::zeros(4, 4);
        rho0[(2, 2)] = c64(1.0, 0.0); // S ground (σ_z = −1), B excited
        let traj = propagate_piecewise(&d, &rho0, &TimeGrid::new(0.0, horizon, 4000).unwrap()).unwrap();
        let last = traj.last().unwrap();
        let h_end = d.at(horizon).unwrap().h_s().clone();
        let ground = hermitian_spectrum(&h_end).unwrap();
        let v = ground.eigenvectors.column(0).into_owned();
        let proj = &v * v.adjoint();
        assert!((expectation(last.rho_s(), &proj) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn driven_heat_of_whole_is_zero() {
        let d = driven(3.0, 0.4);
        let rho0 = random_density(&mut seeded(10), 4);
        let grid = TimeGrid::new(0.0, 1.0, 200).unwrap();
        let traj = propagate_piecewise(&d, &rho0, &grid).unwrap();
        // Tr[(ρ_{n+1} − ρ_n) H(mid)] vanishes to the order of the scheme
        let mut worst: f64 = 0.0;
        for w in traj.windows(2) {
            let h = d.at(0.5 * (w[0].tau + w[1].tau)).unwrap().h_tot();
            worst = worst.max(trace_product(&(w[1].rho_sb() - w[0].rho_sb()), &h).norm());
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn zero_rates_reproduce_unitary_motion() {
        let mut rng = seeded(11);
        let h = random_hermitian(&mut rng, 2, 1.0);
        let g = LindbladGenerator::new(h.clone(), vec![(pauli::sigma_minus(), 0.0)]).unwrap();
        let rho0 = random_density(&mut rng, 2);
        let grid = TimeGrid::new(0.0, 2.0, 2000).unwrap();
        let traj = propagate_lindblad(&g, &rho0, &grid).unwrap();
        let exact = crate::linalg::evolve_unitary(&rho0, &h, 2.0).unwrap();
        assert!(max_abs(&(traj.last().unwrap() - exact)) < 1e-12);
    }

    #[test]
    fn coarse_step_is_reported() {
        let g = LindbladGenerator::new(Matrix::zeros(2, 2), vec![(pauli::sigma_minus(), 50.0)]).unwrap();
        let rho0 = pauli::bloch_state([0.0, 0.0, 1.0]);
        let err = propagate_lindblad(&g, &rho0, &TimeGrid::new(0.0, 1.0, 10).unwrap()).unwrap_err();
        match err {
            Error::StepTooCoarse { suggested_dt, .. } => assert!(suggested_dt < 0.1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ledger_rejects_reduced_trajectory() {
        let sys = BipartiteSystem::new(pauli::sigma_z(), pauli::sigma_z(), Matrix::zeros(4, 4)).unwrap();
        let grid = TimeGrid::new(0.0, 1.0, 1).unwrap();
        let traj = Trajectory::Reduced(vec![Matrix::identity(2, 2); 2]);
        assert_eq!(
            build_ledger(&traj, Dynamics::Static(&sys), &grid, &AccountingConfig::default()).unwrap_err(),
            Error::ReducedTrajectory
        );
    }

    #[test]
    fn ledger_without_interaction_is_flat() {
        let mut rng = seeded(12);
        let sys = BipartiteSystem::new(
            random_hermitian(&mut rng, 2, 1.0),
            random_hermitian(&mut rng, 3, 1.0),
            Matrix::zeros(6, 6),
        )
        .unwrap();
        let rho0 = random_density(&mut rng, 6);
        let grid = TimeGrid::new(0.0, 1.0, 20).unwrap();
        let traj = Trajectory::Joint(propagate_exact(&sys, &rho0, &grid).unwrap());
        let ledger = build_ledger(&traj, Dynamics::Static(&sys), &grid, &AccountingConfig::default()).unwrap();
        for s in &ledger.snapshots {
            for v in [s.rates.dq_s, s.rates.dq_b, s.rates.dw_s, s.rates.dw_b, s.rates.du_chi] {
                assert!(v.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn ledger_closure_on_random_run() {
        let mut rng = seeded(13);
        let sys = BipartiteSystem::new(
            random_hermitian(&mut rng, 2, 1.0),
            random_hermitian(&mut rng, 3, 1.0),
            random_hermitian(&mut rng, 6, 0.5),
        )
        .unwrap();
        let rho0 = random_density(&mut rng, 6);
        let grid = TimeGrid::new(0.0, 1.0, 1000).unwrap();
        let traj = Trajectory::Joint(propagate_exact(&sys, &rho0, &grid).unwrap());
        let cfg = AccountingConfig { split: EnergySplit::new(0.3).unwrap(), ..Default::default() };
        let ledger = build_ledger(&traj, Dynamics::Static(&sys), &grid, &cfg).unwrap();
        let r = ledger.residuals();
        assert!(r.first_law_step < 1e-9, "{r:?}");
        assert!(r.first_law_integrated < 1e-6, "{r:?}");
        assert!(r.work_antisymmetry < 1e-12, "{r:?}");
        assert!(r.heat_balance_step < 1e-9, "{r:?}");
        assert!(r.heat_balance_integrated < 1e-6, "{r:?}");
        assert!(r.min_mutual_information > -1e-9, "{r:?}");
        assert!(r.energy_sum < 1e-9, "{r:?}");
    }
}
