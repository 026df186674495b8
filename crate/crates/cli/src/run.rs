//! Turns a prepared scenario into a ledger, totals and residuals.

use corrthermo::accounting::{
    entropy_production_fixed_t, extended_temperature_estimate, lindblad_entropy_production, pseudo_temperature,
    AccountingConfig, RATE_THRESHOLD,
};
use corrthermo::bosonic::ModeSpace;
use corrthermo::dynamics::{build_ledger, propagate_exact, propagate_lindblad, Dynamics};
use corrthermo::linalg::{entropy_rate, expectation, identity, pauli, trace_product, von_neumann_entropy};
use corrthermo::models::dephasing::{
    build_dephasing_hamiltonians, closed_form_thermo, dephased_qubit, markovian_generator, DephasingBath, DephasingSpec,
};
use corrthermo::models::qubit_hamiltonian;
use corrthermo::models::thermalizing::{
    build_jc_hamiltonians, gibbs_qubit, lindblad_generator_example1, thermal_bath_state, JaynesCummingsSpec,
};
use corrthermo::{BipartiteSystem, Complex64, EnergySplit, LindbladGenerator, Matrix, TimeGrid, Trajectory};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::ledger::{LedgerRow, Totals};
use crate::scenario::{BathStateDoc, InvariantTolerances, Prepared, QubitStart, ScenarioDocument};

/// Worst-case invariant residuals of a ledger; `None` where the dynamics
/// carry no information about the quantity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Residuals {
    pub first_law_step: Option<f64>,
    pub first_law_integrated: Option<f64>,
    pub work_antisymmetry: Option<f64>,
    pub heat_balance_step: Option<f64>,
    pub heat_balance_integrated: Option<f64>,
    pub energy_sum: Option<f64>,
    /// Smallest `S_χ` along the run.
    pub min_mutual_information: Option<f64>,
    /// Smallest entropy production of a Markovian run.
    pub min_entropy_production: Option<f64>,
}

impl Residuals {
    /// Violated invariants in reporting order.
    pub fn violations(&self, tol: &InvariantTolerances) -> Vec<Violation> {
        let above = |name, value: Option<f64>, threshold: f64| {
            value.filter(|v| !(*v <= threshold)).map(|value| Violation { name, value, threshold })
        };
        let below = |name, value: Option<f64>, threshold: f64| {
            value.filter(|v| !(*v >= -threshold)).map(|v| Violation { name, value: -v, threshold })
        };
        [
            above("first_law_step", self.first_law_step, tol.first_law_step),
            above("first_law_integrated", self.first_law_integrated, tol.first_law_integrated),
            above("work_antisymmetry", self.work_antisymmetry, tol.work_antisymmetry),
            above("heat_balance_step", self.heat_balance_step, tol.heat_balance_step),
            above("heat_balance_integrated", self.heat_balance_integrated, tol.heat_balance_integrated),
            above("energy_sum", self.energy_sum, tol.energy_sum),
            below("second_law", self.min_mutual_information, tol.second_law),
            below("second_law", self.min_entropy_production, tol.second_law),
        ]
        .into_iter()
        .flatten()
        .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
}

impl From<Violation> for CliError {
    fn from(v: Violation) -> Self {
        CliError::Invariant { name: v.name, value: v.value, threshold: v.threshold }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub grid: TimeGrid,
    pub rows: Vec<LedgerRow>,
    pub totals: Totals,
    pub residuals: Residuals,
    /// Reduced system state at every grid point.
    pub system_states: Vec<Matrix>,
    /// Reduced bath state at every grid point, for joint runs.
    pub bath_states: Option<Vec<Matrix>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: &'static str,
    pub dynamics: &'static str,
    pub alpha_s: f64,
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_bloch: Option<[f64; 3]>,
    pub totals: Totals,
    pub residuals: Residuals,
    pub tolerances: InvariantTolerances,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub prepared: Prepared,
    pub simulation: Simulation,
    pub summary: Summary,
}

impl RunOutcome {
    /// First violated invariant, if any.
    pub fn check(&self) -> CliResult<()> {
        match self.summary.violations.first() {
            Some(v) => Err((*v).into()),
            None => Ok(()),
        }
    }
}

fn core(context: &'static str) -> impl FnOnce(corrthermo::Error) -> CliError {
    move |e| CliError::from_core(context, e)
}

/// Runs a validated scenario. Invariant violations are recorded in the
/// summary rather than raised; see [`RunOutcome::check`].
pub fn run_scenario(doc: &ScenarioDocument, max_dim: usize) -> CliResult<RunOutcome> {
    let prepared = doc.prepare(max_dim)?;
    let simulation = simulate(doc, &prepared)?;
    let final_bloch = match prepared {
        Prepared::Custom { .. } => None,
        _ => simulation.system_states.last().map(pauli::bloch_vector),
    };
    let summary = Summary {
        name: doc.name.clone(),
        model: doc.model.kind(),
        dynamics: prepared.dynamics_name(),
        alpha_s: doc.split.alpha_s,
        rows: simulation.rows.len(),
        final_bloch,
        totals: simulation.totals,
        residuals: simulation.residuals,
        tolerances: doc.tolerances,
        violations: simulation.residuals.violations(&doc.tolerances),
    };
    Ok(RunOutcome { prepared, simulation, summary })
}

pub fn simulate(doc: &ScenarioDocument, prepared: &Prepared) -> CliResult<Simulation> {
    let grid = doc.grid()?;
    let split = doc.split()?;
    match prepared {
        Prepared::ThermalizingMarkovian { spec, start } => {
            let generator = lindblad_generator_example1(spec).map_err(core("Lindblad generator"))?;
            let reference = gibbs_qubit(spec.omega0, spec.beta);
            reduced_run(&generator, &qubit_hamiltonian(spec.omega0), &reference, &start.rho_s, &grid)
        }
        Prepared::DephasingMarkovian { spec, start } => {
            let generator = markovian_generator(spec).map_err(core("Lindblad generator"))?;
            let reference = identity(2) * Complex64::new(0.5, 0.0);
            reduced_run(&generator, &qubit_hamiltonian(spec.omega0), &reference, &start.rho_s, &grid)
        }
        Prepared::ThermalizingExact { spec, start } => {
            let system = build_jc_hamiltonians(spec).map_err(core("Hamiltonian"))?;
            let bath = jc_bath_state(spec, &start.bath)?;
            joint_run(&system, &start.rho_s.kronecker(&bath), &grid, split, Some(1.0 / spec.beta))
        }
        Prepared::DephasingExact { spec, start } => {
            let system = build_dephasing_hamiltonians(spec).map_err(core("Hamiltonian"))?;
            let bath = dephasing_bath_state(spec, &start.bath)?;
            joint_run(&system, &start.rho_s.kronecker(&bath), &grid, split, Some(1.0 / spec.beta))
        }
        Prepared::DephasingClosedForm { spec, start } => closed_form_run(spec, start, &grid, split),
        Prepared::Custom { system, rho0, t_ref } => joint_run(system, rho0, &grid, split, *t_ref),
    }
}

fn explicit_bath(rows: &crate::scenario::ComplexRows) -> Matrix {
    let n = rows.len();
    Matrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]))
}

fn jc_bath_state(spec: &JaynesCummingsSpec, bath: &BathStateDoc) -> CliResult<Matrix> {
    match bath {
        BathStateDoc::Thermal => thermal_bath_state(spec).map_err(core("bath state")),
        BathStateDoc::Vacuum => Ok(spec.mode_space().map_err(core("bath state"))?.vacuum()),
        BathStateDoc::Explicit(rows) => Ok(explicit_bath(rows)),
    }
}

fn dephasing_bath_state(spec: &DephasingSpec, bath: &BathStateDoc) -> CliResult<Matrix> {
    let DephasingBath::Discrete { modes, n_max } = &spec.bath else {
        return Err(CliError::validation("`model.parameters.bath`: exact dynamics need a discrete bath"));
    };
    let space = ModeSpace::new(modes.len(), *n_max, spec.max_dim / 2).map_err(core("bath state"))?;
    match bath {
        BathStateDoc::Thermal => {
            let omegas: Vec<f64> = modes.iter().map(|m| m.omega).collect();
            space.thermal_state(&omegas, spec.beta).map_err(core("bath state"))
        }
        BathStateDoc::Vacuum => Ok(space.vacuum()),
        BathStateDoc::Explicit(rows) => Ok(explicit_bath(rows)),
    }
}

fn joint_run(
    system: &BipartiteSystem,
    rho0: &Matrix,
    grid: &TimeGrid,
    split: EnergySplit,
    t_ref: Option<f64>,
) -> CliResult<Simulation> {
    let states = propagate_exact(system, rho0, grid).map_err(core("exact propagation"))?;
    let config = AccountingConfig { split, threshold: RATE_THRESHOLD, t_ref };
    let trajectory = Trajectory::Joint(states);
    let ledger = build_ledger(&trajectory, Dynamics::Static(system), grid, &config).map_err(core("ledger"))?;
    let Trajectory::Joint(states) = trajectory else { unreachable!() };
    let r = ledger.residuals();
    let rows: Vec<LedgerRow> = ledger.snapshots.iter().map(LedgerRow::from_snapshot).collect();
    Ok(Simulation {
        grid: *grid,
        totals: Totals::from_rows(&rows),
        rows,
        residuals: Residuals {
            first_law_step: Some(r.first_law_step),
            first_law_integrated: Some(r.first_law_integrated),
            work_antisymmetry: Some(r.work_antisymmetry),
            heat_balance_step: Some(r.heat_balance_step),
            heat_balance_integrated: Some(r.heat_balance_integrated),
            energy_sum: Some(r.energy_sum),
            min_mutual_information: Some(r.min_mutual_information),
            min_entropy_production: None,
        },
        system_states: states.iter().map(|s| s.rho_s().clone()).collect(),
        bath_states: Some(states.iter().map(|s| s.rho_b().clone()).collect()),
    })
}

/// Qubit-only ledger; bath and correlation columns are `NA` and the entropy
/// production is taken relative to the generator's fixed point `reference`.
fn reduced_run(
    generator: &LindbladGenerator,
    h_s: &Matrix,
    reference: &Matrix,
    rho0: &Matrix,
    grid: &TimeGrid,
) -> CliResult<Simulation> {
    let states = propagate_lindblad(generator, rho0, grid).map_err(core("Lindblad propagation"))?;
    let mut rows = Vec::with_capacity(states.len());
    let mut min_production = f64::INFINITY;
    for (i, rho) in states.iter().enumerate() {
        let drho = generator.apply(rho).map_err(core("generator"))?;
        let dq = trace_product(&drho, h_s).re;
        let ds = entropy_rate(rho, &drho).map_err(core("entropy rate"))?;
        let sigma = lindblad_entropy_production(rho, generator, reference).map_err(core("entropy production"))?;
        min_production = min_production.min(sigma);
        rows.push(LedgerRow {
            tau: grid.time(i),
            u_s: Some(expectation(rho, h_s)),
            q_s_rate: Some(dq),
            w_s_rate: Some(0.0),
            s_s: Some(von_neumann_entropy(rho).map_err(core("entropy"))?),
            t_pseudo_s: pseudo_temperature(ds, dq, RATE_THRESHOLD),
            t_ext_s: extended_temperature_estimate(ds, dq, true, RATE_THRESHOLD).map_err(core("temperature"))?,
            sigma_s_rate: Some(sigma),
            ..Default::default()
        });
    }
    let totals = Totals::from_rows(&rows);
    Ok(Simulation {
        grid: *grid,
        residuals: Residuals {
            first_law_integrated: totals.first_law_closure(),
            min_entropy_production: Some(min_production),
            ..Default::default()
        },
        totals,
        rows,
        system_states: states,
        bath_states: None,
    })
}

/// Continuum dephasing from the closed forms. `U_B` and `S_B` are measured
/// from their `τ = 0` values, `S_SB` is the constant `S_S(0)` on that scale
/// and `U_tot = ω₀⟨σ_z⟩/2`.
fn closed_form_run(spec: &DephasingSpec, start: &QubitStart, grid: &TimeGrid, split: EnergySplit) -> CliResult<Simulation> {
    let lam2 = spec.lambda * spec.lambda;
    let alpha_s = split.alpha_s();
    let h_s = qubit_hamiltonian(spec.omega0);
    let s0 = von_neumann_entropy(&start.rho_s).map_err(core("entropy"))?;
    let t = spec.temperature();
    let mut rows = Vec::with_capacity(grid.steps() + 1);
    let mut states = Vec::with_capacity(grid.steps() + 1);
    let mut dq_chis = Vec::with_capacity(grid.steps() + 1);
    let mut r = Residuals {
        first_law_step: Some(0.0),
        work_antisymmetry: Some(0.0),
        heat_balance_step: Some(0.0),
        energy_sum: Some(0.0),
        min_mutual_information: Some(f64::INFINITY),
        ..Default::default()
    };
    let bump = |slot: &mut Option<f64>, v: f64| *slot = Some(slot.unwrap_or(0.0).max(v));
    for tau in grid.times() {
        let th = closed_form_thermo(spec, &start.rho_s, alpha_s, tau).map_err(core("closed forms"))?;
        let rho = dephased_qubit(spec.omega0, spec.lambda, th.kernels.gamma, &start.rho_s, tau);
        let sz2 = th.sigma_z * th.sigma_z;
        let delta = th.kernels.delta;
        let u_s = expectation(&rho, &th.h_s_eff);
        let u_b = 4.0 * lam2 * (1.0 - alpha_s * sz2) * delta;
        let u_tot = expectation(&rho, &h_s);
        let s_s = von_neumann_entropy(&rho).map_err(core("entropy"))?;
        let s_b = spec.beta * 4.0 * lam2 * (1.0 - sz2) * delta;
        let s_chi = s_s - s0 + s_b;
        let fixed_t = |ds, dq| entropy_production_fixed_t(ds, dq, t).map_err(core("entropy production"));
        let dq_chi = th.du_chi;
        dq_chis.push(dq_chi);
        bump(&mut r.first_law_step, (th.du_s - th.dq_s - th.dw_s).abs().max((th.du_b - th.dq_b - th.dw_b).abs()));
        bump(&mut r.work_antisymmetry, (th.dw_s + th.dw_b).abs());
        bump(&mut r.heat_balance_step, (th.dq_s + th.dq_b + dq_chi).abs());
        bump(&mut r.energy_sum, (u_s + u_b + th.u_chi - u_tot).abs());
        r.min_mutual_information = r.min_mutual_information.map(|m| m.min(s_chi));
        rows.push(LedgerRow {
            tau,
            u_s: Some(u_s),
            u_b: Some(u_b),
            u_chi: Some(th.u_chi),
            u_tot: Some(u_tot),
            q_s_rate: Some(th.dq_s),
            q_b_rate: Some(th.dq_b),
            w_s_rate: Some(th.dw_s),
            w_b_rate: Some(th.dw_b),
            s_s: Some(s_s),
            s_b: Some(s_b),
            s_sb: Some(s0),
            s_chi: Some(s_chi),
            t_pseudo_s: pseudo_temperature(th.ds_s, th.du_s, RATE_THRESHOLD),
            t_pseudo_b: pseudo_temperature(th.ds_b, th.du_b, RATE_THRESHOLD),
            t_ext_s: extended_temperature_estimate(th.ds_s, th.dq_s, true, RATE_THRESHOLD)
                .map_err(core("temperature"))?,
            t_ext_b: extended_temperature_estimate(th.ds_b, th.dq_b, true, RATE_THRESHOLD)
                .map_err(core("temperature"))?,
            sigma_s_rate: Some(fixed_t(th.ds_s, th.dq_s)?),
            sigma_b_rate: Some(fixed_t(th.ds_b, th.dq_b)?),
        });
        states.push(rho);
    }
    let totals = Totals::from_rows(&rows);
    r.first_law_integrated = totals.first_law_closure();
    let heat = |row: &LedgerRow| row.q_s_rate.unwrap_or(0.0) + row.q_b_rate.unwrap_or(0.0);
    r.heat_balance_integrated = Some(
        rows.windows(2)
            .zip(dq_chis.windows(2))
            .map(|(w, c)| 0.5 * (heat(&w[0]) + c[0] + heat(&w[1]) + c[1]) * (w[1].tau - w[0].tau))
            .sum::<f64>()
            .abs(),
    );
    Ok(Simulation { grid: *grid, rows, totals, residuals: r, system_states: states, bath_states: None })
}
