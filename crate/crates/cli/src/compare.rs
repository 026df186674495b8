//! Numeric ledgers against the models' analytic oracles.

use std::f64::consts::PI;
use std::fmt::Write as _;

use corrthermo::linalg::{pauli, trace_distance, von_neumann_entropy};
use corrthermo::models::dephasing::{closed_form_thermo, exact_reduced_states, markovian_rate, DephasingBath};
use corrthermo::models::thermalizing::{perturbative_states_example1, AnalyticBlochSolution};
use corrthermo::quadrature::{integrate_pieces, integrate_to_infinity, Tolerance};
use corrthermo::Error;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::run::simulate;
use crate::scenario::{BathStateDoc, Prepared, QubitStart, ScenarioDocument};

/// Floor on `|oracle|` in relative deviations.
pub const REL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceProfile {
    /// Largest admissible absolute deviation per column.
    pub abs: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        ToleranceProfile { abs: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnDeviation {
    pub column: String,
    pub max_abs: f64,
    pub max_rel: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: &'static str,
    pub dynamics: &'static str,
    pub oracle: &'static str,
    pub tolerance: f64,
    pub pass: bool,
    /// Why the comparison failed before any column was evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cause: Option<String>,
    pub columns: Vec<ColumnDeviation>,
}

impl ComparisonReport {
    pub fn column(&self, name: &str) -> Option<&ColumnDeviation> {
        self.columns.iter().find(|c| c.column == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "oracle: {}  ({} / {})", self.oracle, self.model, self.dynamics);
        if let Some(cause) = &self.cause {
            let _ = writeln!(out, "FAIL: {cause}");
            return out;
        }
        let _ = writeln!(out, "{:<14} {:>12} {:>12} {:>10}  status", "column", "max_abs", "max_rel", "tolerance");
        for c in &self.columns {
            let _ = writeln!(
                out,
                "{:<14} {:>12.3e} {:>12.3e} {:>10.1e}  {}",
                c.column,
                c.max_abs,
                c.max_rel,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(out, "overall: {}", if self.pass { "PASS" } else { "FAIL" });
        out
    }

    /// `Err` naming the first failing column or the recorded cause.
    pub fn check(&self) -> CliResult<()> {
        if self.pass {
            return Ok(());
        }
        if let Some(cause) = &self.cause {
            return Err(CliError::Comparison(cause.clone()));
        }
        let c = self.columns.iter().find(|c| !c.pass).expect("a failing report has a failing column");
        Err(CliError::Comparison(format!(
            "column {} deviates by {:.3e}, above {:.1e}",
            c.column, c.max_abs, c.tolerance
        )))
    }
}

struct Tracker {
    columns: Vec<(String, f64, f64)>,
}

impl Tracker {
    fn new(names: &[&str]) -> Self {
        Tracker { columns: names.iter().map(|n| (n.to_string(), 0.0, 0.0)).collect() }
    }

    fn add(&mut self, idx: usize, numeric: f64, oracle: f64) {
        self.add_distance(idx, (numeric - oracle).abs(), oracle.abs());
    }

    /// Records a precomputed distance against an oracle of size `scale`.
    fn add_distance(&mut self, idx: usize, distance: f64, scale: f64) {
        let c = &mut self.columns[idx];
        let d = if distance.is_nan() { f64::INFINITY } else { distance };
        c.1 = c.1.max(d);
        c.2 = c.2.max(d / scale.max(REL_FLOOR));
    }

    fn finish(self, tol: f64) -> Vec<ColumnDeviation> {
        self.columns
            .into_iter()
            .map(|(column, max_abs, max_rel)| ColumnDeviation { column, max_abs, max_rel, tolerance: tol, pass: max_abs <= tol })
            .collect()
    }
}

fn core(context: &'static str) -> impl FnOnce(Error) -> CliError {
    move |e| CliError::from_core(context, e)
}

fn require_thermal(start: &QubitStart) -> CliResult<()> {
    if start.bath != BathStateDoc::Thermal {
        return Err(CliError::validation("`initial_state.qubit.bath`: the oracle assumes a thermal bath"));
    }
    Ok(())
}

/// `Δ(τ)` and `dΔ/dτ` of the Ohmic continuum by direct quadrature of
/// `∫ e^{−εω} sin²(ωτ/2) dω` and `∫ ω e^{−εω} sin(ωτ)/2 dω`.
pub fn ohmic_delta_by_quadrature(epsilon: f64, tau: f64) -> CliResult<(f64, f64)> {
    if tau == 0.0 {
        return Ok((0.0, 0.0));
    }
    let upper = 40.0 / epsilon;
    let panels = ((upper * tau / (2.0 * PI)).ceil() as usize).clamp(1, 20_000);
    let points: Vec<f64> = (0..=panels).map(|i| upper * i as f64 / panels as f64).collect();
    let tol = Tolerance { abs: 1e-13, rel: 0.0, max_intervals: 4 * panels + 20_000 };
    let run = |f: &dyn Fn(f64) -> f64| -> CliResult<f64> {
        let body = integrate_pieces(f, &points, 1, tol).map_err(core("quadrature"))?.value;
        let tail = integrate_to_infinity(f, upper, tol).map_err(core("quadrature"))?.value;
        Ok(body + tail)
    };
    let delta = run(&|w: f64| {
        let s = (0.5 * w * tau).sin();
        (-epsilon * w).exp() * s * s
    })?;
    let d_delta = run(&|w: f64| 0.5 * w * (-epsilon * w).exp() * (w * tau).sin())?;
    Ok((delta, d_delta))
}

/// Compares a scenario's numeric ledger with its model's analytic oracle.
pub fn compare_analytic(doc: &ScenarioDocument, max_dim: usize, profile: ToleranceProfile) -> CliResult<ComparisonReport> {
    if !(profile.abs >= 0.0) {
        return Err(CliError::validation(format!("`tolerance`: must be nonnegative, got {}", profile.abs)));
    }
    let prepared = doc.prepare(max_dim)?;
    let grid = doc.grid()?;
    let alpha_s = doc.split.alpha_s;
    let mut report = ComparisonReport {
        name: doc.name.clone(),
        model: doc.model.kind(),
        dynamics: prepared.dynamics_name(),
        oracle: "",
        tolerance: profile.abs,
        pass: true,
        cause: None,
        columns: Vec::new(),
    };
    let tracker = match &prepared {
        Prepared::Custom { .. } => {
            return Err(CliError::validation("`model.kind`: no analytic oracle exists for custom-bipartite models"))
        }
        Prepared::ThermalizingMarkovian { spec, start } => {
            report.oracle = "closed-form Bloch solution";
            let sol = AnalyticBlochSolution::from_spec(spec, start.bloch).map_err(core("oracle"))?;
            let sim = simulate(doc, &prepared)?;
            let mut t = Tracker::new(&["bloch_x", "bloch_y", "bloch_z", "U_S", "S_S"]);
            for (i, rho) in sim.system_states.iter().enumerate() {
                let tau = grid.time(i);
                let (num, exact) = (pauli::bloch_vector(rho), sol.bloch(tau));
                for k in 0..3 {
                    t.add(k, num[k], exact[k]);
                }
                let row = &sim.rows[i];
                t.add(3, row.u_s.unwrap_or(f64::NAN), 0.5 * spec.omega0 * exact[2]);
                let s = von_neumann_entropy(&sol.state(tau)).map_err(core("oracle"))?;
                t.add(4, row.s_s.unwrap_or(f64::NAN), s);
            }
            t
        }
        Prepared::ThermalizingExact { spec, start } => {
            report.oracle = "second-order perturbative states";
            require_thermal(start)?;
            let sim = simulate(doc, &prepared)?;
            let baths = sim.bath_states.as_ref().expect("joint run");
            let mut t = Tracker::new(&["rho_S", "rho_B"]);
            for (i, (rho_s, rho_b)) in sim.system_states.iter().zip(baths).enumerate() {
                let p = perturbative_states_example1(spec, &start.rho_s, grid.time(i)).map_err(core("oracle"))?;
                t.add_distance(0, trace_distance(rho_s, &p.rho_s).map_err(core("oracle"))?, 1.0);
                t.add_distance(1, trace_distance(rho_b, &p.rho_b).map_err(core("oracle"))?, 1.0);
            }
            t
        }
        Prepared::DephasingExact { spec, start } => {
            report.oracle = "displaced-bath states and closed-form rates";
            require_thermal(start)?;
            let mut oracles = Vec::with_capacity(grid.steps() + 1);
            for tau in grid.times() {
                match exact_reduced_states(spec, &start.rho_s, tau) {
                    Ok(s) => oracles.push(s),
                    Err(Error::CutoffLeakage { leakage, threshold }) => {
                        report.pass = false;
                        report.cause = Some(format!(
                            "cutoff leakage: population {leakage:.3e} at the Fock cutoff exceeds {threshold:.1e} at tau = {tau}; raise n_max"
                        ));
                        return Ok(report);
                    }
                    Err(e) => return Err(CliError::from_core("oracle", e)),
                }
            }
            let sim = simulate(doc, &prepared)?;
            let baths = sim.bath_states.as_ref().expect("joint run");
            let mut t = Tracker::new(&["rho_S", "rho_B", "U_chi", "Q_S_rate", "Q_B_rate", "W_S_rate", "W_B_rate"]);
            for (i, oracle) in oracles.iter().enumerate() {
                let tau = grid.time(i);
                t.add_distance(0, trace_distance(&sim.system_states[i], &oracle.rho_s).map_err(core("oracle"))?, 1.0);
                let rho_b = oracle.rho_b.as_ref().expect("discrete bath");
                t.add_distance(1, trace_distance(&baths[i], rho_b).map_err(core("oracle"))?, 1.0);
                let th = closed_form_thermo(spec, &start.rho_s, alpha_s, tau).map_err(core("oracle"))?;
                let row = &sim.rows[i];
                let num = |v: Option<f64>| v.unwrap_or(f64::NAN);
                t.add(2, num(row.u_chi), th.u_chi);
                t.add(3, num(row.q_s_rate), th.dq_s);
                t.add(4, num(row.q_b_rate), th.dq_b);
                t.add(5, num(row.w_s_rate), th.dw_s);
                t.add(6, num(row.w_b_rate), th.dw_b);
            }
            t
        }
        Prepared::DephasingClosedForm { spec, start } => {
            report.oracle = "quadrature of the Ohmic kernels";
            let DephasingBath::OhmicContinuum { epsilon } = spec.bath else { unreachable!() };
            let sim = simulate(doc, &prepared)?;
            let lam2 = spec.lambda * spec.lambda;
            let sz = pauli::bloch_vector(&start.rho_s)[2];
            let sz2 = sz * sz;
            let mut t = Tracker::new(&["Delta", "dDelta", "U_chi", "Q_B_rate", "W_B_rate"]);
            for (i, row) in sim.rows.iter().enumerate() {
                let th = closed_form_thermo(spec, &start.rho_s, alpha_s, grid.time(i)).map_err(core("closed forms"))?;
                let (delta, d_delta) = ohmic_delta_by_quadrature(epsilon, grid.time(i))?;
                let num = |v: Option<f64>| v.unwrap_or(f64::NAN);
                t.add(0, th.kernels.delta, delta);
                t.add(1, th.kernels.d_delta, d_delta);
                t.add(2, num(row.u_chi), -4.0 * lam2 * (1.0 - sz2) * delta);
                t.add(3, num(row.q_b_rate), 4.0 * lam2 * (1.0 - sz2) * d_delta);
                t.add(4, num(row.w_b_rate), 4.0 * lam2 * (1.0 - alpha_s) * sz2 * d_delta);
            }
            t
        }
        Prepared::DephasingMarkovian { spec, start } => {
            report.oracle = "exponential coherence decay";
            let gamma = markovian_rate(spec);
            let sim = simulate(doc, &prepared)?;
            let c0 = start.rho_s[(0, 1)];
            let z0 = pauli::bloch_vector(&start.rho_s)[2];
            let mut t = Tracker::new(&["rho01_re", "rho01_im", "bloch_z"]);
            for (i, rho) in sim.system_states.iter().enumerate() {
                let tau = grid.time(i);
                let exact = c0 * corrthermo::Complex64::from_polar((-gamma * tau).exp(), -spec.omega0 * tau);
                t.add(0, rho[(0, 1)].re, exact.re);
                t.add(1, rho[(0, 1)].im, exact.im);
                t.add(2, pauli::bloch_vector(rho)[2], z0);
            }
            t
        }
    };
    report.columns = tracker.finish(profile.abs);
    report.pass = report.columns.iter().all(|c| c.pass);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_quadrature_matches_its_closed_form() {
        for (eps, tau) in [(1.0, 0.5), (1.0, 5.0), (0.3, 2.0)] {
            let (d, dd) = ohmic_delta_by_quadrature(eps, tau).unwrap();
            let t2: f64 = tau * tau;
            assert!((d - t2 / (2.0 * eps * (eps * eps + t2))).abs() < 1e-11);
            assert!((dd - eps * tau / ((t2 + eps * eps) * (t2 + eps * eps))).abs() < 1e-11);
        }
    }

    #[test]
    fn tracker_floors_relative_errors() {
        let mut t = Tracker::new(&["a"]);
        t.add(0, 1e-13, 0.0);
        t.add(0, 2.0, 2.0 + 1e-9);
        let c = &t.finish(1e-8)[0];
        assert!((c.max_rel - 0.1).abs() < 1e-12);
        assert!(c.pass);
    }
}
