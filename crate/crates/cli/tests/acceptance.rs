//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use corrthermo::accounting::{internal_energies, EnergySplit, JointState};
use corrthermo::linalg::{hermitian_spectrum, pauli, trace_distance};
use corrthermo::models::dephasing::{bath_temperatures_example2, closed_form_thermo, exact_reduced_states, kernels, DephasingSpec};
use corrthermo::models::thermalizing::{
    emission_rate_and_lamb_shift, extended_temperature_from_bloch, generator_from_rates, longtime_bath_rates_example1,
    pseudo_temperature_limit, AnalyticBlochSolution, JaynesCummingsSpec,
};
use corrthermo::dynamics::propagate_lindblad;
use corrthermo::models::BathMode;
use corrthermo::{Complex64, Matrix, TimeGrid};
use corrthermo_cli::compare::ohmic_delta_by_quadrature;
use corrthermo_cli::scenario::Prepared;
use corrthermo_cli::{compare_analytic, parse_scenario, run_scenario, RunOutcome, ScenarioDocument, ToleranceProfile};

const MAX_DIM: usize = 4096;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn run(doc: &ScenarioDocument) -> RunOutcome {
    run_scenario(doc, MAX_DIM).unwrap_or_else(|e| panic!("run failed: {e}"))
}

fn custom(seed: u64, state: &str) -> ScenarioDocument {
    parse_scenario(&format!(
        r#"{{"model": {{"kind": "custom-bipartite", "parameters": {{"dim_s": 2, "dim_b": 3,
              "h_s": {{"random": {{"scale": 1.0}}}}, "h_b": {{"random": {{"scale": 1.0}}}},
              "h_int": {{"random": {{"scale": 0.4}}}}}}}},
            "initial_state": "{state}", "split": {{"alpha_s": 0.5}},
            "grid": {{"t1": 1.0, "steps": 1000}}, "seed": {seed}}}"#
    ))
    .unwrap()
}

fn unwrap_custom(outcome: &RunOutcome) -> (&corrthermo::BipartiteSystem, &Matrix) {
    match &outcome.prepared {
        Prepared::Custom { system, rho0, .. } => (system, rho0),
        _ => unreachable!(),
    }
}

/// `dU_X/dτ` by a five-point stencil on the exact evolution.
fn stencil_du(system: &corrthermo::BipartiteSystem, rho: &Matrix, split: EnergySplit) -> (f64, f64) {
    let h = 1e-3;
    let spec = hermitian_spectrum(&system.h_tot()).unwrap();
    let at = |s: f64| {
        let st = JointState::new(spec.evolve(rho, s), system.layout(), 0.0).unwrap();
        let e = internal_energies(system, &st, split).unwrap();
        (e.u_s, e.u_b)
    };
    let (p2, p1, m1, m2) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
    let d = |a: f64, b: f64, c: f64, e: f64| (-a + 8.0 * b - 8.0 * c + e) / (12.0 * h);
    (d(p2.0, p1.0, m1.0, m2.0), d(p2.1, p1.1, m1.1, m2.1))
}

fn criterion_1_2() -> (Verdict, Verdict) {
    let start = Instant::now();
    let outcomes: Vec<RunOutcome> = (0..50).map(|seed| run(&custom(seed, "random-correlated"))).collect();
    let runtime = start.elapsed().as_secs_f64();

    let (mut step, mut integrated, mut stencil, mut anti, mut balance) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for o in &outcomes {
        let r = &o.simulation.residuals;
        step = step.max(r.first_law_step.unwrap());
        integrated = integrated.max(r.first_law_integrated.unwrap());
        anti = anti.max(r.work_antisymmetry.unwrap());
        balance = balance.max(r.heat_balance_step.unwrap());
        // Independent dU from finite differences at every 50th step.
        let (system, _) = unwrap_custom(o);
        let split = EnergySplit::new(0.5).unwrap();
        let spec = hermitian_spectrum(&system.h_tot()).unwrap();
        let (_, rho0) = unwrap_custom(o);
        for (i, row) in o.simulation.rows.iter().enumerate().step_by(50) {
            let rho = spec.evolve(rho0, o.simulation.grid.time(i));
            let (du_s, du_b) = stencil_du(system, &rho, split);
            let q_s = row.q_s_rate.unwrap() + row.w_s_rate.unwrap();
            let q_b = row.q_b_rate.unwrap() + row.w_b_rate.unwrap();
            stencil = stencil.max((du_s - q_s).abs()).max((du_b - q_b).abs());
        }
    }
    let c1 = verdict(
        step <= 1e-9 && stencil <= 1e-9 && integrated <= 1e-6 && runtime < 10.0,
        format!(
            "per-step {step:.2e}, per-step vs stencil dU {stencil:.2e} (<= 1e-9); integrated {integrated:.2e} (<= 1e-6); {runtime:.2} s (< 10 s)"
        ),
    );
    let c2 = verdict(
        anti <= 1e-12 && balance <= 1e-9,
        format!("work antisymmetry {anti:.2e} (<= 1e-12); heat balance {balance:.2e} (<= 1e-9)"),
    );
    (c1, c2)
}

fn criterion_3() -> Verdict {
    let (mut identity, mut min_chi) = (0.0f64, f64::INFINITY);
    for seed in 100..150 {
        let o = run(&custom(seed, "random-product"));
        let rows = &o.simulation.rows;
        let (s_s0, s_b0) = (rows[0].s_s.unwrap(), rows[0].s_b.unwrap());
        for r in rows {
            let chi = r.s_chi.unwrap();
            identity = identity.max((r.s_s.unwrap() - s_s0 + r.s_b.unwrap() - s_b0 - chi).abs());
            min_chi = min_chi.min(chi);
        }
    }
    verdict(
        identity <= 1e-9 && min_chi >= -1e-9,
        format!("|dS_S + dS_B - S_chi| {identity:.2e} (<= 1e-9); min S_chi {min_chi:.2e} (>= -1e-9)"),
    )
}

fn criterion_4() -> Verdict {
    const INVARIANT: [&str; 7] = ["Q_S_rate", "Q_B_rate", "S_S", "S_B", "S_SB", "S_chi", "U_tot"];
    let mut spread = 0.0f64;
    let (mut sums, mut u_s_shift) = (0.0f64, f64::INFINITY);
    for seed in 200..205 {
        let runs: Vec<RunOutcome> = [-2.0, 0.0, 0.5, 1.0]
            .iter()
            .map(|&a| {
                let mut doc = custom(seed, "random-correlated");
                doc.split.alpha_s = a;
                run(&doc)
            })
            .collect();
        let reference = &runs[3].simulation.rows;
        for o in &runs {
            for (r, r1) in o.simulation.rows.iter().zip(reference) {
                for c in INVARIANT {
                    spread = spread.max((r.get(c).unwrap() - r1.get(c).unwrap()).abs());
                }
                let u = r.u_s.unwrap() + r.u_b.unwrap() + r.u_chi.unwrap() - r.u_tot.unwrap();
                let w = r.w_s_rate.unwrap() + r.w_b_rate.unwrap();
                sums = sums.max(u.abs()).max(w.abs());
            }
            let res = &o.simulation.residuals;
            sums = sums.max(res.first_law_step.unwrap());
            if o.summary.alpha_s != 1.0 {
                let shift = o.simulation.rows.iter().zip(reference).map(|(r, r1)| (r.u_s.unwrap() - r1.u_s.unwrap()).abs());
                u_s_shift = u_s_shift.min(shift.fold(0.0, f64::max));
            }
        }
    }
    verdict(
        spread <= 1e-10 && sums <= 1e-10 && u_s_shift > 1e-6,
        format!("invariant spread {spread:.2e} (<= 1e-10); sum rules {sums:.2e}; smallest U_S shift {u_s_shift:.2e} (> 0)"),
    )
}

fn gibbs(omega0: f64, beta: f64) -> Matrix {
    let (up, down) = ((-0.5 * beta * omega0).exp(), (0.5 * beta * omega0).exp());
    pauli::bloch_state([0.0, 0.0, (up - down) / (up + down)])
}

fn thermalizing_spec(beta: f64) -> JaynesCummingsSpec {
    JaynesCummingsSpec::new(1.0, 0.05, beta, vec![BathMode::real(1.0, 1.0)], 1, 0.1)
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let spec = thermalizing_spec(1.0);
    let em = emission_rate_and_lamb_shift(&spec).unwrap();
    let gamma = 2.0 * PI * 0.05f64.powi(2) * (-0.1f64).exp();
    let gamma_tilde = gamma / (0.5f64).tanh();
    let generator = generator_from_rates(1.0, gamma, em.lamb_shift, 1.0 / (1f64.exp() - 1.0)).unwrap();
    let bloch0 = [0.6, -0.3, 0.5];
    let steps = 10_000;
    let grid = TimeGrid::new(0.0, 10.0 / gamma_tilde, steps).unwrap();
    let states = propagate_lindblad(&generator, &pauli::bloch_state(bloch0), &grid).unwrap();
    let exact = AnalyticBlochSolution::new(bloch0, gamma, em.lamb_shift, 1.0, 1.0).unwrap();
    let mut err = 0.0f64;
    for (i, rho) in states.iter().enumerate() {
        let (b, e) = (pauli::bloch_vector(rho), exact.bloch(grid.time(i)));
        err = (0..3).map(|k| (b[k] - e[k]).abs()).fold(err, f64::max);
    }
    // The long-time state: the same step continued to 30/γ̃, where transients are ~e^{-15}.
    let tail = TimeGrid::new(grid.t1(), 30.0 / gamma_tilde, 2 * steps).unwrap();
    let late = propagate_lindblad(&generator, states.last().unwrap(), &tail).unwrap();
    let runtime = start.elapsed().as_secs_f64();
    let to_gibbs = trace_distance(late.last().unwrap(), &gibbs(1.0, 1.0)).unwrap();
    verdict(
        err <= 1e-6 && to_gibbs <= 1e-3 && runtime < 5.0,
        format!("max Bloch error {err:.2e} (<= 1e-6); distance of rho_S(30/gamma~) to Gibbs {to_gibbs:.2e} (<= 1e-3); {runtime:.2} s (< 5 s)"),
    )
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let base = std::fs::read_to_string(scenario_dir().join("thermalizing-exact.json")).unwrap();
    let residual = |lambda: f64| {
        let doc = parse_scenario(&base.replace("\"lambda\": 0.04", &format!("\"lambda\": {lambda}"))).unwrap();
        let report = compare_analytic(&doc, MAX_DIM, ToleranceProfile::default()).unwrap();
        report.column("rho_S").unwrap().max_abs.max(report.column("rho_B").unwrap().max_abs)
    };
    let r: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&l| residual(l)).collect();
    let runtime = start.elapsed().as_secs_f64();
    let (a, b) = (r[0] / r[1], r[1] / r[2]);
    let ok = |x: f64| (5.5..=10.5).contains(&x);
    verdict(
        ok(a) && ok(b) && runtime < 30.0,
        format!(
            "residuals {:.2e}, {:.2e}, {:.2e}; ratios {a:.2}, {b:.2} (in [5.5, 10.5]); {runtime:.2} s (< 30 s)",
            r[0], r[1], r[2]
        ),
    )
}

fn criterion_7() -> Verdict {
    let beta = 1.0;
    let spec = JaynesCummingsSpec::new(1.0, 0.1, beta, vec![BathMode::real(1.0, 1.0)], 1, 0.1);
    let em = emission_rate_and_lamb_shift(&spec).unwrap();
    let nbar = 1.0 / (beta.exp() - 1.0);
    let generator = generator_from_rates(1.0, em.gamma, em.lamb_shift, nbar).unwrap();
    let grid = TimeGrid::new(0.0, 80.0, 8000).unwrap();

    let mut pseudo = 0.0f64;
    for z in [0.8, 0.3, -0.2, -0.9] {
        let states = propagate_lindblad(&generator, &pauli::bloch_state([0.0, 0.0, z]), &grid).unwrap();
        let rho = states.last().unwrap();
        let flow = generator.apply(rho).unwrap();
        let ds = corrthermo::linalg::entropy_rate(rho, &flow).unwrap();
        let du = 0.5 * pauli::bloch_vector(&flow)[2];
        pseudo = pseudo.max((du / ds * beta - 1.0).abs());
        let limit = pseudo_temperature_limit(1.0, beta, [0.0, 0.0, z]).unwrap();
        pseudo = pseudo.max((limit * beta - 1.0).abs());
    }

    let mut extended = 0.0f64;
    for bloch0 in [[0.6, 0.0, 0.3], [0.0, 0.0, -0.5], [0.2, 0.7, 0.1]] {
        let states = propagate_lindblad(&generator, &pauli::bloch_state(bloch0), &grid).unwrap();
        let t = extended_temperature_from_bloch(1.0, pauli::bloch_vector(states.last().unwrap())).unwrap();
        extended = extended.max((t * beta - 1.0).abs());
    }

    let mut t_b = 0.0f64;
    for bloch0 in [[0.6, 0.0, 0.3], [0.3, -0.4, 0.8], [0.1, 0.1, 0.9]] {
        let rho = pauli::bloch_state(bloch0);
        let limit = longtime_bath_rates_example1(&spec, &rho).unwrap().t_b_limit.unwrap();
        let (r00, r11) = ((1.0 + bloch0[2]) / 2.0, (1.0 - bloch0[2]) / 2.0);
        let c2 = (bloch0[0] * bloch0[0] + bloch0[1] * bloch0[1]) / 4.0;
        let pump = (nbar + 1.0) * r00 - nbar * r11;
        t_b = t_b.max((limit - pump / (pump - c2) / beta).abs());
    }
    verdict(
        pseudo <= 1e-2 && extended <= 1e-2 && t_b <= 1e-8,
        format!(
            "pseudo-T_S rel. error {pseudo:.2e} (<= 1%); extended T_S rel. error {extended:.2e} (<= 1%); T_B limit {t_b:.2e} (<= 1e-8)"
        ),
    )
}

fn criterion_8() -> Verdict {
    let doc = parse_scenario(&std::fs::read_to_string(scenario_dir().join("dephasing-exact.json")).unwrap()).unwrap();
    let o = run(&doc);
    let Prepared::DephasingExact { spec, start } = &o.prepared else { unreachable!() };
    let rho0 = &start.rho_s;
    let (lambda, beta, omega0): (f64, f64, f64) = (0.1, 1.0, 1.0);
    let (mut coherence, mut population, mut dq_s, mut leakage) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (i, rho) in o.simulation.system_states.iter().enumerate() {
        let tau = o.simulation.grid.time(i);
        let s = (0.5 * tau).sin();
        let gamma = s * s / (0.5 * beta).tanh();
        let expected = rho0[(0, 1)] * Complex64::from_polar((-8.0 * lambda * lambda * gamma).exp(), -omega0 * tau);
        coherence = coherence.max((rho[(0, 1)] - expected).norm());
        population = population.max((rho[(0, 0)] - rho0[(0, 0)]).norm());
        dq_s = dq_s.max(o.simulation.rows[i].q_s_rate.unwrap().abs());
        if i % 20 == 0 {
            leakage = leakage.max(exact_reduced_states(spec, rho0, tau).unwrap().leakage.unwrap());
        }
    }
    verdict(
        coherence <= 1e-6 && population <= 1e-12 && dq_s <= 1e-12 && leakage <= 1e-6,
        format!(
            "coherence {coherence:.2e} (<= 1e-6); populations {population:.2e} (<= 1e-12); |dQ_S| {dq_s:.2e}; leakage {leakage:.2e} (<= 1e-6)"
        ),
    )
}

fn criterion_9() -> Verdict {
    let (omega0, lambda, beta, eps) = (1.0, 0.1, 1.3, 0.7);
    let spec = DephasingSpec::ohmic(omega0, lambda, beta, eps);
    let (mut identities, mut delta) = (0.0f64, 0.0f64);
    for alpha in [-2.0, 0.0, 0.5, 1.0] {
        for bloch in [[0.6, 0.0, 0.5], [0.1, 0.3, -0.8]] {
            let rho = pauli::bloch_state(bloch);
            for i in 0..=100 {
                let tau = 0.1 * i as f64;
                let th = closed_form_thermo(&spec, &rho, alpha, tau).unwrap();
                let sigma_b = bath_temperatures_example2(&spec, &rho, alpha, tau).unwrap().sigma_b;
                for v in [
                    th.dq_b + th.du_chi,
                    th.ds_b - beta * th.dq_b,
                    sigma_b,
                    th.du_s - th.dq_s - th.dw_s,
                    th.du_b - th.dq_b - th.dw_b,
                    th.dw_s + th.dw_b,
                ] {
                    identities = identities.max(v.abs());
                }
            }
        }
    }
    for i in 0..=100 {
        let tau = 0.1 * i as f64;
        let (d, _) = ohmic_delta_by_quadrature(eps, tau).unwrap();
        delta = delta.max((d - kernels(&spec, tau).unwrap().delta).abs());
    }
    verdict(
        identities <= 1e-10 && delta <= 1e-9,
        format!("closed-form identities {identities:.2e} (<= 1e-10); Delta vs quadrature {delta:.2e} (<= 1e-9)"),
    )
}

fn criterion_10() -> Verdict {
    let beta = 1.0;
    let spec = DephasingSpec::ohmic(1.0, 0.05, beta, 0.1 * beta);
    let tau = 50.0 * beta;
    let g = kernels(&spec, tau).unwrap().gamma;
    let linear = PI * tau / (2.0 * beta);
    let kernel = (g / linear - 1.0).abs();

    let doc = parse_scenario(&std::fs::read_to_string(scenario_dir().join("dephasing-markovian.json")).unwrap()).unwrap();
    let o = run(&doc);
    let Prepared::DephasingMarkovian { start, .. } = &o.prepared else { unreachable!() };
    let rate = 4.0 * PI * 0.05 * 0.05 / beta;
    let mut decay = 0.0f64;
    for (i, rho) in o.simulation.system_states.iter().enumerate() {
        let t = o.simulation.grid.time(i);
        let expected = start.rho_s[(0, 1)] * Complex64::from_polar((-rate * t).exp(), -t);
        decay = decay.max((rho[(0, 1)] - expected).norm());
    }
    verdict(
        kernel <= 0.02 && decay <= 1e-8,
        format!("Gamma(50 beta) vs pi tau/(2 beta) rel. {kernel:.2e} (<= 2%); coherence vs exp(-gamma tau) {decay:.2e} (<= 1e-8)"),
    )
}

fn scenario_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn criterion_11() -> Verdict {
    let mut names: Vec<_> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    names.sort();
    let tmp = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for path in &names {
        let ledgers: Vec<Vec<u8>> = (0..2)
            .map(|k| {
                let out = tmp.path().join(format!("{}-{k}", path.file_stem().unwrap().to_string_lossy()));
                let status = Command::new(env!("CARGO_BIN_EXE_corrthermo"))
                    .args(["run", "--scenario"])
                    .arg(path)
                    .arg("--out")
                    .arg(&out)
                    .output()
                    .unwrap();
                assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
                std::fs::read(out.join("ledger.csv")).unwrap()
            })
            .collect();
        if ledgers[0] != ledgers[1] {
            differing.push(path.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    verdict(
        differing.is_empty() && !names.is_empty(),
        format!("{} scenarios, {} with differing ledgers {:?}", names.len(), differing.len(), differing),
    )
}

fn main() {
    let suite = Instant::now();
    let mut failures = 0;
    let mut report = |n: u32, title: &str, f: &dyn Fn() -> Verdict| -> Verdict {
        let t = Instant::now();
        let v = f();
        println!(
            "{} {n:>2} {title}: {} [{:.2} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
        if !v.pass {
            failures += 1;
        }
        v
    };
    let pair = std::cell::RefCell::new(None);
    report(1, "first-law closure", &|| {
        let (a, b) = criterion_1_2();
        *pair.borrow_mut() = Some(b);
        a
    });
    report(2, "work antisymmetry and heat balance", &|| pair.borrow_mut().take().unwrap());
    report(3, "finite second law", &criterion_3);
    report(4, "split independence", &criterion_4);
    report(5, "thermalizing master equation vs closed form", &criterion_5);
    report(6, "perturbative scaling", &criterion_6);
    report(7, "thermalizing temperatures", &criterion_7);
    report(8, "dephasing exactness", &criterion_8);
    report(9, "dephasing closed-form thermodynamics", &criterion_9);
    report(10, "Markovian dephasing limit", &criterion_10);
    report(11, "determinism", &criterion_11);
    println!("{} of 11 criteria failed; suite {:.1} s", failures, suite.elapsed().as_secs_f64());
    if failures > 0 {
        std::process::exit(1);
    }
}
