//! Scenario documents: strict JSON in, validated model specifications out.

use corrthermo::linalg::{pauli, validate_density, DEFAULT_MAX_DIM};
use corrthermo::models::dephasing::{DephasingBath, DephasingSpec};
use corrthermo::models::thermalizing::{JaynesCummingsSpec, SpectralDensity};
use corrthermo::models::BathMode;
use corrthermo::random::{random_density, random_hermitian, seeded};
use corrthermo::{BipartiteSystem, Complex64, EnergySplit, Matrix, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::ledger::COLUMNS;

/// Environment variable overriding the Hilbert-space dimension cap.
pub const MAX_DIM_ENV: &str = "CORRTHERMO_MAX_DIM";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: ModelDoc,
    pub initial_state: InitialStateDoc,
    #[serde(default)]
    pub split: SplitDoc,
    pub grid: GridDoc,
    /// Ledger columns to write as two-column series files.
    #[serde(default)]
    pub outputs: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: InvariantTolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelDoc {
    Thermalizing(ThermalizingDoc),
    Dephasing(DephasingDoc),
    CustomBipartite(CustomDoc),
}

impl ModelDoc {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelDoc::Thermalizing(_) => "thermalizing",
            ModelDoc::Dephasing(_) => "dephasing",
            ModelDoc::CustomBipartite(_) => "custom-bipartite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalizingDoc {
    pub omega0: f64,
    pub lambda: f64,
    pub beta: f64,
    /// Truncated modes for exact runs; ignored by the Markovian generator.
    pub modes: Vec<ModeDoc>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub density: DensityDoc,
    #[serde(default = "default_excision")]
    pub excision_fraction: f64,
    #[serde(default)]
    pub dynamics: ThermalizingDynamics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThermalizingDynamics {
    #[default]
    Markovian,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensityDoc {
    /// `J(ω) = ω e^{−εω}`.
    Ohmic { epsilon: f64 },
    /// `J(ω) = value` on `[lo, hi]`.
    Flat { value: f64, lo: f64, hi: f64 },
}

impl Default for DensityDoc {
    fn default() -> Self {
        DensityDoc::Ohmic { epsilon: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeDoc {
    pub omega: f64,
    #[serde(default = "unit_coupling")]
    pub f: CouplingDoc,
}

/// Coupling amplitude, either real or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CouplingDoc {
    Real(f64),
    Complex([f64; 2]),
}

impl CouplingDoc {
    fn value(self) -> Complex64 {
        match self {
            CouplingDoc::Real(re) => Complex64::new(re, 0.0),
            CouplingDoc::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingDoc {
    pub omega0: f64,
    pub lambda: f64,
    pub beta: f64,
    pub bath: DephasingBathDoc,
    /// Defaults to `exact` for a discrete bath and `closed-form` for the continuum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DephasingDynamics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DephasingBathDoc {
    Discrete { modes: Vec<ModeDoc>, n_max: usize },
    Ohmic { epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DephasingDynamics {
    Exact,
    ClosedForm,
    Markovian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomDoc {
    pub dim_s: usize,
    pub dim_b: usize,
    pub h_s: MatrixDoc,
    pub h_b: MatrixDoc,
    pub h_int: MatrixDoc,
    /// Reference temperature for the `Sigma` columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_ref: Option<f64>,
}

/// Rows of `[re, im]` pairs.
pub type ComplexRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum MatrixDoc {
    Explicit(ComplexRows),
    /// GUE-like Hermitian matrix drawn from the scenario seed.
    Random { scale: f64 },
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialStateDoc {
    /// Qubit Bloch vector with a bath state; for the two models.
    Qubit {
        bloch: [f64; 3],
        #[serde(default)]
        bath: BathStateDoc,
    },
    /// `ρ_S ⊗ ρ_B` with both factors random.
    RandomProduct,
    /// Random joint density matrix.
    RandomCorrelated,
    Explicit { rho: ComplexRows },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum BathStateDoc {
    #[default]
    Thermal,
    Vacuum,
    Explicit(ComplexRows),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitDoc {
    pub alpha_s: f64,
}

impl Default for SplitDoc {
    fn default() -> Self {
        SplitDoc { alpha_s: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

/// Thresholds a ledger must meet for `run` to succeed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvariantTolerances {
    pub first_law_step: f64,
    pub first_law_integrated: f64,
    pub work_antisymmetry: f64,
    pub heat_balance_step: f64,
    pub heat_balance_integrated: f64,
    pub energy_sum: f64,
    pub second_law: f64,
}

impl Default for InvariantTolerances {
    fn default() -> Self {
        Self {
            first_law_step: 1e-9,
            first_law_integrated: 1e-6,
            work_antisymmetry: 1e-12,
            heat_balance_step: 1e-9,
            heat_balance_integrated: 1e-6,
            energy_sum: 1e-9,
            second_law: 1e-9,
        }
    }
}

fn default_n_max() -> usize {
    3
}

fn default_excision() -> f64 {
    1e-3
}

fn unit_coupling() -> CouplingDoc {
    CouplingDoc::Real(1.0)
}

/// Parses a scenario and checks every constraint.
pub fn parse_scenario(text: &str) -> CliResult<ScenarioDocument> {
    let doc: ScenarioDocument =
        serde_json::from_str(text).map_err(|e| CliError::validation(format!("scenario: {e}")))?;
    doc.prepare(max_dim_from_env()?)?;
    Ok(doc)
}

/// Dimension cap, overridable through the environment.
pub fn max_dim_from_env() -> CliResult<usize> {
    match std::env::var(MAX_DIM_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 2 => Ok(n),
            _ => Err(CliError::validation(format!("`{MAX_DIM_ENV}`: expected an integer >= 2, got {v:?}"))),
        },
        Err(_) => Ok(DEFAULT_MAX_DIM),
    }
}

/// Qubit initial condition of the model scenarios.
#[derive(Debug, Clone)]
pub struct QubitStart {
    pub bloch: [f64; 3],
    pub rho_s: Matrix,
    pub bath: BathStateDoc,
}

/// A validated, ready-to-run scenario.
#[derive(Debug, Clone)]
pub enum Prepared {
    ThermalizingMarkovian { spec: JaynesCummingsSpec, start: QubitStart },
    ThermalizingExact { spec: JaynesCummingsSpec, start: QubitStart },
    DephasingExact { spec: DephasingSpec, start: QubitStart },
    DephasingClosedForm { spec: DephasingSpec, start: QubitStart },
    DephasingMarkovian { spec: DephasingSpec, start: QubitStart },
    Custom { system: BipartiteSystem, rho0: Matrix, t_ref: Option<f64> },
}

impl Prepared {
    pub fn dynamics_name(&self) -> &'static str {
        match self {
            Prepared::ThermalizingMarkovian { .. } | Prepared::DephasingMarkovian { .. } => "markovian",
            Prepared::ThermalizingExact { .. } | Prepared::DephasingExact { .. } | Prepared::Custom { .. } => "exact",
            Prepared::DephasingClosedForm { .. } => "closed-form",
        }
    }
}

fn field(path: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::validation(format!("`{path}`: {reason}"))
}

fn core(context: &str) -> impl FnOnce(corrthermo::Error) -> CliError + '_ {
    move |e| CliError::from_core(context, e)
}

fn finite(path: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(field(path, format!("must be finite, got {v}")))
    }
}

fn modes(path: &str, docs: &[ModeDoc]) -> CliResult<Vec<BathMode>> {
    docs.iter()
        .enumerate()
        .map(|(i, m)| {
            finite(&format!("{path}[{i}].omega"), m.omega)?;
            let f = m.f.value();
            if !f.re.is_finite() || !f.im.is_finite() {
                return Err(field(&format!("{path}[{i}].f"), "must be finite"));
            }
            Ok(BathMode::new(m.omega, f))
        })
        .collect()
}

fn matrix_from_rows(path: &str, rows: &ComplexRows, dim: usize) -> CliResult<Matrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(field(path, format!("expected a {dim}x{dim} matrix")));
    }
    if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(field(path, "entries must be finite"));
    }
    Ok(Matrix::from_fn(dim, dim, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

fn density_from_rows(path: &str, rows: &ComplexRows, dim: usize) -> CliResult<Matrix> {
    let rho = matrix_from_rows(path, rows, dim)?;
    validate_density(&rho).map_err(|e| field(path, e))?;
    Ok(rho)
}

impl ScenarioDocument {
    pub fn grid(&self) -> CliResult<TimeGrid> {
        let g = self.grid;
        finite("grid.t0", g.t0)?;
        finite("grid.t1", g.t1)?;
        if g.steps == 0 {
            return Err(field("grid.steps", "must be at least 1"));
        }
        if !(g.t1 > g.t0) {
            return Err(field("grid.t1", format!("must exceed grid.t0 = {}, got {}", g.t0, g.t1)));
        }
        TimeGrid::new(g.t0, g.t1, g.steps).map_err(core("grid"))
    }

    pub fn split(&self) -> CliResult<EnergySplit> {
        finite("split.alpha_s", self.split.alpha_s)?;
        EnergySplit::new(self.split.alpha_s).map_err(|e| field("split.alpha_s", e))
    }

    fn check_common(&self) -> CliResult<()> {
        self.grid()?;
        self.split()?;
        for (i, name) in self.outputs.iter().enumerate() {
            if !COLUMNS.contains(&name.as_str()) {
                return Err(field(&format!("outputs[{i}]"), format!("unknown column {name:?}")));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.first_law_step", t.first_law_step),
            ("tolerances.first_law_integrated", t.first_law_integrated),
            ("tolerances.work_antisymmetry", t.work_antisymmetry),
            ("tolerances.heat_balance_step", t.heat_balance_step),
            ("tolerances.heat_balance_integrated", t.heat_balance_integrated),
            ("tolerances.energy_sum", t.energy_sum),
            ("tolerances.second_law", t.second_law),
        ] {
            if !(v >= 0.0) {
                return Err(field(name, format!("must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    fn qubit_start(&self) -> CliResult<QubitStart> {
        let InitialStateDoc::Qubit { bloch, bath } = &self.initial_state else {
            return Err(field("initial_state", format!("the {} model needs a `qubit` initial state", self.model.kind())));
        };
        if self.grid.t0 != 0.0 {
            return Err(field("grid.t0", "model scenarios start from a product state at tau = 0"));
        }
        for (i, v) in bloch.iter().enumerate() {
            finite(&format!("initial_state.qubit.bloch[{i}]"), *v)?;
        }
        let norm = bloch.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1.0 + 1e-12 {
            return Err(field("initial_state.qubit.bloch", format!("length must not exceed 1, got {norm}")));
        }
        Ok(QubitStart { bloch: *bloch, rho_s: pauli::bloch_state(*bloch), bath: bath.clone() })
    }

    /// Validates the document and builds the model.
    pub fn prepare(&self, max_dim: usize) -> CliResult<Prepared> {
        self.check_common()?;
        match &self.model {
            ModelDoc::Thermalizing(p) => {
                let density = match p.density {
                    DensityDoc::Ohmic { epsilon } => SpectralDensity::Ohmic { epsilon },
                    DensityDoc::Flat { value, lo, hi } => SpectralDensity::Flat { value, lo, hi },
                };
                let spec = JaynesCummingsSpec {
                    omega0: p.omega0,
                    lambda: p.lambda,
                    beta: p.beta,
                    modes: modes("model.parameters.modes", &p.modes)?,
                    n_max: p.n_max,
                    density,
                    excision_fraction: p.excision_fraction,
                    max_dim,
                };
                spec.validate().map_err(core("model.parameters"))?;
                if !p.beta.is_finite() {
                    return Err(field("model.parameters.beta", "must be finite"));
                }
                let start = self.qubit_start()?;
                match p.dynamics {
                    ThermalizingDynamics::Markovian => {
                        if start.bath != BathStateDoc::Thermal {
                            return Err(field(
                                "initial_state.qubit.bath",
                                "Markovian dynamics assume a thermal bath",
                            ));
                        }
                        Ok(Prepared::ThermalizingMarkovian { spec, start })
                    }
                    ThermalizingDynamics::Exact => {
                        let dim_b = spec.mode_space().map_err(core("model.parameters"))?.dim();
                        check_bath_state(&start.bath, dim_b)?;
                        Ok(Prepared::ThermalizingExact { spec, start })
                    }
                }
            }
            ModelDoc::Dephasing(p) => {
                let bath = match &p.bath {
                    DephasingBathDoc::Discrete { modes: m, n_max } => DephasingBath::Discrete {
                        modes: modes("model.parameters.bath.discrete.modes", m)?,
                        n_max: *n_max,
                    },
                    DephasingBathDoc::Ohmic { epsilon } => DephasingBath::OhmicContinuum { epsilon: *epsilon },
                };
                let spec = DephasingSpec { omega0: p.omega0, lambda: p.lambda, beta: p.beta, bath, max_dim };
                spec.validate().map_err(core("model.parameters"))?;
                if !p.beta.is_finite() {
                    return Err(field("model.parameters.beta", "must be finite"));
                }
                let start = self.qubit_start()?;
                let continuum = matches!(spec.bath, DephasingBath::OhmicContinuum { .. });
                let dynamics = p.dynamics.unwrap_or(if continuum {
                    DephasingDynamics::ClosedForm
                } else {
                    DephasingDynamics::Exact
                });
                match (dynamics, continuum) {
                    (DephasingDynamics::Exact, false) => {
                        let DephasingBath::Discrete { modes: m, n_max } = &spec.bath else { unreachable!() };
                        let dim_b = (n_max + 1)
                            .checked_pow(m.len() as u32)
                            .filter(|d| 2 * d <= max_dim)
                            .ok_or_else(|| field("model.parameters.bath.discrete", "joint dimension exceeds the cap"))?;
                        check_bath_state(&start.bath, dim_b)?;
                        Ok(Prepared::DephasingExact { spec, start })
                    }
                    (DephasingDynamics::ClosedForm, true) | (DephasingDynamics::Markovian, true) => {
                        if start.bath != BathStateDoc::Thermal {
                            return Err(field("initial_state.qubit.bath", "continuum dynamics assume a thermal bath"));
                        }
                        Ok(if dynamics == DephasingDynamics::Markovian {
                            Prepared::DephasingMarkovian { spec, start }
                        } else {
                            Prepared::DephasingClosedForm { spec, start }
                        })
                    }
                    (DephasingDynamics::Exact, true) => {
                        Err(field("model.parameters.dynamics", "`exact` needs a discrete bath"))
                    }
                    (_, false) => Err(field(
                        "model.parameters.dynamics",
                        "`closed-form` and `markovian` need an Ohmic continuum bath",
                    )),
                }
            }
            ModelDoc::CustomBipartite(p) => self.prepare_custom(p, max_dim),
        }
    }

    fn prepare_custom(&self, p: &CustomDoc, max_dim: usize) -> CliResult<Prepared> {
        if p.dim_s == 0 {
            return Err(field("model.parameters.dim_s", "must be at least 1"));
        }
        if p.dim_b == 0 {
            return Err(field("model.parameters.dim_b", "must be at least 1"));
        }
        let dim = p
            .dim_s
            .checked_mul(p.dim_b)
            .filter(|&d| d <= max_dim)
            .ok_or_else(|| field("model.parameters", format!("dim_s * dim_b exceeds the cap {max_dim}")))?;
        if let Some(t) = p.t_ref {
            if !(t > 0.0) || !t.is_finite() {
                return Err(field("model.parameters.t_ref", format!("must be positive and finite, got {t}")));
            }
        }
        let mut rng = seeded(self.seed);
        let mut operator = |path: &str, doc: &MatrixDoc, n: usize| -> CliResult<Matrix> {
            match doc {
                MatrixDoc::Explicit(rows) => matrix_from_rows(path, rows, n),
                MatrixDoc::Random { scale } => {
                    if !scale.is_finite() || *scale < 0.0 {
                        return Err(field(path, format!("scale must be finite and nonnegative, got {scale}")));
                    }
                    Ok(random_hermitian(&mut rng, n, *scale))
                }
                MatrixDoc::Zero => Ok(Matrix::zeros(n, n)),
            }
        };
        let h_s = operator("model.parameters.h_s", &p.h_s, p.dim_s)?;
        let h_b = operator("model.parameters.h_b", &p.h_b, p.dim_b)?;
        let h_int = operator("model.parameters.h_int", &p.h_int, dim)?;
        let system = BipartiteSystem::new(h_s, h_b, h_int).map_err(core("model.parameters"))?;
        let rho0 = match &self.initial_state {
            InitialStateDoc::RandomProduct => {
                let a = random_density(&mut rng, p.dim_s);
                let b = random_density(&mut rng, p.dim_b);
                a.kronecker(&b)
            }
            InitialStateDoc::RandomCorrelated => random_density(&mut rng, dim),
            InitialStateDoc::Explicit { rho } => density_from_rows("initial_state.explicit.rho", rho, dim)?,
            InitialStateDoc::Qubit { .. } => {
                return Err(field("initial_state", "custom models take `random-product`, `random-correlated` or `explicit`"))
            }
        };
        Ok(Prepared::Custom { system, rho0, t_ref: p.t_ref })
    }
}

fn check_bath_state(bath: &BathStateDoc, dim_b: usize) -> CliResult<()> {
    if let BathStateDoc::Explicit(rows) = bath {
        density_from_rows("initial_state.qubit.bath.explicit", rows, dim_b)?;
    }
    Ok(())
}
