//! Batch front end. Every command reads one JSON config and writes JSON or CSV.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for numerical failures.

use crate::battery::{poisson_state, poisson_truncation, sample_ansatz, BatteryState, ResourceReport, ShapeProfile};
use crate::channel::{
    choi_infidelity_closed, choi_infidelity_exact, ground_state_penalty, kraus_set, sandwich_check, target_copy_unitary,
    worst_case_infidelity, KrausSet, WorstCaseOptions,
};
use crate::error::{Error, Result};
use crate::gates::{qudit_asymmetry, GateSpec, QuditGate};
use crate::qudit::{qudit_choi_infidelity_trace_formula, qudit_kraus_set, qudit_target_copy, scheme_two_compare, SchemeComparison};
use crate::spectral::{dst_forward, infidelity_spectral};
use crate::variational::{
    airy_profile, coherent_profile, constants, hermite1_profile, intrinsic_error, optimal_state, qfi_profile, IntrinsicError,
    OptimalState, PaperConstants, Resource, QUOTED_CONSTANTS,
};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

/// Unit convention attached to every report.
pub const UNITS: &str = "hbar = 1; energies are absolute in the unit of omega (omega = 1 gives units of omega)";

/// Default number of worst-case restarts.
pub const DEFAULT_RESTARTS: usize = 16;

/// Relative band within which leading-order resource bounds may be undercut.
pub const BOUND_BAND: f64 = 0.03;

/// Largest infidelity at which the leading-order bounds are certified.
pub const BOUND_REGIME: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(name = "battery-gates", version, about = "Battery-assisted gate infidelities, optimal states and resource bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized searches; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Exact, closed-form, spectral and worst-case infidelities for a gate and battery state.
    Infidelity,
    /// Optimal battery state for a resource budget.
    OptimalState {
        #[arg(long, value_enum)]
        resource: Option<ResourceArg>,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long)]
        omega: Option<f64>,
    },
    /// Parameter sweep written as one row per grid point.
    Sweep,
    /// Certifies the resources of an infidelity report against the minimal requirements.
    Bounds,
    /// Computed Airy constants next to the quoted values.
    Constants,
    /// Full-ladder versus extremal-level qudit schemes.
    QuditCompare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResourceArg {
    MeanEnergy,
    MeanSqEnergy,
    NLevels,
    Qfi,
}

impl From<ResourceArg> for Resource {
    fn from(r: ResourceArg) -> Self {
        match r {
            ResourceArg::MeanEnergy => Resource::MeanEnergy,
            ResourceArg::MeanSqEnergy => Resource::MeanSqEnergy,
            ResourceArg::NLevels => Resource::NLevels,
            ResourceArg::Qfi => Resource::Qfi,
        }
    }
}

/// Shape profile in level units, referenced by tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Sine {
        #[serde(default = "one")]
        width: f64,
    },
    /// Mean-energy optimum for a budget at unit sampling step.
    Airy { mean_energy: f64 },
    Hermite1 { mean_sq_energy: f64 },
    QfiGaussian { qfi: f64 },
    Coherent { alpha: f64 },
    Gaussian { center: f64, width: f64 },
}

fn one() -> f64 {
    1.0
}

impl ProfileSpec {
    pub fn build(&self, omega: f64) -> Result<ShapeProfile> {
        match *self {
            ProfileSpec::Sine { width } => ShapeProfile::sine(width),
            ProfileSpec::Airy { mean_energy } => airy_profile(mean_energy, omega),
            ProfileSpec::Hermite1 { mean_sq_energy } => hermite1_profile(mean_sq_energy, omega),
            ProfileSpec::QfiGaussian { qfi } => qfi_profile(qfi, omega),
            ProfileSpec::Coherent { alpha } => coherent_profile(alpha),
            ProfileSpec::Gaussian { center, width } => ShapeProfile::gaussian(center, width),
        }
    }
}

/// Battery state description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BatterySpec {
    /// `beta_n ∝ psi(n delta)`.
    Profile { profile: ProfileSpec, delta: f64, truncation: Option<usize> },
    /// Lowest sine mode on `n_levels` levels.
    Sine { n_levels: usize },
    /// Exact coherent state.
    Poisson { alpha: f64, truncation: Option<usize> },
    /// Explicit amplitudes, normalized on load.
    Amplitudes { re: Vec<f64>, im: Option<Vec<f64>> },
    /// Optimal state for a resource budget.
    Optimal { resource: Resource, budget: f64 },
}

impl BatterySpec {
    pub fn build(&self, omega: f64) -> Result<BatteryState> {
        let state = match self {
            BatterySpec::Profile { profile, delta, truncation } => sample_ansatz(&profile.build(omega)?, *delta, *truncation, omega)?,
            BatterySpec::Sine { n_levels } => crate::spectral::optimal_sine_state(*n_levels, omega)?,
            BatterySpec::Poisson { alpha, truncation } => {
                poisson_state(*alpha, omega, truncation.unwrap_or_else(|| poisson_truncation(*alpha)))?
            }
            BatterySpec::Amplitudes { re, im } => {
                let im = im.clone().unwrap_or_else(|| vec![0.0; re.len()]);
                if im.len() != re.len() {
                    return Err(Error::Config("amplitude re and im lengths differ".into()));
                }
                BatteryState::normalized(omega, re.iter().zip(&im).map(|(&a, &b)| crate::gates::C64::new(a, b)).collect())?
            }
            BatterySpec::Optimal { resource, budget } => optimal_state(*resource, *budget, omega)?.state,
        };
        // Every block needs an input level above the ground state.
        if state.truncation() < 2 {
            return state.padded(2);
        }
        Ok(state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorstCaseSpec {
    pub restarts: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfidelityConfig {
    pub gate: GateSpec,
    pub battery: BatterySpec,
    #[serde(default = "one")]
    pub omega: f64,
    pub worst_case: Option<WorstCaseSpec>,
}

/// Spectral value with the boundary gap `(s^2/4)(|beta_1|^2 + |beta_{N-1}|^2)` separating it from the exact one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBand {
    pub n_levels: usize,
    pub eps_c_spectral: f64,
    pub expected_gap: f64,
    pub observed_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyCheck {
    pub eta: f64,
    pub ground_population: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Output of `infidelity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfidelityReport {
    pub units: String,
    pub omega: f64,
    pub gate: GateSpec,
    pub dim: usize,
    /// `|V_01|^2` for qubits, the asymmetry weight `A[V]` for qudits.
    pub v01_sq: f64,
    pub eps_c_exact: f64,
    /// Second evaluator: closed form for qubits, trace formula for qudits.
    pub eps_c_closed: f64,
    pub eps_c_spectral: Option<SpectralBand>,
    /// Leading order `v01_sq * discrete_ud`.
    pub eps_c_asymptotic: f64,
    pub eps_wc_lb: Option<f64>,
    pub sandwich_ok: Option<bool>,
    pub ground_penalty: Option<PenaltyCheck>,
    pub intrinsic_error: IntrinsicError,
    pub resources: ResourceReport,
}

fn kraus_for(gate: &QuditGate, state: &BatteryState) -> Result<KrausSet> {
    match gate.as_qubit() {
        Some(q) => kraus_set(&target_copy_unitary(&q, state.truncation())?, state),
        None => {
            let state = state.padded(state.truncation().max(gate.dim()))?;
            qudit_kraus_set(&qudit_target_copy(gate, state.truncation())?, &state)
        }
    }
}

/// Evaluates every infidelity of a config.
pub fn infidelity_report(cfg: &InfidelityConfig, seed: Option<u64>) -> Result<InfidelityReport> {
    let state = cfg.battery.build(cfg.omega)?;
    evaluate_state(&cfg.gate, &state, cfg.worst_case, seed)
}

/// Evaluates every infidelity of a gate and a battery state.
///
/// `worst_case = None` runs [`DEFAULT_RESTARTS`] restarts; zero restarts skip the search.
pub fn evaluate_state(spec: &GateSpec, state: &BatteryState, worst_case: Option<WorstCaseSpec>, seed: Option<u64>) -> Result<InfidelityReport> {
    let gate = spec.to_qudit()?;
    let kraus = kraus_for(&gate, state)?;
    let eps_exact = choi_infidelity_exact(&kraus, gate.matrix())?;
    let weight = qudit_asymmetry(&gate);
    let resources = state.resources();
    let (eps_closed, spectral, penalty) = match gate.as_qubit() {
        Some(q) => {
            let closed = choi_infidelity_closed(state, &q);
            let s = q.v01_sq();
            let t = state.truncation();
            let spectral = match dst_forward(state, t) {
                Ok(c) => {
                    let v = infidelity_spectral(&c, &q);
                    let edges = state.amp(1).norm_sqr() + state.amp(t as i64 - 1).norm_sqr();
                    Some(SpectralBand { n_levels: t, eps_c_spectral: v, expected_gap: 0.25 * s * s * edges, observed_gap: v - closed })
                }
                Err(Error::SupportViolation(_)) => None,
                Err(e) => return Err(e),
            };
            let p = ground_state_penalty(&q);
            let pop = resources.ground_population;
            let bound = p.eta * pop;
            let penalty = PenaltyCheck { eta: p.eta, ground_population: pop, bound, satisfied: eps_exact >= bound - 1e-12 };
            (closed, spectral, Some(penalty))
        }
        None => {
            let padded = state.padded(state.truncation().max(gate.dim()))?;
            (qudit_choi_infidelity_trace_formula(&padded, &gate), None, None)
        }
    };
    let wc = worst_case.unwrap_or(WorstCaseSpec { restarts: DEFAULT_RESTARTS, seed: None });
    let (eps_wc, sandwich) = if wc.restarts == 0 {
        (None, None)
    } else {
        let opts = WorstCaseOptions { restarts: wc.restarts, seed: seed.or(wc.seed).unwrap_or(0), ..Default::default() };
        let est = worst_case_infidelity(&kraus, gate.matrix(), opts)?;
        (Some(est.value), Some(sandwich_check(est.value, eps_exact, gate.dim())))
    };
    Ok(InfidelityReport {
        units: UNITS.into(),
        omega: state.omega(),
        gate: spec.clone(),
        dim: gate.dim(),
        v01_sq: weight,
        eps_c_exact: eps_exact,
        eps_c_closed: eps_closed,
        eps_c_spectral: spectral,
        eps_c_asymptotic: weight * resources.discrete_ud,
        eps_wc_lb: eps_wc,
        sandwich_ok: sandwich,
        ground_penalty: penalty,
        intrinsic_error: intrinsic_error(&resources)?,
        resources,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimalStateConfig {
    pub resource: Resource,
    pub budget: f64,
    #[serde(default = "one")]
    pub omega: f64,
}

/// One resource checked against its minimal requirement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub resource: Resource,
    pub requirement: f64,
    pub actual: f64,
    pub slack: f64,
    pub relative_slack: f64,
    pub violated: bool,
}

/// Output of `bounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub units: String,
    pub eps_c: f64,
    pub v01: f64,
    pub omega: f64,
    /// Leading-order bounds are only certified at `eps_c <= regime`.
    pub regime: f64,
    pub in_regime: bool,
    /// Relative undercut tolerated from higher-order terms.
    pub band: f64,
    pub checks: Vec<BoundCheck>,
    pub any_violated: bool,
}

/// Compares each resource of a report with the minimum needed for its infidelity.
pub fn certify_bounds(report: &InfidelityReport) -> Result<BoundsReport> {
    let eps = report.eps_c_exact;
    let v01 = report.v01_sq.sqrt();
    let w = report.omega;
    let eta = constants()?.eta;
    let need = |scale: f64, power: f64| {
        if v01 == 0.0 {
            0.0
        } else if eps <= 0.0 {
            f64::INFINITY
        } else {
            scale * (v01 / eps.sqrt()).powf(power)
        }
    };
    let r = &report.resources;
    let in_regime = eps <= BOUND_REGIME;
    let rows = [
        (Resource::MeanEnergy, need(eta * w, 1.0), r.mean_energy),
        (Resource::MeanSqEnergy, need(2.25 * w * w, 2.0), r.mean_sq_energy),
        (Resource::NLevels, need(std::f64::consts::PI, 1.0), r.levels as f64),
    ];
    let checks: Vec<BoundCheck> = rows
        .iter()
        .map(|&(resource, requirement, actual)| {
            let slack = actual - requirement;
            let relative_slack = if requirement > 0.0 { slack / requirement } else { f64::INFINITY };
            BoundCheck { resource, requirement, actual, slack, relative_slack, violated: in_regime && relative_slack < -BOUND_BAND }
        })
        .collect();
    let any_violated = checks.iter().any(|c| c.violated);
    Ok(BoundsReport { units: UNITS.into(), eps_c: eps, v01, omega: w, regime: BOUND_REGIME, in_regime, band: BOUND_BAND, checks, any_violated })
}

/// One computed constant next to its quoted value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub name: String,
    pub computed: f64,
    pub quoted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub computed: PaperConstants,
    pub quoted: PaperConstants,
    pub rows: Vec<ConstantRow>,
}

pub fn constants_report() -> Result<ConstantsReport> {
    let c = *constants()?;
    let q = QUOTED_CONSTANTS;
    let pairs = [
        ("airy_root", c.airy_root, q.airy_root),
        ("cbar", c.cbar, q.cbar),
        ("c1", c.c1, q.c1),
        ("c2", c.c2, q.c2),
        ("eta", c.eta, q.eta),
        ("eta_sq", c.eta_sq, q.eta_sq),
        ("eta_prime", c.eta_prime, q.eta_prime),
    ];
    let rows = pairs.iter().map(|&(n, a, b)| ConstantRow { name: n.into(), computed: a, quoted: b }).collect();
    Ok(ConstantsReport { computed: c, quoted: q, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuditCompareConfig {
    /// Qudit gate; a 2 x 2 gate together with `d` is embedded on the extremal levels.
    pub gate: GateSpec,
    pub d: Option<usize>,
    pub profile: ProfileSpec,
    pub delta: f64,
    #[serde(default = "one")]
    pub omega: f64,
}

pub fn qudit_compare(cfg: &QuditCompareConfig) -> Result<SchemeComparison> {
    let g = cfg.gate.to_qudit()?;
    let gate = match (g.as_qubit(), cfg.d) {
        (Some(q), Some(d)) => QuditGate::embed_extremal(&q, d)?,
        (_, Some(d)) if d != g.dim() => return Err(Error::Config(format!("d = {d} but the gate has dimension {}", g.dim()))),
        _ => g,
    };
    scheme_two_compare(&gate, &cfg.profile.build(cfg.omega)?, cfg.delta, cfg.omega)
}

/// Swept quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Sampling step of `profile`.
    Delta,
    /// Lowest sine mode on `N` levels.
    NLevels,
    /// Exact coherent state amplitude.
    Alpha,
    /// Airy-optimal state for the budget.
    MeanEnergy,
    /// QFI-optimal state for the budget.
    Qfi,
}

impl SweepVariable {
    fn header(self) -> &'static str {
        match self {
            SweepVariable::Delta => "delta[1]",
            SweepVariable::NLevels => "n_levels[1]",
            SweepVariable::Alpha => "alpha[1]",
            SweepVariable::MeanEnergy => "budget_mean_energy[omega]",
            SweepVariable::Qfi => "budget_qfi[omega^2]",
        }
    }
}

/// Column vocabulary of `sweep`. Energies are reported in units of omega.
pub const SWEEP_COLUMNS: &[(&str, &str)] = &[
    ("param", "swept value"),
    ("truncation", "[1]"),
    ("levels", "[1]"),
    ("mean_energy", "[omega]"),
    ("mean_sq_energy", "[omega^2]"),
    ("qfi", "[omega^2]"),
    ("discrete_ud", "[1]"),
    ("eps_c_exact", "[1]"),
    ("eps_c_closed", "[1]"),
    ("eps_c_spectral", "[1]"),
    ("eps_c_asymptotic", "[1]"),
    ("eps_wc_lb", "[1]"),
    ("eps_over_delta2", "[1]"),
    ("eps_times_n2", "[1]"),
    ("eps_times_e", "[1]"),
    ("eps_times_e2", "[1]"),
    ("eps_times_esq", "[1]"),
    ("eps_times_qfi", "[1]"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub gate: GateSpec,
    /// Required for `delta` sweeps.
    pub profile: Option<ProfileSpec>,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub omega: f64,
    /// Worst-case restarts for the `eps_wc_lb` column.
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(usize),
    Missing,
}

/// Rows of a sweep with their headers.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("grid contains a non-finite value".into()));
        }
        let up = self.grid.windows(2).all(|w| w[1] > w[0]);
        let down = self.grid.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::Config("grid must be strictly monotone".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::Config("no output columns requested".into()));
        }
        for c in &self.outputs {
            if !SWEEP_COLUMNS.iter().any(|(n, _)| n == c) {
                return Err(Error::Config(format!("unknown column {c:?}")));
            }
        }
        if self.variable == SweepVariable::Delta && self.profile.is_none() {
            return Err(Error::Config("delta sweeps need a profile".into()));
        }
        if self.variable == SweepVariable::NLevels && self.grid.iter().any(|v| v.fract() != 0.0 || *v < 2.0) {
            return Err(Error::Config("n_levels grid must hold integers >= 2".into()));
        }
        Ok(())
    }
}

/// Evaluates a sweep; grid points run in parallel and rows keep grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    spec.gate.to_qudit()?;
    let profile = spec.profile.as_ref().map(|p| p.build(spec.omega)).transpose()?;
    let need_wc = spec.outputs.iter().any(|c| c == "eps_wc_lb");
    let rows = spec
        .grid
        .par_iter()
        .map(|&x| sweep_row(spec, profile.as_ref(), x, need_wc))
        .collect::<Result<Vec<_>>>()?;
    let headers = spec
        .outputs
        .iter()
        .map(|c| {
            if c == "param" {
                spec.variable.header().to_string()
            } else {
                let unit = SWEEP_COLUMNS.iter().find(|(n, _)| n == c).map(|(_, u)| *u).unwrap_or("");
                format!("{c}{unit}")
            }
        })
        .collect();
    Ok(SweepTable { columns: spec.outputs.clone(), headers, rows })
}

fn sweep_row(spec: &SweepSpec, profile: Option<&ShapeProfile>, x: f64, need_wc: bool) -> Result<Vec<Cell>> {
    let w = spec.omega;
    let (state, delta) = match spec.variable {
        SweepVariable::Delta => (sample_ansatz(profile.expect("validated"), x, None, w)?, x),
        SweepVariable::NLevels => (crate::spectral::optimal_sine_state(x as usize, w)?, 1.0 / x),
        SweepVariable::Alpha => (poisson_state(x, w, poisson_truncation(x))?, 1.0),
        SweepVariable::MeanEnergy => (optimal_state(Resource::MeanEnergy, x, w)?.state, 1.0),
        SweepVariable::Qfi => (optimal_state(Resource::Qfi, x, w)?.state, 1.0),
    };
    let restarts = if need_wc { spec.restarts.unwrap_or(DEFAULT_RESTARTS) } else { 0 };
    let report = evaluate_state(&spec.gate, &state, Some(WorstCaseSpec { restarts, seed: Some(spec.seed) }), None)?;
    let r = &report.resources;
    let eps = report.eps_c_exact;
    let cells = spec
        .outputs
        .iter()
        .map(|c| match c.as_str() {
            "param" => {
                if spec.variable == SweepVariable::NLevels {
                    Cell::Int(x as usize)
                } else {
                    Cell::Real(x)
                }
            }
            "truncation" => Cell::Int(r.truncation),
            "levels" => Cell::Int(r.levels),
            "mean_energy" => Cell::Real(r.mean_energy / w),
            "mean_sq_energy" => Cell::Real(r.mean_sq_energy / (w * w)),
            "qfi" => Cell::Real(r.qfi / (w * w)),
            "discrete_ud" => Cell::Real(r.discrete_ud),
            "eps_c_exact" => Cell::Real(eps),
            "eps_c_closed" => Cell::Real(report.eps_c_closed),
            "eps_c_spectral" => report.eps_c_spectral.map_or(Cell::Missing, |b| Cell::Real(b.eps_c_spectral)),
            "eps_c_asymptotic" => Cell::Real(report.eps_c_asymptotic),
            "eps_wc_lb" => report.eps_wc_lb.map_or(Cell::Missing, Cell::Real),
            "eps_over_delta2" => Cell::Real(eps / (delta * delta)),
            "eps_times_n2" => Cell::Real(eps * (r.levels * r.levels) as f64),
            "eps_times_e" => Cell::Real(eps * r.mean_energy / w),
            "eps_times_e2" => Cell::Real(eps * (r.mean_energy / w).powi(2)),
            "eps_times_esq" => Cell::Real(eps * r.mean_sq_energy / (w * w)),
            "eps_times_qfi" => Cell::Real(eps * r.qfi / (w * w)),
            _ => Cell::Missing,
        })
        .collect();
    Ok(cells)
}

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv_bytes(headers: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(headers).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))
}

impl SweepTable {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| match c {
                        Cell::Real(x) => fmt_real(*x),
                        Cell::Int(n) => n.to_string(),
                        Cell::Missing => String::new(),
                    })
                    .collect()
            })
            .collect();
        csv_bytes(&self.headers, &rows)
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(r) {
                    let v = match v {
                        Cell::Real(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
                        Cell::Int(n) => Value::from(*n),
                        Cell::Missing => Value::Null,
                    };
                    m.insert(c.clone(), v);
                }
                Value::Object(m)
            })
            .collect();
        serde_json::json!({ "units": UNITS, "headers": self.headers, "rows": Value::Array(rows) })
    }
}

/// Flattens scalar leaves of a JSON document into dotted names; arrays are skipped.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                flatten(&key(k), x, out);
            }
        }
        Value::Array(_) => {}
        Value::Number(n) => {
            let s = if n.is_f64() { fmt_real(n.as_f64().unwrap_or(f64::NAN)) } else { n.to_string() };
            out.push((prefix.to_string(), s));
        }
        Value::Bool(b) => out.push((prefix.to_string(), b.to_string())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
    }
}

/// Single-row CSV of every scalar field.
pub fn record_csv(v: &Value) -> Result<Vec<u8>> {
    let mut fields = Vec::new();
    flatten("", v, &mut fields);
    let (h, r): (Vec<String>, Vec<String>) = fields.into_iter().unzip();
    csv_bytes(&h, &[r])
}

fn optimal_state_csv(o: &OptimalState) -> Result<Vec<u8>> {
    let headers = ["n".to_string(), "energy[omega]".into(), "amp_re".into(), "amp_im".into()];
    let rows: Vec<Vec<String>> = o
        .state
        .amps()
        .iter()
        .enumerate()
        .map(|(n, a)| vec![n.to_string(), n.to_string(), fmt_real(a.re), fmt_real(a.im)])
        .collect();
    csv_bytes(&headers, &rows)
}

fn constants_csv(c: &ConstantsReport) -> Result<Vec<u8>> {
    let headers = ["name".to_string(), "computed".into(), "quoted".into()];
    let rows: Vec<Vec<String>> = c.rows.iter().map(|r| vec![r.name.clone(), fmt_real(r.computed), fmt_real(r.quoted)]).collect();
    csv_bytes(&headers, &rows)
}

fn bounds_csv(b: &BoundsReport) -> Result<Vec<u8>> {
    let headers: Vec<String> =
        ["resource", "requirement", "actual", "slack", "relative_slack", "violated", "eps_c", "in_regime"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = b
        .checks
        .iter()
        .map(|c| {
            let name = serde_json::to_value(c.resource).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            vec![
                name,
                fmt_real(c.requirement),
                fmt_real(c.actual),
                fmt_real(c.slack),
                fmt_real(c.relative_slack),
                c.violated.to_string(),
                fmt_real(b.eps_c),
                b.in_regime.to_string(),
            ]
        })
        .collect();
    csv_bytes(&headers, &rows)
}

fn read_config<T: for<'de> Deserialize<'de>>(path: Option<&Path>) -> Result<T> {
    let path = path.ok_or_else(|| Error::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v).map_err(|e| Error::Config(format!("json: {e}")))?;
    b.push(b'\n');
    Ok(b)
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Config(format!("json: {e}")))
}

/// Runs a command and returns the bytes to write.
pub fn execute(cli: &Cli) -> Result<Vec<u8>> {
    let cfg_path = cli.config.as_deref();
    match &cli.command {
        Command::Infidelity => {
            let cfg: InfidelityConfig = read_config(cfg_path)?;
            let r = infidelity_report(&cfg, cli.seed)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&r),
                Format::Csv => record_csv(&to_value(&r)?),
            }
        }
        Command::OptimalState { resource, budget, omega } => {
            let cfg = match (resource, budget) {
                (Some(r), Some(b)) if cfg_path.is_none() => OptimalStateConfig { resource: (*r).into(), budget: *b, omega: omega.unwrap_or(1.0) },
                _ => {
                    let mut c: OptimalStateConfig = read_config(cfg_path)?;
                    if let Some(r) = resource {
                        c.resource = (*r).into();
                    }
                    if let Some(b) = budget {
                        c.budget = *b;
                    }
                    if let Some(w) = omega {
                        c.omega = *w;
                    }
                    c
                }
            };
            let o = optimal_state(cfg.resource, cfg.budget, cfg.omega)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&o),
                Format::Csv => optimal_state_csv(&o),
            }
        }
        Command::Sweep => {
            let mut spec: SweepSpec = read_config(cfg_path)?;
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            let t = run_sweep(&spec)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Json => json_bytes(&t.to_json()),
                Format::Csv => t.to_csv(),
            }
        }
        Command::Bounds => {
            let report: InfidelityReport = read_config(cfg_path)?;
            let b = certify_bounds(&report)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&b),
                Format::Csv => bounds_csv(&b),
            }
        }
        Command::Constants => {
            let c = constants_report()?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&c),
                Format::Csv => constants_csv(&c),
            }
        }
        Command::QuditCompare => {
            let cfg: QuditCompareConfig = read_config(cfg_path)?;
            let c = qudit_compare(&cfg)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => json_bytes(&c),
                Format::Csv => record_csv(&to_value(&c)?),
            }
        }
    }
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_config() {
        2
    } else {
        3
    }
}

/// Runs the command, writes its output and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = execute(cli).and_then(|bytes| match &cli.out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Error::Config(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(Error::from)
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
