//! Optimal battery profiles under energy-type budgets, the Airy constants behind them and the
//! resulting resource bounds.
//!
//! Profiles are expressed in level units: `x = n` for a state sampled at `delta = 1`.

use crate::battery::{BatteryState, ResourceReport, ShapeProfile};
use crate::error::{Error, Result};
use crate::numerics::{find_root, quad};
use crate::special::airy;
use crate::spectral::optimal_sine_state;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Upper limit of the Airy integrals in units of the shifted argument.
const AIRY_TAIL: f64 = 14.0;

/// Airy-ground-state constants of the mean-energy problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaperConstants {
    /// First zero of `Ai(-x)`.
    pub airy_root: f64,
    /// `[int_0^inf Ai(x - x0)^2 dx]^{-1}`.
    pub cbar: f64,
    /// `int_0^inf x Ai(x - x0)^2 dx`.
    pub c1: f64,
    /// `int_0^inf Ai'(x - x0)^2 dx`.
    pub c2: f64,
    pub eta: f64,
    pub eta_sq: f64,
    pub eta_prime: f64,
}

/// Values as quoted in the literature, to three or four digits.
pub const QUOTED_CONSTANTS: PaperConstants = PaperConstants {
    airy_root: 2.338,
    cbar: 2.033,
    c1: 0.766,
    c2: 0.383,
    eta: 1.374,
    eta_sq: 1.888,
    eta_prime: 1.557,
};

/// Computes the constants from scratch by root finding and adaptive quadrature.
pub fn compute_constants() -> Result<PaperConstants> {
    let x0 = find_root(|x| airy(-x).0, |x| -airy(-x).1, 2.0, 2.6, 1e-15)?;
    let upper = x0 + AIRY_TAIL;
    let norm = quad(|x| airy(x - x0).0.powi(2), 0.0, upper)?;
    let c1 = quad(|x| x * airy(x - x0).0.powi(2), 0.0, upper)?;
    let c2 = quad(|x| airy(x - x0).1.powi(2), 0.0, upper)?;
    let cbar = 1.0 / norm;
    let eta_sq = cbar.powi(3) * c1 * c1 * c2;
    Ok(PaperConstants { airy_root: x0, cbar, c1, c2, eta: eta_sq.sqrt(), eta_sq, eta_prime: cbar * c1 })
}

/// Memoized [`compute_constants`].
pub fn constants() -> Result<&'static PaperConstants> {
    static CELL: OnceLock<std::result::Result<PaperConstants, String>> = OnceLock::new();
    CELL.get_or_init(|| compute_constants().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::RootNotFound(format!("constants unavailable: {e}")))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// Mean-energy optimum `psi ∝ Ai(x omega eta' / <E> - x0)`.
pub fn airy_profile(mean_energy: f64, omega: f64) -> Result<ShapeProfile> {
    positive("mean energy", mean_energy)?;
    positive("omega", omega)?;
    let c = constants()?;
    ShapeProfile::airy(omega * c.eta_prime / mean_energy, c.airy_root)
}

/// Second-moment optimum `psi ∝ psi_1(x sqrt(3 omega^2 / (2 <E^2>)))`.
pub fn hermite1_profile(mean_sq_energy: f64, omega: f64) -> Result<ShapeProfile> {
    positive("mean squared energy", mean_sq_energy)?;
    positive("omega", omega)?;
    ShapeProfile::hermite1((1.5 * omega * omega / mean_sq_energy).sqrt())
}

/// QFI-budget profile `(1 - e^{-x^2}) exp(-(omega^2/F)(x - F/omega^2)^2)`, whose QFI tends to `F`.
pub fn qfi_profile(qfi: f64, omega: f64) -> Result<ShapeProfile> {
    positive("qfi", qfi)?;
    positive("omega", omega)?;
    let rate = omega * omega / qfi;
    Ok(ShapeProfile::smoothed_gaussian(1.0 / rate, rate)?.with_tag("qfi_gaussian"))
}

/// Large-amplitude coherent-state profile `exp(-(x - a^2)^2 / (4 a^2))`.
pub fn coherent_profile(alpha: f64) -> Result<ShapeProfile> {
    if !(alpha.is_finite() && alpha >= 3.0) {
        return Err(Error::InvalidParameter(format!("coherent profile needs alpha >= 3, got {alpha}; use exact Poisson amplitudes")));
    }
    Ok(ShapeProfile::gaussian(alpha * alpha, alpha)?.with_tag("coherent"))
}

/// Resource that a battery state is optimized against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    MeanEnergy,
    MeanSqEnergy,
    NLevels,
    Qfi,
}

/// Minimal UD reachable under a budget, to leading order.
pub fn predicted_ud(resource: Resource, budget: f64, omega: f64) -> Result<f64> {
    positive("budget", budget)?;
    positive("omega", omega)?;
    Ok(match resource {
        Resource::MeanEnergy => constants()?.eta_sq * omega * omega / (budget * budget),
        Resource::MeanSqEnergy => 2.25 * omega * omega / budget,
        Resource::NLevels => PI * PI / (budget * budget),
        Resource::Qfi => omega * omega / budget,
    })
}

/// Optimal battery state for a budget together with its resources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalState {
    pub resource: Resource,
    pub budget: f64,
    pub profile: String,
    pub predicted_ud: f64,
    pub resources: ResourceReport,
    pub state: BatteryState,
}

/// Samples the optimal profile for `resource` at one level per unit.
pub fn optimal_state(resource: Resource, budget: f64, omega: f64) -> Result<OptimalState> {
    let predicted = predicted_ud(resource, budget, omega)?;
    let (state, profile) = match resource {
        Resource::NLevels => {
            let n = budget.round();
            if (budget - n).abs() > 1e-9 || n < 2.0 {
                return Err(Error::InvalidParameter(format!("n_levels budget must be an integer >= 2, got {budget}")));
            }
            (optimal_sine_state(n as usize, omega)?, "sine".to_string())
        }
        _ => {
            let p = match resource {
                Resource::MeanEnergy => airy_profile(budget, omega)?,
                Resource::MeanSqEnergy => hermite1_profile(budget, omega)?,
                _ => qfi_profile(budget, omega)?,
            };
            (crate::battery::sample_ansatz(&p, 1.0, None, omega)?, p.tag().to_string())
        }
    };
    Ok(OptimalState { resource, budget, profile, predicted_ud: predicted, resources: state.resources(), state })
}

/// Minimal resources for a target Choi infidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceBounds {
    pub eps_c: f64,
    pub v01: f64,
    pub omega: f64,
    /// `eta omega |V_01| / sqrt(eps)`.
    pub mean_energy_min: f64,
    /// `(9/4) omega^2 |V_01|^2 / eps`.
    pub mean_sq_energy_min: f64,
    /// `pi |V_01| / sqrt(eps)`.
    pub levels_min: f64,
}

/// Leading-order resource requirements for reaching `eps_c` on a gate with off-diagonal modulus `v01`.
pub fn resource_bounds(eps_c: f64, v01: f64, omega: f64) -> Result<ResourceBounds> {
    if !(eps_c > 0.0 && eps_c <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps_c must lie in (0, 1], got {eps_c}")));
    }
    if !(0.0..=1.0 + 1e-12).contains(&v01) {
        return Err(Error::InvalidParameter(format!("|V_01| must lie in [0, 1], got {v01}")));
    }
    positive("omega", omega)?;
    let eta = constants()?.eta;
    let root = eps_c.sqrt();
    Ok(ResourceBounds {
        eps_c,
        v01,
        omega,
        mean_energy_min: eta * omega * v01 / root,
        mean_sq_energy_min: 2.25 * omega * omega * v01 * v01 / eps_c,
        levels_min: PI * v01 / root,
    })
}

/// Lower bounds on `eps_c / |V_01|^2` implied by each resource of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicError {
    /// `eta^2 omega^2 / <E>^2`.
    pub from_mean_energy: f64,
    /// `9 omega^2 / (4 <E^2>)`.
    pub from_mean_sq_energy: f64,
    /// `pi^2 / N^2`.
    pub from_levels: f64,
    pub floor: f64,
}

/// Intrinsic error floor of a battery state.
pub fn intrinsic_error(report: &ResourceReport) -> Result<IntrinsicError> {
    let eta_sq = constants()?.eta_sq;
    let w2 = report.omega * report.omega;
    let inv = |x: f64| if x > 0.0 { 1.0 / x } else { f64::INFINITY };
    let a = eta_sq * w2 * inv(report.mean_energy * report.mean_energy);
    let b = 2.25 * w2 * inv(report.mean_sq_energy);
    let c = PI * PI * inv((report.levels * report.levels) as f64);
    Ok(IntrinsicError { from_mean_energy: a, from_mean_sq_energy: b, from_levels: c, floor: a.max(b).max(c) })
}
