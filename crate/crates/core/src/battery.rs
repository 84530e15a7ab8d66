//! Battery states on a harmonic ladder `H_B = omega sum_n n |n><n|`, shape profiles and resources.

use crate::error::{Error, Result};
use crate::gates::C64;
use crate::numerics::quad;
use crate::special;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Normalization tolerance on `sum |beta_n|^2`.
pub const NORM_TOL: f64 = 1e-12;
/// Largest tail weight a sampled profile may drop at the truncation.
pub const TAIL_TOL: f64 = 1e-12;

/// Pure battery state `sum_n beta_n |n>` truncated to levels `0..T`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryState {
    omega: f64,
    amps: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct BatteryStateRepr {
    omega: f64,
    amps_re: Vec<f64>,
    amps_im: Vec<f64>,
}

impl Serialize for BatteryState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BatteryStateRepr {
            omega: self.omega,
            amps_re: self.amps.iter().map(|a| a.re).collect(),
            amps_im: self.amps.iter().map(|a| a.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BatteryState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = BatteryStateRepr::deserialize(d)?;
        if r.amps_re.len() != r.amps_im.len() {
            return Err(serde::de::Error::custom("amps_re and amps_im differ in length"));
        }
        let amps = r.amps_re.iter().zip(&r.amps_im).map(|(&a, &b)| C64::new(a, b)).collect();
        BatteryState::new(r.omega, amps).map_err(serde::de::Error::custom)
    }
}

impl BatteryState {
    /// Validates `T >= 2`, `omega > 0` and normalization within [`NORM_TOL`].
    pub fn new(omega: f64, amps: Vec<C64>) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if amps.len() < 2 {
            return Err(Error::InvalidDimension(format!("battery truncation {} < 2", amps.len())));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { omega, amps })
    }

    /// Normalizes the amplitudes before validating.
    pub fn normalized(omega: f64, mut amps: Vec<C64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm * norm));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(omega, amps)
    }

    pub fn from_real(omega: f64, amps: &[f64]) -> Result<Self> {
        Self::normalized(omega, amps.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// Energy eigenstate `|n>` within truncation `t`.
    pub fn fock(omega: f64, n: usize, t: usize) -> Result<Self> {
        if n >= t {
            return Err(Error::InvalidParameter(format!("level {n} outside truncation {t}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); t];
        amps[n] = C64::new(1.0, 0.0);
        Self::new(omega, amps)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    /// Truncation `T`: amplitudes are stored for levels `0..T`.
    pub fn truncation(&self) -> usize {
        self.amps.len()
    }

    /// `beta_n`, zero outside the stored range.
    pub fn amp(&self, n: i64) -> C64 {
        if n < 0 {
            return C64::new(0.0, 0.0);
        }
        self.amps.get(n as usize).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Multiplies `beta_n` by `e^{i phases[n]}`.
    pub fn rephased(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.amps.len() {
            return Err(Error::InvalidDimension("one phase per level required".into()));
        }
        let amps = self.amps.iter().zip(phases).map(|(a, &p)| a * C64::from_polar(1.0, p)).collect();
        Self::new(self.omega, amps)
    }

    /// Zero-pads the state to a larger truncation.
    pub fn padded(&self, t: usize) -> Result<Self> {
        if t < self.amps.len() {
            return Err(Error::InvalidParameter(format!("cannot shrink truncation to {t}")));
        }
        let mut amps = self.amps.clone();
        amps.resize(t, C64::new(0.0, 0.0));
        Self::new(self.omega, amps)
    }

    /// Energy resources of the state.
    pub fn resources(&self) -> ResourceReport {
        resource_report(self)
    }
}

/// Energy resources of a battery state. Energies are absolute, in units where `hbar = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub omega: f64,
    pub mean_energy: f64,
    pub mean_sq_energy: f64,
    pub qfi: f64,
    /// One plus the highest occupied level.
    pub levels: usize,
    pub truncation: usize,
    /// `sum_n |beta_{n+1} - beta_n|^2` with `beta_T = 0`.
    pub discrete_ud: f64,
    pub ground_population: f64,
}

/// Computes mean energy, second moment, QFI `4 Var(E)`, support size and discrete UD.
pub fn resource_report(state: &BatteryState) -> ResourceReport {
    let w = state.omega;
    let amps = state.amps();
    let (mut m1, mut m2) = (0.0, 0.0);
    for (n, a) in amps.iter().enumerate() {
        let p = a.norm_sqr();
        let n = n as f64;
        m1 += n * p;
        m2 += n * n * p;
    }
    let levels = amps.iter().rposition(|a| a.norm_sqr() > 0.0).map_or(0, |i| i + 1);
    let mean_energy = w * m1;
    let mean_sq_energy = w * w * m2;
    ResourceReport {
        omega: w,
        mean_energy,
        mean_sq_energy,
        qfi: 4.0 * (w * w * (m2 - m1 * m1)).max(0.0),
        levels,
        truncation: amps.len(),
        discrete_ud: discrete_ud(state),
        ground_population: amps[0].norm_sqr(),
    }
}

/// `sum_{n=0}^{T-1} |beta_{n+1} - beta_n|^2` with the hard cap `beta_T = 0`.
pub fn discrete_ud(state: &BatteryState) -> f64 {
    let t = state.truncation() as i64;
    (0..t).map(|n| (state.amp(n + 1) - state.amp(n)).norm_sqr()).sum()
}

/// Uncertainty-of-displacement of a mixture, `sum_i p_i UD_i`.
pub fn average_ud(weights: &[f64], uds: &[f64]) -> Result<f64> {
    if weights.len() != uds.len() || weights.is_empty() {
        return Err(Error::BadWeights("one weight per component required".into()));
    }
    if weights.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::BadWeights("weights must be non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::BadWeights(format!("weights sum to {total}")));
    }
    Ok(weights.iter().zip(uds).map(|(p, u)| p * u).sum())
}

/// Coherent state with exact Poisson amplitudes `e^{-a^2/2} a^n / sqrt(n!)`, renormalized on `0..t`.
pub fn poisson_state(alpha: f64, omega: f64, t: usize) -> Result<BatteryState> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let la = alpha.ln();
    let mut ln_fact = 0.0;
    let mut amp = |n: usize| {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        (-0.5 * alpha * alpha + n as f64 * la - 0.5 * ln_fact).exp()
    };
    let amps: Vec<C64> = (0..t).map(|n| C64::new(amp(n), 0.0)).collect();
    // Summed directly; 1 - sum(kept) would be dominated by rounding.
    let mut tail = 0.0;
    for n in t.. {
        let p = amp(n).powi(2);
        tail += p;
        if n as f64 > alpha * alpha && p < 1e-20 * tail.max(1e-300) {
            break;
        }
    }
    if tail > TAIL_TOL {
        return Err(Error::TailTruncated(tail));
    }
    BatteryState::normalized(omega, amps)
}

/// Truncation that keeps a Poisson state's tail below [`TAIL_TOL`].
pub fn poisson_truncation(alpha: f64) -> usize {
    let a2 = alpha * alpha;
    (a2 + 10.0 * alpha + 30.0).ceil() as usize
}

type CustomFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Sine { width: f64 },
    Airy { scale: f64, shift: f64 },
    Hermite1 { scale: f64 },
    Gaussian { center: f64, width: f64 },
    Smoothed { center: f64, rate: f64 },
    Custom(CustomFn),
}

/// Real continuous shape `psi(x)` on `[0, inf)` with `int |psi|^2 = 1` and `psi(0) = 0` for built-in kinds
/// other than [`ShapeProfile::gaussian`].
#[derive(Clone)]
pub struct ShapeProfile {
    kind: Kind,
    tag: String,
    norm: f64,
    support_end: f64,
}

impl fmt::Debug for ShapeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShapeProfile").field("tag", &self.tag).field("support_end", &self.support_end).finish()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl ShapeProfile {
    fn build(kind: Kind, tag: &str, support_end: f64) -> Result<Self> {
        let mut p = Self { kind, tag: tag.to_string(), norm: 1.0, support_end };
        let mass = quad(|x| p.raw(x).0.powi(2), 0.0, support_end)?;
        positive("profile norm", mass)?;
        p.norm = 1.0 / mass.sqrt();
        Ok(p)
    }

    /// `sqrt(2/L) sin(pi x / L)` on `[0, L]`.
    pub fn sine(width: f64) -> Result<Self> {
        positive("width", width)?;
        Ok(Self { kind: Kind::Sine { width }, tag: "sine".into(), norm: (2.0 / width).sqrt(), support_end: width })
    }

    /// `Ai(k x - x0)` restricted to `x >= 0`; `x0` is the first Airy zero so `psi(0) = 0`.
    pub fn airy(scale: f64, first_zero: f64) -> Result<Self> {
        positive("scale", scale)?;
        Self::build(Kind::Airy { scale, shift: first_zero }, "airy", (first_zero + 12.0) / scale)
    }

    /// `psi_1(s x)`, the first Hermite function on the half line.
    pub fn hermite1(scale: f64) -> Result<Self> {
        positive("scale", scale)?;
        Self::build(Kind::Hermite1 { scale }, "hermite1", 9.5 / scale)
    }

    /// `exp(-(x - c)^2 / (4 w^2))`, so `|psi|^2` has standard deviation `w`.
    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        positive("width", width)?;
        if !(center.is_finite() && center >= 0.0) {
            return Err(Error::InvalidParameter(format!("center must be non-negative, got {center}")));
        }
        Self::build(Kind::Gaussian { center, width }, "gaussian", center + 9.0 * width)
    }

    /// `(1 - e^{-x^2}) exp(-r (x - c)^2)`: a Gaussian forced to vanish at the origin.
    pub fn smoothed_gaussian(center: f64, rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        positive("center", center)?;
        Self::build(Kind::Smoothed { center, rate }, "smoothed_gaussian", center + 6.5 / rate.sqrt())
    }

    /// User profile returning `(psi(x), psi'(x))`, normalized numerically on `[0, support_end]`.
    pub fn custom<F>(tag: &str, support_end: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        positive("support_end", support_end)?;
        Self::build(Kind::Custom(Arc::new(f)), tag, support_end)
    }

    pub(crate) fn with_tag(mut self, tag: &str) -> Self {
        self.tag = tag.to_string();
        self
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Point beyond which `|psi|^2` is below `1e-16` of its peak.
    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    /// True when the profile vanishes identically beyond [`Self::support_end`].
    pub fn compact(&self) -> bool {
        matches!(self.kind, Kind::Sine { .. })
    }

    fn raw(&self, x: f64) -> (f64, f64) {
        match &self.kind {
            Kind::Sine { width } => {
                if x < 0.0 || x >= width * (1.0 - 1e-14) {
                    return (0.0, 0.0);
                }
                let k = std::f64::consts::PI / width;
                ((k * x).sin(), k * (k * x).cos())
            }
            Kind::Airy { scale, shift } => {
                let (a, da) = special::airy(scale * x - shift);
                (a, scale * da)
            }
            Kind::Hermite1 { scale } => {
                (special::hermite_psi1(scale * x), scale * special::hermite_psi1_prime(scale * x))
            }
            Kind::Gaussian { center, width } => {
                let u = x - center;
                let c = 1.0 / (4.0 * width * width);
                let g = (-c * u * u).exp();
                (g, -2.0 * c * u * g)
            }
            Kind::Smoothed { center, rate } => {
                let u = x - center;
                let g = (-rate * u * u).exp();
                let e = (-x * x).exp();
                let s = 1.0 - e;
                (s * g, 2.0 * x * e * g - 2.0 * rate * u * s * g)
            }
            Kind::Custom(f) => f(x),
        }
    }

    /// `(psi(x), psi'(x))`, zero for `x < 0`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        if x < 0.0 {
            return (0.0, 0.0);
        }
        let (v, d) = self.raw(x);
        (self.norm * v, self.norm * d)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    /// `int_0^inf |psi'|^2 dx`.
    pub fn continuous_ud(&self) -> Result<f64> {
        quad(|x| self.eval(x).1.powi(2), 0.0, self.support_end)
    }

    /// `(int x |psi|^2, int x^2 |psi|^2)`.
    pub fn moments(&self) -> Result<(f64, f64)> {
        let m1 = quad(|x| x * self.value(x).powi(2), 0.0, self.support_end)?;
        let m2 = quad(|x| x * x * self.value(x).powi(2), 0.0, self.support_end)?;
        Ok((m1, m2))
    }

    /// Continuous QFI `4 omega^2 Var(x)` for a profile measured in level units.
    pub fn continuous_qfi(&self, omega: f64) -> Result<f64> {
        let (m1, m2) = self.moments()?;
        Ok(4.0 * omega * omega * (m2 - m1 * m1))
    }

    /// Weight of `|psi|^2` beyond `x`.
    pub fn tail_weight(&self, x: f64) -> Result<f64> {
        if x >= self.support_end {
            return Ok(0.0);
        }
        quad(|y| self.value(y).powi(2), x.max(0.0), self.support_end)
    }

    /// Smallest truncation for which sampling at `delta` keeps the whole support.
    pub fn truncation_for(&self, delta: f64) -> usize {
        if self.compact() {
            (self.support_end / delta * (1.0 - 1e-12)).ceil() as usize
        } else {
            (self.support_end / delta).ceil() as usize + 1
        }
    }
}

/// Continuous UD of a profile.
pub fn continuous_ud(profile: &ShapeProfile) -> Result<f64> {
    profile.continuous_ud()
}

/// Samples `beta_n = C_delta psi(n delta)` for `n < T` and renormalizes.
///
/// `truncation = None` picks [`ShapeProfile::truncation_for`]. A caller-given truncation
/// fails with [`Error::TailTruncated`] when it drops more than [`TAIL_TOL`] of the weight.
pub fn sample_ansatz(profile: &ShapeProfile, delta: f64, truncation: Option<usize>, omega: f64) -> Result<BatteryState> {
    positive("delta", delta)?;
    let t = truncation.unwrap_or_else(|| profile.truncation_for(delta));
    if t < 2 {
        return Err(Error::InvalidDimension(format!("truncation {t} < 2")));
    }
    let tail = profile.tail_weight(t as f64 * delta)?;
    if tail >= TAIL_TOL {
        return Err(Error::TailTruncated(tail));
    }
    let amps = (0..t).map(|n| C64::new(profile.value(n as f64 * delta), 0.0)).collect();
    BatteryState::normalized(omega, amps)
}
