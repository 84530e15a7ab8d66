//! Energy-preserving system–battery interactions, their Kraus operators and gate infidelities.
//!
//! The interaction is block diagonal in the total energy. Block `n >= 1` acts on
//! `{|n>_B |0>_S, |n-1>_B |1>_S}` as `U^(n)_ij |n-i><n-j| (x) |i><j|`, and the ground
//! state `|0>_B |0>_S` is left untouched.

use crate::battery::BatteryState;
use crate::error::{Error, Result};
use crate::gates::{unitarity_deviation, CMatrix, QubitGate, C64, UNITARITY_TOL};
use nalgebra::{DMatrix, Matrix2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Energy-preserving interaction truncated to blocks `1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockUnitary {
    blocks: Vec<Matrix2<C64>>,
}

/// Phases `(alpha, gamma, delta)` of one uniform-angle block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockPhases {
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl BlockUnitary {
    /// `blocks[n - 1]` is `U^(n)`. Every block must be unitary.
    pub fn from_blocks(blocks: Vec<Matrix2<C64>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidDimension("at least one block is required".into()));
        }
        for b in &blocks {
            let dev = unitarity_deviation(&CMatrix::from_iterator(2, 2, b.iter().copied()));
            if !dev.is_finite() || dev > UNITARITY_TOL {
                return Err(Error::NonUnitary(dev));
            }
        }
        Ok(Self { blocks })
    }

    /// Number of nontrivial blocks `T`.
    pub fn truncation(&self) -> usize {
        self.blocks.len()
    }

    /// `U^(n)` for `1 <= n <= T`.
    pub fn block(&self, n: usize) -> Option<&Matrix2<C64>> {
        n.checked_sub(1).and_then(|i| self.blocks.get(i))
    }

    pub fn blocks(&self) -> &[Matrix2<C64>] {
        &self.blocks
    }

    /// Interaction that maps `beta_n -> e^{i phi_n} beta_n` into the same channel.
    ///
    /// Each block is conjugated by the battery phases it touches, so
    /// `U'^(n)_ij = U^(n)_ij e^{i(phi_{n-i} - phi_{n-j})}` and the Kraus operators only
    /// pick up the output phase `e^{i phi_n}`.
    pub fn absorb_battery_phases(&self, phases: &[f64]) -> Result<Self> {
        let t = self.blocks.len();
        if phases.len() < t + 1 {
            return Err(Error::InvalidDimension(format!("need {} phases, got {}", t + 1, phases.len())));
        }
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                let n = k + 1;
                Matrix2::from_fn(|i, j| b[(i, j)] * C64::from_polar(1.0, phases[n - i] - phases[n - j]))
            })
            .collect();
        Ok(Self { blocks })
    }
}

/// Copies the target gate into every block.
pub fn target_copy_unitary(gate: &QubitGate, truncation: usize) -> Result<BlockUnitary> {
    if truncation < 1 {
        return Err(Error::InvalidDimension("truncation must be at least 1".into()));
    }
    Ok(BlockUnitary { blocks: vec![*gate.matrix(); truncation] })
}

/// Blocks `e^{i a}[[cos t, sin t e^{i g}], [sin t e^{i(d - g)}, -cos t e^{i d}]]` with a common angle `t`.
pub fn uniform_angle_unitary(theta_bar: f64, phases: &[BlockPhases]) -> Result<BlockUnitary> {
    if phases.is_empty() {
        return Err(Error::InvalidDimension("at least one block is required".into()));
    }
    let (s, c) = theta_bar.sin_cos();
    let blocks = phases
        .iter()
        .map(|p| {
            let g = C64::from_polar(1.0, p.alpha);
            Matrix2::new(
                g * c,
                g * C64::from_polar(s, p.gamma),
                g * C64::from_polar(s, p.delta - p.gamma),
                -g * C64::from_polar(c, p.delta),
            )
        })
        .collect();
    Ok(BlockUnitary { blocks })
}

/// Kraus operators `K_k` of a channel on a `d`-dimensional system.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    dim: usize,
    ops: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let dim = ops.first().map(|k| k.nrows()).ok_or_else(|| Error::InvalidDimension("empty Kraus set".into()))?;
        if ops.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(Error::InvalidDimension("Kraus operators must share one square shape".into()));
        }
        Ok(Self { dim, ops })
    }

    /// Replacement channel `rho -> sigma Tr[rho]` for `sigma = I/d`.
    pub fn maximally_mixing(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(format!("d = {dim}")));
        }
        let s = (1.0 / dim as f64).sqrt();
        let mut ops = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut k = CMatrix::zeros(dim, dim);
                k[(i, j)] = C64::new(s, 0.0);
                ops.push(k);
            }
        }
        Self::new(ops)
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, ops: vec![CMatrix::identity(dim, dim)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    /// Largest entry of `|sum K^dagger K - I|`.
    pub fn completeness_error(&self) -> f64 {
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for k in &self.ops {
            acc += k.adjoint() * k;
        }
        for i in 0..self.dim {
            acc[(i, i)] -= C64::new(1.0, 0.0);
        }
        acc.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Applies the channel to a density matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for k in &self.ops {
            out += k * rho * k.adjoint();
        }
        out
    }
}

/// Kraus operators `K^(n) = <n|_B U |beta>_B` for output levels `n = 0..=T`.
///
/// `K^(n)_ij = beta_{n+i-j} U^(n+i)_ij`, with the ground block contributing only `K^(0)_00 = beta_0`.
pub fn kraus_set(unitary: &BlockUnitary, state: &BatteryState) -> Result<KrausSet> {
    let t = unitary.truncation();
    if state.truncation() > t {
        return Err(Error::TruncationMismatch { state: state.truncation(), unitary: t });
    }
    let mut ops = Vec::with_capacity(t + 1);
    for n in 0..=t {
        let mut k = CMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                let shell = n + i;
                let beta = state.amp(n as i64 + i as i64 - j as i64);
                if beta == ZERO {
                    continue;
                }
                let u = if shell == 0 {
                    C64::new(1.0, 0.0)
                } else {
                    match unitary.block(shell) {
                        Some(b) => b[(i, j)],
                        None => continue,
                    }
                };
                k[(i, j)] = beta * u;
            }
        }
        ops.push(k);
    }
    KrausSet::new(ops)
}

/// `1 - (1/d^2) sum_k |Tr[V^dagger K_k]|^2`.
pub fn choi_infidelity_exact(kraus: &KrausSet, target: &CMatrix) -> Result<f64> {
    let d = kraus.dim();
    if target.nrows() != d || target.ncols() != d {
        return Err(Error::InvalidDimension(format!("gate is {}x{}, channel acts on d = {d}", target.nrows(), target.ncols())));
    }
    let vd = target.adjoint();
    let total: f64 = kraus.ops().iter().map(|k| (&vd * k).trace().norm_sqr()).sum();
    Ok((1.0 - total / (d * d) as f64).max(0.0))
}

/// Per-operator contributions `(1/d)(Tr[K^dagger K] - |Tr[V^dagger K]|^2 / d)`; they sum to the Choi infidelity.
pub fn infidelity_contributions(kraus: &KrausSet, target: &CMatrix) -> Vec<f64> {
    let d = kraus.dim() as f64;
    let vd = target.adjoint();
    kraus
        .ops()
        .iter()
        .map(|k| ((k.adjoint() * k).trace().re - (&vd * k).trace().norm_sqr() / d) / d)
        .collect()
}

/// Choi infidelity of the target-copy interaction through its Kraus operators.
pub fn target_copy_infidelity(state: &BatteryState, gate: &QubitGate) -> Result<f64> {
    let u = target_copy_unitary(gate, state.truncation())?;
    choi_infidelity_exact(&kraus_set(&u, state)?, &gate.dmatrix())
}

/// Closed-form Choi infidelity of the target-copy interaction.
///
/// `s sum_{n>=1} [|b_{n+1} - b_n|^2 - (s/4)|b_{n+1} + b_{n-1} - 2 b_n|^2] + Delta(b_0, b_1, V)` with `s = |V_01|^2`.
pub fn choi_infidelity_closed(state: &BatteryState, gate: &QubitGate) -> f64 {
    let s = gate.v01_sq();
    let b = |n: i64| state.amp(n);
    let t = state.truncation() as i64;
    let mut bulk = 0.0;
    for n in 1..=t {
        let first = (b(n + 1) - b(n)).norm_sqr();
        let second = (b(n + 1) + b(n - 1) - b(n) * 2.0).norm_sqr();
        bulk += first - 0.25 * s * second;
    }
    s * bulk + boundary_term(b(0), b(1), gate)
}

/// Ground-level correction `Delta(b_0, b_1, V)` of the closed form.
pub fn boundary_term(b0: C64, b1: C64, gate: &QubitGate) -> f64 {
    let v = gate.matrix();
    let s = gate.v01_sq();
    let inner = b0 * (v[(0, 0)].conj() + v[(1, 1)].norm_sqr()) + b1 * s;
    b0.norm_sqr() + s * (b1.norm_sqr() - (b0 * b1.conj()).re) - 0.25 * inner.norm_sqr()
}

/// Options for [`worst_case_infidelity`].
#[derive(Debug, Clone, Copy)]
pub struct WorstCaseOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl Default for WorstCaseOptions {
    fn default() -> Self {
        Self { restarts: 64, seed: 0, max_iter: 5000, grad_tol: 1e-13 }
    }
}

/// Best input found by [`worst_case_infidelity`].
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseEstimate {
    /// Lower bound on the worst-case infidelity.
    pub value: f64,
    /// Input `sum_{x,s} psi[(x, s)] |x>_A |s>_S`.
    pub input: CMatrix,
    pub restart: usize,
    pub converged: bool,
}

struct Fidelity {
    d: usize,
    // f(rho) = r^dagger M r with r[i d + j] = rho[j][i].
    gram: CMatrix,
}

impl Fidelity {
    fn new(kraus: &KrausSet, target: &CMatrix) -> Self {
        let d = kraus.dim();
        let vd = target.adjoint();
        let mut gram = CMatrix::zeros(d * d, d * d);
        for k in kraus.ops() {
            let a = &vd * k;
            let flat: Vec<C64> = (0..d * d).map(|p| a[(p / d, p % d)]).collect();
            for p in 0..d * d {
                let ap = flat[p].conj();
                if ap == ZERO {
                    continue;
                }
                for q in 0..d * d {
                    gram[(p, q)] += ap * flat[q];
                }
            }
        }
        Self { d, gram }
    }

    fn reduced(&self, psi: &CMatrix) -> CMatrix {
        psi.transpose() * psi.conjugate()
    }

    fn flat(&self, rho: &CMatrix) -> nalgebra::DVector<C64> {
        let d = self.d;
        nalgebra::DVector::from_fn(d * d, |p, _| rho[(p % d, p / d)])
    }

    /// Fidelity value and its gradient with respect to `conj(psi)`.
    fn value_and_grad(&self, psi: &CMatrix) -> (f64, CMatrix) {
        let d = self.d;
        let r = self.flat(&self.reduced(psi));
        let mr = &self.gram * &r;
        let f = r.dotc(&mr).re;
        let w_flat = self.gram.transpose() * r.conjugate();
        let w = CMatrix::from_fn(d, d, |i, j| w_flat[i * d + j]);
        let h = &w + w.adjoint();
        (f, psi * h.transpose())
    }

    fn value(&self, psi: &CMatrix) -> f64 {
        let r = self.flat(&self.reduced(psi));
        r.dotc(&(&self.gram * &r)).re
    }
}

fn inner_re(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn normalize(m: CMatrix) -> CMatrix {
    let n = m.norm();
    m / C64::new(n, 0.0)
}

fn descend(fid: &Fidelity, mut psi: CMatrix, opts: &WorstCaseOptions) -> (f64, CMatrix, bool) {
    let project = |p: &CMatrix, g: CMatrix| {
        let c = inner_re(p, &g);
        g - p * C64::new(c, 0.0)
    };
    let (mut f, g0) = fid.value_and_grad(&psi);
    let mut g = project(&psi, g0);
    let mut step = 1.0;
    for _ in 0..opts.max_iter {
        let gnorm2 = inner_re(&g, &g);
        if gnorm2.sqrt() <= opts.grad_tol {
            return (f, psi, true);
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = normalize(&psi - &g * C64::new(t, 0.0));
            let ft = fid.value(&trial);
            if ft <= f - 1e-4 * t * gnorm2 {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((next, f_next)) = accepted else {
            return (f, psi, true);
        };
        let (_, g_raw) = fid.value_and_grad(&next);
        let g_next = project(&next, g_raw);
        let s = &next - &psi;
        let y = &g_next - &g;
        let sy = inner_re(&s, &y).abs();
        step = if sy > 1e-300 { (inner_re(&s, &s) / sy).clamp(1e-6, 1e6) } else { 1.0 };
        let done = (f - f_next).abs() <= 1e-17;
        psi = next;
        f = f_next;
        g = g_next;
        if done {
            return (f, psi, true);
        }
    }
    (f, psi, false)
}

fn random_input(d: usize, seed: u64, restart: usize) -> CMatrix {
    let mix = seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut rng = ChaCha8Rng::seed_from_u64(mix);
    let m = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    normalize(m)
}

/// Lower bound on `max_psi 1 - <psi|(I (x) V^dagger) Phi(|psi><psi|) (I (x) V)|psi>` over ancilla-extended inputs.
///
/// Restart 0 starts from the maximally entangled input, so the result is never below the
/// Choi infidelity. The remaining restarts start from seeded random inputs and run in parallel.
pub fn worst_case_infidelity(kraus: &KrausSet, target: &CMatrix, opts: WorstCaseOptions) -> Result<WorstCaseEstimate> {
    let d = kraus.dim();
    if target.nrows() != d || target.ncols() != d {
        return Err(Error::InvalidDimension("gate and channel dimensions differ".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    let fid = Fidelity::new(kraus, target);
    let runs: Vec<(f64, CMatrix, bool)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                CMatrix::identity(d, d) / C64::new((d as f64).sqrt(), 0.0)
            } else {
                random_input(d, opts.seed, r)
            };
            descend(&fid, start, &opts)
        })
        .collect();
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.0 < runs[best].0 {
            best = i;
        }
    }
    let (f, input, converged) = runs.into_iter().nth(best).expect("at least one restart");
    Ok(WorstCaseEstimate { value: (1.0 - f).clamp(0.0, 1.0), input, restart: best, converged })
}

/// True iff `eps_wc / d <= eps_c <= eps_wc` within `1e-10`.
pub fn sandwich_check(eps_wc: f64, eps_c: f64, dim: usize) -> bool {
    const SLACK: f64 = 1e-10;
    eps_c <= eps_wc + SLACK && eps_wc / dim as f64 <= eps_c + SLACK
}

/// Ground-level penalty with its applicability flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPenalty {
    pub eta: f64,
    /// Set for energy-preserving gates, where the penalty carries no content.
    pub energy_preserving: bool,
}

/// Largest `eta` with `eps_C >= eta |beta_0|^2` for every energy-preserving interaction: `eta = |V_01|^2 / 2`.
///
/// The ground contribution `(1/2)(|K_00|^2 + |K_10|^2 + |K_11|^2 - |V_00^* K_00 + V_11^* K_11|^2 / 2)`
/// is minimized by `|U^(1)_11| = cos^2 t` and a matching `beta_1`, which gives exactly this value.
pub fn ground_state_penalty(gate: &QubitGate) -> GroundPenalty {
    GroundPenalty { eta: 0.5 * gate.v01_sq(), energy_preserving: gate.is_energy_preserving(1e-12) }
}

/// Commonly quoted closed form `(cos^2 t - sin^2 t)^2 / (2(1 + cos^2 t))`, with `3/8` at `t = pi/4`.
///
/// It exceeds [`ground_state_penalty`] for small and intermediate angles and is not a valid bound there.
pub fn quoted_ground_state_penalty(gate: &QubitGate) -> f64 {
    let t = gate.angles().theta;
    if (t - std::f64::consts::FRAC_PI_4).abs() < 1e-12 {
        return 3.0 / 8.0;
    }
    let (s, c) = t.sin_cos();
    let diff = c * c - s * s;
    diff * diff / (2.0 * (1.0 + c * c))
}

/// Lower bound on the Choi infidelity of any uniform-angle interaction with block angle `theta_bar`.
///
/// `sin^2(tb - t) + (1/4)[sin 2tb sin 2t Q1 + sin^2 tb sin^2 t Q2]`, with
/// `Q1 = 2 - 2 sum |b_n b_{n+1}|` and `Q2 = 2 - 2 sum |b_n b_{n+2}|`.
pub fn interaction_lower_bound(theta: f64, theta_bar: f64, state: &BatteryState) -> Result<f64> {
    let b0 = state.amp(0).norm();
    if b0 > 1e-12 {
        return Err(Error::GroundOccupied(b0));
    }
    let (q1, q2) = overlap_defects(state);
    let d = (theta_bar - theta).sin();
    Ok(d * d + 0.25 * ((2.0 * theta_bar).sin() * (2.0 * theta).sin() * q1 + (theta_bar.sin() * theta.sin()).powi(2) * q2))
}

/// `(Q1, Q2)` shift-overlap defects of a state.
pub fn overlap_defects(state: &BatteryState) -> (f64, f64) {
    let t = state.truncation() as i64;
    let s1: f64 = (1..t).map(|n| (state.amp(n) * state.amp(n + 1)).norm()).sum();
    let s2: f64 = (1..t).map(|n| (state.amp(n) * state.amp(n + 2)).norm()).sum();
    (2.0 - 2.0 * s1, 2.0 * (1.0 - s2))
}

/// Dense interaction over battery levels `0..=T`, index `2 m + j` for `|m>_B |j>_S`.
///
/// The state `|T>_B |1>_S` lies above the last block and is left unchanged.
pub fn dense_interaction(unitary: &BlockUnitary) -> DMatrix<C64> {
    let t = unitary.truncation();
    let dim = 2 * (t + 1);
    let mut u = DMatrix::zeros(dim, dim);
    u[(0, 0)] = C64::new(1.0, 0.0);
    u[(dim - 1, dim - 1)] = C64::new(1.0, 0.0);
    for n in 1..=t {
        let b = unitary.block(n).expect("block in range");
        for i in 0..2 {
            for j in 0..2 {
                u[(2 * (n - i) + i, 2 * (n - j) + j)] = b[(i, j)];
            }
        }
    }
    u
}
