//! Qudit targets with an equally spaced spectrum `omega sum_j j |j><j|`.
//!
//! Energy shells below `(d-1) omega` are too small to host a full `d x d` block. Shell
//! `m < d-1` is spanned by `|m-j>_B |j>_S`, `j = 0..=m`, and carries a smaller block, the
//! identity unless the leading part of the target is itself unitary. Shell `n >= d-1` is
//! spanned by `|n-j>_B |j>_S`, `j = 0..d`, and carries the block `U^(n)_ij |n-i><n-j| (x) |i><j|`.

use crate::battery::{sample_ansatz, BatteryState, ResourceReport, ShapeProfile};
use crate::channel::{kraus_set, target_copy_unitary, KrausSet};
use crate::error::{Error, Result};
use crate::gates::{qudit_asymmetry, unitarity_deviation, CMatrix, QubitGate, QuditGate, C64, UNITARITY_TOL};
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

const BLOCK_TOL: f64 = 1e-12;

/// Energy-preserving qudit–battery interaction for input battery levels `0..T`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditBlockUnitary {
    dim: usize,
    truncation: usize,
    /// `blocks[k]` acts on shell `d - 1 + k`.
    blocks: Vec<CMatrix>,
    /// `low[m]` is the `(m+1) x (m+1)` block of shell `m < d - 1`.
    low: Vec<CMatrix>,
}

impl QuditBlockUnitary {
    /// One `d x d` unitary per shell `d-1 ..= T+d-2`.
    pub fn from_blocks(dim: usize, truncation: usize, blocks: Vec<CMatrix>) -> Result<Self> {
        if dim < 2 || truncation < dim {
            return Err(Error::InvalidDimension(format!("d = {dim}, T = {truncation}")));
        }
        if blocks.len() != truncation {
            return Err(Error::InvalidDimension(format!("expected {truncation} blocks, got {}", blocks.len())));
        }
        for b in &blocks {
            if b.nrows() != dim || b.ncols() != dim {
                return Err(Error::InvalidDimension("block shape differs from d".into()));
            }
            let dev = unitarity_deviation(b);
            if dev > UNITARITY_TOL {
                return Err(Error::NonUnitary(dev));
            }
        }
        let low = (0..dim - 1).map(|m| CMatrix::identity(m + 1, m + 1)).collect();
        Ok(Self { dim, truncation, blocks, low })
    }

    /// Replaces the low-shell blocks; `low[m]` must be a unitary of size `m + 1`.
    pub fn with_low_blocks(mut self, low: Vec<CMatrix>) -> Result<Self> {
        if low.len() != self.dim - 1 {
            return Err(Error::InvalidDimension(format!("expected {} low blocks", self.dim - 1)));
        }
        for (m, b) in low.iter().enumerate() {
            if b.nrows() != m + 1 || b.ncols() != m + 1 {
                return Err(Error::InvalidDimension(format!("low block {m} has the wrong shape")));
            }
            let dev = unitarity_deviation(b);
            if dev > UNITARITY_TOL {
                return Err(Error::NonUnitary(dev));
            }
        }
        self.low = low;
        Ok(self)
    }

    /// Block of a shell below `d - 1`.
    pub fn low_block(&self, shell: usize) -> Option<&CMatrix> {
        self.low.get(shell)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Block of shell `n`, or `None` below `d - 1` and above the last shell.
    pub fn block(&self, shell: usize) -> Option<&CMatrix> {
        shell.checked_sub(self.dim - 1).and_then(|k| self.blocks.get(k))
    }
}

/// Copies the target gate into every shell block.
pub fn qudit_target_copy(gate: &QuditGate, truncation: usize) -> Result<QuditBlockUnitary> {
    let d = gate.dim();
    if truncation < d {
        return Err(Error::InvalidDimension(format!("truncation {truncation} < d = {d}")));
    }
    let low = (0..d - 1).map(|m| leading_block(gate, m + 1)).collect();
    QuditBlockUnitary::from_blocks(d, truncation, vec![gate.matrix().clone(); truncation])?.with_low_blocks(low)
}

/// Leading `k x k` part of the gate when it is unitary, the identity otherwise.
fn leading_block(gate: &QuditGate, k: usize) -> CMatrix {
    let m = gate.matrix().view((0, 0), (k, k)).into_owned();
    if unitarity_deviation(&m) <= UNITARITY_TOL {
        m
    } else {
        CMatrix::identity(k, k)
    }
}

/// Kraus operators for output battery levels `0 ..= T+d-2`.
///
/// `K^(n)_ij = beta_{n+i-j} U^(n+i)_ij`, with the low-shell blocks used for `n + i < d - 1`.
pub fn qudit_kraus_set(unitary: &QuditBlockUnitary, state: &BatteryState) -> Result<KrausSet> {
    let d = unitary.dim;
    if state.truncation() > unitary.truncation {
        return Err(Error::TruncationMismatch { state: state.truncation(), unitary: unitary.truncation });
    }
    let last = unitary.truncation + d - 2;
    let mut ops = Vec::with_capacity(last + 1);
    for n in 0..=last {
        let k = CMatrix::from_fn(d, d, |i, j| {
            let shell = n + i;
            if shell + 1 < d {
                if j > shell {
                    return C64::new(0.0, 0.0);
                }
                state.amp(n as i64 + i as i64 - j as i64) * unitary.low[shell][(i, j)]
            } else {
                let beta = state.amp(n as i64 + i as i64 - j as i64);
                match unitary.block(shell) {
                    Some(b) if beta.norm_sqr() > 0.0 => beta * b[(i, j)],
                    _ => C64::new(0.0, 0.0),
                }
            }
        });
        ops.push(k);
    }
    KrausSet::new(ops)
}

/// `1 - (1/d^2) sum_n |Tr[V^dagger K^(n)]|^2` through the Kraus operators.
pub fn qudit_choi_infidelity(unitary: &QuditBlockUnitary, state: &BatteryState, gate: &QuditGate) -> Result<f64> {
    if gate.dim() != unitary.dim {
        return Err(Error::InvalidDimension("gate and interaction dimensions differ".into()));
    }
    crate::channel::choi_infidelity_exact(&qudit_kraus_set(unitary, state)?, gate.matrix())
}

/// Target-copy infidelity from diagonal weights alone.
///
/// For full shells `Tr[V^dagger K^(n)] = d beta_n + sum_j (beta_{n+j} - beta_n) a_j + sum_j (beta_{n-j} - beta_n) b_j`
/// with `a_j = sum_{l-k=j} |V_lk|^2` and `b_j = sum_{k-l=j} |V_lk|^2`. The few outputs that touch
/// the low shells are summed entry by entry.
pub fn qudit_choi_infidelity_trace_formula(state: &BatteryState, gate: &QuditGate) -> f64 {
    let d = gate.dim();
    let v = gate.matrix();
    let mut a = vec![0.0; d];
    let mut b = vec![0.0; d];
    for l in 0..d {
        for k in 0..d {
            let w = v[(l, k)].norm_sqr();
            if l >= k {
                a[l - k] += w;
            } else {
                b[k - l] += w;
            }
        }
    }
    let beta = |n: i64| state.amp(n);
    let last = (state.truncation() + d - 2) as i64;
    let mut total = 0.0;
    for n in 0..=last {
        let tr = if n + 1 >= d as i64 {
            let bn = beta(n);
            let mut t = bn * d as f64;
            for j in 0..d {
                t += (beta(n + j as i64) - bn) * a[j];
                if j > 0 {
                    t += (beta(n - j as i64) - bn) * b[j];
                }
            }
            t
        } else {
            (0..d)
                .map(|i| {
                    let shell = n as usize + i;
                    if shell + 1 < d {
                        let low = leading_block(gate, shell + 1);
                        (0..=shell).map(|j| v[(i, j)].conj() * low[(i, j)] * beta(n + i as i64 - j as i64)).sum::<C64>()
                    } else {
                        (0..d).map(|j| v[(i, j)].conj() * v[(i, j)] * beta(n + i as i64 - j as i64)).sum()
                    }
                })
                .sum::<C64>()
        };
        total += tr.norm_sqr();
    }
    (1.0 - total / (d * d) as f64).max(0.0)
}

/// Leading-order infidelity `A[V] delta^2 UD(psi)`.
pub fn qudit_asymptotic_infidelity(profile: &ShapeProfile, delta: f64, gate: &QuditGate) -> Result<f64> {
    Ok(qudit_asymmetry(gate) * delta * delta * profile.continuous_ud()?)
}

/// Qubit gate acting on levels `{0, d-1}` of a block-form qudit gate.
pub fn extremal_block(gate: &QuditGate) -> Result<QubitGate> {
    let d = gate.dim();
    let v = gate.matrix();
    let edge = |i: usize| i == 0 || i == d - 1;
    for i in 0..d {
        for j in 0..d {
            if edge(i) && edge(j) {
                continue;
            }
            let expected = if i == j { 1.0 } else { 0.0 };
            if (v[(i, j)] - C64::new(expected, 0.0)).norm() > BLOCK_TOL {
                return Err(Error::GateNotBlockForm(format!("entry ({i}, {j}) = {}", v[(i, j)])));
            }
        }
    }
    QubitGate::from_matrix(Matrix2::new(v[(0, 0)], v[(0, d - 1)], v[(d - 1, 0)], v[(d - 1, d - 1)]))
}

/// Scheme II: a battery with gap `(d-1) omega` drives only levels `{0, d-1}`.
///
/// The Kraus operators are the qubit ones embedded on the extremal levels plus `beta_n` on the rest.
pub fn scheme_two_kraus(two_level: &QubitGate, d: usize, state: &BatteryState) -> Result<KrausSet> {
    let qubit = kraus_set(&target_copy_unitary(two_level, state.truncation())?, state)?;
    let ops = qubit
        .ops()
        .iter()
        .enumerate()
        .map(|(n, k)| {
            let mut m = CMatrix::zeros(d, d);
            m[(0, 0)] = k[(0, 0)];
            m[(0, d - 1)] = k[(0, 1)];
            m[(d - 1, 0)] = k[(1, 0)];
            m[(d - 1, d - 1)] = k[(1, 1)];
            for i in 1..d - 1 {
                m[(i, i)] = state.amp(n as i64);
            }
            m
        })
        .collect();
    KrausSet::new(ops)
}

/// Exact infidelity of scheme II for a block-form gate.
pub fn scheme_two_infidelity(gate: &QuditGate, state: &BatteryState) -> Result<f64> {
    let v2 = extremal_block(gate)?;
    crate::channel::choi_infidelity_exact(&scheme_two_kraus(&v2, gate.dim(), state)?, gate.matrix())
}

/// Scheme-II figures at a given sampling step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeTwoPoint {
    pub delta: f64,
    pub eps: f64,
    pub resources: ResourceReport,
}

/// Resources of both schemes; energies are absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeResources {
    pub scheme1: ResourceReport,
    /// Scheme II with the same sampled amplitudes as scheme I.
    pub scheme2_equal_delta: ResourceReport,
    /// Scheme II sampled at `(d-1) delta`, which matches the scheme-I infidelity to leading order.
    pub scheme2_equal_infidelity: SchemeTwoPoint,
}

/// Comparison of the full-ladder scheme I with the extremal-level scheme II.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeComparison {
    pub d: usize,
    pub delta: f64,
    pub eps_scheme1: f64,
    pub eps_scheme2: f64,
    /// `eps_scheme1 / eps_scheme2` at equal sampling step.
    pub ratio: f64,
    /// `(d-1)^2`.
    pub asymptotic_ratio: f64,
    pub asymptotic_scheme1: f64,
    pub asymptotic_scheme2: f64,
    pub resources: SchemeResources,
}

/// Evaluates both schemes for a gate acting only on levels `{0, d-1}`.
pub fn scheme_two_compare(gate: &QuditGate, profile: &ShapeProfile, delta: f64, omega: f64) -> Result<SchemeComparison> {
    let d = gate.dim();
    let v2 = extremal_block(gate)?;
    let state = sample_ansatz(profile, delta, None, omega)?;
    let t = state.truncation().max(d);
    let state = state.padded(t)?;
    let eps1 = qudit_choi_infidelity(&qudit_target_copy(gate, t)?, &state, gate)?;
    let eps2 = scheme_two_infidelity(gate, &state)?;
    let gap = omega * (d - 1) as f64;
    let state2 = BatteryState::new(gap, state.amps().to_vec())?;
    let delta2 = delta * (d - 1) as f64;
    let matched = sample_ansatz(profile, delta2, None, gap)?;
    let matched = matched.padded(matched.truncation().max(2))?;
    let eps_matched = scheme_two_infidelity(gate, &matched)?;
    let ud = profile.continuous_ud()?;
    let s = v2.v01_sq();
    let df = d as f64;
    Ok(SchemeComparison {
        d,
        delta,
        eps_scheme1: eps1,
        eps_scheme2: eps2,
        ratio: eps1 / eps2,
        asymptotic_ratio: ((d - 1) * (d - 1)) as f64,
        asymptotic_scheme1: 2.0 * (df - 1.0).powi(2) / df * delta * delta * ud * s,
        asymptotic_scheme2: 2.0 / df * delta * delta * ud * s,
        resources: SchemeResources {
            scheme1: state.resources(),
            scheme2_equal_delta: state2.resources(),
            scheme2_equal_infidelity: SchemeTwoPoint { delta: delta2, eps: eps_matched, resources: matched.resources() },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{choi_infidelity_exact, target_copy_infidelity};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn haar(d: usize, rng: &mut ChaCha8Rng) -> QuditGate {
        let m = CMatrix::from_fn(d, d, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        });
        QuditGate::from_matrix(m.qr().q()).unwrap()
    }

    fn random_state(rng: &mut ChaCha8Rng, t: usize) -> BatteryState {
        let amps = (0..t)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re, im)
            })
            .collect();
        BatteryState::normalized(1.0, amps).unwrap()
    }

    /// Dense qudit interaction over battery levels `0..T+d-1`, index `d m + j` for `|m>_B |j>_S`.
    fn dense(unitary: &QuditBlockUnitary) -> CMatrix {
        let d = unitary.dim();
        let levels = unitary.truncation() + d - 1;
        let dim = d * levels;
        let mut u = CMatrix::zeros(dim, dim);
        let mut covered = vec![false; dim];
        for shell in 0..levels + d {
            match unitary.block(shell) {
                Some(b) => {
                    for i in 0..d {
                        for j in 0..d {
                            u[(d * (shell - i) + i, d * (shell - j) + j)] = b[(i, j)];
                        }
                        covered[d * (shell - i) + i] = true;
                    }
                }
                None => match unitary.low_block(shell) {
                    Some(b) => {
                        for i in 0..=shell {
                            for j in 0..=shell {
                                u[(d * (shell - i) + i, d * (shell - j) + j)] = b[(i, j)];
                            }
                        }
                    }
                    None => {
                        for j in 0..d.min(shell + 1) {
                            let m = shell - j;
                            if m < levels && !covered[d * m + j] {
                                u[(d * m + j, d * m + j)] = C64::new(1.0, 0.0);
                                covered[d * m + j] = true;
                            }
                        }
                    }
                },
            }
        }
        u
    }

    #[test]
    fn dense_interaction_is_unitary_and_matches_kraus() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 2..=4 {
            let g = if d == 4 { QuditGate::phase_gate(4, 0.3).unwrap() } else { haar(d, &mut rng) };
            let t = d + 3;
            let u = qudit_target_copy(&g, t).unwrap();
            let full = dense(&u);
            assert!(unitarity_deviation(&full) < 1e-12, "d = {d}");
            let s = random_state(&mut rng, t);
            let k = qudit_kraus_set(&u, &s).unwrap();
            for (n, op) in k.ops().iter().enumerate() {
                let expected = CMatrix::from_fn(d, d, |i, j| (0..t).map(|m| s.amp(m as i64) * full[(d * n + i, d * m + j)]).sum());
                assert!((op - expected).norm() < 1e-13, "d = {d}, n = {n}");
            }
        }
    }

    #[test]
    fn qubit_case_matches_channel_module() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let g = haar(2, &mut rng);
            let t = rng.random_range(2..20);
            let s = random_state(&mut rng, t);
            let q = g.as_qubit().unwrap();
            let a = qudit_choi_infidelity(&qudit_target_copy(&g, t).unwrap(), &s, &g).unwrap();
            let b = target_copy_infidelity(&s, &q).unwrap();
            assert!((a - b).abs() < 1e-14);
            let ka = qudit_kraus_set(&qudit_target_copy(&g, t).unwrap(), &s).unwrap();
            let kb = kraus_set(&target_copy_unitary(&q, t).unwrap(), &s).unwrap();
            for (x, y) in ka.ops().iter().zip(kb.ops()) {
                assert!((x - y).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn identity_and_energy_preserving_gates_are_free() {
        let s = sample_ansatz(&ShapeProfile::sine(1.0).unwrap(), 1.0 / 16.0, None, 1.0).unwrap();
        let id = QuditGate::from_matrix(CMatrix::identity(3, 3)).unwrap();
        assert!(qudit_choi_infidelity(&qudit_target_copy(&id, 16).unwrap(), &s, &id).unwrap() < 1e-14);
        let p = QuditGate::phase_gate(4, 0.7).unwrap();
        assert!(qudit_choi_infidelity(&qudit_target_copy(&p, 16).unwrap(), &s, &p).unwrap() < 1e-14);
        let prof = ShapeProfile::sine(1.0).unwrap();
        assert_eq!(qudit_asymptotic_infidelity(&prof, 0.1, &id).unwrap(), 0.0);
    }

    #[test]
    fn kraus_completeness_and_trace_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let d = rng.random_range(2..6);
            let g = haar(d, &mut rng);
            let t = rng.random_range(d..d + 20);
            let s = random_state(&mut rng, t);
            let u = qudit_target_copy(&g, t).unwrap();
            let k = qudit_kraus_set(&u, &s).unwrap();
            assert!(k.completeness_error() < 1e-10);
            let a = choi_infidelity_exact(&k, g.matrix()).unwrap();
            let b = qudit_choi_infidelity_trace_formula(&s, &g);
            assert!((a - b).abs() < 1e-12, "d = {d}: {a} vs {b}");
        }
    }

    #[test]
    fn asymptote_reduces_to_qubit_formula() {
        let g = QubitGate::hadamard();
        let p = ShapeProfile::sine(1.0).unwrap();
        let a = qudit_asymptotic_infidelity(&p, 0.01, &g.as_qudit()).unwrap();
        assert!((a - g.v01_sq() * 1e-4 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn asymptote_agrees_with_exact_for_random_qutrit_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = ShapeProfile::sine(1.0).unwrap();
        let delta = 1.0 / 64.0;
        let s = sample_ansatz(&p, delta, None, 1.0).unwrap();
        for _ in 0..10 {
            let g = haar(3, &mut rng);
            let exact = qudit_choi_infidelity(&qudit_target_copy(&g, s.truncation()).unwrap(), &s, &g).unwrap();
            let asym = qudit_asymptotic_infidelity(&p, delta, &g).unwrap();
            assert!((exact / asym - 1.0).abs() < 0.1, "{exact} vs {asym}");
        }
    }

    #[test]
    fn block_form_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = haar(3, &mut rng);
        assert!(matches!(extremal_block(&g), Err(Error::GateNotBlockForm(_))));
        let e = QuditGate::embed_extremal(&QubitGate::hadamard(), 4).unwrap();
        assert_eq!(extremal_block(&e).unwrap().matrix(), QubitGate::hadamard().matrix());
    }

    #[test]
    fn schemes_coincide_for_qubits() {
        let p = ShapeProfile::sine(1.0).unwrap();
        let g = QubitGate::from_angles(0.8, 0.3, 0.2).unwrap().as_qudit();
        let c = scheme_two_compare(&g, &p, 1.0 / 32.0, 1.0).unwrap();
        assert!((c.eps_scheme1 - c.eps_scheme2).abs() < 1e-15);
        assert!((c.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qutrit_scheme_ratio() {
        let p = ShapeProfile::sine(1.0).unwrap();
        let g = QuditGate::embed_extremal(&QubitGate::hadamard(), 3).unwrap();
        let c = scheme_two_compare(&g, &p, 1.0 / 64.0, 1.0).unwrap();
        assert!((c.ratio / 4.0 - 1.0).abs() < 0.15, "ratio {}", c.ratio);
        let m = c.resources.scheme2_equal_infidelity;
        assert!((m.eps / c.eps_scheme1 - 1.0).abs() < 0.1);
        assert_eq!(c.resources.scheme1.levels, 64);
        assert_eq!(m.resources.levels, 32);
        assert!((m.resources.mean_energy / c.resources.scheme1.mean_energy - 1.0).abs() < 0.05);
    }
}
