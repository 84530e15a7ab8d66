//! Sine-transform picture of the Choi infidelity on a Dirichlet box of `N` levels.
//!
//! For states supported on `1..N` the infidelity is diagonal in the discrete sine basis,
//! with weights `4 s S_k (1 - s S_k)` and `S_k = sin^2(pi k / 2N)`.

use crate::battery::BatteryState;
use crate::error::{Error, Result};
use crate::gates::{QubitGate, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const SUPPORT_TOL: f64 = 1e-14;

/// Sine coefficients `c_k`, `k = 1..N-1`, of a state on a box of `N` levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DstCoefficients {
    n_levels: usize,
    coeffs: Vec<C64>,
}

impl DstCoefficients {
    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    /// `coeffs()[k - 1]` is `c_k`.
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }
}

fn sine_matrix(n: usize) -> Vec<f64> {
    let scale = (2.0 / n as f64).sqrt();
    let m = n - 1;
    let mut s = vec![0.0; m * m];
    for k in 1..n {
        for j in 1..n {
            // Reduce k j mod 2N before the sine for accuracy at large N.
            let r = (k * j) % (2 * n);
            s[(k - 1) * m + (j - 1)] = scale * (PI * r as f64 / n as f64).sin();
        }
    }
    s
}

fn transform(n: usize, input: &[C64]) -> Vec<C64> {
    let m = n - 1;
    let s = sine_matrix(n);
    (0..m).map(|k| (0..m).map(|j| input[j] * s[k * m + j]).sum()).collect()
}

/// `c_k = sqrt(2/N) sum_n sin(pi k n / N) beta_n`.
///
/// Requires `beta_0 = 0` and `beta_n = 0` for `n >= N`.
pub fn dst_forward(state: &BatteryState, n_levels: usize) -> Result<DstCoefficients> {
    if n_levels < 2 {
        return Err(Error::InvalidDimension(format!("N = {n_levels} < 2")));
    }
    let b0 = state.amp(0).norm();
    if b0 > SUPPORT_TOL {
        return Err(Error::SupportViolation(format!("|beta_0| = {b0:.3e}")));
    }
    if let Some((n, a)) = state.amps().iter().enumerate().skip(n_levels).find(|(_, a)| a.norm() > SUPPORT_TOL) {
        return Err(Error::SupportViolation(format!("|beta_{n}| = {:.3e} beyond N = {n_levels}", a.norm())));
    }
    let inner: Vec<C64> = (1..n_levels).map(|n| state.amp(n as i64)).collect();
    Ok(DstCoefficients { n_levels, coeffs: transform(n_levels, &inner) })
}

/// Inverse transform. The sine transform is its own inverse.
pub fn dst_inverse(coeffs: &DstCoefficients, omega: f64) -> Result<BatteryState> {
    let n = coeffs.n_levels;
    let mut amps = vec![C64::new(0.0, 0.0)];
    amps.extend(transform(n, &coeffs.coeffs));
    BatteryState::normalized(omega, amps)
}

/// `S_k = sin^2(pi k / 2N)`.
pub fn laplacian_weight(k: usize, n_levels: usize) -> f64 {
    (PI * k as f64 / (2.0 * n_levels as f64)).sin().powi(2)
}

/// `4 s sum_k S_k (1 - s S_k) |c_k|^2`.
pub fn infidelity_spectral(coeffs: &DstCoefficients, gate: &QubitGate) -> f64 {
    let s = gate.v01_sq();
    let n = coeffs.n_levels;
    coeffs
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let w = laplacian_weight(i + 1, n);
            4.0 * s * w * (1.0 - s * w) * c.norm_sqr()
        })
        .sum()
}

/// Lowest sine mode on `N` levels: `beta_n ∝ sin(pi n / N)` for `n = 0..N-1`.
pub fn optimal_sine_state(n_levels: usize, omega: f64) -> Result<BatteryState> {
    if n_levels < 2 {
        return Err(Error::InvalidDimension(format!("N = {n_levels} < 2")));
    }
    let amps: Vec<f64> = (0..n_levels).map(|n| (PI * n as f64 / n_levels as f64).sin()).collect();
    BatteryState::from_real(omega, &amps)
}

/// Spectral infidelity of the lowest mode: `4 s S_1 (1 - s S_1)`.
pub fn sine_state_infidelity(n_levels: usize, gate: &QubitGate) -> f64 {
    let s = gate.v01_sq();
    let w = laplacian_weight(1, n_levels);
    4.0 * s * w * (1.0 - s * w)
}

/// Level counts needed to reach a target infidelity with the lowest sine mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelBound {
    /// `pi |V_01| / sqrt(eps)`.
    pub leading: f64,
    /// Real `N` at which the spectral infidelity of the lowest mode equals `eps`.
    pub exact: f64,
}

/// Minimum number of levels for a target infidelity.
pub fn min_levels_bound(eps: f64, v01: f64) -> Result<LevelBound> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1], got {eps}")));
    }
    if !(v01 > 0.0 && v01 <= 1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("|V_01| must lie in (0, 1], got {v01}")));
    }
    let s = (v01 * v01).min(1.0);
    let leading = PI * v01 / eps.sqrt();
    // 4 s S (1 - s S) = eps has the small root S = (1 - sqrt(1 - eps)) / (2 s).
    let w = (1.0 - (1.0 - eps).sqrt()) / (2.0 * s);
    if w > 1.0 {
        return Err(Error::InvalidParameter(format!("eps = {eps} is not reachable with |V_01| = {v01}")));
    }
    let exact = PI / (2.0 * w.sqrt().asin());
    Ok(LevelBound { leading, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{choi_infidelity_closed, target_copy_infidelity};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn supported_state(values: &[(f64, f64)], n: usize) -> BatteryState {
        let mut amps = vec![C64::new(0.0, 0.0)];
        amps.extend(values.iter().take(n - 1).map(|&(a, b)| C64::new(a, b)));
        amps.resize(n, C64::new(0.0, 0.0));
        BatteryState::normalized(1.0, amps).unwrap()
    }

    #[test]
    fn two_level_sine_state_is_fock_one() {
        let s = optimal_sine_state(2, 1.0).unwrap();
        assert_eq!(s, BatteryState::fock(1.0, 1, 2).unwrap());
    }

    #[test]
    fn hadamard_sine_state_infidelity() {
        let h = QubitGate::hadamard();
        for n in [4usize, 64] {
            let w = (PI / (2.0 * n as f64)).sin().powi(2);
            let expected = 2.0 * w * (1.0 - 0.5 * w);
            assert!((sine_state_infidelity(n, &h) - expected).abs() < 1e-16);
        }
    }

    #[test]
    fn lowest_mode_has_unit_coefficient() {
        let n = 32;
        let c = dst_forward(&optimal_sine_state(n, 1.0).unwrap(), n).unwrap();
        assert!((c.coeffs()[0].norm() - 1.0).abs() < 1e-13);
        assert!(c.coeffs()[1..].iter().all(|z| z.norm() < 1e-13));
        let h = QubitGate::hadamard();
        assert!((infidelity_spectral(&c, &h) - sine_state_infidelity(n, &h)).abs() < 1e-15);
    }

    #[test]
    fn support_is_checked() {
        let s = BatteryState::fock(1.0, 0, 4).unwrap();
        assert!(matches!(dst_forward(&s, 4), Err(Error::SupportViolation(_))));
        let s = BatteryState::fock(1.0, 5, 8).unwrap();
        assert!(matches!(dst_forward(&s, 4), Err(Error::SupportViolation(_))));
    }

    #[test]
    fn hadamard_level_bound() {
        let b = min_levels_bound(1e-4, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        assert!((b.leading - 222.144).abs() < 1e-3);
        assert!(b.exact <= b.leading + 1.0);
        assert!((sine_state_infidelity(b.exact.ceil() as usize, &QubitGate::hadamard())) <= 1e-4);
    }

    #[test]
    fn exact_level_bound_inverts_spectral_infidelity() {
        let g = QubitGate::from_angles(0.9, 0.0, 0.0).unwrap();
        for eps in [1e-3, 1e-5, 1e-7] {
            let b = min_levels_bound(eps, g.v01()).unwrap();
            assert!(b.exact <= b.leading + 1.0);
            // Bisection on the real-N spectral formula as an independent inversion.
            let f = |n: f64| {
                let w = (PI / (2.0 * n)).sin().powi(2);
                4.0 * g.v01_sq() * w * (1.0 - g.v01_sq() * w) - eps
            };
            let (mut lo, mut hi) = (1.0, 1e7);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((b.exact - lo).abs() < 1e-6 * lo);
        }
    }

    #[test]
    fn closed_form_differs_by_boundary_terms() {
        // The second-difference terms at both box edges are counted differently by the two
        // forms: the closed form lies below the spectral value by (s^2/4)(|b_1|^2 + |b_{N-1}|^2).
        let g = QubitGate::from_angles(1.1, 0.0, 0.7).unwrap();
        let s = g.v01_sq();
        for n in [8usize, 64, 256] {
            let st = optimal_sine_state(n, 1.0).unwrap();
            let c = dst_forward(&st, n).unwrap();
            let gap = choi_infidelity_closed(&st, &g) - infidelity_spectral(&c, &g);
            let edges = st.amp(1).norm_sqr() + st.amp(n as i64 - 1).norm_sqr();
            assert!((gap + 0.25 * s * s * edges).abs() < 1e-15, "n = {n}");
        }
    }

    proptest! {
        #[test]
        fn transform_is_involutive(values in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..60)) {
            let n = values.len() + 1;
            prop_assume!(values.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-6);
            let s = supported_state(&values, n);
            let back = dst_inverse(&dst_forward(&s, n).unwrap(), 1.0).unwrap();
            for k in 0..n {
                prop_assert!((back.amps()[k] - s.amps()[k]).norm() < 1e-12);
            }
        }

        #[test]
        fn parseval(values in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..60)) {
            let n = values.len() + 1;
            prop_assume!(values.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-6);
            let s = supported_state(&values, n);
            let c = dst_forward(&s, n).unwrap();
            let total: f64 = c.coeffs().iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn spectral_matches_laplacian_form(values in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..40),
                                           theta in 0.0..std::f64::consts::FRAC_PI_2) {
            let n = values.len() + 1;
            prop_assume!(values.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-6);
            let s = supported_state(&values, n);
            let g = QubitGate::from_angles(theta, 0.0, 0.0).unwrap();
            let w = g.v01_sq();
            let m = n - 1;
            let lap = DMatrix::<f64>::from_fn(m, m, |i, j| if i == j { 2.0 } else if i.abs_diff(j) == 1 { -1.0 } else { 0.0 });
            let op = &lap * w - &lap * &lap * (w * w / 4.0);
            let b = nalgebra::DVector::from_fn(m, |i, _| s.amp(i as i64 + 1));
            let opc = op.map(|x| C64::new(x, 0.0));
            let form = b.dotc(&(opc * &b)).re;
            let spectral = infidelity_spectral(&dst_forward(&s, n).unwrap(), &g);
            prop_assert!((form - spectral).abs() < 1e-12);
        }

        #[test]
        fn exact_route_equals_closed_form_on_sine_states(n in 2usize..200) {
            let g = QubitGate::hadamard();
            let st = optimal_sine_state(n, 1.0).unwrap();
            prop_assert!((target_copy_infidelity(&st, &g).unwrap() - choi_infidelity_closed(&st, &g)).abs() < 1e-13);
        }
    }
}
