//! Target gates: qubit unitaries in angle form and general qudit unitaries.
//!
//! A qubit gate is written up to a global phase as
//! `[[cos t, sin t e^{i g}], [sin t e^{i(d - g)}, -cos t e^{i d}]]` with `t` in `[0, pi/2]`.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Tolerance on `||V^dagger V - I||` for accepting a matrix as unitary.
pub const UNITARITY_TOL: f64 = 1e-10;
const DEGENERATE_TOL: f64 = 1e-14;

/// A qubit target gate with its canonical angles.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitGate {
    matrix: Matrix2<C64>,
    angles: GateAngles,
}

/// Canonical angle decomposition `V = e^{i phase} V(theta, gamma, delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateAngles {
    pub theta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub phase: f64,
    /// Set when one phase is undetermined (`theta` is 0 or pi/2) and was reported as 0.
    pub degenerate: bool,
}

/// A `d x d` unitary target gate with `d >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditGate {
    matrix: CMatrix,
}

fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU - 1e-15 {
        0.0
    } else {
        r
    }
}

fn angle_matrix(theta: f64, gamma: f64, delta: f64) -> Matrix2<C64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(
        C64::new(c, 0.0),
        C64::from_polar(s, gamma),
        C64::from_polar(s, delta - gamma),
        -C64::from_polar(c, delta),
    )
}

/// Largest entry of `|V^dagger V - I|`.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let p = m.adjoint() * m;
    let mut dev: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((p[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    dev
}

impl QubitGate {
    /// Builds the gate from angles. Angles are reduced mod 2 pi and `theta` is folded into `[0, pi/2]`.
    pub fn from_angles(theta: f64, gamma: f64, delta: f64) -> Result<Self> {
        if !(theta.is_finite() && gamma.is_finite() && delta.is_finite()) {
            return Err(Error::InvalidParameter("gate angles must be finite".into()));
        }
        Self::from_matrix(angle_matrix(theta, gamma, delta))
    }

    /// Wraps a unitary matrix and extracts its canonical angles.
    pub fn from_matrix(matrix: Matrix2<C64>) -> Result<Self> {
        let angles = angles_from_matrix(&matrix)?;
        Ok(Self { matrix, angles })
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_matrix(Matrix2::new(C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)))
            .expect("Hadamard is unitary")
    }

    pub fn pauli_x() -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        Self::from_matrix(Matrix2::new(z, o, o, z)).expect("X is unitary")
    }

    pub fn identity() -> Self {
        Self::from_matrix(Matrix2::identity()).expect("identity is unitary")
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.matrix
    }

    pub fn dmatrix(&self) -> CMatrix {
        CMatrix::from_iterator(2, 2, self.matrix.iter().copied())
    }

    pub fn angles(&self) -> GateAngles {
        self.angles
    }

    /// `|V_01|^2`, the weight that sets every infidelity prefactor.
    pub fn v01_sq(&self) -> f64 {
        self.matrix[(0, 1)].norm_sqr()
    }

    pub fn v01(&self) -> f64 {
        self.matrix[(0, 1)].norm()
    }

    /// True when `[V, H_S] = 0` within `tol`.
    pub fn is_energy_preserving(&self, tol: f64) -> bool {
        self.matrix[(0, 1)].norm() <= tol && self.matrix[(1, 0)].norm() <= tol
    }

    pub fn as_qudit(&self) -> QuditGate {
        QuditGate { matrix: self.dmatrix() }
    }

    pub fn to_spec(&self) -> GateSpec {
        GateSpec::from_matrix(&self.dmatrix())
    }
}

/// Extracts `(theta, gamma, delta, phase)` from a 2x2 unitary.
///
/// `V_00` is made real and non-negative when `theta < pi/2`; otherwise `V_01` is.
/// The identity maps to `(0, 0, pi)`.
pub fn angles_from_matrix(m: &Matrix2<C64>) -> Result<GateAngles> {
    let dm = CMatrix::from_iterator(2, 2, m.iter().copied());
    let dev = unitarity_deviation(&dm);
    if !dev.is_finite() || dev > UNITARITY_TOL {
        return Err(Error::NonUnitary(dev));
    }
    let theta = m[(0, 1)].norm().atan2(m[(0, 0)].norm());
    let (gamma, delta, phase, degenerate);
    if m[(0, 0)].norm() > DEGENERATE_TOL {
        phase = m[(0, 0)].arg();
        let rot = C64::from_polar(1.0, -phase);
        let w01 = m[(0, 1)] * rot;
        let w11 = m[(1, 1)] * rot;
        delta = (-w11).arg();
        if w01.norm() > DEGENERATE_TOL {
            gamma = w01.arg();
            degenerate = false;
        } else {
            gamma = 0.0;
            degenerate = true;
        }
    } else {
        phase = m[(0, 1)].arg();
        let w10 = m[(1, 0)] * C64::from_polar(1.0, -phase);
        gamma = 0.0;
        delta = w10.arg();
        degenerate = true;
    }
    Ok(GateAngles {
        theta: theta.clamp(0.0, FRAC_PI_2),
        gamma: reduce_angle(gamma),
        delta: reduce_angle(delta),
        phase: reduce_angle(phase),
        degenerate,
    })
}

impl QuditGate {
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() < 2 {
            return Err(Error::InvalidDimension(format!("{}x{} gate", matrix.nrows(), matrix.ncols())));
        }
        let dev = unitarity_deviation(&matrix);
        if !dev.is_finite() || dev > UNITARITY_TOL {
            return Err(Error::NonUnitary(dev));
        }
        Ok(Self { matrix })
    }

    /// `diag(e^{i phi}, e^{-i phi}, 1, ..., 1)`.
    pub fn phase_gate(d: usize, phi: f64) -> Result<Self> {
        let mut m = CMatrix::identity(d, d);
        if d < 2 {
            return Err(Error::InvalidDimension(format!("d = {d}")));
        }
        m[(0, 0)] = C64::from_polar(1.0, phi);
        m[(1, 1)] = C64::from_polar(1.0, -phi);
        Self::from_matrix(m)
    }

    /// Embeds a qubit gate on levels `{0, d-1}` with the identity elsewhere.
    pub fn embed_extremal(gate: &QubitGate, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(format!("d = {d}")));
        }
        let mut m = CMatrix::identity(d, d);
        let v = gate.matrix();
        m[(0, 0)] = v[(0, 0)];
        m[(0, d - 1)] = v[(0, 1)];
        m[(d - 1, 0)] = v[(1, 0)];
        m[(d - 1, d - 1)] = v[(1, 1)];
        Self::from_matrix(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Returns the qubit gate when `d = 2`.
    pub fn as_qubit(&self) -> Option<QubitGate> {
        (self.dim() == 2).then(|| {
            let m = &self.matrix;
            QubitGate::from_matrix(Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])).expect("validated unitary")
        })
    }

    /// True when `[V, H_S] = 0` within `tol`, i.e. all off-diagonal entries vanish.
    pub fn is_energy_preserving(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.matrix[(i, j)].norm() <= tol))
    }

    pub fn to_spec(&self) -> GateSpec {
        GateSpec::from_matrix(&self.matrix)
    }
}

/// `|V_01|^2` weight for the qubit infidelity prefactor.
pub fn asymmetry_weight(gate: &QubitGate) -> f64 {
    gate.v01_sq()
}

/// Energy-asymmetry functional `A[V] = sum_j (j^2/d) sum_{|l-k|=j} |V_lk|^2`.
pub fn qudit_asymmetry(gate: &QuditGate) -> f64 {
    let d = gate.dim();
    let m = gate.matrix();
    let mut total = 0.0;
    for l in 0..d {
        for k in 0..d {
            let j = l.abs_diff(k) as f64;
            total += j * j * m[(l, k)].norm_sqr();
        }
    }
    total / d as f64
}

/// Qubit Hamiltonian `(omega/2)(|1><1| - |0><0|)`.
pub fn qubit_hamiltonian(omega: f64) -> Matrix2<C64> {
    Matrix2::new(C64::new(-0.5 * omega, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.5 * omega, 0.0))
}

/// Qudit Hamiltonian `omega sum_j j |j><j|`.
pub fn qudit_hamiltonian(d: usize, omega: f64) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |j, _| C64::new(omega * j as f64, 0.0)))
}

/// Serialized gate description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum GateSpec {
    Qubit { theta: f64, gamma: f64, delta: f64 },
    Matrix { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

impl GateSpec {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let re = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect()).collect();
        GateSpec::Matrix { re, im }
    }

    /// Builds the gate, validating shape and unitarity.
    pub fn to_qudit(&self) -> Result<QuditGate> {
        match self {
            GateSpec::Qubit { theta, gamma, delta } => Ok(QubitGate::from_angles(*theta, *gamma, *delta)?.as_qudit()),
            GateSpec::Matrix { re, im } => {
                let d = re.len();
                if im.len() != d || re.iter().chain(im.iter()).any(|row| row.len() != d) {
                    return Err(Error::InvalidDimension("re and im must be equal square arrays".into()));
                }
                QuditGate::from_matrix(CMatrix::from_fn(d, d, |i, j| C64::new(re[i][j], im[i][j])))
            }
        }
    }

    pub fn to_qubit(&self) -> Result<QubitGate> {
        let g = self.to_qudit()?;
        g.as_qubit().ok_or_else(|| Error::InvalidDimension(format!("expected a qubit gate, got d = {}", g.dim())))
    }
}

/// Wraps `phi` into `(-pi, pi]`.
pub fn wrap_pi(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        wrap_pi(a - b).abs() <= tol
    }

    #[test]
    fn hadamard_weight() {
        assert!((QubitGate::hadamard().v01_sq() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pauli_x_angles() {
        let a = QubitGate::pauli_x().angles();
        assert!((a.theta - FRAC_PI_2).abs() < 1e-15);
        assert!((QubitGate::pauli_x().v01_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_angles() {
        let a = QubitGate::identity().angles();
        assert_eq!(a.theta, 0.0);
        assert_eq!(a.gamma, 0.0);
        assert!((a.delta - PI).abs() < 1e-15);
        assert!(a.degenerate);
        assert_eq!(QubitGate::identity().v01_sq(), 0.0);
    }

    #[test]
    fn non_unitary_rejected() {
        let m = Matrix2::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        assert!(matches!(QubitGate::from_matrix(m), Err(Error::NonUnitary(_))));
    }

    #[test]
    fn phase_gate_is_energy_preserving() {
        for d in 2..=6 {
            assert!(QuditGate::phase_gate(d, 0.3).unwrap().is_energy_preserving(1e-12));
        }
        assert!(!QubitGate::hadamard().is_energy_preserving(1e-12));
    }

    #[test]
    fn asymmetry_of_qubit_gate() {
        // For d = 2 the functional reduces to |V_01|^2.
        let g = QubitGate::from_angles(0.7, 0.2, 1.1).unwrap();
        assert!((qudit_asymmetry(&g.as_qudit()) - g.v01_sq()).abs() < 1e-15);
    }

    #[test]
    fn asymmetry_of_embedded_gate() {
        let g = QubitGate::hadamard();
        for d in 2..=6 {
            let e = QuditGate::embed_extremal(&g, d).unwrap();
            let expected = 2.0 * ((d - 1) * (d - 1)) as f64 / d as f64 * g.v01_sq();
            assert!((qudit_asymmetry(&e) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn spec_roundtrip() {
        let spec = GateSpec::Qubit { theta: 0.4, gamma: 0.0, delta: 0.5 };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"type":"qubit","theta":0.4,"gamma":0.0,"delta":0.5}"#);
        let back: GateSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let m = back.to_qudit().unwrap();
        let again = GateSpec::from_matrix(m.matrix()).to_qudit().unwrap();
        assert_eq!(m, again);
    }

    proptest! {
        #[test]
        fn angle_roundtrip(theta in 1e-6..(FRAC_PI_2 - 1e-6), gamma in 0.0..TAU, delta in 0.0..TAU, phase in 0.0..TAU) {
            let m = angle_matrix(theta, gamma, delta) * C64::from_polar(1.0, phase);
            let a = angles_from_matrix(&m).unwrap();
            prop_assert!((a.theta - theta).abs() < 1e-10);
            prop_assert!(close(a.gamma, gamma, 1e-9));
            prop_assert!(close(a.delta, delta, 1e-10));
            prop_assert!(close(a.phase, phase, 1e-10));
            prop_assert!(!a.degenerate);
        }

        #[test]
        fn parametrization_is_unitary(theta in -10.0..10.0f64, gamma in -10.0..10.0f64, delta in -10.0..10.0f64) {
            let g = QubitGate::from_angles(theta, gamma, delta).unwrap();
            prop_assert!(g.angles().theta >= 0.0 && g.angles().theta <= FRAC_PI_2);
            prop_assert!((g.v01_sq() - theta.sin().powi(2)).abs() < 1e-12);
        }
    }
}
