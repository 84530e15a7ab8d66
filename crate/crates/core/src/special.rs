//! Airy function of the first kind and the first Hermite function.
//!
//! `Ai` uses its Maclaurin series on `[-5, 2]` and the large-argument expansion for `x >= 10`.
//! The gaps are filled by Taylor-stepping the Airy equation `y'' = x y` from the nearest
//! accurate point. For `x > 2` the stepping runs towards smaller `x`, where `Ai` is the
//! growing solution, so the relative accuracy of the expansion is kept.

use std::f64::consts::PI;

const AI0: f64 = 0.355_028_053_887_817_239_26;
const AIP0: f64 = -0.258_819_403_792_806_798_41;
const SERIES_LOW: f64 = -5.0;
const SERIES_HIGH: f64 = 2.0;
const ASYMPTOTIC_START: f64 = 10.0;
const STEP: f64 = 0.25;

/// Returns `(Ai(x), Ai'(x))`.
pub fn airy(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if (SERIES_LOW..=SERIES_HIGH).contains(&x) {
        maclaurin(x)
    } else if x >= ASYMPTOTIC_START {
        asymptotic_positive(x)
    } else if x > 0.0 {
        let start = asymptotic_positive(ASYMPTOTIC_START);
        march(ASYMPTOTIC_START, start, x)
    } else {
        let start = maclaurin(SERIES_LOW);
        march(SERIES_LOW, start, x)
    }
}

/// `Ai(x)`.
pub fn airy_ai(x: f64) -> f64 {
    airy(x).0
}

/// `Ai'(x)`.
pub fn airy_ai_prime(x: f64) -> f64 {
    airy(x).1
}

fn maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = sum t_k, g = sum u_k with Ai = Ai(0) f + Ai'(0) g.
    let (mut f, mut t) = (1.0, 1.0);
    let (mut g, mut u) = (x, x);
    let (mut df, mut dt) = (0.0, 0.5 * x * x);
    let (mut dg, mut du) = (1.0, 1.0);
    for k in 0..200 {
        let kf = k as f64;
        t *= x3 / ((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        u *= x3 / ((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        f += t;
        g += u;
        du *= x3 / ((3.0 * kf + 1.0) * (3.0 * kf + 3.0));
        df += dt;
        dg += du;
        dt *= x3 / ((3.0 * kf + 3.0) * (3.0 * kf + 5.0));
        let scale = 1.0 + f.abs() + g.abs();
        if t.abs() + u.abs() + dt.abs() + du.abs() < 1e-18 * scale {
            break;
        }
    }
    (AI0 * f + AIP0 * g, AI0 * df + AIP0 * dg)
}

fn asymptotic_positive(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let mut u = 1.0;
    let mut sum_u = 1.0;
    let mut sum_v = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..40 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let term = u / zeta.powi(k);
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        sum_u += sign * term;
        sum_v += sign * v / zeta.powi(k);
    }
    let pref = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.sqrt().sqrt();
    (pref / q * sum_u, -pref * q * sum_v)
}

/// Integrates `y'' = x y` from `x0` to `x1` with local Taylor series.
fn march(x0: f64, (mut y, mut dy): (f64, f64), x1: f64) -> (f64, f64) {
    let span = x1 - x0;
    let steps = (span.abs() / STEP).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let mut c = x0;
    for _ in 0..steps {
        (y, dy) = taylor_step(c, y, dy, h);
        c += h;
    }
    (y, dy)
}

fn taylor_step(c: f64, y: f64, dy: f64, h: f64) -> (f64, f64) {
    let mut a = [0.0_f64; 64];
    a[0] = y;
    a[1] = dy;
    a[2] = 0.5 * c * y;
    let mut value = a[0] + a[1] * h + a[2] * h * h;
    let mut deriv = a[1] + 2.0 * a[2] * h;
    let mut hp = h * h;
    for k in 1..61 {
        a[k + 2] = (c * a[k] + a[k - 1]) / ((k as f64 + 2.0) * (k as f64 + 1.0));
        deriv += (k as f64 + 2.0) * a[k + 2] * hp;
        hp *= h;
        let term = a[k + 2] * hp;
        value += term;
        let scale = y.abs() + dy.abs();
        if term.abs() < 1e-18 * scale && a[k + 1].abs() * hp.abs() < 1e-18 * scale {
            break;
        }
    }
    (value, deriv)
}

/// First Hermite function `psi_1(y) = sqrt(2) pi^{-1/4} y exp(-y^2/2)`.
pub fn hermite_psi1(y: f64) -> f64 {
    2.0_f64.sqrt() * PI.powf(-0.25) * y * (-0.5 * y * y).exp()
}

/// Derivative of [`hermite_psi1`].
pub fn hermite_psi1_prime(y: f64) -> f64 {
    2.0_f64.sqrt() * PI.powf(-0.25) * (1.0 - y * y) * (-0.5 * y * y).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 30-digit arithmetic.
    const REFERENCE: [(f64, f64, f64); 19] = [
        (-15.0, 0.27821749087082892953, 0.27237420430864202083),
        (-12.5, -0.27627456138116024823, -0.41933133041950516441),
        (-10.0, 0.040241238486443190689, 0.9962650441327900559),
        (-7.3, 0.33577037051514727697, -0.18009580448329365985),
        (-5.0, 0.35076100902411431979, 0.32719281855444313679),
        (-4.2, 0.089210763239450717957, -0.78221560786245189744),
        (-2.338107410459767, 2.7433193406662829996e-17, 0.70121082272069136249),
        (-1.0, 0.5355608832923521188, -0.010160567116645209395),
        (0.0, 0.35502805388781723926, -0.25881940379280679841),
        (0.5, 0.23169360648083348977, -0.22491053266468389314),
        (1.0, 0.13529241631288141552, -0.15914744129679321279),
        (2.5, 0.015725923380470489995, -0.026250881035903230365),
        (4.9, 0.00013599211701506742767, -0.00030761599633764950659),
        (5.1, 0.000086132427064788511554, -0.00019853254788180539739),
        (6.0, 9.9476943602528895702e-6, -0.000024765200397034954754),
        (7.5, 1.9172560675134307516e-7, -5.3127139597205446848e-7),
        (10.0, 1.1047532552898685934e-10, -3.5206336767389236366e-10),
        (12.0, 1.393184688875360839e-13, -4.854736554985308463e-13),
        (15.0, 2.164962520737992299e-18, -8.4205679540177727661e-18),
    ];

    #[test]
    fn matches_reference_values() {
        for &(x, ai, aip) in &REFERENCE {
            let (v, d) = airy(x);
            assert!((v - ai).abs() < 1e-12, "Ai({x}) = {v}, expected {ai}");
            assert!((d - aip).abs() < 1e-12, "Ai'({x}) = {d}, expected {aip}");
        }
    }

    #[test]
    fn relative_accuracy_for_positive_arguments() {
        for &(x, ai, aip) in REFERENCE.iter().filter(|r| r.0 > 0.0) {
            let (v, d) = airy(x);
            assert!(((v - ai) / ai).abs() < 1e-11, "x = {x}: {}", (v - ai) / ai);
            assert!(((d - aip) / aip).abs() < 1e-11, "x = {x}");
        }
    }

    #[test]
    fn continuous_across_switch_points() {
        for x0 in [-5.0, 2.0, 10.0] {
            let (a, da) = airy(x0 - 1e-12);
            let (b, db) = airy(x0 + 1e-12);
            assert!((a - b).abs() < 1e-12);
            assert!((da - db).abs() < 1e-11);
        }
    }

    #[test]
    fn satisfies_airy_equation() {
        let h = 1e-3;
        for i in 0..=60 {
            let x = -15.0 + 0.5 * i as f64;
            let second = (airy_ai_prime(x + h) - airy_ai_prime(x - h)) / (2.0 * h);
            assert!((second - x * airy_ai(x)).abs() < 1e-6 * (1.0 + x.abs()), "x = {x}");
        }
    }

    #[test]
    fn hermite_is_normalized() {
        let n = crate::numerics::quad(|y| hermite_psi1(y).powi(2), -12.0, 12.0).unwrap();
        assert!((n - 1.0).abs() < 1e-12);
    }
}
