//! Full-ladder (scheme I) against extremal-level (scheme II) implementations of qudit gates.

use battery_gates::battery::{sample_ansatz, ShapeProfile};
use battery_gates::gates::{qudit_asymmetry, QubitGate, QuditGate};
use battery_gates::qudit::{qudit_asymptotic_infidelity, qudit_choi_infidelity, qudit_target_copy, scheme_two_compare};

fn main() -> battery_gates::Result<()> {
    let profile = ShapeProfile::sine(1.0)?;
    let delta = 1.0 / 64.0;

    let shift = QuditGate::from_matrix(nalgebra::DMatrix::from_fn(3, 3, |i, j| {
        num_complex::Complex::new(if (i + 1) % 3 == j { 1.0 } else { 0.0 }, 0.0)
    }))?;
    let state = sample_ansatz(&profile, delta, None, 1.0)?;
    let eps = qudit_choi_infidelity(&qudit_target_copy(&shift, state.truncation())?, &state, &shift)?;
    println!(
        "cyclic shift, d = 3: A = {:.4}, eps = {eps:.6e}, leading order {:.6e}",
        qudit_asymmetry(&shift),
        qudit_asymptotic_infidelity(&profile, delta, &shift)?
    );

    for d in 2..=5 {
        let g = QuditGate::embed_extremal(&QubitGate::hadamard(), d)?;
        let c = scheme_two_compare(&g, &profile, delta, 1.0)?;
        let m = c.resources.scheme2_equal_infidelity;
        println!(
            "d = {d}: eps I {:.4e}, eps II {:.4e}, ratio {:.3} (asymptote {}); equal error needs {} levels in scheme II vs {}",
            c.eps_scheme1, c.eps_scheme2, c.ratio, c.asymptotic_ratio, m.resources.levels, c.resources.scheme1.levels
        );
    }
    Ok(())
}
