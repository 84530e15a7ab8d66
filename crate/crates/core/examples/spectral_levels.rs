//! Sine-transform view of the infidelity and the number of levels needed for a target error.

use battery_gates::channel::choi_infidelity_closed;
use battery_gates::gates::QubitGate;
use battery_gates::spectral::{dst_forward, infidelity_spectral, min_levels_bound, optimal_sine_state};

fn main() -> battery_gates::Result<()> {
    let gate = QubitGate::from_angles(0.6, 0.0, 0.0)?;
    for n in [8, 16, 32, 64, 128] {
        let state = optimal_sine_state(n, 1.0)?;
        let coeffs = dst_forward(&state, n)?;
        let spectral = infidelity_spectral(&coeffs, &gate);
        let exact = choi_infidelity_closed(&state, &gate);
        println!("N = {n:>4}: spectral {spectral:.12e}, exact {exact:.12e}, gap {:.3e}", spectral - exact);
    }
    for eps in [1e-2, 1e-3, 1e-4] {
        let b = min_levels_bound(eps, gate.v01())?;
        println!("eps = {eps:.0e}: N >= {:.2} (leading order {:.2})", b.exact, b.leading);
    }
    Ok(())
}
