//! Choi infidelity of a Hadamard implemented with a sampled Airy battery state.
//!
//! Compares the Kraus-operator evaluation, the closed form and the leading-order value.

use battery_gates::battery::sample_ansatz;
use battery_gates::channel::{choi_infidelity_closed, target_copy_infidelity};
use battery_gates::gates::QubitGate;
use battery_gates::variational::airy_profile;

fn main() -> battery_gates::Result<()> {
    let gate = QubitGate::hadamard();
    let profile = airy_profile(1.0, 1.0)?;
    println!("{:>10} {:>6} {:>12} {:>22} {:>22} {:>22}", "delta", "T", "<E>/omega", "eps exact", "eps closed", "s * UD");
    for k in 2..=7 {
        let delta = 0.5f64.powi(k);
        let state = sample_ansatz(&profile, delta, None, 1.0)?;
        let r = state.resources();
        println!(
            "{delta:>10.6} {:>6} {:>12.4} {:>22.15e} {:>22.15e} {:>22.15e}",
            r.truncation,
            r.mean_energy,
            target_copy_infidelity(&state, &gate)?,
            choi_infidelity_closed(&state, &gate),
            gate.v01_sq() * r.discrete_ud,
        );
    }
    Ok(())
}
