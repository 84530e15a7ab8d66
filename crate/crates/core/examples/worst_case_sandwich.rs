//! Worst-case infidelity estimate against the Choi infidelity for a battery channel and phase gates.

use battery_gates::channel::{
    choi_infidelity_exact, kraus_set, sandwich_check, target_copy_unitary, worst_case_infidelity, KrausSet, WorstCaseOptions,
};
use battery_gates::gates::{QubitGate, QuditGate};
use battery_gates::spectral::optimal_sine_state;

fn main() -> battery_gates::Result<()> {
    let gate = QubitGate::hadamard();
    let state = optimal_sine_state(16, 1.0)?;
    let k = kraus_set(&target_copy_unitary(&gate, 16)?, &state)?;
    let eps_c = choi_infidelity_exact(&k, &gate.dmatrix())?;
    let wc = worst_case_infidelity(&k, &gate.dmatrix(), WorstCaseOptions { restarts: 32, seed: 1, ..Default::default() })?;
    println!("battery channel: eps_C = {eps_c:.6e}, eps_wc >= {:.6e} (restart {}), sandwich {}", wc.value, wc.restart, sandwich_check(wc.value, eps_c, 2));

    // Identity channel against a small phase gate: the ratio approaches d/2.
    for d in 2..=5 {
        let v = QuditGate::phase_gate(d, 1e-3)?;
        let id = KrausSet::identity(d);
        let c = choi_infidelity_exact(&id, v.matrix())?;
        let w = worst_case_infidelity(&id, v.matrix(), WorstCaseOptions { restarts: 16, seed: 7, ..Default::default() })?;
        println!("phase gate d = {d}: eps_wc / eps_C = {:.5}", w.value / c);
    }
    Ok(())
}
