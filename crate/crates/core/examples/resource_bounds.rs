//! Minimal energy, second moment and level count for a target infidelity, and the floor of a given state.

use battery_gates::gates::QubitGate;
use battery_gates::spectral::optimal_sine_state;
use battery_gates::variational::{intrinsic_error, resource_bounds};

fn main() -> battery_gates::Result<()> {
    let g = QubitGate::hadamard();
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        let b = resource_bounds(eps, g.v01(), 1.0)?;
        println!(
            "eps = {eps:.0e}: <E> >= {:.2}, <E^2> >= {:.2}, N >= {:.2}",
            b.mean_energy_min, b.mean_sq_energy_min, b.levels_min
        );
    }
    let floor = intrinsic_error(&optimal_sine_state(100, 1.0)?.resources())?;
    println!("sine state on 100 levels: eps / |V01|^2 >= {:.4e}", floor.floor);
    Ok(())
}
