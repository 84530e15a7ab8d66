//! Coherent battery states against the Airy optimum at equal mean energy.

use battery_gates::battery::{poisson_state, poisson_truncation};
use battery_gates::channel::target_copy_infidelity;
use battery_gates::gates::QubitGate;
use battery_gates::variational::{optimal_state, Resource};

fn main() -> battery_gates::Result<()> {
    let g = QubitGate::hadamard();
    println!("{:>8} {:>10} {:>16} {:>16} {:>10}", "alpha", "<E>", "eps coherent", "eps airy", "ratio");
    for alpha in [3.0, 5.0, 10.0, 20.0, 30.0] {
        let c = poisson_state(alpha, 1.0, poisson_truncation(alpha))?;
        let e = c.resources().mean_energy;
        let eps_c = target_copy_infidelity(&c, &g)?;
        let a = optimal_state(Resource::MeanEnergy, e, 1.0)?;
        let eps_a = target_copy_infidelity(&a.state, &g)?;
        println!("{alpha:>8} {e:>10.2} {eps_c:>16.6e} {eps_a:>16.6e} {:>10.2}", eps_c / eps_a);
    }
    Ok(())
}
