//! Optimal battery states for each resource budget, with predicted and achieved unitary defect.

use battery_gates::variational::{optimal_state, Resource};

fn main() -> battery_gates::Result<()> {
    let cases = [
        (Resource::MeanEnergy, 50.0),
        (Resource::MeanSqEnergy, 2500.0),
        (Resource::NLevels, 64.0),
        (Resource::Qfi, 400.0),
    ];
    for (resource, budget) in cases {
        let o = optimal_state(resource, budget, 1.0)?;
        let r = o.resources;
        println!(
            "{resource:?} budget {budget}: profile {}, levels {}, <E> = {:.3}, <E^2> = {:.3}, F = {:.3}, UD predicted {:.6e}, sampled {:.6e}",
            o.profile, r.levels, r.mean_energy, r.mean_sq_energy, r.qfi, o.predicted_ud, r.discrete_ud
        );
    }
    Ok(())
}
