//! Ground-level penalty and the uniform-angle interaction bound.

use battery_gates::battery::BatteryState;
use battery_gates::channel::{
    choi_infidelity_exact, ground_state_penalty, interaction_lower_bound, kraus_set, quoted_ground_state_penalty,
    target_copy_infidelity, uniform_angle_unitary, BlockPhases,
};
use battery_gates::gates::QubitGate;

fn main() -> battery_gates::Result<()> {
    for theta in [0.1, 0.4, std::f64::consts::FRAC_PI_4, 1.2] {
        let g = QubitGate::from_angles(theta, 0.0, 0.0)?;
        println!(
            "theta = {theta:.3}: eta = {:.4}, quoted closed form {:.4}",
            ground_state_penalty(&g).eta,
            quoted_ground_state_penalty(&g)
        );
    }

    let g = QubitGate::from_angles(0.5, 0.0, 0.0)?;
    let occupied = BatteryState::from_real(1.0, &[0.5, 0.6, 0.6, 0.1732])?;
    let p0 = occupied.amp(0).norm_sqr();
    println!("ground population {p0:.3}: eps_C = {:.4} >= {:.4}", target_copy_infidelity(&occupied, &g)?, ground_state_penalty(&g).eta * p0);

    let state = BatteryState::from_real(1.0, &[0.0, 0.5, 0.7, 0.5])?;
    let a = g.angles();
    let phases = vec![BlockPhases { alpha: a.phase, gamma: a.gamma, delta: a.delta }; state.truncation()];
    for theta_bar in [0.4, 0.5, 0.6] {
        let u = uniform_angle_unitary(theta_bar, &phases)?;
        let eps = choi_infidelity_exact(&kraus_set(&u, &state)?, &g.dmatrix())?;
        println!("theta_bar = {theta_bar}: eps_C = {eps:.5}, bound {:.5}", interaction_lower_bound(a.theta, theta_bar, &state)?);
    }
    Ok(())
}
