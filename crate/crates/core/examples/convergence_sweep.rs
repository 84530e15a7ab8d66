//! Delta sweep of the Hermite profile written as CSV, the same table `battery-gates sweep` produces.

use battery_gates::cli::{run_sweep, ProfileSpec, SweepSpec, SweepVariable};
use battery_gates::gates::QubitGate;
use std::io::Write;

fn main() -> battery_gates::Result<()> {
    let spec = SweepSpec {
        variable: SweepVariable::Delta,
        grid: (2..=7).map(|k| 0.5f64.powi(k)).collect(),
        gate: QubitGate::hadamard().to_spec(),
        profile: Some(ProfileSpec::Hermite1 { mean_sq_energy: 1.0 }),
        outputs: ["param", "levels", "mean_sq_energy", "eps_c_exact", "eps_times_esq"].iter().map(|s| s.to_string()).collect(),
        seed: 0,
        omega: 1.0,
        restarts: None,
    };
    let table = run_sweep(&spec)?;
    std::io::stdout().write_all(&table.to_csv()?)?;
    Ok(())
}
