//! Airy constants of the mean-energy problem, computed and quoted.

use battery_gates::variational::{compute_constants, QUOTED_CONSTANTS};

fn main() -> battery_gates::Result<()> {
    let c = compute_constants()?;
    let q = QUOTED_CONSTANTS;
    let rows = [
        ("x0", c.airy_root, q.airy_root),
        ("C", c.cbar, q.cbar),
        ("C1", c.c1, q.c1),
        ("C2", c.c2, q.c2),
        ("eta", c.eta, q.eta),
        ("eta^2", c.eta_sq, q.eta_sq),
        ("eta'", c.eta_prime, q.eta_prime),
    ];
    println!("{:<6} {:>20} {:>8}", "name", "computed", "quoted");
    for (n, a, b) in rows {
        println!("{n:<6} {a:>20.15} {b:>8}");
    }
    Ok(())
}
