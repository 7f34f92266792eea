//! Walks through the discrete energy identity on a linear damped wave.
//! Each implicit midpoint step satisfies, in exact arithmetic,
//!
//!   E(t_new) - E(t_old) + D_step = S_step
//!
//! where E is the kinetic-plus-elastic energy, D_step the damping
//! dissipation of the step, and S_step the work done by sources and
//! boundary data. Without forcing and without the quadratic nonlinearity
//! the source side vanishes, so the energy must fall monotonically and the
//! ledger residual measures nothing but solver and rounding error.

use wlab::gallery;
use wlab::harness::{balance_threshold, run_scenario_to_dir};

fn main() {
    let entry = gallery::lookup("linear-1d").expect("curated scenario set");
    let scenario = (entry.build)();
    let out = std::path::Path::new("examples-out/energy-ledger");
    let traj = run_scenario_to_dir(&scenario, out).expect("write artifact set");
    assert!(traj.failure.is_none(), "the linear wave runs to completion");

    println!("scenario: {} ({})\n", entry.name, entry.summary);
    println!("E(0) = {:.12e}", traj.initial_energy);
    println!(
        "\n{:>4} {:>12} {:>14} {:>14} {:>12}",
        "step", "t", "energy", "dissipation", "residual"
    );
    let show = |i: usize| {
        let m = &traj.monitors[i];
        println!(
            "{:>4} {:>12.6} {:>14.8e} {:>14.6e} {:>12.3e}",
            m.step, m.t, m.energy, m.dissipation_increment, m.balance_residual
        );
    };
    for i in 0..4.min(traj.monitors.len()) {
        show(i);
    }
    println!("{:>4}", "...");
    show(traj.monitors.len() - 1);

    let threshold = balance_threshold(traj.initial_energy);
    let worst = traj.max_balance_residual();
    println!("\nledger residual: worst |E_new - E_old + D - S| = {worst:.3e}");
    println!("threshold (1e-8 of E(0), floored at 1e-14) = {threshold:.3e}");
    assert!(worst <= threshold, "the ledger closes to solver tolerance");

    let mut prev = traj.initial_energy;
    let mut max_gain = f64::NEG_INFINITY;
    for m in &traj.monitors {
        max_gain = max_gain.max(m.energy - prev);
        prev = m.energy;
    }
    println!("largest single-step energy change = {max_gain:.3e} (must be <= 0)");
    assert!(max_gain <= 0.0, "no source, no nonlinearity: energy cannot rise");

    let total_dissipated: f64 = traj.monitors.iter().map(|m| m.dissipation_increment).sum();
    let final_energy = traj.monitors.last().unwrap().energy;
    println!(
        "\nbalance over the whole run: E(0) - E(T) = {:.6e}, total dissipation = {:.6e}",
        traj.initial_energy - final_energy,
        total_dissipated
    );
    println!("artifacts (monitors.csv, energy.csv, snapshots): {}", out.display());
}
