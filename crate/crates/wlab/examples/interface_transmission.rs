//! Sends a Gaussian pulse through a high-contrast material lens and checks
//! the transmission condition at the interface. The quantity that is
//! continuous across the lens boundary is the combined normal flux
//!
//!   (1/rho) grad u + b ((1 - delta) + delta |grad v|^{q-1}) grad v,
//!
//! not the elastic part alone. The example measures both one-sided flux
//! mismatches on the final state: the combined jump is small and shrinks
//! under refinement, while the elastic-only jump settles at the genuinely
//! nonzero value that the damping flux balances.

use wlab::grid::GridFunction;
use wlab::harness::run_scenario_to_dir;
use wlab::model::build_material_field;
use wlab::regularity::{flux_jump_residual, piecewise_h2};
use wlab::{gallery, simulate};

fn main() {
    let entry = gallery::lookup("coupled-1d-rho10").expect("curated scenario set");
    let base = (entry.build)();
    println!("scenario: {} ({})", entry.name, entry.summary);
    println!(
        "density jump: rho = {} outside, {} inside the lens\n",
        base.material_minus.rho, base.material_plus.rho
    );

    let out = std::path::Path::new("examples-out/interface-transmission");
    let traj = run_scenario_to_dir(&base, out).expect("write artifact set");
    assert!(traj.failure.is_none());
    println!(
        "base run: {} steps, E(0) = {:.6e}, E(T) = {:.6e}, worst ledger residual {:.3e}",
        traj.completed_steps(),
        traj.initial_energy,
        traj.monitors.last().unwrap().energy,
        traj.max_balance_residual()
    );

    println!(
        "\n{:>6} {:>16} {:>16} {:>14} {:>14}",
        "n", "combined jump", "elastic-only", "straddle H2^2", "per-side H2^2"
    );
    for level in 0..3 {
        let mut s = base.clone();
        s.grid_n = base.grid_n << level;
        let t = simulate(&s).expect("refined scenario stays valid");
        assert!(t.failure.is_none());
        let mat = build_material_field(&s);
        let state = t.final_state();
        let combined = flux_jump_residual(&state.u, &state.v, &mat, s.q).unwrap();
        // Zero velocity removes the damping term, leaving the elastic
        // one-sided mismatch of the same displacement field.
        let rest = GridFunction::zeros(t.grid);
        let elastic = flux_jump_residual(&state.u, &rest, &mat, s.q).unwrap();
        let pw = piecewise_h2(&state.u, &mat);
        println!(
            "{:>6} {:>16.6e} {:>16.6e} {:>14.4} {:>14.4}",
            s.grid_n,
            combined,
            elastic,
            pw.straddle_sq,
            pw.minus_sq + pw.plus_sq
        );
    }

    println!("\nreading the table:");
    println!("  the combined jump shrinks roughly in half per refinement,");
    println!("  the elastic-only jump does not: its limit is the damping-flux jump,");
    println!("  the straddling second-derivative energy grows like 1/h (the kink),");
    println!("  the same-side second-derivative energy stays bounded.");
    println!("\nartifacts: {}", out.display());
}
