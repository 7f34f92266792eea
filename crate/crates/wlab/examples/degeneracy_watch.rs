//! Drives a run into mass-factor collapse and shows what the monitors
//! record on the way down. The effective mass in front of the second time
//! derivative is (1 - 2 k u) / lambda; when the amplitude grows toward
//! 1 / (2 k) the factor heads to zero and the problem leaves its
//! well-posed regime. The stepper aborts at a configurable floor instead
//! of stepping across the sign change, and the completed prefix of the
//! run stays usable.

use wlab::gallery;
use wlab::harness::run_scenario_to_dir;
use wlab::solver::{simulate, SolverError};

fn main() {
    let entry = gallery::lookup("degenerate-blowup").expect("curated scenario set");
    let scenario = (entry.build)();
    println!("scenario: {} ({})", entry.name, entry.summary);
    println!(
        "k = {}, degeneracy floor = {}, initial velocity amplitude = {}\n",
        scenario.material_minus.k, scenario.solver.degeneracy_floor, scenario.u1.amplitude
    );

    let out = std::path::Path::new("examples-out/degeneracy-watch");
    let traj = run_scenario_to_dir(&scenario, out).expect("write artifact set");

    println!("{:>4} {:>10} {:>16} {:>14}", "step", "t", "min mass factor", "energy");
    for m in &traj.monitors {
        println!("{:>4} {:>10.4} {:>16.4} {:>14.6e}", m.step, m.t, m.min_mass_factor, m.energy);
    }

    let failure = traj.failure.as_ref().expect("this scenario is built to abort");
    println!("\nabort: {failure}");
    match failure {
        SolverError::Degeneracy { step, min_factor, floor, .. } => {
            assert!(min_factor < floor);
            println!(
                "the run stopped at step {step} with {} completed steps tabulated",
                traj.completed_steps()
            );
        }
        other => panic!("expected a degeneracy abort, got {other}"),
    }

    // The same failure is reproducible: the abort step is part of the
    // run's identity, not an accident of scheduling.
    let again = simulate(&scenario).expect("scenario is valid");
    assert_eq!(
        format!("{failure}"),
        format!("{}", again.failure.expect("aborts every time")),
        "repeated runs abort identically"
    );

    // Small data stays far from the floor: the companion scenario keeps
    // its mass factor above 0.9 for the whole run.
    let small = (gallery::lookup("nonlinear-1d").unwrap().build)();
    let ok = simulate(&small).unwrap();
    assert!(ok.failure.is_none());
    let worst = ok.monitors.iter().fold(f64::INFINITY, |m, r| m.min(r.min_mass_factor));
    println!("\ncompanion small-data run: worst mass factor {worst:.4}, no abort");
    println!(
        "surrogate bound: 1 - 2 max|k| max|u| = {:.4} <= {:.4}",
        1.0 - ok.wset.a0_surrogate,
        ok.wset.min_mass_factor
    );
    println!("\nartifacts (including the completed prefix of the abort): {}", out.display());
}
