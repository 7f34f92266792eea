//! Measures order of accuracy against manufactured standing modes. The
//! scheme is second order in space and time together (the study halves dt
//! with h), and the order survives turning on both nonlinearities: the
//! quadratic state coupling k and the degenerate damping exponent q.

use wlab::harness::{
    convergence_csv_string, convergence_scenario, convergence_study, ConvergenceArgs,
    ConvergenceRow,
};

fn print_table(tag: &str, rows: &[ConvergenceRow]) {
    println!("{tag}");
    println!("{:>8} {:>12} {:>14} {:>14} {:>8}", "n", "dt", "l2 error", "linf error", "order");
    for r in rows {
        println!(
            "{:>8} {:>12.6} {:>14.6e} {:>14.6e} {:>8}",
            r.n,
            r.dt,
            r.l2_error,
            r.linf_error,
            r.order.map(|o| format!("{o:.3}")).unwrap_or_default()
        );
    }
    println!();
}

fn run(tag: &str, args: &ConvergenceArgs, file: &str) -> Vec<ConvergenceRow> {
    let base = convergence_scenario(args).expect("known manufactured solution");
    let rows = convergence_study(&base, args.levels).expect("study completes");
    print_table(tag, &rows);
    let out = std::path::Path::new("examples-out/convergence-study");
    std::fs::create_dir_all(out).expect("create output directory");
    std::fs::write(out.join(file), convergence_csv_string(&rows)).expect("write order table");
    rows
}

fn main() {
    let linear_1d = ConvergenceArgs { levels: 4, ..ConvergenceArgs::default() };
    let rows = run("linear damping, 1d (k = 0, q = 1)", &linear_1d, "linear-1d.csv");
    assert!(rows.last().unwrap().order.unwrap() >= 1.9);

    let nonlinear_1d = ConvergenceArgs { k: 1.0, q: 3.0, levels: 3, ..ConvergenceArgs::default() };
    let rows = run(
        "quadratic coupling and degenerate damping, 1d (k = 1, q = 3)",
        &nonlinear_1d,
        "nonlinear-1d.csv",
    );
    assert!(rows.last().unwrap().order.unwrap() >= 1.9);

    // In two dimensions the damping exponent must exceed dim - 1, so the
    // smallest admissible integer exponent stands in for the linear case.
    let linear_2d = ConvergenceArgs {
        solution: "standing-2d".into(),
        base_n: 16,
        base_dt: 0.005,
        t_end: 0.05,
        levels: 3,
        k: 0.0,
        q: 2.0,
        out: None,
    };
    let rows = run("two dimensions (k = 0, q = 2)", &linear_2d, "linear-2d.csv");
    assert!(rows.last().unwrap().order.unwrap() >= 1.9);

    println!("order tables: examples-out/convergence-study/");
}
