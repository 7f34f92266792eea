//! Samples all eight inequality forms that back the damping estimates and
//! prints a verdict table. Five forms must hold at every sampled point;
//! two as-stated forms and one as-stated Young variant are kept in their
//! broken shape on purpose, and the battery prints a concrete
//! counterexample for each next to the repaired form that replaces it.

use wlab::qlaplace::{
    check_inequality, evaluate, InequalityId, SampleConfig, ALL_INEQUALITIES,
};
use wlab::report;

fn main() {
    let cfg = SampleConfig { rng_seed: 0, samples: 200_000, ..SampleConfig::default() };
    println!(
        "battery: {} samples per inequality, q in [{}, {}], |x|, |y| <= {}, dims {:?}\n",
        cfg.samples, cfg.q_range.0, cfg.q_range.1, cfg.magnitude_max, cfg.dims
    );
    println!(
        "{:<16} {:>10} {:>14}  {}",
        "id", "violations", "worst margin", "verdict"
    );

    let mut reports = Vec::new();
    for id in ALL_INEQUALITIES {
        let rep = check_inequality(id, &cfg);
        let verdict = match (id.must_hold(), rep.violations > 0) {
            (true, false) => "holds (and must)",
            (true, true) => "BROKEN must-hold form",
            (false, true) => "fails as stated",
            (false, false) => "no counterexample found",
        };
        println!(
            "{:<16} {:>10} {:>14.3e}  {}",
            id.name(),
            rep.violations,
            rep.worst_margin,
            verdict
        );
        reports.push(rep);
    }

    // Show one witness in full: the as-stated two-point bound loses to its
    // own q = 1 edge, where the claimed gap constant is off by the factor
    // the repaired monotone form restores.
    let broken = reports
        .iter()
        .find(|r| r.id == InequalityId::TwoThreeAsStated)
        .expect("battery covers every id");
    if broken.violations > 0 {
        let w = broken.witness;
        let e = evaluate(InequalityId::TwoThreeAsStated, &w);
        println!("\nwitness for the as-stated two-point bound (dim {}):", w.x.dim);
        println!("  x = {:?}", &w.x.comps[..w.x.dim]);
        println!("  y = {:?}", &w.y.comps[..w.y.dim]);
        println!("  q = {:.4}", w.q);
        println!("  quantity minus claimed lower bound = {:.6e} (negative: violated)", e.residual);
        let m = evaluate(InequalityId::TwoThreeMonotone, &w);
        println!("  repaired monotone form margin at the same point = {:.6e}", m.residual);
    }

    let out = std::path::Path::new("examples-out/inequality-battery");
    std::fs::create_dir_all(out).expect("create output directory");
    let csv = out.join("battery.csv");
    report::write_inequalities_csv(&csv, &reports).expect("write battery table");
    println!("\nfull table with witnesses: {}", csv.display());
}
