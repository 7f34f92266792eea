//! Run artifacts: per-step monitor tables, the cumulative energy ledger,
//! inequality battery tables, state snapshots, and a key=value manifest.
//! Every writer goes through the deterministic float formatter, so equal
//! runs produce byte-equal files.

use crate::config::scenario_hash;
use crate::grid::fmt_f64;
use crate::model::Scenario;
use crate::qlaplace::InequalityReport;
use crate::solver::{StepMonitor, Trajectory};
use std::io;
use std::path::Path;

pub const MONITORS_CSV_HEADER: &str = "step,t,picard_iters,min_mass_factor,energy,dissipation_increment,balance_residual,m_bar_running,M_bar_running";

pub const ENERGY_CSV_HEADER: &str =
    "step,t,energy,dissipation_total,source_total,balance_residual";

/// Cell count at and above which 2D snapshots switch from CSV to the
/// binary layout.
pub const BINARY_SNAPSHOT_THRESHOLD: usize = 65536;

pub fn monitors_csv_string(rows: &[StepMonitor]) -> String {
    let mut out = String::from(MONITORS_CSV_HEADER);
    out.push('\n');
    for m in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            m.step,
            fmt_f64(m.t),
            m.picard_iters,
            fmt_f64(m.min_mass_factor),
            fmt_f64(m.energy),
            fmt_f64(m.dissipation_increment),
            fmt_f64(m.balance_residual),
            fmt_f64(m.m_bar_running),
            fmt_f64(m.big_m_bar_running),
        ));
    }
    out
}

pub fn energy_csv_string(rows: &[StepMonitor]) -> String {
    let mut out = String::from(ENERGY_CSV_HEADER);
    out.push('\n');
    let mut dissipation_total = 0.0;
    let mut source_total = 0.0;
    for m in rows {
        dissipation_total += m.dissipation_increment;
        source_total += m.source_increment;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            m.step,
            fmt_f64(m.t),
            fmt_f64(m.energy),
            fmt_f64(dissipation_total),
            fmt_f64(source_total),
            fmt_f64(m.balance_residual),
        ));
    }
    out
}

pub fn inequalities_csv_string(reports: &[InequalityReport]) -> String {
    let mut out = String::from(InequalityReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn write_monitors_csv(path: &Path, rows: &[StepMonitor]) -> io::Result<()> {
    std::fs::write(path, monitors_csv_string(rows))
}

pub fn write_energy_csv(path: &Path, rows: &[StepMonitor]) -> io::Result<()> {
    std::fs::write(path, energy_csv_string(rows))
}

pub fn write_inequalities_csv(path: &Path, reports: &[InequalityReport]) -> io::Result<()> {
    std::fs::write(path, inequalities_csv_string(reports))
}

/// Snapshot file name for one field at one step; the extension encodes
/// the layout.
pub fn snapshot_file_name(field: &str, step: usize, binary: bool) -> String {
    format!("{field}_{step:06}.{}", if binary { "bin" } else { "csv" })
}

/// Writes `u` and `v` snapshots for every recorded step. Large 2D grids
/// use the binary layout; everything else is CSV. Returns the file names
/// in write order.
pub fn write_snapshots(dir: &Path, traj: &Trajectory) -> io::Result<Vec<String>> {
    let binary =
        traj.grid.dim == 2 && traj.grid.num_cells() >= BINARY_SNAPSHOT_THRESHOLD;
    let mut names = Vec::new();
    for (step, state) in &traj.snapshots {
        for (field, gf) in [("u", &state.u), ("v", &state.v)] {
            let name = snapshot_file_name(field, *step, binary);
            let mut file = io::BufWriter::new(std::fs::File::create(dir.join(&name))?);
            if binary {
                gf.write_binary(state.t, &mut file)?;
            } else {
                gf.write_csv(&mut file)?;
            }
            io::Write::flush(&mut file)?;
            names.push(name);
        }
    }
    Ok(names)
}

/// Manifest lines for a completed (or aborted) run: sorted `key=value`
/// text with no timestamps or machine identifiers, so identical runs
/// produce identical manifests.
pub fn manifest_string(s: &Scenario, traj: &Trajectory, snapshot_files: usize) -> String {
    let mut lines = vec![
        format!("scenario_hash={}", scenario_hash(s)),
        format!("dim={}", s.dim),
        format!("grid_n={}", s.grid_n),
        format!("dt={}", fmt_f64(s.dt)),
        format!("t_end={}", fmt_f64(s.t_end)),
        format!("q={}", fmt_f64(s.q)),
        format!("steps_planned={}", s.num_steps()),
        format!("steps_completed={}", traj.completed_steps()),
        format!(
            "failure={}",
            match &traj.failure {
                None => "none".to_string(),
                Some(e) => e.to_string().replace('\n', " "),
            }
        ),
        format!("initial_energy={}", fmt_f64(traj.initial_energy)),
        format!(
            "final_energy={}",
            fmt_f64(traj.monitors.last().map(|m| m.energy).unwrap_or(traj.initial_energy))
        ),
        format!("max_balance_residual={}", fmt_f64(traj.max_balance_residual())),
        format!("wset_m_bar={}", fmt_f64(traj.wset.m_bar)),
        format!("wset_M_bar={}", fmt_f64(traj.wset.big_m_bar)),
        format!("wset_utt_l2l2_sq={}", fmt_f64(traj.wset.utt_l2l2_sq)),
        format!("wset_a0_surrogate={}", fmt_f64(traj.wset.a0_surrogate)),
        format!("min_mass_factor={}", fmt_f64(traj.wset.min_mass_factor)),
        format!("snapshot_files={snapshot_files}"),
    ];
    lines.sort();
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

pub fn write_manifest(
    path: &Path,
    s: &Scenario,
    traj: &Trajectory,
    snapshot_files: usize,
) -> io::Result<()> {
    std::fs::write(path, manifest_string(s, traj, snapshot_files))
}
