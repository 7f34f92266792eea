//! Implicit midpoint time stepping for the damped nonlinear wave model.
//!
//! Each step solves one symmetric positive definite system for the midpoint
//! velocity, with the state-dependent mass factor and the gradient-dependent
//! damping coefficient frozen by Picard sweeps. The update is arranged so
//! that an exact discrete energy identity holds: the step-to-step change of
//! the energy functional equals source work minus dissipation, up to solver
//! tolerances, and the residual of that identity is monitored every step.

use crate::grid::{FaceField, Grid, GridFunction};
use crate::mms::{self, ManufacturedSolution};
use crate::model::{
    build_material_field, validate_scenario, BoundaryCondition, MaterialField, Scenario,
    Violation,
};
use crate::pcg;
use thiserror::Error;

/// Iteration controls. `linear_max_iters` defaults to ten times the number
/// of unknowns when unset. `degeneracy_floor` is the smallest admissible
/// value of the mass factor `1 - 2 k u`; crossing it aborts the run rather
/// than continuing past the loss of positivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub linear_tol: f64,
    pub linear_max_iters: Option<usize>,
    pub degeneracy_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            picard_tol: 1e-12,
            picard_max_iters: 50,
            linear_tol: 1e-12,
            linear_max_iters: None,
            degeneracy_floor: 0.1,
        }
    }
}

impl SolverConfig {
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |field: &str, msg: String| {
            out.push(Violation { field: format!("solver.{field}"), message: msg })
        };
        if !(self.picard_tol > 0.0) {
            push("picard_tol", "must be positive".into());
        }
        if self.picard_max_iters == 0 {
            push("picard_max_iters", "must be at least 1".into());
        }
        if !(self.linear_tol > 0.0) {
            push("linear_tol", "must be positive".into());
        }
        if let Some(m) = self.linear_max_iters {
            if m == 0 {
                push("linear_max_iters", "must be at least 1 when set".into());
            }
        }
        if !(self.degeneracy_floor > 0.0 && self.degeneracy_floor <= 1.0) {
            push("degeneracy_floor", format!("must lie in (0, 1], got {}", self.degeneracy_floor));
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("mass factor reached {min_factor:.6} at step {step} (t = {t:.6}), below the floor {floor}")]
    Degeneracy { step: usize, t: f64, min_factor: f64, floor: f64 },
    #[error("coefficient freeze did not settle at step {step} (t = {t:.6}): update {delta:.3e} after {iters} sweeps (tol {tol:.1e})")]
    PicardStall { step: usize, t: f64, iters: usize, delta: f64, tol: f64 },
    #[error("linear solve stalled at step {step} (t = {t:.6}): residual {residual:.3e} after {iters} iterations")]
    LinearStall { step: usize, t: f64, iters: usize, residual: f64 },
}

/// Displacement and velocity at one instant.
#[derive(Debug, Clone)]
pub struct WaveState {
    pub t: f64,
    pub u: GridFunction,
    pub v: GridFunction,
}

/// Per-step diagnostics, one row of `monitors.csv`.
#[derive(Debug, Clone, Copy)]
pub struct StepMonitor {
    pub step: usize,
    pub t: f64,
    pub picard_iters: usize,
    pub min_mass_factor: f64,
    pub energy: f64,
    pub dissipation_increment: f64,
    pub source_increment: f64,
    pub balance_residual: f64,
    pub m_bar_running: f64,
    pub big_m_bar_running: f64,
}

/// Accumulated solution-class norms over a run: the largest velocity
/// gradient, the space-time damping norm, the accumulated squared
/// acceleration, and the degeneracy surrogate `2 max|k| max|u|`.
#[derive(Debug, Clone, Copy)]
pub struct WsetReport {
    pub m_bar: f64,
    pub big_m_bar: f64,
    pub utt_l2l2_sq: f64,
    pub a0_surrogate: f64,
    pub min_mass_factor: f64,
    pub max_abs_u: f64,
}

#[derive(Debug)]
pub struct Trajectory {
    pub grid: Grid,
    pub initial_energy: f64,
    /// Snapshots at step 0, every `snapshot_stride` steps, and the final
    /// completed step.
    pub snapshots: Vec<(usize, WaveState)>,
    pub monitors: Vec<StepMonitor>,
    pub wset: WsetReport,
    pub failure: Option<SolverError>,
}

impl Trajectory {
    pub fn final_state(&self) -> &WaveState {
        &self.snapshots.last().expect("trajectory always holds the initial state").1
    }

    pub fn max_balance_residual(&self) -> f64 {
        self.monitors.iter().fold(0.0, |m, r| m.max(r.balance_residual.abs()))
    }

    pub fn completed_steps(&self) -> usize {
        self.monitors.len()
    }
}

struct StepOutcome {
    state: WaveState,
    picard_iters: usize,
    min_mass_factor: f64,
    dissipation_increment: f64,
    source_increment: f64,
    grad_v1_l2: f64,
    damping_norm_pow: f64,
    utt_sq_increment: f64,
}

/// Precomputed scenario data plus the step kernel.
pub struct Stepper {
    pub grid: Grid,
    pub mat: MaterialField,
    q: f64,
    dt: f64,
    bc: BoundaryCondition,
    extent: [f64; 2],
    dim: usize,
    cfg: SolverConfig,
    /// Harmonic-mean face values of `1 / rho`.
    kappa_face: FaceField,
    inv_lambda: Vec<f64>,
    k_cell: Vec<f64>,
    mms: Option<&'static ManufacturedSolution>,
    lin_max: usize,
}

impl Stepper {
    /// Builds the kernel for an already validated scenario.
    pub fn new(s: &Scenario) -> Stepper {
        let grid = s.grid();
        let mat = build_material_field(s);
        let kappa_cells: Vec<f64> = mat.cells.iter().map(|p| 1.0 / p.rho).collect();
        let kappa_face = crate::ops::face_coefficients(grid, &kappa_cells)
            .expect("positive rho was validated");
        let inv_lambda = mat.cells.iter().map(|p| 1.0 / p.lambda).collect();
        let k_cell = mat.cells.iter().map(|p| p.k).collect();
        let mms = s.source_mms.as_deref().and_then(mms::lookup);
        let lin_max = s.solver.linear_max_iters.unwrap_or(10 * grid.num_cells());
        Stepper {
            grid,
            mat,
            q: s.q,
            dt: s.dt,
            bc: s.bc,
            extent: s.extent,
            dim: s.dim,
            cfg: s.solver,
            kappa_face,
            inv_lambda,
            k_cell,
            mms,
            lin_max,
        }
    }

    pub fn initial_state(&self, s: &Scenario) -> WaveState {
        match self.mms {
            Some(ms) => WaveState {
                t: 0.0,
                u: mms::exact_u(ms, self.grid, 0.0),
                v: mms::exact_v(ms, self.grid, 0.0),
            },
            None => WaveState { t: 0.0, u: s.initial_u(), v: s.initial_v() },
        }
    }

    fn is_dirichlet(&self) -> bool {
        matches!(self.bc, BoundaryCondition::Dirichlet)
    }

    /// Quadrature weight for a face: full cell volume inside, half at
    /// Dirichlet boundary faces (where the mirror ghost halves the pairing),
    /// zero at Neumann boundary faces (their flux is data, not state).
    fn face_weight(&self, r: usize, a: usize) -> f64 {
        let vol = self.grid.cell_volume();
        if a == 0 || a == self.grid.n[r] {
            if self.is_dirichlet() {
                0.5 * vol
            } else {
                0.0
            }
        } else {
            vol
        }
    }

    /// Face-normal gradient honoring the velocity/displacement boundary
    /// treatment: mirror ghosts under Dirichlet, unused (zero) boundary
    /// values under Neumann.
    fn bc_gradient(&self, w: &GridFunction) -> FaceField {
        let mut g = crate::ops::gradient(
            w,
            if self.is_dirichlet() {
                crate::ops::GradientBc::Dirichlet
            } else {
                crate::ops::GradientBc::Neumann
            },
        );
        if !self.is_dirichlet() {
            for r in 0..self.grid.dim {
                let n = self.grid.n[r];
                let transverse = if self.grid.dim == 1 { 1 } else { self.grid.n[1 - r] };
                for t in 0..transverse {
                    for a in [0, n] {
                        let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                        *g.at_mut(r, i, j) = 0.0;
                    }
                }
            }
        }
        g
    }

    /// Gradient magnitude at a face: normal component plus, in 2D, the
    /// average of the four surrounding transverse differences.
    fn face_gradient_magnitude(&self, grad: &FaceField, r: usize, i: usize, j: usize) -> f64 {
        let normal = grad.at(r, i, j);
        if self.grid.dim == 1 {
            return normal.abs();
        }
        let s = 1 - r;
        let mut tang = 0.0;
        let mut count = 0.0;
        let a = if r == 0 { i } else { j };
        // Cells left and right of the face along the normal axis.
        for cell_a in [a.wrapping_sub(1), a] {
            if cell_a >= self.grid.n[r] {
                continue;
            }
            let (ci, cj) = if r == 0 { (cell_a, j) } else { (i, cell_a) };
            let (lo, hi) = if s == 0 { ((ci, cj), (ci + 1, cj)) } else { ((ci, cj), (ci, cj + 1)) };
            tang += grad.at(s, lo.0, lo.1) + grad.at(s, hi.0, hi.1);
            count += 2.0;
        }
        if count > 0.0 {
            tang /= count;
        }
        (normal * normal + tang * tang).sqrt()
    }

    /// Damping coefficient on faces, frozen at the supplied velocity
    /// gradient: per side `b (1 + delta (G^(q-1) - 1))`, harmonic mean
    /// across the face so coefficient jumps at the interface are handled
    /// like the stiffness.
    fn damping_face_coef(&self, grad_v: &FaceField) -> FaceField {
        let g = self.grid;
        let mut out = FaceField::zeros(g);
        for r in 0..g.dim {
            let n = g.n[r];
            let transverse = if g.dim == 1 { 1 } else { g.n[1 - r] };
            for t in 0..transverse {
                for a in 0..=n {
                    let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                    let mag = self.face_gradient_magnitude(grad_v, r, i, j);
                    let amp = if self.q == 1.0 { 1.0 } else { mag.powf(self.q - 1.0) };
                    let side = |cell_a: usize| -> f64 {
                        let (ci, cj) = if r == 0 { (cell_a, t) } else { (t, cell_a) };
                        let p = self.mat.params(g.cell_index(ci, cj));
                        p.b * (1.0 + p.delta * (amp - 1.0))
                    };
                    let val = if a == 0 {
                        side(0)
                    } else if a == n {
                        side(n - 1)
                    } else {
                        let (l, rgt) = (side(a - 1), side(a));
                        2.0 * l * rgt / (l + rgt)
                    };
                    *out.at_mut(r, i, j) = val;
                }
            }
        }
        out
    }

    /// Energy functional: half the mass-weighted velocity square plus half
    /// the stiffness-weighted squared face gradients of the displacement.
    pub fn energy(&self, st: &WaveState) -> f64 {
        let vol = self.grid.cell_volume();
        let mut kin = 0.0;
        for idx in 0..self.grid.num_cells() {
            let mass = 1.0 - 2.0 * self.k_cell[idx] * st.u.values[idx];
            kin += vol * self.inv_lambda[idx] * mass * st.v.values[idx] * st.v.values[idx];
        }
        let grad = self.bc_gradient(&st.u);
        let mut pot = 0.0;
        for r in 0..self.grid.dim {
            let n = self.grid.n[r];
            let transverse = if self.grid.dim == 1 { 1 } else { self.grid.n[1 - r] };
            for t in 0..transverse {
                for a in 0..=n {
                    let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                    let gv = grad.at(r, i, j);
                    pot += self.face_weight(r, a) * self.kappa_face.at(r, i, j) * gv * gv;
                }
            }
        }
        0.5 * (kin + pot)
    }

    /// Applies `(2 mu / dt) x - div(c grad x)` with the step's boundary
    /// treatment.
    fn apply_operator(&self, mu: &[f64], coef: &FaceField, x: &[f64], out: &mut [f64]) {
        let g = self.grid;
        let scale = 2.0 / self.dt;
        for idx in 0..g.num_cells() {
            out[idx] = scale * mu[idx] * x[idx];
        }
        let dirichlet = self.is_dirichlet();
        for r in 0..g.dim {
            let h = g.h(r);
            let inv_h2 = 1.0 / (h * h);
            let n = g.n[r];
            let transverse = if g.dim == 1 { 1 } else { g.n[1 - r] };
            for t in 0..transverse {
                let cell_idx = |a: usize| {
                    if r == 0 {
                        g.cell_index(a, t)
                    } else {
                        g.cell_index(t, a)
                    }
                };
                for a in 1..n {
                    let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                    let c = coef.at(r, i, j);
                    let (l, rr) = (cell_idx(a - 1), cell_idx(a));
                    let diff = c * (x[rr] - x[l]) * inv_h2;
                    out[l] -= diff;
                    out[rr] += diff;
                }
                if dirichlet {
                    let first = cell_idx(0);
                    let last = cell_idx(n - 1);
                    let (i0, j0) = if r == 0 { (0, t) } else { (t, 0) };
                    let (i1, j1) = if r == 0 { (n, t) } else { (t, n) };
                    out[first] += 2.0 * coef.at(r, i0, j0) * x[first] * inv_h2;
                    out[last] += 2.0 * coef.at(r, i1, j1) * x[last] * inv_h2;
                }
            }
        }
    }

    fn operator_diagonal(&self, mu: &[f64], coef: &FaceField) -> Vec<f64> {
        let g = self.grid;
        let mut diag: Vec<f64> = mu.iter().map(|&m| 2.0 * m / self.dt).collect();
        let dirichlet = self.is_dirichlet();
        for r in 0..g.dim {
            let inv_h2 = 1.0 / (g.h(r) * g.h(r));
            let n = g.n[r];
            let transverse = if g.dim == 1 { 1 } else { g.n[1 - r] };
            for t in 0..transverse {
                let cell_idx = |a: usize| if r == 0 { g.cell_index(a, t) } else { g.cell_index(t, a) };
                for a in 1..n {
                    let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                    let c = coef.at(r, i, j) * inv_h2;
                    diag[cell_idx(a - 1)] += c;
                    diag[cell_idx(a)] += c;
                }
                if dirichlet {
                    let (i0, j0) = if r == 0 { (0, t) } else { (t, 0) };
                    let (i1, j1) = if r == 0 { (n, t) } else { (t, n) };
                    diag[cell_idx(0)] += 2.0 * coef.at(r, i0, j0) * inv_h2;
                    diag[cell_idx(n - 1)] += 2.0 * coef.at(r, i1, j1) * inv_h2;
                }
            }
        }
        diag
    }

    /// Outward-normal boundary flux data at the midpoint time, as a list of
    /// `(cell, rhs contribution, boundary work weight)` entries. The rhs
    /// contribution is `g / h` with the divergence sign already applied;
    /// the work weight is `area * g` so that the pairing with the midpoint
    /// velocity gives the boundary work.
    fn neumann_data(&self, t_mid: f64) -> Vec<(usize, f64, f64)> {
        let (profile, amplitude) = match self.bc {
            BoundaryCondition::Neumann { profile, amplitude } => (profile, amplitude),
            BoundaryCondition::Dirichlet => return Vec::new(),
        };
        let g = self.grid;
        let mut out = Vec::new();
        for r in 0..g.dim {
            let h = g.h(r);
            let area = g.face_area(r);
            let n = g.n[r];
            let transverse = if g.dim == 1 { 1 } else { g.n[1 - r] };
            for t in 0..transverse {
                let tc = (t as f64 + 0.5) * if g.dim == 2 { g.h(1 - r) } else { 0.0 };
                for (a, cell_a) in [(0usize, 0usize), (n, n - 1)] {
                    let mut x = [0.0; 2];
                    x[r] = if a == 0 { 0.0 } else { self.extent[r] };
                    if g.dim == 2 {
                        x[1 - r] = tc;
                    }
                    let gval = amplitude * profile.eval(&x, t_mid, &self.extent, self.dim);
                    let idx = if r == 0 { g.cell_index(cell_a, t) } else { g.cell_index(t, cell_a) };
                    out.push((idx, gval / h, area * gval));
                }
            }
        }
        out
    }

    /// One implicit midpoint step from `state`. Returns the new state plus
    /// the quantities the energy ledger needs.
    fn step_inner(&self, step: usize, state: &WaveState) -> Result<StepOutcome, SolverError> {
        let g = self.grid;
        let ncells = g.num_cells();
        let dt = self.dt;
        let t_mid = state.t + 0.5 * dt;
        let vol = g.cell_volume();

        let forcing: Option<Vec<f64>> = self.mms.map(|ms| {
            let p = self.mat.params(0);
            let mut f = Vec::with_capacity(ncells);
            for j in 0..g.n[1] {
                for i in 0..g.n[0] {
                    f.push(mms::forcing(ms, p, self.q, &g.cell_center(i, j), t_mid));
                }
            }
            f
        });
        let neumann = self.neumann_data(t_mid);

        // div(kappa grad u0) with the boundary flux removed under Neumann
        // (it is prescribed data and enters through `neumann` instead).
        let grad_u0 = self.bc_gradient(&state.u);
        let mut div_ku0 = vec![0.0; ncells];
        self.accumulate_div(&self.kappa_face, &grad_u0, &mut div_ku0);

        let mut v_h = state.v.values.clone();
        let mut mu = vec![0.0; ncells];
        let mut rhs = vec![0.0; ncells];
        let mut picard_iters = 0;
        let mut min_mass = f64::INFINITY;
        let mut converged = false;
        let mut last_delta = 0.0;
        let mut coef = FaceField::zeros(g);

        while picard_iters < self.cfg.picard_max_iters {
            picard_iters += 1;
            // Freeze coefficients at the previous iterate.
            min_mass = f64::INFINITY;
            for idx in 0..ncells {
                let u_h = state.u.values[idx] + 0.5 * dt * v_h[idx];
                let mass = 1.0 - 2.0 * self.k_cell[idx] * u_h;
                min_mass = min_mass.min(mass);
                mu[idx] = self.inv_lambda[idx] * mass;
            }
            if min_mass < self.cfg.degeneracy_floor {
                return Err(SolverError::Degeneracy {
                    step,
                    t: state.t,
                    min_factor: min_mass,
                    floor: self.cfg.degeneracy_floor,
                });
            }
            let vh_fn = GridFunction { grid: g, values: v_h.clone() };
            let grad_vh = self.bc_gradient(&vh_fn);
            let a_face = self.damping_face_coef(&grad_vh);
            for r in 0..g.dim {
                for f in 0..g.num_faces(r) {
                    coef.comp[r][f] = 0.5 * dt * self.kappa_face.comp[r][f] + a_face.comp[r][f];
                }
            }

            for idx in 0..ncells {
                let quad = 2.0 * self.k_cell[idx] * self.inv_lambda[idx] * v_h[idx] * v_h[idx];
                rhs[idx] = 2.0 * mu[idx] / dt * state.v.values[idx] + div_ku0[idx] + quad;
                if let Some(f) = &forcing {
                    rhs[idx] += f[idx];
                }
            }
            for &(idx, contrib, _) in &neumann {
                rhs[idx] += contrib;
            }

            let mut v_new = v_h.clone();
            let diag = self.operator_diagonal(&mu, &coef);
            let result = pcg::solve(
                |x, out| self.apply_operator(&mu, &coef, x, out),
                &diag,
                &rhs,
                &mut v_new,
                self.cfg.linear_tol,
                self.lin_max,
            );
            if !result.converged {
                return Err(SolverError::LinearStall {
                    step,
                    t: state.t,
                    iters: result.iters,
                    residual: result.residual,
                });
            }

            let mut delta = 0.0f64;
            let mut scale = 0.0f64;
            for idx in 0..ncells {
                delta = delta.max((v_new[idx] - v_h[idx]).abs());
                scale = scale.max(v_new[idx].abs());
            }
            v_h = v_new;
            last_delta = delta;
            if delta <= self.cfg.picard_tol * scale.max(1e-30) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(SolverError::PicardStall {
                step,
                t: state.t,
                iters: picard_iters,
                delta: last_delta,
                tol: self.cfg.picard_tol,
            });
        }

        // Advance and close the energy ledger with the converged fields.
        let mut u1 = state.u.values.clone();
        let mut v1 = state.v.values.clone();
        for idx in 0..ncells {
            u1[idx] += dt * v_h[idx];
            v1[idx] = 2.0 * v_h[idx] - state.v.values[idx];
        }
        let new_state = WaveState {
            t: state.t + dt,
            u: GridFunction { grid: g, values: u1 },
            v: GridFunction { grid: g, values: v1 },
        };

        let vh_fn = GridFunction { grid: g, values: v_h.clone() };
        let grad_vh = self.bc_gradient(&vh_fn);
        let a_face = self.damping_face_coef(&grad_vh);
        let mut dissipation = 0.0;
        let mut damping_norm_pow = 0.0;
        for r in 0..g.dim {
            let n = g.n[r];
            let transverse = if g.dim == 1 { 1 } else { g.n[1 - r] };
            for t in 0..transverse {
                for a in 0..=n {
                    let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                    let w = self.face_weight(r, a);
                    let gv = grad_vh.at(r, i, j);
                    dissipation += w * a_face.at(r, i, j) * gv * gv;
                    let mag = self.face_gradient_magnitude(&grad_vh, r, i, j);
                    damping_norm_pow += w * mag.powf(self.q + 1.0);
                }
            }
        }
        dissipation *= dt;
        damping_norm_pow *= dt;

        let mut source = 0.0;
        let mut utt_sq = 0.0;
        for idx in 0..ncells {
            let vh = v_h[idx];
            let kl = self.k_cell[idx] * self.inv_lambda[idx];
            source += vol * 2.0 * kl * vh * vh * vh;
            // Mass factor drift between the step endpoints; subtracting it
            // restores the time-consistent kinetic energies on both sides.
            let v0 = state.v.values[idx];
            let v1 = new_state.v.values[idx];
            source -= 0.5 * vol * kl * vh * (v1 * v1 + v0 * v0);
            if let Some(f) = &forcing {
                source += vol * f[idx] * vh;
            }
            let utt = (v1 - v0) / dt;
            utt_sq += vol * utt * utt;
        }
        let mut source_incr = dt * source;
        for &(idx, _, work) in &neumann {
            source_incr += dt * work * v_h[idx];
        }
        utt_sq *= dt;

        let grad_v1 = self.bc_gradient(&new_state.v);
        let mut grad_v1_sq = 0.0;
        for r in 0..g.dim {
            let n = g.n[r];
            let transverse = if g.dim == 1 { 1 } else { g.n[1 - r] };
            for t in 0..transverse {
                for a in 0..=n {
                    let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                    let gv = grad_v1.at(r, i, j);
                    grad_v1_sq += self.face_weight(r, a) * gv * gv;
                }
            }
        }

        // Final mass factor at the accepted midpoint displacement.
        let mut final_min_mass = f64::INFINITY;
        for idx in 0..ncells {
            let u_h = state.u.values[idx] + 0.5 * dt * v_h[idx];
            final_min_mass = final_min_mass.min(1.0 - 2.0 * self.k_cell[idx] * u_h);
        }

        Ok(StepOutcome {
            state: new_state,
            picard_iters,
            min_mass_factor: final_min_mass.min(min_mass),
            dissipation_increment: dissipation,
            source_increment: source_incr,
            grad_v1_l2: grad_v1_sq.sqrt(),
            damping_norm_pow,
            utt_sq_increment: utt_sq,
        })
    }

    fn accumulate_div(&self, coef: &FaceField, grad: &FaceField, out: &mut [f64]) {
        let g = self.grid;
        let dirichlet = self.is_dirichlet();
        for r in 0..g.dim {
            let h = g.h(r);
            let n = g.n[r];
            let transverse = if g.dim == 1 { 1 } else { g.n[1 - r] };
            for t in 0..transverse {
                let cell_idx = |a: usize| if r == 0 { g.cell_index(a, t) } else { g.cell_index(t, a) };
                for a in 0..=n {
                    let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                    if (a == 0 || a == n) && !dirichlet {
                        continue;
                    }
                    let flux = coef.at(r, i, j) * grad.at(r, i, j) / h;
                    if a > 0 {
                        out[cell_idx(a - 1)] += flux;
                    }
                    if a < n {
                        out[cell_idx(a)] -= flux;
                    }
                }
            }
        }
    }

    /// Public single-step entry used by tests; monitors are assembled by
    /// [`simulate`].
    pub fn step(&self, step: usize, state: &WaveState) -> Result<(WaveState, usize), SolverError> {
        self.step_inner(step, state).map(|o| (o.state, o.picard_iters))
    }
}

/// Runs a validated scenario to its final time, or to the failing step.
/// Scenario validation errors are returned up front; runtime failures
/// (degeneracy, iteration stall) terminate the run and are recorded in the
/// trajectory so the completed prefix stays usable.
pub fn simulate(s: &Scenario) -> Result<Trajectory, Vec<Violation>> {
    let violations = validate_scenario(s);
    if !violations.is_empty() {
        return Err(violations);
    }
    let stepper = Stepper::new(s);
    let mut state = stepper.initial_state(s);
    let e0 = stepper.energy(&state);

    let mut snapshots = vec![(0usize, state.clone())];
    let mut monitors = Vec::new();
    let mut failure = None;

    let grad_v0 = stepper.bc_gradient(&state.v);
    let mut m_bar_sq: f64 = {
        let mut acc = 0.0;
        let g = stepper.grid;
        for r in 0..g.dim {
            let n = g.n[r];
            let transverse = if g.dim == 1 { 1 } else { g.n[1 - r] };
            for t in 0..transverse {
                for a in 0..=n {
                    let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                    let gv = grad_v0.at(r, i, j);
                    acc += stepper.face_weight(r, a) * gv * gv;
                }
            }
        }
        acc
    };
    let mut big_m_pow = 0.0f64;
    let mut utt_sq = 0.0f64;
    let mut max_abs_u = state.u.max_abs();
    let mut min_mass = {
        let mut m = f64::INFINITY;
        for idx in 0..stepper.grid.num_cells() {
            m = m.min(1.0 - 2.0 * stepper.k_cell[idx] * state.u.values[idx]);
        }
        m
    };
    let mut energy_prev = e0;

    let num_steps = s.num_steps();
    for step in 1..=num_steps {
        match stepper.step_inner(step, &state) {
            Ok(out) => {
                let energy = stepper.energy(&out.state);
                let residual =
                    energy - energy_prev + out.dissipation_increment - out.source_increment;
                m_bar_sq = m_bar_sq.max(out.grad_v1_l2 * out.grad_v1_l2);
                big_m_pow += out.damping_norm_pow;
                utt_sq += out.utt_sq_increment;
                max_abs_u = max_abs_u.max(out.state.u.max_abs());
                min_mass = min_mass.min(out.min_mass_factor);
                monitors.push(StepMonitor {
                    step,
                    t: out.state.t,
                    picard_iters: out.picard_iters,
                    min_mass_factor: out.min_mass_factor,
                    energy,
                    dissipation_increment: out.dissipation_increment,
                    source_increment: out.source_increment,
                    balance_residual: residual,
                    m_bar_running: m_bar_sq.sqrt(),
                    big_m_bar_running: big_m_pow.powf(1.0 / (s.q + 1.0)),
                });
                energy_prev = energy;
                state = out.state;
                if step % s.snapshot_stride == 0 && step != num_steps {
                    snapshots.push((step, state.clone()));
                }
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    if failure.is_none() && num_steps > 0 {
        if snapshots.last().map(|(s0, _)| *s0) != Some(num_steps) {
            snapshots.push((num_steps, state.clone()));
        }
    } else if failure.is_some() {
        let last_step = monitors.last().map(|m| m.step).unwrap_or(0);
        if snapshots.last().map(|(s0, _)| *s0) != Some(last_step) {
            snapshots.push((last_step, state.clone()));
        }
    }

    let a0 = 2.0 * stepper.mat.max_abs_k() * max_abs_u;
    Ok(Trajectory {
        grid: stepper.grid,
        initial_energy: e0,
        snapshots,
        monitors,
        wset: WsetReport {
            m_bar: m_bar_sq.sqrt(),
            big_m_bar: big_m_pow.powf(1.0 / (s.q + 1.0)),
            utt_l2l2_sq: utt_sq,
            a0_surrogate: a0,
            min_mass_factor: min_mass,
            max_abs_u,
        },
        failure,
    })
}
