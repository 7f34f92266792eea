//! Problem description layer: material parameters, scenarios, and the
//! cell-by-cell material field derived from a scenario's lens geometry.
//!
//! A scenario describes the damped nonlinear wave problem
//!
//! ```text
//! (1/lambda)(1 - 2 k u) u_tt
//!     = div( (1/rho) grad u )
//!     + div( b ((1-delta) + delta |grad u_t|^(q-1)) grad u_t )
//!     + (2k/lambda) (u_t)^2 + f
//! ```
//!
//! on a box, optionally split into an inclusion region (`+`, the "lens")
//! and the surrounding region (`-`) with separate constant materials in
//! each. Coefficients jump sharply at the region boundary; nothing is
//! smoothed.

use crate::grid::{Grid, GridFunction};
use crate::solver::SolverConfig;
use std::fmt;
use thiserror::Error;

/// Constant material data for one region.
///
/// `lambda = rho * c^2` carries the sound speed; the stiffness term uses
/// `1/rho` and the inertia term `1/lambda`, so both sections of the weak
/// form share one representation. `k` is the nonlinearity coefficient,
/// `b` the damping magnitude, and `delta` the weight of the q-Laplace part
/// of the damping (the remaining `1-delta` is linear damping).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub lambda: f64,
    pub rho: f64,
    pub b: f64,
    pub delta: f64,
    pub k: f64,
}

impl MaterialParams {
    /// Checks the admissibility constraints; returns one message per failure.
    pub fn violations(&self, prefix: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |field: &str, msg: String| {
            out.push(Violation { field: format!("{prefix}.{field}"), message: msg })
        };
        if !(self.lambda > 0.0) {
            push("lambda", format!("must be positive, got {}", self.lambda));
        }
        if !(self.rho > 0.0) {
            push("rho", format!("must be positive, got {}", self.rho));
        }
        if !(self.b > 0.0) {
            push("b", format!("must be positive, got {}", self.b));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            push("delta", format!("must lie in the open interval (0,1), got {}", self.delta));
        }
        if !self.k.is_finite() {
            push("k", format!("must be finite, got {}", self.k));
        }
        out
    }
}

/// Nonlinearity coefficient from the acoustic parameter of nonlinearity
/// `B/A`, the density, and the sound speed: `k = (1 + B/(2A)) / (rho c^2)`.
pub fn derive_k(b_over_a: f64, rho: f64, c: f64) -> Result<f64, ModelError> {
    if !(rho > 0.0) {
        return Err(ModelError::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if !(c > 0.0) {
        return Err(ModelError::InvalidParameter(format!("c must be positive, got {c}")));
    }
    Ok((1.0 + 0.5 * b_over_a) / (rho * c * c))
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Named analytic profile for initial data and boundary forcing.
///
/// All profiles are evaluated on the scenario's box and scaled by an
/// amplitude kept separately:
/// * `zero` is identically zero,
/// * `gaussian-bump` is a centered Gaussian with width `min(extent)/8`,
/// * `sine-mode` is the first product sine mode (zero on the boundary),
/// * `traveling-pulse` is a narrow Gaussian centered at `0.25*extent[0]`
///   at `t = 0`, moving with unit speed along the first axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Zero,
    GaussianBump,
    SineMode,
    TravelingPulse,
}

impl Profile {
    pub fn from_name(name: &str) -> Option<Profile> {
        match name {
            "zero" => Some(Profile::Zero),
            "gaussian-bump" => Some(Profile::GaussianBump),
            "sine-mode" => Some(Profile::SineMode),
            "traveling-pulse" => Some(Profile::TravelingPulse),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Profile::Zero => "zero",
            Profile::GaussianBump => "gaussian-bump",
            Profile::SineMode => "sine-mode",
            Profile::TravelingPulse => "traveling-pulse",
        }
    }

    pub fn eval(&self, x: &[f64; 2], t: f64, extent: &[f64; 2], dim: usize) -> f64 {
        let min_extent = (0..dim).map(|r| extent[r]).fold(f64::INFINITY, f64::min);
        match self {
            Profile::Zero => 0.0,
            Profile::GaussianBump => {
                let sigma = min_extent / 8.0;
                let r2: f64 =
                    (0..dim).map(|r| (x[r] - 0.5 * extent[r]) * (x[r] - 0.5 * extent[r])).sum();
                (-r2 / (2.0 * sigma * sigma)).exp()
            }
            Profile::SineMode => (0..dim)
                .map(|r| (std::f64::consts::PI * x[r] / extent[r]).sin())
                .product(),
            Profile::TravelingPulse => {
                let sigma = min_extent / 16.0;
                let xi = x[0] - 0.25 * extent[0] - t;
                (-xi * xi / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

/// Boundary condition for the whole outer boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    /// Homogeneous Dirichlet: `u = 0` (and hence `u_t = 0`) on the boundary.
    Dirichlet,
    /// Prescribed total normal flux `g = amplitude * profile(x, t)` on the
    /// boundary, covering stiffness and damping flux together.
    Neumann { profile: Profile, amplitude: f64 },
}

/// Profile plus amplitude, used for initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialProfile {
    pub profile: Profile,
    pub amplitude: f64,
}

impl InitialProfile {
    pub fn zero() -> InitialProfile {
        InitialProfile { profile: Profile::Zero, amplitude: 0.0 }
    }
}

/// Full problem description. `validate` reports every violated constraint;
/// all other operations assume a validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub dim: usize,
    pub extent: [f64; 2],
    /// Axis-aligned inclusion box `(min, max)` per axis, or `None` for a
    /// single-material domain.
    pub lens: Option<([f64; 2], [f64; 2])>,
    pub material_plus: MaterialParams,
    pub material_minus: MaterialParams,
    pub q: f64,
    pub bc: BoundaryCondition,
    pub u0: InitialProfile,
    pub u1: InitialProfile,
    /// Name of a registered manufactured solution whose forcing term is
    /// injected; verification runs only.
    pub source_mms: Option<String>,
    pub grid_n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub solver: SolverConfig,
    pub snapshot_stride: usize,
}

/// One violated scenario constraint, named by the configuration field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl Scenario {
    pub fn grid(&self) -> Grid {
        match self.dim {
            1 => Grid::new_1d(self.grid_n, self.extent[0]),
            _ => Grid::new_2d(self.grid_n, self.grid_n, self.extent[0], self.extent[1]),
        }
    }

    pub fn initial_u(&self) -> GridFunction {
        let grid = self.grid();
        let (extent, dim) = (self.extent, self.dim);
        let p = self.u0;
        GridFunction::from_fn(grid, |x| p.amplitude * p.profile.eval(x, 0.0, &extent, dim))
    }

    pub fn initial_v(&self) -> GridFunction {
        let grid = self.grid();
        let (extent, dim) = (self.extent, self.dim);
        let p = self.u1;
        GridFunction::from_fn(grid, |x| p.amplitude * p.profile.eval(x, 0.0, &extent, dim))
    }

    pub fn num_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Checks every scenario constraint and returns the complete list of
/// violations; an empty list means the scenario is admissible.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    fn push(out: &mut Vec<Violation>, field: &str, msg: String) {
        out.push(Violation { field: field.to_string(), message: msg });
    }
    let mut out = Vec::new();

    if s.dim != 1 && s.dim != 2 {
        push(&mut out, "domain.dim", format!("must be 1 or 2, got {}", s.dim));
    }
    for r in 0..s.dim.min(2) {
        if !(s.extent[r] > 0.0) {
            push(&mut out, "domain.extent", format!("axis {} extent must be positive, got {}", r, s.extent[r]));
        }
    }
    if s.grid_n < 4 {
        push(&mut out, "grid.n", format!("needs at least 4 cells per axis, got {}", s.grid_n));
    }
    if !(s.dt > 0.0) {
        push(&mut out, "time.dt", format!("must be positive, got {}", s.dt));
    }
    if !(s.t_end >= s.dt) {
        push(&mut out, "time.T", format!("must be at least one step (T >= dt), got T={} dt={}", s.t_end, s.dt));
    }
    if !(s.q >= 1.0) {
        push(&mut out, "physics.q", format!("damping exponent must satisfy q >= 1, got {}", s.q));
    }
    if s.dim <= 2 && !(s.q > s.dim as f64 - 1.0) {
        push(&mut out, 
            "physics.q",
            format!("damping exponent must satisfy q > dim - 1 = {}, got {}", s.dim as f64 - 1.0, s.q),
        );
    }
    out.extend(s.material_minus.violations("materials.minus"));
    if s.lens.is_some() {
        out.extend(s.material_plus.violations("materials.plus"));
    }
    if let Some((lo, hi)) = s.lens {
        for r in 0..s.dim {
            if !(lo[r] < hi[r]) {
                out.push(Violation {
                    field: "lens".into(),
                    message: format!("axis {} needs min < max, got [{}, {}]", r, lo[r], hi[r]),
                });
            }
            if !(lo[r] > 0.0 && hi[r] < s.extent[r]) {
                out.push(Violation {
                    field: "lens".into(),
                    message: format!(
                        "must lie strictly inside the domain: axis {} range [{}, {}] vs extent {}",
                        r, lo[r], hi[r], s.extent[r]
                    ),
                });
            }
        }
    }
    if let Some(name) = &s.source_mms {
        if crate::mms::lookup(name).is_none() {
            push(&mut out, "source.mms", format!("unknown manufactured solution '{name}'"));
        }
        if s.lens.is_some() {
            push(&mut out, "source.mms", "manufactured forcing requires a single-material domain".into());
        }
        if !matches!(s.bc, BoundaryCondition::Dirichlet) {
            push(&mut out, "source.mms", "manufactured forcing requires Dirichlet boundary conditions".into());
        }
        if let Some(m) = crate::mms::lookup(name) {
            if m.dim != s.dim {
                push(&mut out, 
                    "source.mms",
                    format!("'{}' is {}-dimensional but domain.dim is {}", name, m.dim, s.dim),
                );
            }
        }
    }
    if s.snapshot_stride == 0 {
        push(&mut out, "output.snapshot_stride", "must be at least 1".into());
    }
    out.extend(s.solver.violations());
    out
}

/// Region tag for one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Plus,
    Minus,
}

impl Label {
    pub fn name(&self) -> &'static str {
        match self {
            Label::Plus => "plus",
            Label::Minus => "minus",
        }
    }
}

/// Face identifier: normal axis `r`, face coordinates `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceId {
    pub r: usize,
    pub i: usize,
    pub j: usize,
}

/// Piecewise-constant coefficients resolved onto a specific grid. Every
/// cell carries the exact parameter record of its region; interface faces
/// are the interior faces whose two cells carry different labels.
#[derive(Debug, Clone)]
pub struct MaterialField {
    pub grid: Grid,
    pub label: Vec<Label>,
    pub cells: Vec<MaterialParams>,
    pub interface_faces: Vec<FaceId>,
    /// Per-axis mask over faces, true on interface faces.
    pub interface_mask: [Vec<bool>; 2],
}

impl MaterialField {
    pub fn params(&self, idx: usize) -> &MaterialParams {
        &self.cells[idx]
    }

    pub fn is_interface(&self, r: usize, i: usize, j: usize) -> bool {
        self.interface_mask[r][self.grid.face_index(r, i, j)]
    }

    pub fn has_interface(&self) -> bool {
        !self.interface_faces.is_empty()
    }

    pub fn max_abs_k(&self) -> f64 {
        self.cells.iter().fold(0.0, |m, p| m.max(p.k.abs()))
    }
}

/// Resolves a scenario's materials onto its grid. A cell belongs to the
/// `+` region exactly when its center lies strictly inside the lens box.
pub fn build_material_field(s: &Scenario) -> MaterialField {
    let grid = s.grid();
    let mut label = Vec::with_capacity(grid.num_cells());
    for j in 0..grid.n[1] {
        for i in 0..grid.n[0] {
            let x = grid.cell_center(i, j);
            let inside = match s.lens {
                Some((lo, hi)) => (0..s.dim).all(|r| x[r] > lo[r] && x[r] < hi[r]),
                None => false,
            };
            label.push(if inside { Label::Plus } else { Label::Minus });
        }
    }
    let cells = label
        .iter()
        .map(|l| match l {
            Label::Plus => s.material_plus,
            Label::Minus => s.material_minus,
        })
        .collect();

    let mut interface_faces = Vec::new();
    let mut interface_mask =
        [vec![false; grid.num_faces(0)], if grid.dim == 2 { vec![false; grid.num_faces(1)] } else { Vec::new() }];
    for j in 0..grid.n[1] {
        for i in 1..grid.n[0] {
            if label[grid.cell_index(i - 1, j)] != label[grid.cell_index(i, j)] {
                interface_faces.push(FaceId { r: 0, i, j });
                interface_mask[0][grid.face_index(0, i, j)] = true;
            }
        }
    }
    if grid.dim == 2 {
        for j in 1..grid.n[1] {
            for i in 0..grid.n[0] {
                if label[grid.cell_index(i, j - 1)] != label[grid.cell_index(i, j)] {
                    interface_faces.push(FaceId { r: 1, i, j });
                    interface_mask[1][grid.face_index(1, i, j)] = true;
                }
            }
        }
    }
    MaterialField { grid, label, cells, interface_faces, interface_mask }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_scenario() -> Scenario {
        Scenario {
            dim: 1,
            extent: [1.0, 0.0],
            lens: None,
            material_plus: MaterialParams { lambda: 1.0, rho: 1.0, b: 1.0, delta: 0.5, k: 0.0 },
            material_minus: MaterialParams { lambda: 1.0, rho: 1.0, b: 1.0, delta: 0.5, k: 0.0 },
            q: 2.0,
            bc: BoundaryCondition::Dirichlet,
            u0: InitialProfile { profile: Profile::GaussianBump, amplitude: 1.0 },
            u1: InitialProfile::zero(),
            source_mms: None,
            grid_n: 10,
            dt: 0.01,
            t_end: 0.1,
            solver: SolverConfig::default(),
            snapshot_stride: 1,
        }
    }

    #[test]
    fn derive_k_reference_values() {
        assert_eq!(derive_k(0.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(derive_k(2.0, 1.0, 2.0).unwrap(), 0.5);
        let water = derive_k(5.0, 1000.0, 1500.0).unwrap();
        assert!((water - 3.5 / 2.25e9).abs() < 1e-24);
        assert!(derive_k(5.0, 0.0, 1500.0).is_err());
        assert!(derive_k(5.0, 1000.0, -1.0).is_err());
    }

    #[test]
    fn valid_scenario_has_no_violations() {
        assert!(validate_scenario(&base_scenario()).is_empty());
    }

    #[test]
    fn q_must_exceed_dim_minus_one() {
        let mut s = base_scenario();
        s.dim = 2;
        s.extent = [1.0, 1.0];
        s.q = 1.0;
        let v = validate_scenario(&s);
        assert!(v.iter().any(|v| v.field == "physics.q"), "{v:?}");
    }

    #[test]
    fn delta_must_be_strictly_inside_unit_interval() {
        let mut s = base_scenario();
        s.material_minus.delta = 1.0;
        let v = validate_scenario(&s);
        assert!(v.iter().any(|v| v.field == "materials.minus.delta"), "{v:?}");
        s.material_minus.delta = 0.0;
        assert!(!validate_scenario(&s).is_empty());
    }

    #[test]
    fn lens_must_sit_strictly_inside() {
        let mut s = base_scenario();
        s.lens = Some(([0.0, 0.0], [0.5, 0.0]));
        let v = validate_scenario(&s);
        assert!(v.iter().any(|v| v.field == "lens"), "{v:?}");
    }

    #[test]
    fn lens_labels_and_interface_count_1d() {
        let mut s = base_scenario();
        s.lens = Some(([0.4, 0.0], [0.6, 0.0]));
        let m = build_material_field(&s);
        let plus: Vec<usize> = (0..10).filter(|&i| m.label[i] == Label::Plus).collect();
        assert_eq!(plus, vec![4, 5]);
        assert_eq!(m.interface_faces.len(), 2);
        assert_eq!(m.interface_faces[0], FaceId { r: 0, i: 4, j: 0 });
        assert_eq!(m.interface_faces[1], FaceId { r: 0, i: 6, j: 0 });
    }

    #[test]
    fn central_lens_in_2d_has_eight_interface_faces() {
        let mut s = base_scenario();
        s.dim = 2;
        s.extent = [1.0, 1.0];
        s.grid_n = 8;
        s.lens = Some(([0.375, 0.375], [0.625, 0.625]));
        let m = build_material_field(&s);
        let plus = m.label.iter().filter(|&&l| l == Label::Plus).count();
        assert_eq!(plus, 4);
        assert_eq!(m.interface_faces.len(), 8);
    }

    #[test]
    fn empty_lens_is_uniform_minus() {
        let s = base_scenario();
        let m = build_material_field(&s);
        assert!(m.label.iter().all(|&l| l == Label::Minus));
        assert!(m.interface_faces.is_empty());
        assert!(!m.has_interface());
    }

    #[test]
    fn material_field_cells_match_region_record_exactly() {
        let mut s = base_scenario();
        s.lens = Some(([0.4, 0.0], [0.6, 0.0]));
        s.material_plus.rho = 10.0;
        let m = build_material_field(&s);
        for (idx, l) in m.label.iter().enumerate() {
            let expect = match l {
                Label::Plus => s.material_plus,
                Label::Minus => s.material_minus,
            };
            assert_eq!(m.cells[idx], expect);
        }
    }

    #[test]
    fn profiles_evaluate_sanely() {
        let extent = [1.0, 1.0];
        assert_eq!(Profile::Zero.eval(&[0.3, 0.4], 0.0, &extent, 2), 0.0);
        let center = Profile::GaussianBump.eval(&[0.5, 0.5], 0.0, &extent, 2);
        assert!((center - 1.0).abs() < 1e-15);
        let mode = Profile::SineMode.eval(&[0.5, 0.5], 0.0, &extent, 2);
        assert!((mode - 1.0).abs() < 1e-15);
        let pulse0 = Profile::TravelingPulse.eval(&[0.25, 0.0], 0.0, &extent, 1);
        assert!((pulse0 - 1.0).abs() < 1e-15);
        let pulse_later = Profile::TravelingPulse.eval(&[0.45, 0.0], 0.2, &extent, 1);
        assert!((pulse_later - 1.0).abs() < 1e-15);
    }
}
