//! Built-in scenario gallery: one entry per qualitatively distinct regime,
//! from plain linear damping to the engineered degeneracy blowup. Entries
//! are ordinary scenarios; the gallery exists so tests, examples, and the
//! command line all exercise identical configurations.

use crate::model::{
    BoundaryCondition, InitialProfile, MaterialParams, Profile, Scenario,
};
use crate::solver::SolverConfig;

/// A named scenario plus its expected runtime behavior.
pub struct GalleryEntry {
    pub name: &'static str,
    pub summary: &'static str,
    /// True when the scenario is built to abort (degeneracy) rather than
    /// reach its final time.
    pub expects_failure: bool,
    pub build: fn() -> Scenario,
}

fn mat(lambda: f64, rho: f64, b: f64, delta: f64, k: f64) -> MaterialParams {
    MaterialParams { lambda, rho, b, delta, k }
}

fn base(dim: usize, n: usize) -> Scenario {
    Scenario {
        dim,
        extent: [1.0, if dim == 2 { 1.0 } else { 0.0 }],
        lens: None,
        material_plus: mat(1.0, 1.0, 0.1, 0.5, 0.0),
        material_minus: mat(1.0, 1.0, 0.1, 0.5, 0.0),
        q: 1.0,
        bc: BoundaryCondition::Dirichlet,
        u0: InitialProfile::zero(),
        u1: InitialProfile::zero(),
        source_mms: None,
        grid_n: n,
        dt: 0.005,
        t_end: 0.25,
        solver: SolverConfig::default(),
        snapshot_stride: 5,
    }
}

fn linear_1d() -> Scenario {
    let mut s = base(1, 64);
    s.material_minus = mat(1.0, 1.0, 0.05, 0.5, 0.0);
    s.material_plus = s.material_minus;
    s.u0 = InitialProfile { profile: Profile::SineMode, amplitude: 0.05 };
    s
}

fn nonlinear_1d() -> Scenario {
    let mut s = base(1, 64);
    s.material_minus = mat(1.0, 1.0, 0.1, 0.5, 1.0);
    s.material_plus = s.material_minus;
    s.q = 3.0;
    s.u0 = InitialProfile { profile: Profile::SineMode, amplitude: 0.03 };
    s.u1 = InitialProfile { profile: Profile::SineMode, amplitude: 0.05 };
    s.t_end = 0.2;
    s.snapshot_stride = 1;
    s
}

fn coupled_1d_rho10() -> Scenario {
    let mut s = base(1, 80);
    s.lens = Some(([0.4, 0.0], [0.6, 0.0]));
    s.material_minus = mat(1.0, 1.0, 0.05, 0.5, 0.0);
    s.material_plus = mat(1.0, 10.0, 0.05, 0.5, 0.0);
    s.q = 2.0;
    s.u0 = InitialProfile { profile: Profile::GaussianBump, amplitude: 0.02 };
    s.dt = 0.0025;
    s.t_end = 0.2;
    s
}

fn coupled_2d_lens() -> Scenario {
    let mut s = base(2, 32);
    s.lens = Some(([0.375, 0.375], [0.625, 0.625]));
    s.material_minus = mat(1.0, 1.0, 0.1, 0.5, 0.2);
    s.material_plus = mat(1.0, 4.0, 0.1, 0.5, 0.2);
    s.q = 2.0;
    s.u0 = InitialProfile { profile: Profile::GaussianBump, amplitude: 0.02 };
    s.t_end = 0.05;
    s.snapshot_stride = 2;
    s
}

fn degenerate_blowup() -> Scenario {
    let mut s = base(1, 32);
    s.material_minus = mat(1.0, 1.0, 0.01, 0.5, 2.0);
    s.material_plus = s.material_minus;
    s.u0 = InitialProfile { profile: Profile::GaussianBump, amplitude: 0.1 };
    s.u1 = InitialProfile { profile: Profile::GaussianBump, amplitude: 2.0 };
    s.snapshot_stride = 1;
    s
}

fn mms_linear() -> Scenario {
    let mut s = base(1, 64);
    s.source_mms = Some("standing-1d".into());
    s.dt = 0.0025;
    s.t_end = 0.1;
    s.snapshot_stride = 10;
    s
}

fn mms_nonlinear() -> Scenario {
    let mut s = base(2, 24);
    s.material_minus = mat(1.0, 1.0, 0.1, 0.5, 1.0);
    s.material_plus = s.material_minus;
    s.q = 2.0;
    s.source_mms = Some("standing-2d".into());
    s.t_end = 0.05;
    s.snapshot_stride = 10;
    s
}

pub const ENTRIES: &[GalleryEntry] = &[
    GalleryEntry {
        name: "linear-1d",
        summary: "single material, linear damping, standing sine decay",
        expects_failure: false,
        build: linear_1d,
    },
    GalleryEntry {
        name: "nonlinear-1d",
        summary: "quadratic nonlinearity with cubic-gradient damping, per-step ledger",
        expects_failure: false,
        build: nonlinear_1d,
    },
    GalleryEntry {
        name: "coupled-1d-rho10",
        summary: "density ratio 10 slab, interface transmission in 1D",
        expects_failure: false,
        build: coupled_1d_rho10,
    },
    GalleryEntry {
        name: "coupled-2d-lens",
        summary: "square lens in 2D with mild nonlinearity",
        expects_failure: false,
        build: coupled_2d_lens,
    },
    GalleryEntry {
        name: "degenerate-blowup",
        summary: "large data drives the mass factor through the floor",
        expects_failure: true,
        build: degenerate_blowup,
    },
    GalleryEntry {
        name: "mms-linear",
        summary: "manufactured standing mode, linear regime",
        expects_failure: false,
        build: mms_linear,
    },
    GalleryEntry {
        name: "mms-nonlinear",
        summary: "manufactured standing mode in 2D with full nonlinearity",
        expects_failure: false,
        build: mms_nonlinear,
    },
];

pub fn names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

pub fn lookup(name: &str) -> Option<&'static GalleryEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}
