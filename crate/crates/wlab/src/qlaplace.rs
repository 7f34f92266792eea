//! Pointwise q-Laplace kernels and a sampling battery for the vector
//! inequalities the energy and regularity estimates lean on.
//!
//! The battery distinguishes inequalities that must hold (they gate exit
//! codes and the acceptance suite) from "as-stated" variants that are
//! measured and reported only. The as-stated forms are literal readings
//! whose counterexamples the battery is expected to find:
//!
//! * `2.3-as-stated` bounds the *norm* of `|x|^(q-1)x - |y|^(q-1)y` below
//!   by `0.5 |x-y|^2 (|x|+|y|)^(q-1)`; at `q = 1` the point `x = (3,0)`,
//!   `y = (-1,0)` gives `4 < 8`.
//! * `2.5-as-stated` uses the scalar difference `||x|^s - |y|^s|`
//!   (`s = (q-1)/2`) as the second factor, which vanishes for distinct
//!   vectors of equal norm and has the wrong homogeneity degree in the
//!   magnitudes.
//! * `young-as-stated` carries the weight `(r-1) r^(r/(r-1)) eps^(-1/(1-r))`,
//!   which fails against the classical `eps`-Young inequality for `r = 2`.
//!
//! The must-hold counterparts are `2.3-monotone` (the dot-product form),
//! `2.5-scalar` (second factor `|F(x) - F(y)|` with the magnitude-transform
//! `F(z) = |z|^((q-1)/2) z`), and `young-standard` with the weight
//! `(r-1) r^(-r/(r-1)) eps^(-1/(r-1))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Relative residual below which a sample counts as a violation.
pub const VIOLATION_REL_TOL: f64 = 1e-12;

/// Small fixed-dimension vector, `dim` in 1..=3. Components beyond `dim`
/// stay zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecD {
    pub comps: [f64; 3],
    pub dim: usize,
}

impl VecD {
    pub fn new(comps: &[f64]) -> VecD {
        assert!((1..=3).contains(&comps.len()));
        let mut c = [0.0; 3];
        c[..comps.len()].copy_from_slice(comps);
        VecD { comps: c, dim: comps.len() }
    }

    pub fn zero(dim: usize) -> VecD {
        VecD { comps: [0.0; 3], dim }
    }

    pub fn norm(&self) -> f64 {
        self.comps.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &VecD) -> f64 {
        self.comps.iter().zip(&other.comps).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &VecD) -> VecD {
        let mut c = [0.0; 3];
        for r in 0..3 {
            c[r] = self.comps[r] - other.comps[r];
        }
        VecD { comps: c, dim: self.dim.max(other.dim) }
    }

    pub fn scale(&self, s: f64) -> VecD {
        let mut c = [0.0; 3];
        for r in 0..3 {
            c[r] = s * self.comps[r];
        }
        VecD { comps: c, dim: self.dim }
    }
}

/// Damping flux `b ((1-delta) + delta |g|^(q-1)) g`.
///
/// The coefficient is computed as `b (1 + delta (|g|^(q-1) - 1))`, which
/// collapses to exactly `b` when `q = 1` (including at `g = 0`, where
/// `0^0 = 1`), so linear damping is recovered bit-for-bit.
pub fn damping_flux(g: &VecD, b: f64, delta: f64, q: f64) -> VecD {
    let gq = g.norm().powf(q - 1.0);
    g.scale(b * (1.0 + delta * (gq - 1.0)))
}

/// Magnitude transform `F(g) = |g|^((q-1)/2) g`, satisfying
/// `|F(g)|^2 = |g|^(q+1)`.
pub fn f_transform(g: &VecD, q: f64) -> VecD {
    g.scale(g.norm().powf(0.5 * (q - 1.0)))
}

/// `A(z) = |z|^(q-1) z`, the monotone map under the damping nonlinearity.
fn a_map(z: &VecD, q: f64) -> VecD {
    z.scale(z.norm().powf(q - 1.0))
}

/// Monotonicity gap `(|x|^(q-1)x - |y|^(q-1)y) . (x - y)`; nonnegative,
/// and the quantity the coercivity bounds `2.3-monotone` and `2.4` bound
/// from below.
pub fn monotonicity_gap(x: &VecD, y: &VecD, q: f64) -> f64 {
    a_map(x, q).sub(&a_map(y, q)).dot(&x.sub(y))
}

/// Identifiers for the measured inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InequalityId {
    TwoTwo,
    TwoThreeAsStated,
    TwoThreeMonotone,
    TwoFour,
    TwoFiveAsStated,
    TwoFiveScalar,
    YoungAsStated,
    YoungStandard,
}

pub const ALL_INEQUALITIES: [InequalityId; 8] = [
    InequalityId::TwoTwo,
    InequalityId::TwoThreeAsStated,
    InequalityId::TwoThreeMonotone,
    InequalityId::TwoFour,
    InequalityId::TwoFiveAsStated,
    InequalityId::TwoFiveScalar,
    InequalityId::YoungAsStated,
    InequalityId::YoungStandard,
];

/// The subset that must hold with zero violations.
pub const MUST_HOLD: [InequalityId; 5] = [
    InequalityId::TwoTwo,
    InequalityId::TwoThreeMonotone,
    InequalityId::TwoFour,
    InequalityId::TwoFiveScalar,
    InequalityId::YoungStandard,
];

impl InequalityId {
    pub fn name(&self) -> &'static str {
        match self {
            InequalityId::TwoTwo => "2.2",
            InequalityId::TwoThreeAsStated => "2.3-as-stated",
            InequalityId::TwoThreeMonotone => "2.3-monotone",
            InequalityId::TwoFour => "2.4",
            InequalityId::TwoFiveAsStated => "2.5-as-stated",
            InequalityId::TwoFiveScalar => "2.5-scalar",
            InequalityId::YoungAsStated => "young-as-stated",
            InequalityId::YoungStandard => "young-standard",
        }
    }

    pub fn from_name(name: &str) -> Option<InequalityId> {
        ALL_INEQUALITIES.iter().copied().find(|id| id.name() == name)
    }

    pub fn must_hold(&self) -> bool {
        MUST_HOLD.contains(self)
    }

    pub fn uses_young_parameters(&self) -> bool {
        matches!(self, InequalityId::YoungAsStated | InequalityId::YoungStandard)
    }
}

/// One sampled evaluation point. Young-type inequalities read the scalars
/// `x.comps[0]`, `y.comps[0]` together with `(eps, r)`; the vector
/// inequalities ignore `(eps, r)`.
#[derive(Debug, Clone, Copy)]
pub struct SamplePoint {
    pub x: VecD,
    pub y: VecD,
    pub q: f64,
    pub eps: f64,
    pub r: f64,
}

/// Outcome of evaluating one inequality at one point. For upper bounds the
/// residual is `bound - quantity`, for lower bounds `quantity - bound`;
/// either way nonnegative means the inequality held. `rel_margin` is the
/// residual divided by the larger magnitude of the two sides.
#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub quantity: f64,
    pub bound: f64,
    pub residual: f64,
    pub rel_margin: f64,
}

fn finish(quantity: f64, bound: f64, residual: f64) -> Evaluation {
    let scale = quantity.abs().max(bound.abs()).max(f64::MIN_POSITIVE);
    Evaluation { quantity, bound, residual, rel_margin: residual / scale }
}

/// Evaluates one inequality at one point.
pub fn evaluate(id: InequalityId, p: &SamplePoint) -> Evaluation {
    let (x, y, q) = (&p.x, &p.y, p.q);
    let s = 0.5 * (q - 1.0);
    match id {
        InequalityId::TwoTwo => {
            let lhs = a_map(x, q).sub(&a_map(y, q)).norm();
            let rhs = q * x.sub(y).norm() * (x.norm() + y.norm()).powf(q - 1.0);
            finish(lhs, rhs, rhs - lhs)
        }
        InequalityId::TwoThreeAsStated => {
            let lhs = a_map(x, q).sub(&a_map(y, q)).norm();
            let d = x.sub(y).norm();
            let bound = 0.5 * d * d * (x.norm() + y.norm()).powf(q - 1.0);
            finish(lhs, bound, lhs - bound)
        }
        InequalityId::TwoThreeMonotone => {
            let gap = monotonicity_gap(x, y, q);
            let bound = (2.0f64).powf(1.0 - q) * x.sub(y).norm().powf(q + 1.0);
            finish(gap, bound, gap - bound)
        }
        InequalityId::TwoFour => {
            let gap = monotonicity_gap(x, y, q);
            let df = f_transform(x, q).sub(&f_transform(y, q)).norm();
            let bound = 4.0 / ((q + 1.0) * (q + 1.0)) * df * df;
            finish(gap, bound, gap - bound)
        }
        InequalityId::TwoFiveAsStated => {
            let lhs = a_map(x, q).sub(&a_map(y, q)).norm();
            let rhs = q
                * (x.norm().powf(s) + y.norm().powf(s))
                * (x.norm().powf(s) - y.norm().powf(s)).abs();
            finish(lhs, rhs, rhs - lhs)
        }
        InequalityId::TwoFiveScalar => {
            let lhs = a_map(x, q).sub(&a_map(y, q)).norm();
            let rhs = q
                * (x.norm().powf(s) + y.norm().powf(s))
                * f_transform(x, q).sub(&f_transform(y, q)).norm();
            finish(lhs, rhs, rhs - lhs)
        }
        InequalityId::YoungAsStated | InequalityId::YoungStandard => {
            let (xi, eta, eps, r) = (p.x.comps[0], p.y.comps[0], p.eps, p.r);
            let conj = r / (r - 1.0);
            let weight = if id == InequalityId::YoungAsStated {
                (r - 1.0) * r.powf(conj) * eps.powf(-1.0 / (1.0 - r))
            } else {
                (r - 1.0) * r.powf(-conj) * eps.powf(-1.0 / (r - 1.0))
            };
            let lhs = (xi * eta).abs();
            let rhs = eps * xi.abs().powf(r) + weight * eta.abs().powf(conj);
            finish(lhs, rhs, rhs - lhs)
        }
    }
}

/// Sampling configuration for [`check_inequality`]. Every sample is drawn
/// from its own random stream keyed by `(rng_seed, sample_index)`, so the
/// battery is deterministic and independent of evaluation order.
#[derive(Debug, Clone)]
pub struct SampleConfig {
    pub rng_seed: u64,
    pub samples: usize,
    pub q_range: (f64, f64),
    pub magnitude_max: f64,
    pub dims: Vec<usize>,
    pub eps_range: (f64, f64),
    pub r_range: (f64, f64),
}

impl Default for SampleConfig {
    fn default() -> SampleConfig {
        SampleConfig {
            rng_seed: 0,
            samples: 10_000,
            q_range: (1.0, 5.0),
            magnitude_max: 10.0,
            dims: vec![1, 2, 3],
            eps_range: (0.05, 10.0),
            r_range: (1.05, 5.0),
        }
    }
}

/// Regenerates the sample point for a given index.
pub fn draw_sample(cfg: &SampleConfig, index: u64) -> SamplePoint {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(index.wrapping_add(1));
    let dim = cfg.dims[rng.gen_range(0..cfg.dims.len())];
    let draw_vec = |rng: &mut ChaCha8Rng| {
        let mut comps = [0.0; 3];
        for c in comps.iter_mut().take(dim) {
            *c = rng.gen_range(-1.0..=1.0);
        }
        let v = VecD { comps, dim };
        let norm = v.norm();
        let target: f64 = rng.gen_range(0.0..=cfg.magnitude_max);
        if norm < 1e-12 {
            VecD::zero(dim)
        } else {
            v.scale(target / norm)
        }
    };
    let x = draw_vec(&mut rng);
    let y = draw_vec(&mut rng);
    let q = rng.gen_range(cfg.q_range.0..=cfg.q_range.1);
    let eps = rng.gen_range(cfg.eps_range.0..=cfg.eps_range.1);
    let r = rng.gen_range(cfg.r_range.0..=cfg.r_range.1);
    SamplePoint { x, y, q, eps, r }
}

/// Result of a sampling run for one inequality.
#[derive(Debug, Clone)]
pub struct InequalityReport {
    pub id: InequalityId,
    pub samples: usize,
    pub violations: usize,
    /// Smallest relative margin seen; negative values beyond the tolerance
    /// are violations.
    pub worst_margin: f64,
    /// Sample point achieving `worst_margin`.
    pub witness: SamplePoint,
}

impl InequalityReport {
    pub const CSV_HEADER: &'static str =
        "inequality_id,samples,violations,worst_margin,dim,x0,x1,x2,y0,y1,y2,q,eps,r";

    /// One CSV row matching [`CSV_HEADER`](Self::CSV_HEADER); vector
    /// components beyond the witness dimension and Young parameters of
    /// non-Young inequalities are left empty.
    pub fn csv_row(&self) -> String {
        use crate::grid::fmt_f64 as f;
        let w = &self.witness;
        let comp = |v: &VecD, r: usize| if r < w.x.dim { f(v.comps[r]) } else { String::new() };
        let (eps, r) = if self.id.uses_young_parameters() {
            (f(w.eps), f(w.r))
        } else {
            (String::new(), String::new())
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.id.name(),
            self.samples,
            self.violations,
            f(self.worst_margin),
            w.x.dim,
            comp(&w.x, 0),
            comp(&w.x, 1),
            comp(&w.x, 2),
            comp(&w.y, 0),
            comp(&w.y, 1),
            comp(&w.y, 2),
            f(w.q),
            eps,
            r
        )
    }
}

/// Samples one inequality `cfg.samples` times and tallies violations.
///
/// Samples are evaluated in parallel; the reduction (violation count, and
/// minimum margin with lowest-index tie-breaking) is associative and
/// commutative, so the result does not depend on the number of worker
/// threads.
pub fn check_inequality(id: InequalityId, cfg: &SampleConfig) -> InequalityReport {
    assert!(cfg.samples > 0, "sample count must be positive");
    let (violations, worst_margin, worst_index) = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let e = evaluate(id, &draw_sample(cfg, i));
            let violated = (e.rel_margin < -VIOLATION_REL_TOL) as usize;
            (violated, e.rel_margin, i)
        })
        .reduce(
            || (0usize, f64::INFINITY, u64::MAX),
            |a, b| {
                let count = a.0 + b.0;
                let (m, i) = if (b.1, b.2) < (a.1, a.2) { (b.1, b.2) } else { (a.1, a.2) };
                (count, m, i)
            },
        );
    InequalityReport {
        id,
        samples: cfg.samples,
        violations,
        worst_margin,
        witness: draw_sample(cfg, worst_index),
    }
}
