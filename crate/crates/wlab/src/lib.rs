//! Numerical laboratory for a strongly damped nonlinear wave equation.
//!
//! The model is a second-order wave equation for an acoustic potential `u`
//! whose effective mass `(1 - 2 k u) / lambda` degenerates when the wave
//! amplitude reaches `1 / (2 k)`, and whose damping is a q-Laplacian of the
//! velocity: the flux `b ((1 - delta) + delta |grad u_t|^{q-1}) grad u_t`
//! interpolates between linear strong damping (`delta = 0` or `q = 1`) and
//! the fully degenerate q-Laplace case (`delta = 1`). The domain may be
//! split by an immersed piecewise-constant material lens, across which flux
//! continuity holds but second derivatives jump.
//!
//! What lives where:
//!
//! * [`qlaplace`]: the vector inequalities that drive every energy estimate
//!   for this damping law, as executable checks with randomized sampling.
//!   Two textbook-looking forms are kept in their broken as-stated shape on
//!   purpose; the battery shows their counterexamples next to the repaired
//!   forms that actually hold.
//! * [`ops`]: cell and face calculus on uniform grids, difference-quotient
//!   machinery, windowed norms, and interface-aware interior windows.
//! * [`solver`]: implicit midpoint time stepping with Picard-frozen
//!   coefficients, a matrix-free conjugate-gradient core ([`pcg`]), a
//!   per-step discrete energy ledger that closes to solver tolerance, and
//!   degeneracy monitoring that aborts instead of stepping through a sign
//!   change in the mass factor.
//! * [`mms`]: manufactured standing modes with closed-form forcing for
//!   order-of-accuracy measurements.
//! * [`regularity`]: piecewise second-derivative energies, interface flux
//!   jumps, shifted difference quotients, and Hölder exponent estimation on
//!   refinement sequences.
//! * [`config`], [`report`], [`gallery`], [`harness`]: the scenario file
//!   format with canonical hashing, deterministic CSV/manifest writers, the
//!   curated scenario set, and the command layer with its exit-code map.
//!
//! Start with the examples, each of which is a self-contained study:
//!
//! * `inequality_battery`: sampled verdicts for all eight inequality forms.
//! * `energy_ledger`: the discrete energy identity on a linear wave, line
//!   by line.
//! * `interface_transmission`: a pulse crossing a high-contrast lens, with
//!   the ledger and degeneracy monitors on.
//! * `convergence_study`: manufactured-solution orders for the linear and
//!   nonlinear configurations.
//! * `regularity_scan`: interior and piecewise second-derivative bounds
//!   under mesh refinement, plus the Hölder probe.
//! * `degeneracy_watch`: a run driven into mass-factor collapse, showing
//!   the abort diagnostics.
//!
//! The same studies are reachable through the `wlab` binary's subcommands
//! (`simulate`, `inequalities`, `convergence`, `regularity`, `gallery`) for
//! scripted use; binary and examples share the [`harness`] layer, so both
//! produce byte-identical artifacts for identical inputs.

pub mod config;
pub mod gallery;
pub mod grid;
pub mod harness;
pub mod mms;
pub mod model;
pub mod ops;
pub mod pcg;
pub mod qlaplace;
pub mod regularity;
pub mod report;
pub mod solver;

pub use grid::{Grid, GridFunction};
pub use model::{MaterialParams, Scenario};
pub use qlaplace::{InequalityId, ALL_INEQUALITIES};
pub use solver::{simulate, Trajectory};
