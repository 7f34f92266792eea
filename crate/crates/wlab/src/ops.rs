//! Discrete calculus on cell-centered grids: face gradients, divergence of
//! face fluxes, integer-shift difference quotients, windowed norms, and the
//! summation-by-parts identity that makes the difference-quotient estimates
//! exact at the discrete level.

use crate::grid::{FaceField, Grid, GridFunction};
use crate::model::{Label, MaterialField};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OpsError {
    #[error("grids do not match")]
    GridMismatch,
    #[error("shift must be a nonzero integer number of cells")]
    ZeroShift,
    #[error("axis {0} does not exist on this grid")]
    BadAxis(usize),
    #[error("face coefficient must be positive, got {value} at face {face} of axis {axis}")]
    NonpositiveCoefficient { axis: usize, face: usize, value: f64 },
    #[error("test function must vanish within {0} cells of the boundary along the shifted axis")]
    SupportViolation(usize),
    #[error("window is empty")]
    EmptyWindow,
}

/// Boundary treatment for face gradients. `Dirichlet` mirrors the interior
/// value across the boundary (ghost value `-u`, consistent with a
/// homogeneous boundary trace); `Neumann` copies the one-sided difference
/// of the two nearest cells onto the boundary face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientBc {
    Dirichlet,
    Neumann,
}

/// Face-centered gradient: interior face values are the difference of the
/// two adjacent cells over the mesh width; boundary faces follow `bc`.
pub fn gradient(u: &GridFunction, bc: GradientBc) -> FaceField {
    let g = u.grid;
    let mut out = FaceField::zeros(g);
    for r in 0..g.dim {
        let h = g.h(r);
        let n = g.n[r];
        let transverse = g.n[1 - r].min(if g.dim == 1 { 1 } else { usize::MAX });
        for t in 0..transverse {
            let cell = |a: usize| if r == 0 { u.at(a, t) } else { u.at(t, a) };
            for i in 0..=n {
                let val = if i == 0 {
                    match bc {
                        GradientBc::Dirichlet => 2.0 * cell(0) / h,
                        GradientBc::Neumann => (cell(1) - cell(0)) / h,
                    }
                } else if i == n {
                    match bc {
                        GradientBc::Dirichlet => -2.0 * cell(n - 1) / h,
                        GradientBc::Neumann => (cell(n - 1) - cell(n - 2)) / h,
                    }
                } else {
                    (cell(i) - cell(i - 1)) / h
                };
                let (fi, fj) = if r == 0 { (i, t) } else { (t, i) };
                *out.at_mut(r, fi, fj) = val;
            }
        }
    }
    out
}

/// Face coefficients from cell coefficients: harmonic mean at every
/// interior face (which reduces to the common value away from coefficient
/// jumps), adjacent cell value at boundary faces. Errors on nonpositive
/// input.
pub fn face_coefficients(grid: Grid, cells: &[f64]) -> Result<FaceField, OpsError> {
    assert_eq!(cells.len(), grid.num_cells());
    let mut out = FaceField::zeros(grid);
    for r in 0..grid.dim {
        let n = grid.n[r];
        let transverse = if grid.dim == 1 { 1 } else { grid.n[1 - r] };
        for t in 0..transverse {
            let cell = |a: usize| {
                let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                cells[grid.cell_index(i, j)]
            };
            for i in 0..=n {
                let val = if i == 0 {
                    cell(0)
                } else if i == n {
                    cell(n - 1)
                } else {
                    let (a, b) = (cell(i - 1), cell(i));
                    2.0 * a * b / (a + b)
                };
                if !(val > 0.0) {
                    let (fi, fj) = if r == 0 { (i, t) } else { (t, i) };
                    return Err(OpsError::NonpositiveCoefficient {
                        axis: r,
                        face: grid.face_index(r, fi, fj),
                        value: val,
                    });
                }
                let (fi, fj) = if r == 0 { (i, t) } else { (t, i) };
                *out.at_mut(r, fi, fj) = val;
            }
        }
    }
    Ok(out)
}

/// Divergence of the face flux `coef * grad`: per cell, the signed sum of
/// face fluxes over the mesh width. Errors when a face coefficient is not
/// positive.
pub fn div_flux(coef: &FaceField, grad: &FaceField) -> Result<GridFunction, OpsError> {
    if coef.grid != grad.grid {
        return Err(OpsError::GridMismatch);
    }
    let g = coef.grid;
    for r in 0..g.dim {
        for (face, &c) in coef.comp[r].iter().enumerate() {
            if !(c > 0.0) {
                return Err(OpsError::NonpositiveCoefficient { axis: r, face, value: c });
            }
        }
    }
    let mut flux = FaceField::zeros(g);
    for r in 0..g.dim {
        for f in 0..g.num_faces(r) {
            flux.comp[r][f] = coef.comp[r][f] * grad.comp[r][f];
        }
    }
    Ok(div_faces(&flux))
}

/// Divergence of an arbitrary face flux.
pub fn div_faces(flux: &FaceField) -> GridFunction {
    let g = flux.grid;
    let mut out = GridFunction::zeros(g);
    for j in 0..g.n[1] {
        for i in 0..g.n[0] {
            let mut acc = (flux.at(0, i + 1, j) - flux.at(0, i, j)) / g.h(0);
            if g.dim == 2 {
                acc += (flux.at(1, i, j + 1) - flux.at(1, i, j)) / g.h(1);
            }
            *out.at_mut(i, j) = acc;
        }
    }
    out
}

/// Half-open box of cell indices, the domain of a shifted quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellBox {
    pub lo: [usize; 2],
    pub hi: [usize; 2],
}

impl CellBox {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.lo[0] && i < self.hi[0] && j >= self.lo[1] && j < self.hi[1]
    }
}

/// Difference quotient `(u(c + l e_r) - u(c)) / (l h_r)` for an integer
/// cell shift `l != 0`. Values are defined on the returned box and zero
/// outside it.
pub fn difference_quotient(
    u: &GridFunction,
    r: usize,
    l: i64,
) -> Result<(GridFunction, CellBox), OpsError> {
    let g = u.grid;
    if r >= g.dim {
        return Err(OpsError::BadAxis(r));
    }
    if l == 0 {
        return Err(OpsError::ZeroShift);
    }
    let n = g.n[r] as i64;
    if l.abs() >= n {
        return Err(OpsError::ZeroShift);
    }
    let (lo_r, hi_r) = if l > 0 { (0usize, (n - l) as usize) } else { ((-l) as usize, n as usize) };
    let mut boxed = CellBox { lo: [0, 0], hi: [g.n[0], g.n[1]] };
    boxed.lo[r] = lo_r;
    boxed.hi[r] = hi_r;
    let denom = l as f64 * g.h(r);
    let mut out = GridFunction::zeros(g);
    for j in boxed.lo[1]..boxed.hi[1] {
        for i in boxed.lo[0]..boxed.hi[0] {
            let (si, sj) = if r == 0 { ((i as i64 + l) as usize, j) } else { (i, (j as i64 + l) as usize) };
            *out.at_mut(i, j) = (u.at(si, sj) - u.at(i, j)) / denom;
        }
    }
    Ok((out, boxed))
}

/// Summation-by-parts residual
/// `vol * sum(u . D_r^l phi) + vol * sum(D_r^(-l) u . phi)`,
/// each sum over the cells where the shifted argument exists. The two sums
/// telescope against each other whenever `phi` vanishes within `|l|` cells
/// of the two boundaries along axis `r`; that support condition is checked
/// and its violation is an error.
pub fn ibp_residual(
    u: &GridFunction,
    phi: &GridFunction,
    r: usize,
    l: i64,
) -> Result<f64, OpsError> {
    if u.grid != phi.grid {
        return Err(OpsError::GridMismatch);
    }
    let g = u.grid;
    let band = l.unsigned_abs() as usize;
    for j in 0..g.n[1] {
        for i in 0..g.n[0] {
            let a = if r == 0 { i } else { j };
            if (a < band || a >= g.n[r] - band) && phi.at(i, j) != 0.0 {
                return Err(OpsError::SupportViolation(band));
            }
        }
    }
    let (dphi, fwd_box) = difference_quotient(phi, r, l)?;
    let (du, bwd_box) = difference_quotient(u, r, -l)?;
    let vol = g.cell_volume();
    let mut s1 = 0.0;
    for j in fwd_box.lo[1]..fwd_box.hi[1] {
        for i in fwd_box.lo[0]..fwd_box.hi[0] {
            s1 += u.at(i, j) * dphi.at(i, j);
        }
    }
    let mut s2 = 0.0;
    for j in bwd_box.lo[1]..bwd_box.hi[1] {
        for i in bwd_box.lo[0]..bwd_box.hi[0] {
            s2 += du.at(i, j) * phi.at(i, j);
        }
    }
    Ok(vol * (s1 + s2))
}

/// Cell subset defined by a margin: a cell is kept when at least `margin`
/// cells separate it from every outer boundary face and every interface
/// face, so difference quotients with shifts up to `margin` never cross
/// either. An optional side restricts the window to one material region.
#[derive(Debug, Clone)]
pub struct Window {
    pub grid: Grid,
    pub mask: Vec<bool>,
    pub margin: usize,
    pub side: Option<Label>,
}

impl Window {
    pub fn full(grid: Grid) -> Window {
        Window { grid, mask: vec![true; grid.num_cells()], margin: 0, side: None }
    }

    /// Window at the given margin from boundary and interface faces.
    pub fn with_margin(
        grid: Grid,
        mat: Option<&MaterialField>,
        margin: usize,
        side: Option<Label>,
    ) -> Window {
        let blocked = |r: usize, i: usize, j: usize| -> bool {
            let a = if r == 0 { i } else { j };
            if a == 0 || a == grid.n[r] {
                return true;
            }
            mat.map(|m| m.is_interface(r, i, j)).unwrap_or(false)
        };
        // Cells adjacent to a blocked face get distance 0; BFS along
        // unblocked faces increments by one cell per layer.
        let mut dist = vec![usize::MAX; grid.num_cells()];
        let mut queue = std::collections::VecDeque::new();
        for j in 0..grid.n[1] {
            for i in 0..grid.n[0] {
                let mut adjacent = blocked(0, i, j) || blocked(0, i + 1, j);
                if grid.dim == 2 {
                    adjacent = adjacent || blocked(1, i, j) || blocked(1, i, j + 1);
                }
                if adjacent {
                    let idx = grid.cell_index(i, j);
                    dist[idx] = 0;
                    queue.push_back((i, j));
                }
            }
        }
        while let Some((i, j)) = queue.pop_front() {
            let d = dist[grid.cell_index(i, j)];
            let mut neighbors: Vec<(usize, usize)> = Vec::with_capacity(4);
            if i > 0 && !blocked(0, i, j) {
                neighbors.push((i - 1, j));
            }
            if i + 1 < grid.n[0] && !blocked(0, i + 1, j) {
                neighbors.push((i + 1, j));
            }
            if grid.dim == 2 {
                if j > 0 && !blocked(1, i, j) {
                    neighbors.push((i, j - 1));
                }
                if j + 1 < grid.n[1] && !blocked(1, i, j + 1) {
                    neighbors.push((i, j + 1));
                }
            }
            for (ni, nj) in neighbors {
                let idx = grid.cell_index(ni, nj);
                if dist[idx] > d + 1 {
                    dist[idx] = d + 1;
                    queue.push_back((ni, nj));
                }
            }
        }
        let mask = (0..grid.num_cells())
            .map(|idx| {
                let deep = dist[idx] >= margin;
                let on_side = match (side, mat) {
                    (Some(s), Some(m)) => m.label[idx] == s,
                    _ => true,
                };
                deep && on_side
            })
            .collect();
        Window { grid, mask, margin, side }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.mask[self.grid.cell_index(i, j)]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    Lp(f64),
    H1Semi,
    H2Semi,
}

/// Windowed discrete norm.
///
/// `L2`/`Lp` are midpoint-rule cell sums. `H1Semi` sums squared face
/// gradients with trapezoid weights: interior faces with both cells in the
/// window carry full volume, window-edge faces half volume, and grid
/// boundary faces half volume with a one-sided value, keeping the quadrature
/// second order up to the boundary without assuming boundary data. `H2Semi`
/// sums squared second differences (pure per axis, plus the mixed term in
/// 2D) over cells whose full centered stencil stays inside the window; the
/// window shrinks rather than switching to one-sided stencils.
pub fn norm(u: &GridFunction, kind: NormKind, window: &Window) -> f64 {
    assert_eq!(u.grid, window.grid);
    let g = u.grid;
    let vol = g.cell_volume();
    match kind {
        NormKind::L2 => {
            let mut acc = 0.0;
            for (idx, &v) in u.values.iter().enumerate() {
                if window.mask[idx] {
                    acc += v * v;
                }
            }
            (vol * acc).sqrt()
        }
        NormKind::Lp(p) => {
            let mut acc = 0.0;
            for (idx, &v) in u.values.iter().enumerate() {
                if window.mask[idx] {
                    acc += v.abs().powf(p);
                }
            }
            (vol * acc).powf(1.0 / p)
        }
        NormKind::H1Semi => {
            let mut acc = 0.0;
            for r in 0..g.dim {
                let h = g.h(r);
                let n = g.n[r];
                let transverse = if g.dim == 1 { 1 } else { g.n[1 - r] };
                for t in 0..transverse {
                    let at = |a: usize| {
                        let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                        (u.at(i, j), window.contains(i, j))
                    };
                    for f in 0..=n {
                        let (value, weight) = if f == 0 {
                            let (u0, in0) = at(0);
                            let (u1, _) = at(1);
                            ((u1 - u0) / h, if in0 { 0.5 } else { 0.0 })
                        } else if f == n {
                            let (um1, inm1) = at(n - 1);
                            let (um2, _) = at(n - 2);
                            ((um1 - um2) / h, if inm1 { 0.5 } else { 0.0 })
                        } else {
                            let (ul, inl) = at(f - 1);
                            let (ur, inr) = at(f);
                            let m = inl as u8 + inr as u8;
                            ((ur - ul) / h, m as f64 * 0.5)
                        };
                        acc += weight * vol * value * value;
                    }
                }
            }
            acc.sqrt()
        }
        NormKind::H2Semi => {
            let mut acc = 0.0;
            for j in 0..g.n[1] {
                for i in 0..g.n[0] {
                    if !stencil_in_window(window, i, j) {
                        continue;
                    }
                    let hx = g.h(0);
                    let d2x = (u.at(i + 1, j) - 2.0 * u.at(i, j) + u.at(i - 1, j)) / (hx * hx);
                    let mut cell = d2x * d2x;
                    if g.dim == 2 {
                        let hy = g.h(1);
                        let d2y = (u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1)) / (hy * hy);
                        let dxy = (u.at(i + 1, j + 1) - u.at(i + 1, j - 1) - u.at(i - 1, j + 1)
                            + u.at(i - 1, j - 1))
                            / (4.0 * hx * hy);
                        cell += d2y * d2y + 2.0 * dxy * dxy;
                    }
                    acc += vol * cell;
                }
            }
            acc.sqrt()
        }
    }
}

fn stencil_in_window(w: &Window, i: usize, j: usize) -> bool {
    let g = w.grid;
    if !w.contains(i, j) || i == 0 || i + 1 >= g.n[0] {
        return false;
    }
    if !w.contains(i - 1, j) || !w.contains(i + 1, j) {
        return false;
    }
    if g.dim == 2 {
        if j == 0 || j + 1 >= g.n[1] {
            return false;
        }
        for (ni, nj) in [(i, j - 1), (i, j + 1), (i - 1, j - 1), (i - 1, j + 1), (i + 1, j - 1), (i + 1, j + 1)]
        {
            if !w.contains(ni, nj) {
                return false;
            }
        }
    }
    true
}

/// Cell-centered derivative along each axis, independent of boundary data:
/// central differences where both neighbors are usable, one-sided at the
/// grid edge. With a material field given, stencils never cross interface
/// faces (one-sided on both sides of the interface instead).
pub fn cell_gradient(u: &GridFunction, mat: Option<&MaterialField>) -> Vec<GridFunction> {
    let g = u.grid;
    let crossing = |r: usize, i: usize, j: usize| -> bool {
        mat.map(|m| m.is_interface(r, i, j)).unwrap_or(false)
    };
    let mut out = Vec::new();
    for r in 0..g.dim {
        let h = g.h(r);
        let n = g.n[r];
        let mut d = GridFunction::zeros(g);
        let transverse = if g.dim == 1 { 1 } else { g.n[1 - r] };
        for t in 0..transverse {
            let at = |a: usize| {
                let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                u.at(i, j)
            };
            let face = |a: usize| {
                let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                crossing(r, i, j)
            };
            for a in 0..n {
                let left_ok = a > 0 && !face(a);
                let right_ok = a + 1 < n && !face(a + 1);
                let val = match (left_ok, right_ok) {
                    (true, true) => (at(a + 1) - at(a - 1)) / (2.0 * h),
                    (false, true) => (at(a + 1) - at(a)) / h,
                    (true, false) => (at(a) - at(a - 1)) / h,
                    (false, false) => 0.0,
                };
                let (i, j) = if r == 0 { (a, t) } else { (t, a) };
                *d.at_mut(i, j) = val;
            }
        }
        out.push(d);
    }
    out
}

/// One row of a difference-quotient ratio check.
#[derive(Debug, Clone, Copy)]
pub struct ShiftRatio {
    pub shift: i64,
    pub dq_norm: f64,
    pub grad_norm: f64,
    pub ratio: f64,
}

/// Compares `||D^l u||_Lp(window)` against `||grad u||_Lp` on the full
/// grid for each shift; bounded ratios are the discrete signature that the
/// difference-quotient seminorms are controlled by the gradient.
pub fn lemma21_check(
    u: &GridFunction,
    window: &Window,
    p: f64,
    shifts: &[i64],
) -> Result<Vec<ShiftRatio>, OpsError> {
    if window.count() == 0 {
        return Err(OpsError::EmptyWindow);
    }
    let g = u.grid;
    let vol = g.cell_volume();
    let grads = cell_gradient(u, None);
    let mut grad_acc = 0.0;
    for idx in 0..g.num_cells() {
        let mag2: f64 = grads.iter().map(|d| d.values[idx] * d.values[idx]).sum();
        grad_acc += mag2.sqrt().powf(p);
    }
    let grad_norm = (vol * grad_acc).powf(1.0 / p);

    let mut rows = Vec::new();
    for &l in shifts {
        let mut per_axis = Vec::new();
        let mut boxes = Vec::new();
        for r in 0..g.dim {
            let (d, b) = difference_quotient(u, r, l)?;
            per_axis.push(d);
            boxes.push(b);
        }
        let mut acc = 0.0;
        for j in 0..g.n[1] {
            for i in 0..g.n[0] {
                if !window.contains(i, j) {
                    continue;
                }
                if !boxes.iter().all(|b| b.contains(i, j)) {
                    continue;
                }
                let mag2: f64 = per_axis.iter().map(|d| d.at(i, j) * d.at(i, j)).sum();
                acc += mag2.sqrt().powf(p);
            }
        }
        let dq_norm = (vol * acc).powf(1.0 / p);
        let ratio = if grad_norm > 1e-300 {
            dq_norm / grad_norm
        } else if dq_norm > 1e-300 {
            f64::INFINITY
        } else {
            0.0
        };
        rows.push(ShiftRatio { shift: l, dq_norm, grad_norm, ratio });
    }
    Ok(rows)
}
