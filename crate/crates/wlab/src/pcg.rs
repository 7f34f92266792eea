//! Matrix-free conjugate gradient with Jacobi preconditioning. The time
//! stepper assembles nothing: it hands over a closure that applies the
//! symmetric positive definite operator and the operator diagonal for
//! scaling.

/// Outcome of a linear solve. `residual` is the final unpreconditioned
/// 2-norm of `rhs - A x`.
#[derive(Debug, Clone, Copy)]
pub struct PcgResult {
    pub iters: usize,
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = rhs` starting from the value in `x`. Convergence is
/// `||rhs - A x|| <= tol * ||rhs||`, with a zero right-hand side treated
/// as already converged (and `x` zeroed).
pub fn solve<F>(
    apply: F,
    diag: &[f64],
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: usize,
) -> PcgResult
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = rhs.len();
    assert_eq!(diag.len(), n);
    assert_eq!(x.len(), n);
    let rhs_norm = dot(rhs, rhs).sqrt();
    if rhs_norm == 0.0 {
        x.fill(0.0);
        return PcgResult { iters: 0, residual: 0.0, converged: true };
    }
    let target = tol * rhs_norm;

    let mut r = vec![0.0; n];
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    for i in 0..n {
        r[i] = rhs[i] - ax[i];
    }
    let mut res = dot(&r, &r).sqrt();
    if res <= target {
        return PcgResult { iters: 0, residual: res, converged: true };
    }

    let inv_diag: Vec<f64> = diag.iter().map(|&d| 1.0 / d).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for iter in 1..=max_iters {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // Loss of positive definiteness, typically from rounding on a
            // nearly converged system; report what we have.
            return PcgResult { iters: iter - 1, residual: res, converged: res <= target };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt();
        if res <= target {
            return PcgResult { iters: iter, residual: res, converged: true };
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    PcgResult { iters: max_iters, residual: res, converged: false }
}
