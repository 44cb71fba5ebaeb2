//! Preconditioned conjugate gradients for SPD systems.

use crate::error::{Error, Result};
use crate::fem::sparse::{CsrMatrix, RestrictedMatrix};

/// Default relative residual tolerance for every SPD solve.
pub const DEFAULT_TOL: f64 = 1e-10;

pub trait Preconditioner {
    /// `z = B r` for an SPD approximation `B` of `A^{-1}`.
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &CsrMatrix) -> Self {
        Self {
            inv_diag: a
                .diagonal()
                .into_iter()
                .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        }
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * di;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// `10 sqrt(n) + 1000`.
pub fn default_max_iter(n: usize) -> usize {
    10 * (n as f64).sqrt().ceil() as usize + 1000
}

/// Preconditioned CG on `a x = b`, starting from the given `x`. Stops when
/// `||b - a x||_2 <= tol ||b||_2`.
pub fn pcg<P: Preconditioner + ?Sized>(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    pc: &P,
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = a.dim();
    for len in [b.len(), x.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side"));
    }
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats::default());
    }
    let mut r = a.matvec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut res = norm(&r) / b_norm;
    if res <= tol {
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: res,
        });
    }
    let mut z = vec![0.0; n];
    pc.apply(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotConverged {
                iterations: it,
                residual: res,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm(&r) / b_norm;
        if res <= tol {
            return Ok(SolveStats {
                iterations: it,
                relative_residual: res,
            });
        }
        pc.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: res,
    })
}

/// Jacobi-preconditioned CG from a zero initial guess.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let mut x = vec![0.0; a.dim()];
    pcg(a, b, &mut x, &Jacobi::new(a), tol, max_iter)?;
    Ok(x)
}

/// Anything that can solve an interior (Dirichlet-restricted) SPD system.
pub trait InteriorSolver {
    fn interior_dim(&self) -> usize;
    fn solve_interior(&self, b: &[f64], tol: f64) -> Result<(Vec<f64>, SolveStats)>;
}

impl InteriorSolver for RestrictedMatrix {
    fn interior_dim(&self) -> usize {
        self.dim()
    }

    fn solve_interior(&self, b: &[f64], tol: f64) -> Result<(Vec<f64>, SolveStats)> {
        let mut x = vec![0.0; self.dim()];
        let stats = pcg(
            &self.matrix,
            b,
            &mut x,
            &Jacobi::new(&self.matrix),
            tol,
            default_max_iter(self.dim()),
        )?;
        Ok((x, stats))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
