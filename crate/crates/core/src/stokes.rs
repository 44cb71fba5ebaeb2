//! The decoupled stream function / vorticity scheme.
//!
//! 1. `omega0` in the coarse interior space: `(grad omega0, grad xi) = (f, rot xi)`.
//! 2. `omega_delta = sum_S c_S Z_k(lambda_S)` with `G c = -(omega0, Z_k(lambda_S))`.
//! 3. `psi` in the coarse interior space: `(grad psi, grad xi) = (omega0 + omega_delta, xi)`.
//!
//! Inner products mixing coarse and level-`k` fields are evaluated on level
//! `k` after exact prolongation. With `k = 0` this is the classical
//! unstabilized P1 scheme.

use std::time::Instant;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{assemble_load_curl, QuadratureRule, SolveStats, DEFAULT_TOL};
use crate::field::ScalarField;
use crate::harmonic::{build_basis, HarmonicBasis};
use crate::hierarchy::MeshHierarchy;
use crate::mesh::{Point, TriangleMesh};
use crate::space::LevelSpace;

#[derive(Debug, Clone, Serialize)]
pub struct StokesConfig {
    /// Refinement level of the harmonic space.
    pub k: usize,
    pub tol: f64,
    pub quadrature_degree: usize,
}

impl Default for StokesConfig {
    fn default() -> Self {
        Self {
            k: 4,
            tol: DEFAULT_TOL,
            quadrature_degree: 5,
        }
    }
}

impl StokesConfig {
    pub fn with_k(k: usize) -> Self {
        Self {
            k,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub omega0: f64,
    pub basis: f64,
    pub omega_delta: f64,
    pub psi: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub omega0_solve: SolveStats,
    pub psi_solve: SolveStats,
    pub max_lift_iterations: usize,
    /// Largest `|(grad Z_S, grad chi)|` over basis lifts and interior level-k hats.
    pub harmonic_residual: f64,
    /// Relative residual of `G c = r`.
    pub gram_residual: f64,
    /// `max_i |(omega, xi_i) - (grad psi, grad xi_i)|` over coarse interior hats,
    /// relative to `max_i |(omega, xi_i)|`.
    pub block_residual: f64,
    pub timings: Timings,
}

#[derive(Debug, Clone)]
pub struct StokesSolution {
    pub k: usize,
    /// Stream function on the coarse mesh, zero on the boundary.
    pub psi: ScalarField,
    /// Interior part of the vorticity on the coarse mesh, zero on the boundary.
    pub omega0: ScalarField,
    /// Harmonic coefficients, one per coarse boundary vertex in loop order.
    pub coefficients: Vec<f64>,
    /// `omega0` prolongated to level `k` plus `sum_S c_S Z_k(lambda_S)`.
    pub omega: ScalarField,
    pub diagnostics: Diagnostics,
}

/// Step 1: interior vorticity with the curl load.
pub fn solve_omega0<F>(
    coarse: &LevelSpace<'_>,
    f: F,
    q: &QuadratureRule,
    tol: f64,
) -> Result<(ScalarField, SolveStats)>
where
    F: Fn(Point) -> [f64; 2],
{
    let load = assemble_load_curl(coarse.mesh(), f, q)?;
    coarse.solve_homogeneous(&load, tol)
}

/// Step 2: harmonic coefficients `G c = r`, `r_S = -(omega0, Z_k(lambda_S))`,
/// with `omega0` already prolongated to the basis level.
pub fn solve_omega_delta(
    basis: &HarmonicBasis,
    omega0_fine: &ScalarField,
    fine: &LevelSpace<'_>,
) -> Result<(Vec<f64>, f64)> {
    if omega0_fine.level != basis.level || fine.level != basis.level {
        return Err(Error::LevelMismatch {
            expected: basis.level,
            found: omega0_fine.level,
        });
    }
    omega0_fine.validate(fine.mesh())?;
    let r: Vec<f64> = basis
        .project(omega0_fine, &fine.ops.mass)
        .into_iter()
        .map(|v| -v)
        .collect();
    if basis.is_empty() {
        return Ok((Vec::new(), 0.0));
    }
    let r = DVector::from_vec(r);
    let chol = basis.gram_mass.clone().cholesky().ok_or_else(|| Error::SingularGram {
        min_ritz: basis.gram_mass.clone().symmetric_eigenvalues().min(),
    })?;
    let c = chol.solve(&r);
    let r_norm = r.norm();
    let residual = if r_norm == 0.0 {
        0.0
    } else {
        (&basis.gram_mass * &c - &r).norm() / r_norm
    };
    Ok((c.iter().cloned().collect(), residual))
}

/// Step 3: stream function from the composite vorticity on level `k`.
/// The load `(omega, xi_i)` is exact: coarse hats are prolongated to level `k`.
pub fn solve_psi(
    coarse: &LevelSpace<'_>,
    fine: &LevelSpace<'_>,
    omega: &ScalarField,
    tol: f64,
) -> Result<(ScalarField, SolveStats, Vec<f64>)> {
    omega.validate(fine.mesh())?;
    let m_omega = fine.ops.mass.matvec(&omega.values);
    let load = fine
        .hierarchy
        .restrict_values_to(fine.level, &m_omega, coarse.level);
    let (psi, stats) = coarse.solve_homogeneous(&load, tol)?;
    Ok((psi, stats, load))
}

/// Runs the three steps on `h`, which must contain level `cfg.k`.
pub fn solve_stokes<F>(cfg: &StokesConfig, h: &MeshHierarchy, f: F) -> Result<StokesSolution>
where
    F: Fn(Point) -> [f64; 2],
{
    cfg.validate()?;
    h.level(cfg.k)?;
    let coarse = LevelSpace::new(h, 0)?;
    let fine_owned;
    let fine = if cfg.k == 0 {
        &coarse
    } else {
        fine_owned = LevelSpace::new(h, cfg.k)?;
        &fine_owned
    };
    solve_stokes_on(cfg, &coarse, fine, f)
}

/// As [`solve_stokes`], reusing already assembled level spaces.
pub fn solve_stokes_on<F>(
    cfg: &StokesConfig,
    coarse: &LevelSpace<'_>,
    fine: &LevelSpace<'_>,
    f: F,
) -> Result<StokesSolution>
where
    F: Fn(Point) -> [f64; 2],
{
    cfg.validate()?;
    if coarse.level != 0 || fine.level != cfg.k {
        return Err(Error::LevelMismatch {
            expected: cfg.k,
            found: fine.level,
        });
    }
    let q = QuadratureRule::with_degree(cfg.quadrature_degree)?;
    let start = Instant::now();
    let mut diagnostics = Diagnostics::default();

    let t = Instant::now();
    let (omega0, omega0_solve) = solve_omega0(coarse, f, &q, cfg.tol)?;
    diagnostics.omega0_solve = omega0_solve;
    diagnostics.timings.omega0 = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let basis = build_basis(fine, cfg.tol)?;
    diagnostics.timings.basis = t.elapsed().as_secs_f64();
    diagnostics.max_lift_iterations = basis.stats.iter().map(|s| s.iterations).max().unwrap_or(0);
    for lift in &basis.lifts {
        diagnostics.harmonic_residual = diagnostics.harmonic_residual.max(fine.harmonic_residual(lift)?);
    }

    let t = Instant::now();
    let omega0_fine = fine.prolongate(&omega0)?;
    let (coefficients, gram_residual) = solve_omega_delta(&basis, &omega0_fine, fine)?;
    diagnostics.gram_residual = gram_residual;
    let mut omega = basis.combine(&coefficients);
    omega.axpy(1.0, &omega0_fine);
    drop(basis);
    diagnostics.timings.omega_delta = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (psi, psi_solve, load) = solve_psi(coarse, fine, &omega, cfg.tol)?;
    diagnostics.psi_solve = psi_solve;
    diagnostics.timings.psi = t.elapsed().as_secs_f64();

    let a_psi = coarse.ops.stiffness.matvec(&psi.values);
    let interior = &coarse.ops.interior_stiffness.interior;
    let scale = interior.iter().fold(0.0f64, |m, &i| m.max(load[i].abs()));
    let defect = interior
        .iter()
        .fold(0.0f64, |m, &i| m.max((load[i] - a_psi[i]).abs()));
    diagnostics.block_residual = if scale > 0.0 { defect / scale } else { defect };
    diagnostics.timings.total = start.elapsed().as_secs_f64();

    Ok(StokesSolution {
        k: cfg.k,
        psi,
        omega0,
        coefficients,
        omega,
        diagnostics,
    })
}

/// Composite vorticity at each coarse boundary vertex against arc length,
/// counterclockwise from the boundary vertex closest to the origin. The
/// first sample is repeated at `s = perimeter` to close the curve.
pub fn boundary_vorticity_trace(sol: &StokesSolution, coarse: &TriangleMesh) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = coarse
        .boundary_arc_lengths()
        .into_iter()
        .zip(&coarse.boundary_vertices)
        .map(|(s, &v)| (s, sol.omega.values[v]))
        .collect();
    if let Some(&(_, first)) = out.first() {
        out.push((coarse.perimeter(), first));
    }
    out
}
