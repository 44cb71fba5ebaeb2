//! Error measurement against analytic cases and convergence-order studies.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::AnalyticCase;
use crate::error::{Error, Result};
use crate::fem::QuadratureRule;
use crate::field::ScalarField;
use crate::hierarchy::MeshHierarchy;
use crate::mesh::{Point, TriangleMesh};
use crate::space::LevelSpace;
use crate::stokes::{solve_stokes_on, StokesConfig, StokesSolution};

/// Discretization errors of one solution. Relative unless the exact field
/// has zero norm, in which case the absolute norm is reported and flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorBundle {
    pub omega_l2: f64,
    /// `sqrt(||e||_0^2 + ||lap e||_{-1}^2)` with the dual norm taken on the
    /// reference level; `None` when no reference level was supplied.
    pub omega_m: Option<f64>,
    pub psi_l2: f64,
    pub psi_h1: f64,
    pub reference_level: Option<usize>,
    pub omega_absolute: bool,
    pub psi_absolute: bool,
}

fn ratio(num: f64, den: f64) -> (f64, bool) {
    if den > 0.0 {
        (num / den, false)
    } else {
        (num, true)
    }
}

/// Errors of `sol` against the nodal interpolants of the exact fields:
/// vorticity on level `k` (`fine`), stream function on level 0 (`coarse`).
pub fn relative_errors(
    sol: &StokesSolution,
    case: &AnalyticCase,
    coarse: &LevelSpace<'_>,
    fine: &LevelSpace<'_>,
    reference: Option<&LevelSpace<'_>>,
    tol: f64,
) -> Result<ErrorBundle> {
    sol.omega.validate(fine.mesh())?;
    sol.psi.validate(coarse.mesh())?;
    let exact_omega = ScalarField::interpolate(fine.mesh(), |p| case.omega_at(*p));
    let exact_psi = ScalarField::interpolate(coarse.mesh(), |p| case.psi_at(*p));

    let mut e_omega = sol.omega.clone();
    e_omega.axpy(-1.0, &exact_omega);
    let mut e_psi = sol.psi.clone();
    e_psi.axpy(-1.0, &exact_psi);

    let l2 = |m: &crate::fem::CsrMatrix, v: &ScalarField| m.quadratic_form(&v.values).max(0.0).sqrt();
    let omega_err = l2(&fine.ops.mass, &e_omega);
    let omega_ref = l2(&fine.ops.mass, &exact_omega);
    let (omega_l2, omega_absolute) = ratio(omega_err, omega_ref);

    let (psi_l2, psi_absolute) = ratio(l2(&coarse.ops.mass, &e_psi), l2(&coarse.ops.mass, &exact_psi));
    let (psi_h1, _) = ratio(
        l2(&coarse.ops.stiffness, &e_psi),
        l2(&coarse.ops.stiffness, &exact_psi),
    );

    let omega_m = match reference {
        None => None,
        Some(r) => {
            if r.level < fine.level {
                return Err(Error::InvalidArgument(format!(
                    "M-norm reference level {} below solution level {}",
                    r.level, fine.level
                )));
            }
            let e_r = r.prolongate(&e_omega)?;
            let x_r = r.prolongate(&exact_omega)?;
            let num = (omega_err.powi(2) + r.laplacian_dual_norm(&e_r, tol)?.powi(2)).sqrt();
            let den = (omega_ref.powi(2) + r.laplacian_dual_norm(&x_r, tol)?.powi(2)).sqrt();
            Some(ratio(num, den).0)
        }
    };

    Ok(ErrorBundle {
        omega_l2,
        omega_m,
        psi_l2,
        psi_h1,
        reference_level: reference.map(|r| r.level),
        omega_absolute,
        psi_absolute,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub min: f64,
    pub max: f64,
    pub argmax: Point,
    pub boundary_min: f64,
    pub boundary_max: f64,
}

/// Extrema of the composite vorticity over all level-`k` nodes, and over
/// the boundary nodes alone.
pub fn extremum_of_vorticity(sol: &StokesSolution, fine: &TriangleMesh) -> Result<Extremum> {
    sol.omega.validate(fine)?;
    let mut ext = Extremum {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        argmax: [f64::NAN; 2],
        boundary_min: f64::INFINITY,
        boundary_max: f64::NEG_INFINITY,
    };
    for (v, &w) in sol.omega.values.iter().enumerate() {
        ext.min = ext.min.min(w);
        if w > ext.max {
            ext.max = w;
            ext.argmax = fine.vertices[v];
        }
        if fine.is_boundary(v) {
            ext.boundary_min = ext.boundary_min.min(w);
            ext.boundary_max = ext.boundary_max.max(w);
        }
    }
    Ok(ext)
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn fit_order(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("order fit needs at least 2 points".into()));
    }
    if let Some(&(h, e)) = points.iter().find(|&&(h, e)| !(h > 0.0) || !(e > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "order fit needs positive sizes and errors, got ({h}, {e})"
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("order fit needs distinct mesh sizes".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// `||f - I_h f||_{L2}` by element quadrature.
pub fn interpolation_error_l2(mesh: &TriangleMesh, f: impl Fn(Point) -> f64) -> f64 {
    let q = QuadratureRule::seven_point();
    let nodal: Vec<f64> = mesh.vertices.iter().map(|p| f(*p)).collect();
    let mut total = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let corners = tri.map(|i| mesh.vertices[i]);
        let area = mesh.triangle_area(t);
        for ((x, w), l) in q.map(&corners).zip(&q.points) {
            let interp = l[0] * nodal[tri[0]] + l[1] * nodal[tri[1]] + l[2] * nodal[tri[2]];
            total += w * area * (f(x) - interp).powi(2);
        }
    }
    total.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub mesh_id: String,
    pub h: f64,
    pub sigma: f64,
    pub k: usize,
    pub n_vertices: usize,
    pub n_vertices_fine: usize,
    pub err_omega_l2: f64,
    pub err_omega_m: Option<f64>,
    pub err_psi_l2: f64,
    pub err_psi_h1: f64,
    pub omega_max_boundary: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FittedOrders {
    pub k: usize,
    pub omega_l2_order: f64,
    pub omega_m_order: Option<f64>,
    pub psi_l2_order: f64,
    pub psi_h1_order: f64,
}

#[derive(Debug, Clone)]
pub struct StudyOptions {
    pub tol: f64,
    pub quadrature_degree: usize,
    /// Levels above `k` used for the M-norm dual term; `None` skips it.
    pub m_norm_offset: Option<usize>,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            tol: crate::fem::DEFAULT_TOL,
            quadrature_degree: 5,
            m_norm_offset: Some(1),
        }
    }
}

/// Solves `case` at level `k` on each mesh of `family` and fits convergence
/// orders. Records are returned sorted by decreasing `h`.
pub fn convergence_study(
    family: &[(String, TriangleMesh)],
    k: usize,
    case: &AnalyticCase,
    opts: &StudyOptions,
) -> Result<(Vec<ConvergenceRecord>, FittedOrders)> {
    if family.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need >= 3 meshes for a convergence study, got {}",
            family.len()
        )));
    }
    let mut records = family
        .par_iter()
        .map(|(id, mesh)| study_one(id, mesh, k, case, opts))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| b.h.partial_cmp(&a.h).unwrap());
    if records.windows(2).any(|w| !(w[1].h < w[0].h)) {
        return Err(Error::InvalidArgument(
            "mesh sizes of a convergence family must be distinct".into(),
        ));
    }
    let fit = |sel: &dyn Fn(&ConvergenceRecord) -> f64| {
        fit_order(&records.iter().map(|r| (r.h, sel(r))).collect::<Vec<_>>())
    };
    let omega_m_order = if records.iter().all(|r| r.err_omega_m.is_some()) {
        Some(fit(&|r| r.err_omega_m.unwrap())?)
    } else {
        None
    };
    let orders = FittedOrders {
        k,
        omega_l2_order: fit(&|r| r.err_omega_l2)?,
        omega_m_order,
        psi_l2_order: fit(&|r| r.err_psi_l2)?,
        psi_h1_order: fit(&|r| r.err_psi_h1)?,
    };
    Ok((records, orders))
}

fn study_one(
    id: &str,
    mesh: &TriangleMesh,
    k: usize,
    case: &AnalyticCase,
    opts: &StudyOptions,
) -> Result<ConvergenceRecord> {
    let start = Instant::now();
    let depth = k + opts.m_norm_offset.unwrap_or(0);
    let h = MeshHierarchy::with_depth(mesh.clone(), depth);
    let cfg = StokesConfig {
        k,
        tol: opts.tol,
        quadrature_degree: opts.quadrature_degree,
    };
    let coarse = LevelSpace::new(&h, 0)?;
    let fine_owned;
    let fine = if k == 0 {
        &coarse
    } else {
        fine_owned = LevelSpace::new(&h, k)?;
        &fine_owned
    };
    let sol = solve_stokes_on(&cfg, &coarse, fine, |p| case.forcing(p))?;
    let reference = match opts.m_norm_offset {
        Some(off) if off > 0 => Some(LevelSpace::new(&h, k + off)?),
        _ => None,
    };
    let reference = match (opts.m_norm_offset, &reference) {
        (Some(0), _) => Some(fine),
        (_, r) => r.as_ref(),
    };
    let errors = relative_errors(&sol, case, &coarse, fine, reference, opts.tol)?;
    let ext = extremum_of_vorticity(&sol, fine.mesh())?;
    Ok(ConvergenceRecord {
        mesh_id: id.to_string(),
        h: mesh.mesh_size(),
        sigma: mesh.sigma_regularity()?,
        k,
        n_vertices: mesh.vertex_count(),
        n_vertices_fine: fine.vertex_count(),
        err_omega_l2: errors.omega_l2,
        err_omega_m: errors.omega_m,
        err_psi_l2: errors.psi_l2,
        err_psi_h1: errors.psi_h1,
        omega_max_boundary: ext.boundary_max,
        seconds: start.elapsed().as_secs_f64(),
    })
}
