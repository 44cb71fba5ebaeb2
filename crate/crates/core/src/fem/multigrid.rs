//! Geometric multigrid on a nested hierarchy, used as a CG preconditioner
//! for interior stiffness systems on refined levels.
//!
//! Coarse operators are the assembled stiffness matrices of the coarser
//! levels, which coincide with the Galerkin products `P^T A P` because the
//! P1 spaces are nested. The V-cycle uses forward Gauss-Seidel before and
//! backward Gauss-Seidel after the coarse correction, so the preconditioner
//! is symmetric. The coarsest level is solved by dense Cholesky.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::fem::assembly::assemble_stiffness;
use crate::fem::solver::{default_max_iter, pcg, InteriorSolver, Preconditioner, SolveStats};
use crate::fem::sparse::{dirichlet_restrict, CsrMatrix, RestrictedMatrix};
use crate::hierarchy::{MeshHierarchy, VertexOrigin};

const SMOOTHING_STEPS: usize = 2;

struct MgLevel {
    system: RestrictedMatrix,
    diag: Vec<f64>,
    /// Interior prolongation from the next coarser level: up to two
    /// (coarse local index, weight) pairs per fine interior unknown.
    prolongation: Vec<[(usize, f64); 2]>,
}

pub struct MultigridSolver {
    levels: Vec<MgLevel>,
    coarse: Option<Cholesky<f64, Dyn>>,
}

impl MultigridSolver {
    /// Assembles interior stiffness matrices of levels `0..=top`.
    pub fn new(h: &MeshHierarchy, top: usize) -> Result<Self> {
        let mut systems = Vec::with_capacity(top + 1);
        for k in 0..=top {
            let mesh = h.level(k)?;
            systems.push(dirichlet_restrict(&assemble_stiffness(mesh)?, mesh)?);
        }
        Self::from_systems(h, systems)
    }

    /// Uses already assembled interior systems for levels `0..systems.len()`.
    pub fn from_systems(h: &MeshHierarchy, systems: Vec<RestrictedMatrix>) -> Result<Self> {
        let mut levels: Vec<MgLevel> = Vec::with_capacity(systems.len());
        for (k, system) in systems.into_iter().enumerate() {
            let prolongation = if k == 0 {
                Vec::new()
            } else {
                let coarse_local = local_index(&levels[k - 1].system);
                let origins = h.vertex_origins(k);
                system
                    .interior
                    .iter()
                    .map(|&v| match origins[v] {
                        VertexOrigin::Copy(p) => [(coarse_local[p], 1.0), (0, 0.0)],
                        VertexOrigin::Midpoint(a, b) => {
                            let w = |i: usize| {
                                if coarse_local[i] == usize::MAX {
                                    (0, 0.0)
                                } else {
                                    (coarse_local[i], 0.5)
                                }
                            };
                            [w(a), w(b)]
                        }
                    })
                    .collect()
            };
            let diag = system.matrix.diagonal();
            if diag.iter().any(|&d| !(d > 0.0)) {
                return Err(Error::InvalidArgument(format!(
                    "level {k} interior stiffness has a non-positive diagonal"
                )));
            }
            levels.push(MgLevel {
                system,
                diag,
                prolongation,
            });
        }
        let coarse_matrix = &levels[0].system.matrix;
        let coarse = if coarse_matrix.dim() == 0 {
            None
        } else {
            let dense: DMatrix<f64> = coarse_matrix.to_dense();
            Some(dense.cholesky().ok_or_else(|| {
                Error::InvalidArgument("coarse interior stiffness is not positive definite".into())
            })?)
        };
        Ok(Self { levels, coarse })
    }

    pub fn top_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn top_system(&self) -> &RestrictedMatrix {
        &self.levels.last().unwrap().system
    }

    /// Solves `A x = b` on the finest interior system, starting from `x`.
    pub fn solve_from(&self, b: &[f64], x: &mut [f64], tol: f64) -> Result<SolveStats> {
        let top = self.top_system();
        pcg(&top.matrix, b, x, self, tol, default_max_iter(top.dim()))
    }

    fn v_cycle(&self, k: usize, b: &[f64], x: &mut [f64]) {
        if k == 0 {
            if let Some(chol) = &self.coarse {
                let sol = chol.solve(&DVector::from_column_slice(b));
                x.copy_from_slice(sol.as_slice());
            }
            return;
        }
        let level = &self.levels[k];
        let a = &level.system.matrix;
        x.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..SMOOTHING_STEPS {
            gauss_seidel(a, &level.diag, b, x, false);
        }
        let ax = a.matvec(x);
        let coarse_n = self.levels[k - 1].system.dim();
        let mut rc = vec![0.0; coarse_n];
        for ((p, bi), axi) in level.prolongation.iter().zip(b).zip(&ax) {
            let r = bi - axi;
            for &(j, w) in p {
                if w != 0.0 {
                    rc[j] += w * r;
                }
            }
        }
        let mut xc = vec![0.0; coarse_n];
        self.v_cycle(k - 1, &rc, &mut xc);
        for (xi, p) in x.iter_mut().zip(&level.prolongation) {
            for &(j, w) in p {
                if w != 0.0 {
                    *xi += w * xc[j];
                }
            }
        }
        for _ in 0..SMOOTHING_STEPS {
            gauss_seidel(a, &level.diag, b, x, true);
        }
    }
}

impl Preconditioner for MultigridSolver {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.v_cycle(self.top_level(), r, z);
    }
}

impl InteriorSolver for MultigridSolver {
    fn interior_dim(&self) -> usize {
        self.top_system().dim()
    }

    fn solve_interior(&self, b: &[f64], tol: f64) -> Result<(Vec<f64>, SolveStats)> {
        let mut x = vec![0.0; self.interior_dim()];
        let stats = self.solve_from(b, &mut x, tol)?;
        Ok((x, stats))
    }
}

fn local_index(system: &RestrictedMatrix) -> Vec<usize> {
    let mut local = vec![usize::MAX; system.global_dim()];
    for (l, &g) in system.interior.iter().enumerate() {
        local[g] = l;
    }
    local
}

fn gauss_seidel(a: &CsrMatrix, diag: &[f64], b: &[f64], x: &mut [f64], backward: bool) {
    let n = a.dim();
    let mut sweep = |i: usize| {
        let (cols, vals) = a.row(i);
        let mut s = b[i];
        for (&j, &v) in cols.iter().zip(vals) {
            if j != i {
                s -= v * x[j];
            }
        }
        x[i] = s / diag[i];
    };
    if backward {
        (0..n).rev().for_each(&mut sweep);
    } else {
        (0..n).for_each(&mut sweep);
    }
}
