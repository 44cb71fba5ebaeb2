//! Operators and solvers of one level of a hierarchy, plus the discrete
//! harmonic lift of coarse boundary data onto that level.

use crate::error::{Error, Result};
use crate::fem::{
    assemble_stiffness, dirichlet_restrict, dual_norm_hm1, InteriorSolver, LevelOperators,
    MultigridSolver, SolveStats,
};
use crate::field::ScalarField;
use crate::harmonic::BoundaryTrace;
use crate::hierarchy::MeshHierarchy;
use crate::mesh::TriangleMesh;

pub struct LevelSpace<'h> {
    pub hierarchy: &'h MeshHierarchy,
    pub level: usize,
    pub ops: LevelOperators,
    solver: MultigridSolver,
}

impl<'h> LevelSpace<'h> {
    pub fn new(hierarchy: &'h MeshHierarchy, level: usize) -> Result<Self> {
        let ops = LevelOperators::assemble(hierarchy.level(level)?)?;
        let mut systems = Vec::with_capacity(level + 1);
        for k in 0..level {
            let mesh = hierarchy.level(k)?;
            systems.push(dirichlet_restrict(&assemble_stiffness(mesh)?, mesh)?);
        }
        systems.push(ops.interior_stiffness.clone());
        let solver = MultigridSolver::from_systems(hierarchy, systems)?;
        Ok(Self {
            hierarchy,
            level,
            ops,
            solver,
        })
    }

    pub fn mesh(&self) -> &'h TriangleMesh {
        &self.hierarchy.levels()[self.level]
    }

    pub fn solver(&self) -> &MultigridSolver {
        &self.solver
    }

    pub fn vertex_count(&self) -> usize {
        self.mesh().vertex_count()
    }

    /// Solves `A0 u = b` on the interior and returns `u` as a full field,
    /// zero on the boundary. `b` holds one value per vertex; boundary entries
    /// are ignored.
    pub fn solve_homogeneous(&self, load: &[f64], tol: f64) -> Result<(ScalarField, SolveStats)> {
        let sys = &self.ops.interior_stiffness;
        let b = sys.gather(load)?;
        let (x, stats) = self.solver.solve_interior(&b, tol)?;
        Ok((ScalarField::new(self.level, sys.scatter(&x)), stats))
    }

    /// Level values of the piecewise-linear interpolation of a coarse trace:
    /// correct on every boundary vertex of this level, zero inside.
    pub fn boundary_values(&self, trace: &BoundaryTrace) -> Result<Vec<f64>> {
        let coarse = self.hierarchy.coarse();
        if trace.values.len() != coarse.boundary_vertices.len() {
            return Err(Error::DimensionMismatch {
                expected: coarse.boundary_vertices.len(),
                found: trace.values.len(),
            });
        }
        let mut values = vec![0.0; coarse.vertex_count()];
        for (&v, &t) in coarse.boundary_vertices.iter().zip(&trace.values) {
            values[v] = t;
        }
        for k in 0..self.level {
            values = self.hierarchy.prolongate_values(k, &values);
        }
        let flags = self.mesh().boundary_flags();
        for (v, b) in values.iter_mut().zip(flags) {
            if !b {
                *v = 0.0;
            }
        }
        Ok(values)
    }

    /// Discrete harmonic lift `Z_k(trace)`: boundary values interpolate the
    /// trace, interior values make the field stiffness-orthogonal to every
    /// interior hat of this level.
    pub fn lift(&self, trace: &BoundaryTrace, tol: f64) -> Result<(ScalarField, SolveStats)> {
        if trace.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("boundary trace"));
        }
        let mut values = self.boundary_values(trace)?;
        let sys = &self.ops.interior_stiffness;
        let a_ub = self.ops.stiffness.matvec(&values);
        let rhs: Vec<f64> = sys.interior.iter().map(|&g| -a_ub[g]).collect();
        let (x, stats) = self.solver.solve_interior(&rhs, tol)?;
        for (&g, v) in sys.interior.iter().zip(x) {
            values[g] = v;
        }
        Ok((ScalarField::new(self.level, values), stats))
    }

    /// Interior entries of `A u`: the functional `xi -> (grad u, grad xi)`
    /// on the interior hats of this level.
    pub fn laplacian_load(&self, field: &ScalarField) -> Result<Vec<f64>> {
        field.validate(self.mesh())?;
        let au = self.ops.stiffness.matvec(&field.values);
        self.ops.interior_stiffness.gather(&au)
    }

    /// Discrete `H^-1` norm of `lap u` on this level.
    pub fn laplacian_dual_norm(&self, field: &ScalarField, tol: f64) -> Result<f64> {
        let b = self.laplacian_load(field)?;
        dual_norm_hm1(&b, &self.solver, tol)
    }

    /// Largest `|(grad u, grad xi)|` over interior hats of this level.
    pub fn harmonic_residual(&self, field: &ScalarField) -> Result<f64> {
        Ok(self
            .laplacian_load(field)?
            .iter()
            .fold(0.0, |m, v| m.max(v.abs())))
    }

    /// Prolongates a field of a coarser level to this level.
    pub fn prolongate(&self, field: &ScalarField) -> Result<ScalarField> {
        self.hierarchy.prolongate_to(field, self.level)
    }
}
