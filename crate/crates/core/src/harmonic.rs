//! Discrete harmonic lifts of the coarse boundary hat functions, their
//! mass Gram matrix, the non-harmonic parts of coarse lifts, and the
//! stability ratio `||lap Z_k(lambda)||_{-1} / ||Z_k(lambda)||_0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{dual_norm_hm1, SolveStats};
use crate::field::ScalarField;
use crate::hierarchy::MeshHierarchy;
use crate::mesh::{Point, TriangleMesh};
use crate::space::LevelSpace;

/// Values at the boundary vertices of the coarse mesh, in loop order; the
/// trace is linear on each coarse boundary edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub values: Vec<f64>,
}

impl BoundaryTrace {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self {
            values: vec![value; len],
        }
    }

    /// Trace of `f` sampled at the coarse boundary vertices.
    pub fn from_fn(coarse: &TriangleMesh, f: impl Fn(Point) -> f64) -> Self {
        Self {
            values: coarse
                .boundary_vertices
                .iter()
                .map(|&v| f(coarse.vertices[v]))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The boundary hat of coarse vertex `vertex`: one there, zero at every other
/// coarse boundary vertex.
pub fn hat_trace(coarse: &TriangleMesh, vertex: usize) -> Result<BoundaryTrace> {
    let pos = coarse
        .boundary_position(vertex)
        .ok_or(Error::NotBoundaryVertex(vertex))?;
    let mut values = vec![0.0; coarse.boundary_vertices.len()];
    values[pos] = 1.0;
    Ok(BoundaryTrace { values })
}

/// Lifts of every coarse boundary hat on one level, with their L2 Gram matrix.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    pub level: usize,
    /// `lifts[i]` lifts the hat of the i-th coarse boundary vertex (loop order).
    pub lifts: Vec<ScalarField>,
    pub gram_mass: DMatrix<f64>,
    pub stats: Vec<SolveStats>,
}

impl HarmonicBasis {
    pub fn len(&self) -> usize {
        self.lifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lifts.is_empty()
    }

    /// `sum_S c_S Z_k(lambda_S)`.
    pub fn combine(&self, coefficients: &[f64]) -> ScalarField {
        let n = self.lifts.first().map_or(0, |l| l.len());
        let mut out = ScalarField::zeros(self.level, n);
        for (lift, &c) in self.lifts.iter().zip(coefficients) {
            if c != 0.0 {
                out.axpy(c, lift);
            }
        }
        out
    }

    /// `(u, Z_k(lambda_S))_{L2}` for every S, with `mass` the level mass matrix.
    pub fn project(&self, u: &ScalarField, mass: &crate::fem::CsrMatrix) -> Vec<f64> {
        let mu = mass.matvec(&u.values);
        self.lifts
            .iter()
            .map(|l| l.values.iter().zip(&mu).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// `Z_k(lambda)` on level `k` of `h`.
pub fn lift_discrete_harmonic(
    h: &MeshHierarchy,
    trace: &BoundaryTrace,
    k: usize,
    tol: f64,
) -> Result<ScalarField> {
    let space = LevelSpace::new(h, k)?;
    space.lift(trace, tol).map(|(f, _)| f)
}

/// Lifts all coarse boundary hats on `space`'s level and assembles their Gram matrix.
pub fn build_basis(space: &LevelSpace<'_>, tol: f64) -> Result<HarmonicBasis> {
    let coarse = space.hierarchy.coarse();
    let nb = coarse.boundary_vertices.len();
    let results: Vec<Result<(ScalarField, SolveStats)>> = (0..nb)
        .into_par_iter()
        .map(|i| {
            let mut values = vec![0.0; nb];
            values[i] = 1.0;
            space
                .lift(&BoundaryTrace { values }, tol)
                .map_err(|e| Error::Lift {
                    vertex: coarse.boundary_vertices[i],
                    source: Box::new(e),
                })
        })
        .collect();
    let mut lifts = Vec::with_capacity(nb);
    let mut stats = Vec::with_capacity(nb);
    for r in results {
        let (l, s) = r?;
        lifts.push(l);
        stats.push(s);
    }
    let gram_mass = gram(&lifts, |v| space.ops.mass.matvec(v));
    Ok(HarmonicBasis {
        level: space.level,
        lifts,
        gram_mass,
        stats,
    })
}

/// Symmetric matrix `G_ij = u_i^T B u_j` for an operator `apply = B`.
fn gram(fields: &[ScalarField], apply: impl Fn(&[f64]) -> Vec<f64> + Sync) -> DMatrix<f64> {
    let n = fields.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let bi = apply(&fields[i].values);
            (i..n)
                .map(|j| bi.iter().zip(&fields[j].values).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect();
    let mut g = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            g[(i, i + off)] = v;
            g[(i + off, i)] = v;
        }
    }
    g
}

/// `eta_{S,k}`: the interior P1 field on level `k` with
/// `(grad eta, grad chi) = (grad h_S, grad chi)` for all interior hats `chi`,
/// where `h_S` is the level-0 lift of the hat of `vertex`, prolongated.
pub fn nonharmonic_part(space: &LevelSpace<'_>, vertex: usize, tol: f64) -> Result<ScalarField> {
    let h = space.hierarchy;
    let trace = hat_trace(h.coarse(), vertex)?;
    if space.level == 0 {
        // the level-0 lift is its own discrete harmonic
        return Ok(ScalarField::zeros(0, space.vertex_count()));
    }
    let coarse_space = LevelSpace::new(h, 0)?;
    let (h_s, _) = coarse_space.lift(&trace, tol)?;
    let h_s = space.prolongate(&h_s)?;
    let load = space.ops.stiffness.matvec(&h_s.values);
    space.solve_homogeneous(&load, tol).map(|(f, _)| f)
}

/// `||lap Z_k(lambda)||_{-1} / ||Z_k(lambda)||_0`, the dual norm taken on
/// the interior space of `reference`'s level (which must be finer than `k`).
pub fn stability_ratio(
    level: &LevelSpace<'_>,
    reference: &LevelSpace<'_>,
    trace: &BoundaryTrace,
    tol: f64,
) -> Result<f64> {
    if reference.level <= level.level {
        return Err(Error::InvalidArgument(format!(
            "reference level {} must exceed level {}",
            reference.level, level.level
        )));
    }
    let (z, _) = level.lift(trace, tol)?;
    let denom = level.ops.mass.quadratic_form(&z.values).max(0.0).sqrt();
    let zr = reference.prolongate(&z)?;
    let b = reference.laplacian_load(&zr)?;
    let num = dual_norm_hm1(&b, reference.solver(), tol)?;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(num / denom)
}

#[derive(Debug, Clone)]
pub struct StabilityScan {
    pub level: usize,
    pub reference_level: usize,
    pub rho_max: f64,
    pub worst_trace: BoundaryTrace,
    /// Per-hat ratios `sqrt(N_SS / G_SS)`.
    pub hat_ratios: Vec<f64>,
}

/// Supremum of the stability ratio over the whole discrete harmonic space of
/// `basis`, via the generalized eigenproblem `N c = mu G c` with
/// `N_ST = b_S^T A^{-1} b_T` on the reference level.
pub fn stability_scan(
    basis: &HarmonicBasis,
    reference: &LevelSpace<'_>,
    tol: f64,
) -> Result<StabilityScan> {
    if reference.level <= basis.level {
        return Err(Error::InvalidArgument(format!(
            "reference level {} must exceed basis level {}",
            reference.level, basis.level
        )));
    }
    let n = basis.len();
    let solved: Vec<Result<(Vec<f64>, Vec<f64>)>> = basis
        .lifts
        .par_iter()
        .map(|z| {
            let zr = reference.prolongate(z)?;
            let b = reference.laplacian_load(&zr)?;
            let (x, _) = crate::fem::InteriorSolver::solve_interior(reference.solver(), &b, tol)?;
            Ok((b, x))
        })
        .collect();
    let mut loads = Vec::with_capacity(n);
    let mut sols = Vec::with_capacity(n);
    for r in solved {
        let (b, x) = r?;
        loads.push(b);
        sols.push(x);
    }
    let mut dual = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            // symmetrize: b_i . x_j and b_j . x_i agree up to solver tolerance
            let v = 0.5
                * (dot(&loads[i], &sols[j]) + dot(&loads[j], &sols[i]));
            dual[(i, j)] = v;
            dual[(j, i)] = v;
        }
    }
    let hat_ratios = (0..n)
        .map(|i| (dual[(i, i)].max(0.0) / basis.gram_mass[(i, i)]).sqrt())
        .collect();
    let (mu, vectors) = generalized_symmetric_eigen(&dual, &basis.gram_mass)?;
    let top = mu.len() - 1;
    let mut c: Vec<f64> = vectors.column(top).iter().cloned().collect();
    let scale = c.iter().fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
    if scale != 0.0 {
        c.iter_mut().for_each(|v| *v /= scale);
    }
    Ok(StabilityScan {
        level: basis.level,
        reference_level: reference.level,
        rho_max: mu[top].max(0.0).sqrt(),
        worst_trace: BoundaryTrace::new(c),
        hat_ratios,
    })
}

/// Eigenpairs of `a c = mu b c` for symmetric `a` and SPD `b`, eigenvalues
/// ascending. Reduces to a standard problem with the Cholesky factor of `b`.
pub fn generalized_symmetric_eigen(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let chol = b.clone().cholesky().ok_or_else(|| Error::SingularGram {
        min_ritz: SymmetricEigen::new(b.clone()).eigenvalues.min(),
    })?;
    let l = chol.l();
    // C = L^{-1} A L^{-T}
    let linv_a = l
        .solve_lower_triangular(a)
        .expect("Cholesky factor is invertible");
    let c = l
        .solve_lower_triangular(&linv_a.transpose())
        .expect("Cholesky factor is invertible");
    let c = 0.5 * (&c + c.transpose());
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lt = l.transpose();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let y: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        let x = lt.solve_upper_triangular(&y).expect("Cholesky factor is invertible");
        vectors.set_column(col, &x);
    }
    Ok((values, vectors))
}

/// One row of a stability study.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StabilityRow {
    pub k: usize,
    pub rho_max: f64,
}

/// Runs [`stability_scan`] for every level `k <= max_level` against the
/// fixed reference level `reference.level`.
pub fn stability_study(
    h: &MeshHierarchy,
    max_level: usize,
    reference: &LevelSpace<'_>,
    tol: f64,
) -> Result<Vec<StabilityScan>> {
    (0..=max_level)
        .map(|k| {
            let space = LevelSpace::new(h, k)?;
            let basis = build_basis(&space, tol)?;
            stability_scan(&basis, reference, tol)
        })
        .collect()
}

/// Smallest scanned `k` with `rho_max <= 1 / delta`, or `None` if not reached.
pub fn estimate_k_from_scan(rows: &[StabilityRow], delta: f64) -> Option<usize> {
    let bound = 1.0 / delta;
    rows.iter().find(|r| r.rho_max <= bound).map(|r| r.k)
}

/// Empirical threshold level: scans `k = 0..=reference_level - 2` and
/// returns the first level whose harmonic space satisfies
/// `||phi||_0 >= delta ||lap phi||_{-1}`.
pub fn estimate_k(
    h: &MeshHierarchy,
    delta: f64,
    reference_level: usize,
    tol: f64,
) -> Result<(Option<usize>, Vec<StabilityRow>)> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if reference_level < 2 {
        return Err(Error::InvalidArgument(
            "reference level must be at least 2".into(),
        ));
    }
    let reference = LevelSpace::new(h, reference_level)?;
    let mut rows = Vec::new();
    for k in 0..=reference_level - 2 {
        let space = LevelSpace::new(h, k)?;
        let basis = build_basis(&space, tol)?;
        let scan = stability_scan(&basis, &reference, tol)?;
        rows.push(StabilityRow {
            k,
            rho_max: scan.rho_max,
        });
        if scan.rho_max <= 1.0 / delta {
            return Ok((Some(k), rows));
        }
    }
    Ok((None, rows))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_perturbed_unit_square, build_structured_unit_square};
    use approx::assert_relative_eq;

    #[test]
    fn hat_traces_partition_unity() {
        let m = build_structured_unit_square(3).unwrap();
        let mut sum = vec![0.0; m.boundary_vertices.len()];
        for &v in &m.boundary_vertices {
            let t = hat_trace(&m, v).unwrap();
            assert_eq!(t.values.iter().sum::<f64>(), 1.0);
            sum.iter_mut().zip(&t.values).for_each(|(s, x)| *s += x);
        }
        assert!(sum.iter().all(|&s| s == 1.0));
        assert!(matches!(hat_trace(&m, 5), Err(Error::NotBoundaryVertex(5))));
    }

    #[test]
    fn corner_hat_on_single_cell() {
        let m = build_structured_unit_square(1).unwrap();
        assert_eq!(hat_trace(&m, 0).unwrap().values, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn basis_partition_of_unity_and_gram() {
        let h = MeshHierarchy::with_depth(build_perturbed_unit_square(5, 2, 0.25).unwrap(), 2);
        let space = LevelSpace::new(&h, 2).unwrap();
        let basis = build_basis(&space, 1e-12).unwrap();
        assert_eq!(basis.len(), 20);
        let ones = vec![1.0; basis.len()];
        let sum = basis.combine(&ones);
        assert!(sum.values.iter().all(|v| (v - 1.0).abs() < 1e-9));
        let c = DVector::from_vec(ones);
        assert_relative_eq!(c.dot(&(&basis.gram_mass * &c)), 1.0, epsilon = 1e-9);
        assert!(basis.gram_mass.clone().cholesky().is_some());
    }

    #[test]
    fn nonharmonic_part_vanishes_on_coarse_level() {
        let h = MeshHierarchy::with_depth(build_structured_unit_square(4).unwrap(), 1);
        let space = LevelSpace::new(&h, 0).unwrap();
        let eta = nonharmonic_part(&space, h.coarse().boundary_vertices[3], 1e-12).unwrap();
        assert!(eta.values.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn constant_trace_has_zero_ratio() {
        let h = MeshHierarchy::with_depth(build_structured_unit_square(4).unwrap(), 3);
        let lvl = LevelSpace::new(&h, 1).unwrap();
        let reference = LevelSpace::new(&h, 3).unwrap();
        let t = BoundaryTrace::constant(16, 1.0);
        assert!(stability_ratio(&lvl, &reference, &t, 1e-12).unwrap() < 1e-8);
        assert!(stability_ratio(&lvl, &lvl, &t, 1e-12).is_err());
    }

    #[test]
    fn generalized_eigen_small() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let b = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let (mu, v) = generalized_symmetric_eigen(&a, &b).unwrap();
        for (i, &m) in mu.iter().enumerate() {
            let x = v.column(i);
            let r = &a * x - m * (&b * x);
            assert!(r.amax() < 1e-12);
        }
        // det(A - mu B) = (2 - 4mu)(3 - mu) - 1 = 4mu^2 - 14mu + 5
        let disc = (196.0f64 - 80.0).sqrt();
        assert_relative_eq!(mu[0], (14.0 - disc) / 8.0, epsilon = 1e-12);
        assert_relative_eq!(mu[1], (14.0 + disc) / 8.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_gram_is_reported() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            generalized_symmetric_eigen(&a, &b),
            Err(Error::SingularGram { .. })
        ));
    }

    #[test]
    fn estimate_from_rows() {
        let rows = [
            StabilityRow { k: 0, rho_max: 9.0 },
            StabilityRow { k: 1, rho_max: 3.0 },
            StabilityRow { k: 2, rho_max: 0.8 },
        ];
        assert_eq!(estimate_k_from_scan(&rows, 1e-9), Some(0));
        assert_eq!(estimate_k_from_scan(&rows, 0.2), Some(1));
        assert_eq!(estimate_k_from_scan(&rows, 1.0), Some(2));
        assert_eq!(estimate_k_from_scan(&rows, 1e6), None);
    }
}
