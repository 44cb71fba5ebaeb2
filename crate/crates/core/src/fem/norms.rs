use crate::error::{Error, Result};
use crate::fem::solver::{dot, InteriorSolver};
use crate::fem::sparse::CsrMatrix;
use crate::field::ScalarField;

fn check(v: &ScalarField, m: &CsrMatrix) -> Result<()> {
    if v.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: v.len(),
        });
    }
    Ok(())
}

/// `sqrt(v^T M v)` with `M` the mass matrix of `v`'s level.
pub fn norm_l2(v: &ScalarField, mass: &CsrMatrix) -> Result<f64> {
    check(v, mass)?;
    Ok(mass.quadratic_form(&v.values).max(0.0).sqrt())
}

/// `sqrt(v^T A v)` with `A` the (full) stiffness matrix of `v`'s level.
pub fn seminorm_h1(v: &ScalarField, stiffness: &CsrMatrix) -> Result<f64> {
    check(v, stiffness)?;
    Ok(stiffness.quadratic_form(&v.values).max(0.0).sqrt())
}

/// Discrete dual norm `sqrt(b^T A0^{-1} b)` of a functional given by its
/// values `b` on the interior hats, i.e. `sup_xi b(xi) / |xi|_1` over the
/// interior P1 space of the solver's level.
pub fn dual_norm_hm1<S: InteriorSolver + ?Sized>(b: &[f64], solver: &S, tol: f64) -> Result<f64> {
    if b.len() != solver.interior_dim() {
        return Err(Error::DimensionMismatch {
            expected: solver.interior_dim(),
            found: b.len(),
        });
    }
    let (x, _) = solver.solve_interior(b, tol)?;
    Ok(dot(b, &x).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assembly::LevelOperators;
    use crate::fem::sparse::dirichlet_restrict;
    use crate::mesh::{build_perturbed_unit_square, build_structured_unit_square};
    use approx::assert_relative_eq;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn constants_and_linears() {
        let m = build_perturbed_unit_square(6, 2, 0.25).unwrap();
        let ops = LevelOperators::assemble(&m).unwrap();
        let one = ScalarField::constant(0, m.vertex_count(), 1.0);
        assert_relative_eq!(norm_l2(&one, &ops.mass).unwrap(), 1.0, epsilon = 1e-13);
        assert!(seminorm_h1(&one, &ops.stiffness).unwrap() < 1e-6);
        let x = ScalarField::interpolate(&m, |p| p[0]);
        assert_relative_eq!(seminorm_h1(&x, &ops.stiffness).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn l2_norm_of_sine_product() {
        let m = build_structured_unit_square(64).unwrap();
        let ops = LevelOperators::assemble(&m).unwrap();
        let v = ScalarField::interpolate(&m, |p| (PI * p[0]).sin() * (PI * p[1]).sin());
        assert!((norm_l2(&v, &ops.mass).unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn dimension_mismatch() {
        let m = build_structured_unit_square(2).unwrap();
        let ops = LevelOperators::assemble(&m).unwrap();
        let v = ScalarField::zeros(0, 3);
        assert!(matches!(norm_l2(&v, &ops.mass), Err(Error::DimensionMismatch { .. })));
        assert!(dual_norm_hm1(&[1.0, 2.0], &ops.interior_stiffness, 1e-10).is_err());
    }

    #[test]
    fn dual_norm_of_zero_and_dense_oracle() {
        let m = build_perturbed_unit_square(8, 4, 0.25).unwrap();
        let ops = LevelOperators::assemble(&m).unwrap();
        let a0 = &ops.interior_stiffness;
        assert_eq!(dual_norm_hm1(&vec![0.0; a0.dim()], a0, 1e-12).unwrap(), 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let b: Vec<f64> = (0..a0.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dense = a0.matrix.to_dense().cholesky().unwrap();
        let bv = DVector::from_vec(b.clone());
        let oracle = bv.dot(&dense.solve(&bv)).sqrt();
        assert_relative_eq!(dual_norm_hm1(&b, a0, 1e-13).unwrap(), oracle, max_relative = 1e-10);
    }

    #[test]
    fn restricted_stiffness_is_positive_definite() {
        let m = build_perturbed_unit_square(7, 9, 0.25).unwrap();
        let ops = LevelOperators::assemble(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let v: Vec<f64> = (0..ops.interior_stiffness.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let rq = ops.interior_stiffness.matrix.quadratic_form(&v) / dot(&v, &v);
            assert!(rq > 0.0);
        }
        let n1 = build_structured_unit_square(1).unwrap();
        let a1 = assemble_restricted(&n1);
        assert_eq!(a1.dim(), 0);
        let n2 = build_structured_unit_square(2).unwrap();
        let a2 = assemble_restricted(&n2);
        assert_eq!(a2.dim(), 1);
        assert_relative_eq!(a2.matrix.get(0, 0), 4.0, epsilon = 1e-14);
    }

    fn assemble_restricted(m: &crate::mesh::TriangleMesh) -> crate::fem::RestrictedMatrix {
        dirichlet_restrict(&crate::fem::assemble_stiffness(m).unwrap(), m).unwrap()
    }
}
