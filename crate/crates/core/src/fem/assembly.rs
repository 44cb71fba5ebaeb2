//! Element integrals for P1 triangles, assembled in ascending triangle order.

use crate::error::{Error, Result};
use crate::fem::quadrature::QuadratureRule;
use crate::fem::sparse::{dirichlet_restrict, CsrMatrix, RestrictedMatrix};
use crate::mesh::{Point, TriangleMesh};

/// Area and the (constant) gradients of the three barycentric hat functions.
pub(crate) struct ElementGeometry {
    pub area: f64,
    pub grads: [[f64; 2]; 3],
    pub corners: [Point; 3],
}

pub(crate) fn element_geometry(mesh: &TriangleMesh, t: usize) -> Result<ElementGeometry> {
    let tri = mesh.triangles[t];
    let [p0, p1, p2] = tri.map(|i| mesh.vertices[i]);
    let twice_area = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    if twice_area <= 0.0 || !twice_area.is_finite() {
        return Err(Error::DegenerateTriangle {
            index: t,
            area: 0.5 * twice_area,
        });
    }
    let inv = 1.0 / twice_area;
    Ok(ElementGeometry {
        area: 0.5 * twice_area,
        grads: [
            [(p1[1] - p2[1]) * inv, (p2[0] - p1[0]) * inv],
            [(p2[1] - p0[1]) * inv, (p0[0] - p2[0]) * inv],
            [(p0[1] - p1[1]) * inv, (p1[0] - p0[0]) * inv],
        ],
        corners: [p0, p1, p2],
    })
}

/// Global stiffness `A_ij = sum_K int_K grad phi_i . grad phi_j`, no boundary elimination.
pub fn assemble_stiffness(mesh: &TriangleMesh) -> Result<CsrMatrix> {
    let mut a = CsrMatrix::with_mesh_pattern(mesh);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let g = element_geometry(mesh, t)?;
        for i in 0..3 {
            for j in 0..3 {
                let kij = g.area * (g.grads[i][0] * g.grads[j][0] + g.grads[i][1] * g.grads[j][1]);
                a.add(tri[i], tri[j], kij);
            }
        }
    }
    Ok(a)
}

/// Consistent mass matrix, element block `area / 12 * [[2,1,1],[1,2,1],[1,1,2]]`.
pub fn assemble_mass(mesh: &TriangleMesh) -> Result<CsrMatrix> {
    let mut m = CsrMatrix::with_mesh_pattern(mesh);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let g = element_geometry(mesh, t)?;
        let (diag, off) = (g.area / 6.0, g.area / 12.0);
        for i in 0..3 {
            for j in 0..3 {
                m.add(tri[i], tri[j], if i == j { diag } else { off });
            }
        }
    }
    Ok(m)
}

/// Load `b_i = (f, rot phi_i) = sum_K int_K (f1 d_y phi_i - f2 d_x phi_i)`.
///
/// The hat gradients are constant per triangle, so only `int_K f` is
/// approximated by `q`; the result is exact for polynomial `f` of degree at
/// most `q.degree`.
pub fn assemble_load_curl<F>(mesh: &TriangleMesh, f: F, q: &QuadratureRule) -> Result<Vec<f64>>
where
    F: Fn(Point) -> [f64; 2],
{
    let mut b = vec![0.0; mesh.vertex_count()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let g = element_geometry(mesh, t)?;
        let mut mean = [0.0; 2];
        for (x, w) in q.map(&g.corners) {
            let fx = f(x);
            mean[0] += w * fx[0];
            mean[1] += w * fx[1];
        }
        for i in 0..3 {
            b[tri[i]] += g.area * (mean[0] * g.grads[i][1] - mean[1] * g.grads[i][0]);
        }
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("curl load"));
    }
    Ok(b)
}

/// Load `b_i = int g phi_i` by quadrature.
pub fn assemble_load_scalar<F>(mesh: &TriangleMesh, g: F, q: &QuadratureRule) -> Result<Vec<f64>>
where
    F: Fn(Point) -> f64,
{
    let mut b = vec![0.0; mesh.vertex_count()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let geo = element_geometry(mesh, t)?;
        for ((x, w), l) in q.map(&geo.corners).zip(&q.points) {
            let gx = g(x) * w * geo.area;
            for i in 0..3 {
                b[tri[i]] += gx * l[i];
            }
        }
    }
    Ok(b)
}

/// `int_K u^2` for each triangle of a P1 field.
pub fn element_l2_squared(mesh: &TriangleMesh, values: &[f64]) -> Vec<f64> {
    mesh.triangles
        .iter()
        .enumerate()
        .map(|(t, tri)| {
            let [a, b, c] = tri.map(|i| values[i]);
            mesh.triangle_area(t) / 6.0 * (a * a + b * b + c * c + a * b + b * c + c * a)
        })
        .collect()
}

/// Stiffness, mass and interior stiffness of one mesh level.
#[derive(Debug, Clone)]
pub struct LevelOperators {
    pub level: usize,
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub interior_stiffness: RestrictedMatrix,
}

impl LevelOperators {
    pub fn assemble(mesh: &TriangleMesh) -> Result<Self> {
        let stiffness = assemble_stiffness(mesh)?;
        let mass = assemble_mass(mesh)?;
        let interior_stiffness = dirichlet_restrict(&stiffness, mesh)?;
        Ok(Self {
            level: mesh.level,
            stiffness,
            mass,
            interior_stiffness,
        })
    }
}
