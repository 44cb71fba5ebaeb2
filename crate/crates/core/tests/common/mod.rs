//! Independent dense reference implementation of the unstabilized coupled
//! P1 stream function / vorticity system, sharing no assembly code with the
//! library.
#![allow(dead_code)]

use harmonic_stokes::TriangleMesh;
use nalgebra::{DMatrix, DVector};

// 4-point Gauss-Legendre on [0, 1]
const GL_X: [f64; 4] = [
    0.5 - 0.5 * 0.861_136_311_594_052_6,
    0.5 - 0.5 * 0.339_981_043_584_856_3,
    0.5 + 0.5 * 0.339_981_043_584_856_3,
    0.5 + 0.5 * 0.861_136_311_594_052_6,
];
const GL_W: [f64; 4] = [
    0.5 * 0.347_854_845_137_453_8,
    0.5 * 0.652_145_154_862_546_1,
    0.5 * 0.652_145_154_862_546_1,
    0.5 * 0.347_854_845_137_453_8,
];

/// Collapsed tensor Gauss rule on a triangle, exact through degree 7.
pub fn triangle_integral(p: [[f64; 2]; 3], g: impl Fn([f64; 2]) -> f64) -> f64 {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let mut sum = 0.0;
    for (u, wu) in GL_X.iter().zip(GL_W) {
        for (v, wv) in GL_X.iter().zip(GL_W) {
            let s = *u;
            let t = (1.0 - u) * v;
            let x = [
                p[0][0] + s * (p[1][0] - p[0][0]) + t * (p[2][0] - p[0][0]),
                p[0][1] + s * (p[1][1] - p[0][1]) + t * (p[2][1] - p[0][1]),
            ];
            sum += wu * wv * (1.0 - u) * g(x);
        }
    }
    sum * det.abs()
}

fn gradients(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let g = std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        [(p[j][1] - p[k][1]) / det, (p[k][0] - p[j][0]) / det]
    });
    (g, det.abs() / 2.0)
}

/// Dense stiffness and mass matrices.
pub fn dense_operators(mesh: &TriangleMesh) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = mesh.vertices.len();
    let mut a = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    for t in &mesh.triangles {
        let p = t.map(|i| mesh.vertices[i]);
        let (g, area) = gradients(p);
        for i in 0..3 {
            for j in 0..3 {
                a[(t[i], t[j])] += area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                m[(t[i], t[j])] += area * if i == j { 1.0 / 6.0 } else { 1.0 / 12.0 };
            }
        }
    }
    (a, m)
}

/// Solves, for `omega` in all of P1 and `psi` in P1 vanishing on the boundary,
/// `(omega, phi) - (grad psi, grad phi) = 0` for every P1 `phi` and
/// `(grad omega, grad xi) = (f, rot xi)` for every interior `xi`.
/// Returns nodal `(psi, omega)`.
pub fn coupled_k0(mesh: &TriangleMesh, f: impl Fn([f64; 2]) -> [f64; 2]) -> (Vec<f64>, Vec<f64>) {
    let n = mesh.vertices.len();
    let mut on_boundary = vec![false; n];
    for &v in &mesh.boundary_vertices {
        on_boundary[v] = true;
    }
    let interior: Vec<usize> = (0..n).filter(|&v| !on_boundary[v]).collect();
    let m_int = interior.len();
    let (a, m) = dense_operators(mesh);

    let mut load = vec![0.0; n];
    for t in &mesh.triangles {
        let p = t.map(|i| mesh.vertices[i]);
        let (g, _) = gradients(p);
        let f1 = triangle_integral(p, |x| f(x)[0]);
        let f2 = triangle_integral(p, |x| f(x)[1]);
        for i in 0..3 {
            // rot xi = (d xi/dy, -d xi/dx)
            load[t[i]] += f1 * g[i][1] - f2 * g[i][0];
        }
    }

    let dim = n + m_int;
    let mut k = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = m[(i, j)];
        }
        for (c, &j) in interior.iter().enumerate() {
            k[(i, n + c)] = -a[(i, j)];
        }
    }
    for (r, &i) in interior.iter().enumerate() {
        for j in 0..n {
            k[(n + r, j)] = a[(i, j)];
        }
        rhs[n + r] = load[i];
    }
    let x = k.lu().solve(&rhs).expect("coupled system is nonsingular");
    let omega = x.rows(0, n).iter().cloned().collect();
    let mut psi = vec![0.0; n];
    for (c, &j) in interior.iter().enumerate() {
        psi[j] = x[n + c];
    }
    (psi, omega)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}
