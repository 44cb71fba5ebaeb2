use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;

/// Compressed sparse row matrix with sorted column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the sparsity pattern of P1 couplings on `mesh`
    /// (each vertex with itself and its edge neighbours).
    pub fn with_mesh_pattern(mesh: &TriangleMesh) -> Self {
        let n = mesh.vertex_count();
        let mut degree = vec![1usize; n];
        // every edge is seen once or twice; count neighbours via a sorted edge list
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(3 * mesh.triangle_count());
        for t in &mesh.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        for &(a, b) in &edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        for d in &degree {
            row_ptr.push(row_ptr.last().unwrap() + d);
        }
        let nnz = row_ptr[n];
        let mut col_idx = vec![0; nnz];
        let mut fill: Vec<usize> = row_ptr[..n].to_vec();
        for i in 0..n {
            col_idx[fill[i]] = i;
            fill[i] += 1;
        }
        for &(a, b) in &edges {
            col_idx[fill[a]] = b;
            fill[a] += 1;
            col_idx[fill[b]] = a;
            fill[b] += 1;
        }
        for i in 0..n {
            col_idx[row_ptr[i]..row_ptr[i + 1]].sort_unstable();
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        }
    }

    /// Builds a matrix from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_ptr[i];
        self.col_idx[start..self.row_ptr[i + 1]]
            .binary_search(&j)
            .ok()
            .map(|p| start + p)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.values[p])
    }

    /// Adds `v` to entry `(i, j)`, which must be in the sparsity pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let p = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) outside sparsity pattern"));
        self.values[p] += v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yi = s;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.matvec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    /// Submatrix on the rows and columns listed in `keep` (ascending).
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.n];
        for (l, &g) in keep.iter().enumerate() {
            local[g] = l;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for &g in keep {
            for p in self.row_ptr[g]..self.row_ptr[g + 1] {
                let l = local[self.col_idx[p]];
                if l != usize::MAX {
                    col_idx.push(l);
                    values.push(self.values[p]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n: keep.len(),
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Exact structural and numerical symmetry.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).all(|(&j, &v)| self.get(j, i) == v)
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] += v;
            }
        }
        d
    }
}

/// A matrix restricted to the interior vertices of a mesh (homogeneous
/// Dirichlet conditions by elimination), together with the index map.
#[derive(Debug, Clone)]
pub struct RestrictedMatrix {
    pub matrix: CsrMatrix,
    /// Global vertex index of each local unknown, ascending.
    pub interior: Vec<usize>,
    n_global: usize,
}

impl RestrictedMatrix {
    pub fn dim(&self) -> usize {
        self.interior.len()
    }

    pub fn global_dim(&self) -> usize {
        self.n_global
    }

    /// Interior entries of a global vector.
    pub fn gather(&self, global: &[f64]) -> Result<Vec<f64>> {
        if global.len() != self.n_global {
            return Err(Error::DimensionMismatch {
                expected: self.n_global,
                found: global.len(),
            });
        }
        Ok(self.interior.iter().map(|&g| global[g]).collect())
    }

    /// Global vector with `local` on the interior and zeros on the boundary.
    pub fn scatter(&self, local: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_global];
        for (&g, &v) in self.interior.iter().zip(local) {
            out[g] = v;
        }
        out
    }
}

/// Removes the boundary rows and columns of `a`.
pub fn dirichlet_restrict(a: &CsrMatrix, mesh: &TriangleMesh) -> Result<RestrictedMatrix> {
    if a.dim() != mesh.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: mesh.vertex_count(),
            found: a.dim(),
        });
    }
    let interior = mesh.interior_vertices();
    Ok(RestrictedMatrix {
        matrix: a.submatrix(&interior),
        interior,
        n_global: a.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, vec![(1, 0, 2.0), (0, 0, 1.0), (1, 0, 3.0), (1, 1, 4.0)]);
        assert_eq!(a.get(1, 0), 5.0);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.matvec(&[1.0, 1.0]), vec![1.0, 9.0]);
        assert_eq!(a.nnz(), 3);
    }

    #[test]
    fn submatrix_keeps_selected_block() {
        let a = CsrMatrix::from_triplets(
            3,
            vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0), (2, 0, 2.0), (2, 2, 5.0)],
        );
        let s = a.submatrix(&[0, 2]);
        assert_eq!(s.to_dense(), DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 5.0]));
        assert!(s.is_symmetric());
    }
}
