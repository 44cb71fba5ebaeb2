//! Nested meshes obtained by uniform red refinement, and exact P1 transfer
//! between consecutive levels.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mesh::{edge_key, TriangleMesh};

/// Where a vertex of level `k + 1` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexOrigin {
    /// Same point as vertex `p` of the parent level.
    Copy(usize),
    /// Midpoint of the parent edge `(a, b)`, `a < b`.
    Midpoint(usize, usize),
}

#[derive(Debug, Clone)]
pub struct MeshHierarchy {
    levels: Vec<TriangleMesh>,
    /// `parent_triangle[k - 1][t]` is the level `k - 1` triangle containing child `t` of level `k`.
    parent_triangle: Vec<Vec<usize>>,
    /// `vertex_origin[k - 1][v]` describes vertex `v` of level `k`.
    vertex_origin: Vec<Vec<VertexOrigin>>,
}

impl MeshHierarchy {
    pub fn new(coarse: TriangleMesh) -> Self {
        let mut coarse = coarse;
        coarse.level = 0;
        Self {
            levels: vec![coarse],
            parent_triangle: Vec::new(),
            vertex_origin: Vec::new(),
        }
    }

    /// Builds `coarse` and refines it `depth` times.
    pub fn with_depth(coarse: TriangleMesh, depth: usize) -> Self {
        let mut h = Self::new(coarse);
        h.refine_to(depth);
        h
    }

    pub fn refine_to(&mut self, level: usize) {
        while self.finest_level() < level {
            self.refine_uniform();
        }
    }

    pub fn finest_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn coarse(&self) -> &TriangleMesh {
        &self.levels[0]
    }

    pub fn level(&self, k: usize) -> Result<&TriangleMesh> {
        self.levels.get(k).ok_or(Error::LevelMismatch {
            expected: self.finest_level(),
            found: k,
        })
    }

    pub fn levels(&self) -> &[TriangleMesh] {
        &self.levels
    }

    pub fn parent_triangles(&self, k: usize) -> &[usize] {
        &self.parent_triangle[k - 1]
    }

    pub fn vertex_origins(&self, k: usize) -> &[VertexOrigin] {
        &self.vertex_origin[k - 1]
    }

    /// Index of the level-0 triangle containing triangle `t` of level `k`.
    pub fn coarse_ancestor(&self, k: usize, mut t: usize) -> usize {
        for level in (1..=k).rev() {
            t = self.parent_triangle[level - 1][t];
        }
        t
    }

    /// Appends the next level: every triangle is split into four homothetic
    /// children through its edge midpoints.
    pub fn refine_uniform(&mut self) {
        let parent = self.levels.last().unwrap();
        let nv = parent.vertex_count();
        let nt = parent.triangle_count();
        let mut vertices = parent.vertices.clone();
        vertices.reserve(parent.edge_count());
        let mut origin: Vec<VertexOrigin> = (0..nv).map(VertexOrigin::Copy).collect();
        origin.reserve(parent.edge_count());
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::with_capacity(parent.edge_count());

        let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>| -> usize {
            let key = edge_key(a, b);
            *midpoint.entry(key).or_insert_with(|| {
                let (pa, pb) = (vertices[a], vertices[b]);
                vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                origin.push(VertexOrigin::Midpoint(key.0, key.1));
                vertices.len() - 1
            })
        };

        let mut triangles = Vec::with_capacity(4 * nt);
        let mut parents = Vec::with_capacity(4 * nt);
        for (t, &[a, b, c]) in parent.triangles.iter().enumerate() {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            triangles.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
            parents.extend_from_slice(&[t; 4]);
        }

        let mut boundary = Vec::with_capacity(2 * parent.boundary_vertices.len());
        for &[a, b] in &parent.boundary_edges {
            boundary.push(a);
            boundary.push(midpoint[&edge_key(a, b)]);
        }

        let fine = TriangleMesh::with_boundary(vertices, triangles, boundary, parent.level + 1);
        self.levels.push(fine);
        self.parent_triangle.push(parents);
        self.vertex_origin.push(origin);
    }

    /// Exact prolongation of a P1 field from level `k` to level `k + 1`.
    pub fn prolongate(&self, field: &ScalarField) -> Result<ScalarField> {
        let k = field.level;
        if k >= self.finest_level() {
            return Err(Error::LevelMismatch {
                expected: self.finest_level().saturating_sub(1),
                found: k,
            });
        }
        self.check_field(field)?;
        Ok(ScalarField::new(k + 1, self.prolongate_values(k, &field.values)))
    }

    /// Prolongates `field` up to level `target` (identity when `target == field.level`).
    pub fn prolongate_to(&self, field: &ScalarField, target: usize) -> Result<ScalarField> {
        if target < field.level || target > self.finest_level() {
            return Err(Error::LevelMismatch {
                expected: target,
                found: field.level,
            });
        }
        self.check_field(field)?;
        let mut values = field.values.clone();
        for k in field.level..target {
            values = self.prolongate_values(k, &values);
        }
        Ok(ScalarField::new(target, values))
    }

    /// Nodal prolongation `P_k : level k -> level k + 1` on raw arrays.
    pub fn prolongate_values(&self, k: usize, coarse: &[f64]) -> Vec<f64> {
        self.vertex_origin[k]
            .iter()
            .map(|o| match *o {
                VertexOrigin::Copy(p) => coarse[p],
                VertexOrigin::Midpoint(a, b) => 0.5 * (coarse[a] + coarse[b]),
            })
            .collect()
    }

    /// Transpose of [`Self::prolongate_values`]: maps a level `k + 1` dual
    /// vector (e.g. a load) to level `k`.
    pub fn restrict_values(&self, k: usize, fine: &[f64]) -> Vec<f64> {
        let mut coarse = vec![0.0; self.levels[k].vertex_count()];
        for (v, o) in self.vertex_origin[k].iter().enumerate() {
            match *o {
                VertexOrigin::Copy(p) => coarse[p] += fine[v],
                VertexOrigin::Midpoint(a, b) => {
                    coarse[a] += 0.5 * fine[v];
                    coarse[b] += 0.5 * fine[v];
                }
            }
        }
        coarse
    }

    /// Applies `P^T` repeatedly, from level `from` down to level `to`.
    pub fn restrict_values_to(&self, from: usize, fine: &[f64], to: usize) -> Vec<f64> {
        let mut values = fine.to_vec();
        for k in (to..from).rev() {
            values = self.restrict_values(k, &values);
        }
        values
    }

    fn check_field(&self, field: &ScalarField) -> Result<()> {
        let expected = self.level(field.level)?.vertex_count();
        if field.values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: field.values.len(),
            });
        }
        Ok(())
    }
}
