//! Conforming P1 triangle meshes of a polygonal domain.
//!
//! A [`TriangleMesh`] is validated on construction: positive orientation,
//! conformity, a single closed boundary loop and the Euler relation for a
//! simply connected triangulation. The boundary is always derived from the
//! triangles (edges owned by exactly one triangle) and stored as a
//! counterclockwise loop starting at the boundary vertex closest to the origin.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Aspect-ratio bound above which a mesh is flagged as containing slivers.
pub const SLIVER_SIGMA: f64 = 50.0;

/// Maximum interior displacement of the perturbed generator, as a fraction of the grid step.
pub const DEFAULT_JITTER: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Boundary loop, counterclockwise, starting at the vertex closest to the origin.
    pub boundary_vertices: Vec<usize>,
    /// `boundary_edges[i] = [boundary_vertices[i], boundary_vertices[i + 1 mod n]]`.
    pub boundary_edges: Vec<[usize; 2]>,
    pub level: usize,
    on_boundary: Vec<bool>,
}

/// How inverted (clockwise) triangles are handled during validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Reject clockwise triangles.
    Strict,
    /// Flip clockwise triangles to counterclockwise.
    Repair,
}

impl TriangleMesh {
    /// Validates raw vertex and triangle arrays and derives the boundary loop.
    pub fn from_parts(
        vertices: Vec<Point>,
        mut triangles: Vec<[usize; 3]>,
        level: usize,
        orientation: Orientation,
    ) -> Result<Self> {
        let nv = vertices.len();
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("mesh has no triangles".into()));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("vertex coordinates"));
        }
        for (t, tri) in triangles.iter_mut().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= nv) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references vertex {bad} but there are only {nv} vertices"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidMesh(format!("triangle {t} repeats a vertex")));
            }
            let area = signed_area(&vertices, tri);
            let scale = longest_edge(&vertices, tri).powi(2);
            if area.abs() <= 1e-14 * scale {
                return Err(Error::DegenerateTriangle { index: t, area });
            }
            if area < 0.0 {
                match orientation {
                    Orientation::Strict => {
                        return Err(Error::InvalidMesh(format!(
                            "triangle {t} is clockwise (signed area {area:e})"
                        )))
                    }
                    Orientation::Repair => tri.swap(1, 2),
                }
            }
        }

        // edge key -> (use count, orientation of first use)
        let mut edges: HashMap<(usize, usize), (u8, [usize; 2])> =
            HashMap::with_capacity(3 * triangles.len() / 2 + 8);
        for (t, tri) in triangles.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                let entry = edges.entry(edge_key(a, b)).or_insert((0, [a, b]));
                entry.0 += 1;
                if entry.0 > 2 {
                    return Err(Error::InvalidMesh(format!(
                        "non-conforming: edge ({a}, {b}) shared by more than two triangles (at triangle {t})"
                    )));
                }
                if entry.0 == 2 && entry.1 == [a, b] {
                    return Err(Error::InvalidMesh(format!(
                        "non-conforming: edge ({a}, {b}) traversed twice in the same direction"
                    )));
                }
            }
        }

        let mut next = vec![usize::MAX; nv];
        let mut n_boundary_edges = 0;
        for &(count, [a, b]) in edges.values() {
            if count == 1 {
                if next[a] != usize::MAX {
                    return Err(Error::InvalidMesh(format!(
                        "boundary is not a simple curve at vertex {a}"
                    )));
                }
                next[a] = b;
                n_boundary_edges += 1;
            }
        }
        let start = (0..nv)
            .filter(|&v| next[v] != usize::MAX)
            .min_by(|&a, &b| {
                norm2(vertices[a])
                    .partial_cmp(&norm2(vertices[b]))
                    .unwrap()
                    .then(a.cmp(&b))
            })
            .ok_or_else(|| Error::InvalidMesh("mesh has no boundary".into()))?;
        let mut boundary_vertices = Vec::with_capacity(n_boundary_edges);
        let mut v = start;
        loop {
            boundary_vertices.push(v);
            v = next[v];
            if v == usize::MAX {
                return Err(Error::InvalidMesh("boundary loop is not closed".into()));
            }
            if v == start {
                break;
            }
            if boundary_vertices.len() > n_boundary_edges {
                return Err(Error::InvalidMesh("boundary loop does not close".into()));
            }
        }
        if boundary_vertices.len() != n_boundary_edges {
            return Err(Error::InvalidMesh("multiple boundary loops".into()));
        }

        let mut used = vec![false; nv];
        triangles.iter().flatten().for_each(|&i| used[i] = true);
        if let Some(unused) = used.iter().position(|&u| !u) {
            return Err(Error::InvalidMesh(format!("vertex {unused} belongs to no triangle")));
        }
        let euler = nv as i64 - edges.len() as i64 + triangles.len() as i64;
        if euler != 1 {
            return Err(Error::InvalidMesh(format!(
                "Euler characteristic V - E + T = {euler}, expected 1 (domain not simply connected?)"
            )));
        }

        let mesh = Self::with_boundary(vertices, triangles, boundary_vertices, level);
        if let Ok(sigma) = mesh.sigma_regularity() {
            if sigma > SLIVER_SIGMA {
                log::warn!("mesh contains slivers: sigma = {sigma:.2}");
            }
        }
        Ok(mesh)
    }

    /// Assembles a mesh whose boundary loop is already known (used by refinement).
    pub(crate) fn with_boundary(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_vertices: Vec<usize>,
        level: usize,
    ) -> Self {
        let nb = boundary_vertices.len();
        let boundary_edges = (0..nb)
            .map(|i| [boundary_vertices[i], boundary_vertices[(i + 1) % nb]])
            .collect();
        let mut on_boundary = vec![false; vertices.len()];
        boundary_vertices.iter().for_each(|&b| on_boundary[b] = true);
        Self {
            vertices,
            triangles,
            boundary_vertices,
            boundary_edges,
            level,
            on_boundary,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Number of distinct edges, counted from the triangle set.
    pub fn edge_count(&self) -> usize {
        // each interior edge is shared by two triangles, each boundary edge by one
        (3 * self.triangles.len() + self.boundary_vertices.len()) / 2
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.on_boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.on_boundary
    }

    /// Position of `v` in the boundary loop, if it is a boundary vertex.
    pub fn boundary_position(&self, v: usize) -> Option<usize> {
        if !self.on_boundary.get(v).copied().unwrap_or(false) {
            return None;
        }
        self.boundary_vertices.iter().position(|&b| b == v)
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.vertex_count()).filter(|&v| !self.on_boundary[v]).collect()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangle_count()).map(|t| self.triangle_area(t)).sum()
    }

    /// Largest triangle diameter (longest edge) over the mesh.
    pub fn mesh_size(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| longest_edge(&self.vertices, t))
            .fold(0.0, f64::max)
    }

    /// Shape regularity `max_K h_K / rho_K`, with `h_K` the longest edge and
    /// `rho_K = 4 area / perimeter` the diameter of the inscribed circle.
    pub fn sigma_regularity(&self) -> Result<f64> {
        let mut sigma: f64 = 0.0;
        for (t, tri) in self.triangles.iter().enumerate() {
            let area = signed_area(&self.vertices, tri);
            let lengths = edge_lengths(&self.vertices, tri);
            let perimeter: f64 = lengths.iter().sum();
            if area.abs() <= 1e-14 * perimeter * perimeter {
                return Err(Error::DegenerateTriangle { index: t, area });
            }
            let h = lengths.iter().cloned().fold(0.0, f64::max);
            let inscribed_diameter = 4.0 * area.abs() / perimeter;
            sigma = sigma.max(h / inscribed_diameter);
        }
        Ok(sigma)
    }

    /// Arc length along the boundary loop at each boundary vertex, starting from 0.
    pub fn boundary_arc_lengths(&self) -> Vec<f64> {
        let mut s = 0.0;
        let mut out = Vec::with_capacity(self.boundary_vertices.len());
        for &[a, b] in &self.boundary_edges {
            out.push(s);
            s += dist(self.vertices[a], self.vertices[b]);
        }
        out
    }

    pub fn perimeter(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|&[a, b]| dist(self.vertices[a], self.vertices[b]))
            .sum()
    }

    /// Serializes to the ASCII mesh format read by [`parse_mesh`].
    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.vertex_count(), self.triangle_count());
        for p in &self.vertices {
            let _ = writeln!(out, "{:?} {:?}", p[0], p[1]);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
        }
        out
    }
}

/// Uniform `n x n` grid of the unit square, every cell split along the same
/// (lower-left to upper-right) diagonal.
pub fn build_structured_unit_square(n: usize) -> Result<TriangleMesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("grid size n must be >= 1".into()));
    }
    let vertices = grid_vertices(n);
    let triangles = grid_triangles(n, |_, _| false);
    TriangleMesh::from_parts(vertices, triangles, 0, Orientation::Strict)
}

/// Unstructured-like mesh of the unit square: the interior vertices of an
/// `n x n` grid are displaced by up to `jitter * h` in each coordinate, and
/// cells are split along alternating diagonals in a checkerboard pattern.
pub fn build_perturbed_unit_square(n: usize, seed: u64, jitter: f64) -> Result<TriangleMesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("grid size n must be >= 1".into()));
    }
    if !(0.0..0.5).contains(&jitter) {
        return Err(Error::InvalidArgument(format!(
            "jitter must lie in [0, 0.5), got {jitter}"
        )));
    }
    let h = 1.0 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = grid_vertices(n);
    for j in 1..n {
        for i in 1..n {
            let p = &mut vertices[j * (n + 1) + i];
            p[0] += jitter * h * rng.random_range(-1.0..=1.0);
            p[1] += jitter * h * rng.random_range(-1.0..=1.0);
        }
    }
    let triangles = grid_triangles(n, |i, j| (i + j) % 2 == 1);
    TriangleMesh::from_parts(vertices, triangles, 0, Orientation::Strict)
}

fn grid_vertices(n: usize) -> Vec<Point> {
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            // exact endpoints, no accumulated rounding
            let x = if i == n { 1.0 } else { i as f64 * h };
            let y = if j == n { 1.0 } else { j as f64 * h };
            vertices.push([x, y]);
        }
    }
    vertices
}

fn grid_triangles(n: usize, anti_diagonal: impl Fn(usize, usize) -> bool) -> Vec<[usize; 3]> {
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let a = j * (n + 1) + i;
            let b = a + 1;
            let c = a + n + 2;
            let d = a + n + 1;
            if anti_diagonal(i, j) {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            } else {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
    }
    triangles
}

/// Parses the ASCII mesh format: a header `nv nt`, then `nv` lines `x y`,
/// then `nt` lines `i j k` (0-based). Lines starting with `#` are skipped.
pub fn parse_mesh(text: &str, orientation: Orientation) -> Result<TriangleMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let header: Vec<usize> = parse_fields(line, header, 2)?;
    let (nv, nt) = (header[0], header[1]);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("expected {nv} vertex lines, file ended early"),
        })?;
        let xy: Vec<f64> = parse_fields(line, l, 2)?;
        vertices.push([xy[0], xy[1]]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, l) = lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("expected {nt} triangle lines, file ended early"),
        })?;
        let ijk: Vec<usize> = parse_fields(line, l, 3)?;
        triangles.push([ijk[0], ijk[1], ijk[2]]);
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::Parse {
            line,
            message: "unexpected trailing content".into(),
        });
    }
    TriangleMesh::from_parts(vertices, triangles, 0, orientation)
}

/// Reads and validates a mesh file, repairing clockwise triangles.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<TriangleMesh> {
    load_mesh_with(path, Orientation::Repair)
}

pub fn load_mesh_with(path: impl AsRef<Path>, orientation: Orientation) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text, orientation)
}

fn parse_fields<T: std::str::FromStr>(line: usize, text: &str, count: usize) -> Result<Vec<T>> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != count {
        return Err(Error::Parse {
            line,
            message: format!("expected {count} fields, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse().map_err(|_| Error::Parse {
                line,
                message: format!("cannot parse {f:?}"),
            })
        })
        .collect()
}

pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

pub(crate) fn signed_area(vertices: &[Point], t: &[usize; 3]) -> f64 {
    let [p0, p1, p2] = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
    0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
}

fn edge_lengths(vertices: &[Point], t: &[usize; 3]) -> [f64; 3] {
    [
        dist(vertices[t[0]], vertices[t[1]]),
        dist(vertices[t[1]], vertices[t[2]]),
        dist(vertices[t[2]], vertices[t[0]]),
    ]
}

fn longest_edge(vertices: &[Point], t: &[usize; 3]) -> f64 {
    edge_lengths(vertices, t).into_iter().fold(0.0, f64::max)
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn norm2(p: Point) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}
