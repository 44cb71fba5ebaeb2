//! Legacy ASCII VTK output of nodal fields on a triangle mesh.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::field::ScalarField;
use crate::mesh::TriangleMesh;

const VTK_TRIANGLE: u8 = 5;

/// Renders `fields` as point data of an unstructured grid.
pub fn to_vtk(mesh: &TriangleMesh, title: &str, fields: &[(&str, &ScalarField)]) -> Result<String> {
    for (_, f) in fields {
        f.validate(mesh)?;
    }
    let mut s = String::new();
    let nv = mesh.vertex_count();
    let nt = mesh.triangle_count();
    // title line may not contain newlines
    let title: String = title.chars().filter(|c| *c != '\n').collect();
    writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID").unwrap();
    writeln!(s, "POINTS {nv} double").unwrap();
    for p in &mesh.vertices {
        writeln!(s, "{:?} {:?} 0", p[0], p[1]).unwrap();
    }
    writeln!(s, "CELLS {nt} {}", 4 * nt).unwrap();
    for t in &mesh.triangles {
        writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(s, "CELL_TYPES {nt}").unwrap();
    for _ in 0..nt {
        writeln!(s, "{VTK_TRIANGLE}").unwrap();
    }
    if !fields.is_empty() {
        writeln!(s, "POINT_DATA {nv}").unwrap();
        for (name, f) in fields {
            writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
            for v in &f.values {
                writeln!(s, "{v:?}").unwrap();
            }
        }
    }
    Ok(s)
}

pub fn write_vtk(
    path: impl AsRef<Path>,
    mesh: &TriangleMesh,
    title: &str,
    fields: &[(&str, &ScalarField)],
) -> Result<()> {
    std::fs::write(path, to_vtk(mesh, title, fields)?)?;
    Ok(())
}
