//! Legacy ASCII VTK unstructured grids.

use std::fmt::Write as _;
use std::path::Path;

use super::format::fmt_sig;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

const DIGITS: usize = 9;

/// A named field, either per vertex or per triangle.
#[derive(Debug, Clone, Copy)]
pub enum VtkField<'a> {
    Point(&'a str, &'a [f64]),
    Cell(&'a str, &'a [f64]),
}

/// Renders `mesh` in the `z = 0` plane with its point fields, then its cell fields.
pub fn vtk_string(mesh: &Mesh, title: &str, fields: &[VtkField]) -> Result<String> {
    let (nv, nt) = (mesh.num_vertices(), mesh.num_triangles());
    for f in fields {
        let (name, len, want) = match f {
            VtkField::Point(n, v) => (n, v.len(), nv),
            VtkField::Cell(n, v) => (n, v.len(), nt),
        };
        if len != want {
            return Err(Error::LengthMismatch { expected: want, got: len });
        }
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("VTK field name `{name}` must be a single word")));
        }
    }
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str(title.lines().next().unwrap_or(""));
    s.push_str("\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {nv} double").unwrap();
    for p in &mesh.vertices {
        writeln!(s, "{} {} 0", fmt_sig(p[0], DIGITS), fmt_sig(p[1], DIGITS)).unwrap();
    }
    writeln!(s, "CELLS {nt} {}", 4 * nt).unwrap();
    for t in &mesh.triangles {
        writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(s, "CELL_TYPES {nt}").unwrap();
    for _ in 0..nt {
        s.push_str("5\n");
    }
    let points: Vec<(&str, &[f64])> = fields
        .iter()
        .filter_map(|f| match *f {
            VtkField::Point(n, v) => Some((n, v)),
            _ => None,
        })
        .collect();
    let cells: Vec<(&str, &[f64])> = fields
        .iter()
        .filter_map(|f| match *f {
            VtkField::Cell(n, v) => Some((n, v)),
            _ => None,
        })
        .collect();
    for (header, chosen) in [(format!("POINT_DATA {nv}"), points), (format!("CELL_DATA {nt}"), cells)] {
        if chosen.is_empty() {
            continue;
        }
        writeln!(s, "{header}").unwrap();
        for (name, values) in chosen {
            writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
            for v in values {
                s.push_str(&fmt_sig(*v, DIGITS));
                s.push('\n');
            }
        }
    }
    Ok(s)
}

pub fn write_vtk(mesh: &Mesh, title: &str, fields: &[VtkField], path: &Path) -> Result<()> {
    let text = vtk_string(mesh, title, fields)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
