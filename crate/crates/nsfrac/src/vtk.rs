//! Legacy ASCII VTK output (version 3.0, unstructured grid).
//!
//! Fields are sampled at the mesh vertices, including the periodic images, so
//! every space degree maps onto the same linear triangles.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nsfrac_core::fem::Field;
use nsfrac_core::fracstep::SolutionState;
use nsfrac_core::mesh::Mesh;

use crate::IoError;

const VTK_TRIANGLE: u8 = 5;

fn header(out: &mut String, title: &str, mesh: &Mesh) {
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str(title.lines().next().unwrap_or(""));
    out.push_str("\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {} double", mesh.num_vertices()).unwrap();
    for x in mesh.vertices() {
        writeln!(out, "{:e} {:e} 0", x[0], x[1]).unwrap();
    }
    let nc = mesh.num_cells();
    writeln!(out, "CELLS {} {}", nc, 4 * nc).unwrap();
    for c in mesh.cells() {
        writeln!(out, "3 {} {} {}", c[0], c[1], c[2]).unwrap();
    }
    writeln!(out, "CELL_TYPES {nc}").unwrap();
    for _ in 0..nc {
        writeln!(out, "{VTK_TRIANGLE}").unwrap();
    }
}

/// Values of `field` at every mesh vertex.
pub fn vertex_values(field: &Field) -> Vec<f64> {
    let mesh = field.space().mesh();
    let mut values = vec![0.0; mesh.num_vertices()];
    const CORNERS: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for (c, cell) in mesh.cells().iter().enumerate() {
        for (i, &v) in cell.iter().enumerate() {
            values[v] = field.eval_in_cell(c, CORNERS[i]);
        }
    }
    values
}

/// Mesh only, for inspection.
pub fn mesh_to_string(mesh: &Mesh) -> String {
    let mut out = String::new();
    header(&mut out, "nsfrac mesh", mesh);
    out
}

/// Velocity as a 3-vector, pressure and every scalar by name.
pub fn state_to_string(state: &SolutionState, title: &str) -> String {
    let mesh = state.velocity_space().mesh();
    let mut out = String::new();
    header(&mut out, title, mesh);
    writeln!(out, "POINT_DATA {}", mesh.num_vertices()).unwrap();
    let u = vertex_values(&state.velocity[0]);
    let v = vertex_values(&state.velocity[1]);
    out.push_str("VECTORS velocity double\n");
    for (a, b) in u.iter().zip(&v) {
        writeln!(out, "{a:e} {b:e} 0").unwrap();
    }
    let scalars = [("pressure", &state.pressure)]
        .into_iter()
        .chain(state.scalars.iter().map(|s| (s.name.as_str(), &s.value)));
    for (name, field) in scalars {
        writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default").unwrap();
        for x in vertex_values(field) {
            writeln!(out, "{x:e}").unwrap();
        }
    }
    out
}

pub fn write_state(state: &SolutionState, title: &str, path: &Path) -> Result<(), IoError> {
    fs::write(path, state_to_string(state, title)).map_err(|e| IoError::file(path, e))
}

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<(), IoError> {
    fs::write(path, mesh_to_string(mesh)).map_err(|e| IoError::file(path, e))
}
