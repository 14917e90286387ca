//! Structured triangulations of rectangles.
//!
//! Every grid quad is split along its lower-left to upper-right diagonal, so
//! a `nx x ny` grid has `2 nx ny` counterclockwise right triangles. Periodic
//! directions are recorded as vertex pairs (slave on the upper side, master on
//! the lower side) and merged later by the dof map. Coordinate transforms are
//! applied after pairing, so stretched meshes keep valid pairs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Which side of the original rectangle a boundary facet lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFacet {
    pub vertices: [usize; 2],
    pub cell: usize,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPairs {
    pub axis: Axis,
    /// `(slave, master)` vertex pairs; slaves lie on the upper side.
    pub pairs: Vec<(usize, usize)>,
}

/// Interior or boundary edge with its one or two adjacent cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub cells: [Option<usize>; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    boundary_facets: Vec<BoundaryFacet>,
    periodic: Vec<PeriodicPairs>,
    vertex_master: Vec<usize>,
    lower: Point,
    upper: Point,
    divisions: [usize; 2],
}

/// Vertex coordinate map applied after the uniform grid is built.
pub type Transform<'a> = &'a dyn Fn(Point) -> Point;

impl Mesh {
    /// Builds the rectangle `[lower, upper]` split into `divisions[0] x divisions[1]`
    /// quads, each cut into two triangles.
    pub fn rectangle(
        lower: Point,
        upper: Point,
        divisions: [usize; 2],
        periodic: [bool; 2],
        transform: Option<Transform<'_>>,
    ) -> Result<Self> {
        let [nx, ny] = divisions;
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidMesh(format!("cell counts must be >= 1, got {nx}x{ny}")));
        }
        if !(upper[0] > lower[0] && upper[1] > lower[1]) {
            return Err(Error::InvalidMesh(format!("empty rectangle {lower:?} .. {upper:?}")));
        }
        for (axis, (&p, &n)) in periodic.iter().zip(divisions.iter()).enumerate() {
            if p && n < 2 {
                return Err(Error::InvalidMesh(format!(
                    "periodic direction {axis} needs at least 2 cells, got {n}"
                )));
            }
        }

        let vid = |i: usize, j: usize| j * (nx + 1) + i;
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                // Hit the far edge exactly so periodic partners match bit for bit.
                let x = if i == nx { upper[0] } else { lower[0] + (upper[0] - lower[0]) * i as f64 / nx as f64 };
                let y = if j == ny { upper[1] } else { lower[1] + (upper[1] - lower[1]) * j as f64 / ny as f64 };
                vertices.push([x, y]);
            }
        }

        let mut cells = Vec::with_capacity(2 * nx * ny);
        let mut boundary_facets = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
                let lower_cell = cells.len();
                cells.push([v00, v10, v11]);
                let upper_cell = cells.len();
                cells.push([v00, v11, v01]);
                if j == 0 && !periodic[1] {
                    boundary_facets.push(BoundaryFacet { vertices: [v00, v10], cell: lower_cell, side: Side::Bottom });
                }
                if i + 1 == nx && !periodic[0] {
                    boundary_facets.push(BoundaryFacet { vertices: [v10, v11], cell: lower_cell, side: Side::Right });
                }
                if j + 1 == ny && !periodic[1] {
                    boundary_facets.push(BoundaryFacet { vertices: [v11, v01], cell: upper_cell, side: Side::Top });
                }
                if i == 0 && !periodic[0] {
                    boundary_facets.push(BoundaryFacet { vertices: [v01, v00], cell: upper_cell, side: Side::Left });
                }
            }
        }

        let mut periodic_pairs = Vec::new();
        if periodic[0] {
            let pairs = (0..=ny).map(|j| (vid(nx, j), vid(0, j))).collect();
            periodic_pairs.push(PeriodicPairs { axis: Axis::X, pairs });
        }
        if periodic[1] {
            let pairs = (0..=nx).map(|i| (vid(i, ny), vid(i, 0))).collect();
            periodic_pairs.push(PeriodicPairs { axis: Axis::Y, pairs });
        }

        let mut vertex_master: Vec<usize> = (0..vertices.len()).collect();
        for pp in &periodic_pairs {
            for &(s, m) in &pp.pairs {
                vertex_master[s] = m;
            }
        }
        // Resolve chains (the doubly periodic corner maps through both axes).
        for v in 0..vertex_master.len() {
            let mut m = vertex_master[v];
            while vertex_master[m] != m {
                m = vertex_master[m];
            }
            vertex_master[v] = m;
        }

        let mut mesh = Mesh {
            vertices,
            cells,
            boundary_facets,
            periodic: periodic_pairs,
            vertex_master,
            lower,
            upper,
            divisions,
        };
        mesh.check_periodic_pairs()?;

        if let Some(t) = transform {
            for v in mesh.vertices.iter_mut() {
                *v = t(*v);
            }
            for c in 0..mesh.cells.len() {
                let area = mesh.cell_area(c);
                if !(area > 0.0) || !area.is_finite() {
                    return Err(Error::DegenerateCell { cell: c, area });
                }
            }
        }
        Ok(mesh)
    }

    pub fn unit_square(nx: usize, ny: usize) -> Result<Self> {
        Self::rectangle([0.0, 0.0], [1.0, 1.0], [nx, ny], [false, false], None)
    }

    fn check_periodic_pairs(&self) -> Result<()> {
        let extent = (self.upper[0] - self.lower[0]).max(self.upper[1] - self.lower[1]);
        let tol = 1e-12 * extent;
        for pp in &self.periodic {
            let tangential = match pp.axis {
                Axis::X => 1,
                Axis::Y => 0,
            };
            for &(s, m) in &pp.pairs {
                let d = (self.vertices[s][tangential] - self.vertices[m][tangential]).abs();
                if d > tol {
                    return Err(Error::InvalidMesh(format!("periodic pair ({s}, {m}) mismatched by {d:e}")));
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary_facets
    }

    pub fn periodic_pairs(&self) -> &[PeriodicPairs] {
        &self.periodic
    }

    pub fn is_periodic(&self, axis: Axis) -> bool {
        self.periodic.iter().any(|p| p.axis == axis)
    }

    /// Final master of `v` after all periodic identifications (itself if none).
    pub fn vertex_master(&self, v: usize) -> usize {
        self.vertex_master[v]
    }

    pub fn lower(&self) -> Point {
        self.lower
    }

    pub fn upper(&self) -> Point {
        self.upper
    }

    pub fn divisions(&self) -> [usize; 2] {
        self.divisions
    }

    /// Area of the untransformed rectangle.
    pub fn domain_area(&self) -> f64 {
        (self.upper[0] - self.lower[0]) * (self.upper[1] - self.lower[1])
    }

    pub fn cell_coordinates(&self, cell: usize) -> [Point; 3] {
        let [a, b, c] = self.cells[cell];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area; positive for counterclockwise cells.
    pub fn cell_area(&self, cell: usize) -> f64 {
        let [p0, p1, p2] = self.cell_coordinates(cell);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn circumradius(&self, cell: usize) -> f64 {
        let [p0, p1, p2] = self.cell_coordinates(cell);
        let len = |a: Point, b: Point| libm::hypot(a[0] - b[0], a[1] - b[1]);
        let (a, b, c) = (len(p0, p1), len(p1, p2), len(p2, p0));
        a * b * c / (4.0 * self.cell_area(cell).abs())
    }

    /// Mesh size: the largest cell diameter measured as twice the circumradius.
    pub fn mesh_size_h(&self) -> f64 {
        (0..self.num_cells()).map(|c| 2.0 * self.circumradius(c)).fold(0.0, f64::max)
    }

    /// Vertices on the (non-periodic) boundary that satisfy `predicate`.
    pub fn boundary_vertices(&self, predicate: impl Fn(Point) -> bool) -> Vec<usize> {
        let mut on_boundary = alloc::vec![false; self.num_vertices()];
        for f in &self.boundary_facets {
            on_boundary[f.vertices[0]] = true;
            on_boundary[f.vertices[1]] = true;
        }
        (0..self.num_vertices()).filter(|&v| on_boundary[v] && predicate(self.vertices[v])).collect()
    }

    /// Unique edges keyed by sorted raw vertex pair, with adjacent cells.
    /// Periodic sides still appear as two distinct edges here.
    pub fn edges(&self) -> Vec<Edge> {
        let mut map: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges: Vec<Edge> = Vec::with_capacity(3 * self.num_cells() / 2 + self.num_vertices());
        for (c, cell) in self.cells.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (cell[k], cell[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                match map.get(&key) {
                    Some(&e) => edges[e].cells[1] = Some(c),
                    None => {
                        map.insert(key, edges.len());
                        edges.push(Edge { vertices: [key.0, key.1], cells: [Some(c), None] });
                    }
                }
            }
        }
        edges
    }
}

/// Cosine clustering toward both walls of the unit interval used by the
/// driven cavity mesh: `x -> 0.5 (cos(pi (2x - 2) / 2) + 1)`.
pub fn cavity_stretch(x: f64) -> f64 {
    let s = (x - 0.5) * 2.0;
    0.5 * (libm::cos(core::f64::consts::PI * (s - 1.0) / 2.0) + 1.0)
}

/// Arctangent clustering toward `y = +-1`: `y -> atan(pi y) / atan(pi)`.
pub fn channel_stretch(y: f64) -> f64 {
    libm::atan(core::f64::consts::PI * y) / libm::atan(core::f64::consts::PI)
}
