use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::basis::{LagrangeBasis, EDGE_VERTICES};
use super::quadrature::QuadratureRule;
use crate::error::{Error, Result};
use crate::mesh::{Axis, Mesh, Point};

/// Continuous Lagrange space of degree 1..=4 with periodic dofs merged.
#[derive(Debug, Clone)]
pub struct LagrangeSpace {
    mesh: Arc<Mesh>,
    basis: LagrangeBasis,
    /// Flattened `num_cells x basis.dim()` cell-to-dof map.
    cell_dofs: Vec<usize>,
    dof_coordinates: Vec<Point>,
    vertex_dofs: Vec<usize>,
    boundary_dofs: Vec<bool>,
    ndofs: usize,
}

impl PartialEq for LagrangeSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) && self.basis == other.basis
    }
}

impl LagrangeSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<Self> {
        let basis = LagrangeBasis::new(degree)?;
        let nloc = basis.dim();
        let per_edge = basis.dofs_per_edge();
        let per_cell = basis.interior_dofs();
        let ncells = mesh.num_cells();

        let mut ndofs = 0;
        let mut dof_coordinates = Vec::new();

        // Vertex dofs: one per periodic master.
        let mut vertex_dofs = vec![usize::MAX; mesh.num_vertices()];
        for v in 0..mesh.num_vertices() {
            if mesh.vertex_master(v) == v {
                vertex_dofs[v] = ndofs;
                dof_coordinates.push(mesh.vertices()[v]);
                ndofs += 1;
            }
        }
        for v in 0..mesh.num_vertices() {
            vertex_dofs[v] = vertex_dofs[mesh.vertex_master(v)];
        }

        // Single-axis slave -> master maps, used to identify periodic edges.
        let mut axis_master: Vec<(Axis, Vec<Option<usize>>)> = Vec::new();
        for pp in mesh.periodic_pairs() {
            let mut m = vec![None; mesh.num_vertices()];
            for &(s, ma) in &pp.pairs {
                m[s] = Some(ma);
            }
            axis_master.push((pp.axis, m));
        }
        // For a raw edge: representative raw endpoints (in the edge's own order).
        let representative = |a: usize, b: usize| -> (usize, usize) {
            for (_, m) in &axis_master {
                if let (Some(ma), Some(mb)) = (m[a], m[b]) {
                    return (ma, mb);
                }
            }
            (a, b)
        };

        let mut edge_first_dof: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut boundary_dofs_set = Vec::new();
        if per_edge > 0 {
            for e in mesh.edges() {
                let (ra, rb) = representative(e.vertices[0], e.vertices[1]);
                let key = (ra.min(rb), ra.max(rb));
                if edge_first_dof.contains_key(&key) {
                    continue;
                }
                edge_first_dof.insert(key, ndofs);
                let (p0, p1) = (mesh.vertices()[key.0], mesh.vertices()[key.1]);
                for m in 1..=per_edge {
                    let t = m as f64 / degree as f64;
                    dof_coordinates.push([p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])]);
                }
                ndofs += per_edge;
            }
        }

        let mut cell_dofs = vec![0usize; ncells * nloc];
        for c in 0..ncells {
            let cell = mesh.cells()[c];
            let dofs = &mut cell_dofs[c * nloc..(c + 1) * nloc];
            for l in 0..3 {
                dofs[l] = vertex_dofs[cell[l]];
            }
            for (le, [la, lb]) in EDGE_VERTICES.iter().enumerate() {
                if per_edge == 0 {
                    break;
                }
                let (ra, rb) = representative(cell[*la], cell[*lb]);
                let key = (ra.min(rb), ra.max(rb));
                let first = edge_first_dof[&key];
                let forward = ra == key.0;
                for m in 0..per_edge {
                    let g = if forward { m } else { per_edge - 1 - m };
                    dofs[3 + le * per_edge + m] = first + g;
                }
            }
            if per_cell > 0 {
                let coords = mesh.cell_coordinates(c);
                for m in 0..per_cell {
                    let local = 3 + 3 * per_edge + m;
                    dofs[local] = ndofs + m;
                    dof_coordinates.push(map_to_physical(&coords, basis.node_barycentric(local)));
                }
                ndofs += per_cell;
            }
        }

        for f in mesh.boundary_facets() {
            let cell = mesh.cells()[f.cell];
            let la = cell.iter().position(|&v| v == f.vertices[0]).unwrap();
            let lb = cell.iter().position(|&v| v == f.vertices[1]).unwrap();
            let dofs = &cell_dofs[f.cell * nloc..(f.cell + 1) * nloc];
            boundary_dofs_set.push(dofs[la]);
            boundary_dofs_set.push(dofs[lb]);
            if let Some(le) = EDGE_VERTICES.iter().position(|e| (e[0] == la && e[1] == lb) || (e[0] == lb && e[1] == la)) {
                for m in 0..per_edge {
                    boundary_dofs_set.push(dofs[3 + le * per_edge + m]);
                }
            }
        }
        let mut boundary_dofs = vec![false; ndofs];
        for d in boundary_dofs_set {
            boundary_dofs[d] = true;
        }

        Ok(LagrangeSpace { mesh, basis, cell_dofs, dof_coordinates, vertex_dofs, boundary_dofs, ndofs })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn ndofs(&self) -> usize {
        self.ndofs
    }

    pub fn local_dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        let n = self.basis.dim();
        &self.cell_dofs[cell * n..(cell + 1) * n]
    }

    pub fn dof_coordinates(&self) -> &[Point] {
        &self.dof_coordinates
    }

    /// Dof holding the value at mesh vertex `v`.
    pub fn vertex_dof(&self, v: usize) -> usize {
        self.vertex_dofs[v]
    }

    pub fn is_boundary_dof(&self, dof: usize) -> bool {
        self.boundary_dofs[dof]
    }

    /// Default form quadrature: exact to `2 * degree + 1`.
    pub fn default_rule(&self) -> QuadratureRule {
        QuadratureRule::with_degree(2 * self.degree() + 1)
    }

    pub fn interpolate(self: &Arc<Self>, f: impl Fn(Point) -> f64) -> Field {
        let dofs = self.dof_coordinates.iter().map(|&x| f(x)).collect();
        Field { space: Arc::clone(self), dofs }
    }

    /// Dirichlet condition on all boundary dofs whose coordinates satisfy `predicate`.
    pub fn dirichlet_bc(&self, predicate: impl Fn(Point) -> bool, value: impl Fn(Point) -> f64) -> DirichletBC {
        let mut dofs = Vec::new();
        let mut values = Vec::new();
        for d in 0..self.ndofs {
            let x = self.dof_coordinates[d];
            if self.boundary_dofs[d] && predicate(x) {
                dofs.push(d);
                values.push(value(x));
            }
        }
        if dofs.is_empty() {
            log::warn!("Dirichlet condition selects no dofs");
        }
        DirichletBC { dofs, values }
    }
}

pub fn map_to_physical(coords: &[Point; 3], lambda: [f64; 3]) -> Point {
    [
        lambda[0] * coords[0][0] + lambda[1] * coords[1][0] + lambda[2] * coords[2][0],
        lambda[0] * coords[0][1] + lambda[1] * coords[1][1] + lambda[2] * coords[2][1],
    ]
}

/// Dof-coefficient vector bound to a space.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    space: Arc<LagrangeSpace>,
    pub dofs: Vec<f64>,
}

impl Field {
    pub fn zeros(space: &Arc<LagrangeSpace>) -> Self {
        Field { space: Arc::clone(space), dofs: vec![0.0; space.ndofs()] }
    }

    pub fn from_dofs(space: &Arc<LagrangeSpace>, dofs: Vec<f64>) -> Result<Self> {
        if dofs.len() != space.ndofs() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "field has {} dofs, space has {}",
                dofs.len(),
                space.ndofs()
            )));
        }
        Ok(Field { space: Arc::clone(space), dofs })
    }

    pub fn space(&self) -> &Arc<LagrangeSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    /// Value at barycentric point `lambda` of `cell`.
    pub fn eval_in_cell(&self, cell: usize, lambda: [f64; 3]) -> f64 {
        let n = self.space.local_dim();
        let mut v = [0.0; 15];
        let mut g = [[0.0; 2]; 15];
        self.space.basis().eval(lambda, &mut v[..n], &mut g[..n]);
        self.space.cell_dofs(cell).iter().zip(&v[..n]).map(|(&d, &phi)| self.dofs[d] * phi).sum()
    }

    /// Physical gradient at barycentric point `lambda` of `cell`.
    pub fn gradient_in_cell(&self, cell: usize, lambda: [f64; 3]) -> [f64; 2] {
        let n = self.space.local_dim();
        let mut v = [0.0; 15];
        let mut g = [[0.0; 2]; 15];
        self.space.basis().eval(lambda, &mut v[..n], &mut g[..n]);
        let geom = super::CellGeometry::new(self.space.mesh().cell_coordinates(cell));
        let mut out = [0.0; 2];
        for (&d, gr) in self.space.cell_dofs(cell).iter().zip(&g[..n]) {
            let p = geom.physical_gradient(*gr);
            out[0] += self.dofs[d] * p[0];
            out[1] += self.dofs[d] * p[1];
        }
        out
    }
}

/// Dirichlet condition: dof indices (sorted) with prescribed values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DirichletBC {
    pub dofs: Vec<usize>,
    pub values: Vec<f64>,
}

impl DirichletBC {
    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn apply_to_vector(&self, x: &mut [f64]) {
        for (&d, &v) in self.dofs.iter().zip(&self.values) {
            x[d] = v;
        }
    }

    /// Merges several conditions; later conditions win on shared dofs.
    pub fn combine(bcs: &[DirichletBC]) -> DirichletBC {
        let mut map = BTreeMap::new();
        for bc in bcs {
            for (&d, &v) in bc.dofs.iter().zip(&bc.values) {
                map.insert(d, v);
            }
        }
        let (dofs, values) = map.into_iter().unzip();
        DirichletBC { dofs, values }
    }
}
