use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

use super::element::{eval_basis, lattice_points};

/// Continuous vector-valued Lagrange space of degree `k` on a [`Mesh`].
///
/// Lagrange nodes are identified topologically: a node is the pair of its support
/// sub-simplex (the mesh vertices with a nonzero barycentric weight) and those
/// weights. Vertex nodes reuse the mesh vertex numbering; the remaining nodes are
/// numbered in order of first appearance over the cells.
///
/// Dofs are blocked node-major, component-minor: dof `node * dim + c`. The reduced
/// (interior) numbering keeps the same blocking over interior nodes only.
#[derive(Debug, Clone)]
pub struct FunctionSpace {
    mesh: Arc<Mesh>,
    degree: usize,
    lattice: Vec<Vec<usize>>,
    cell_nodes: Vec<usize>,
    node_support: Vec<Vec<usize>>,
    node_coords: Vec<f64>,
    node_boundary: Vec<bool>,
    interior_index: Vec<usize>,
    interior_nodes: Vec<usize>,
}

pub const NOT_INTERIOR: usize = usize::MAX;

impl FunctionSpace {
    pub fn new(mesh: Arc<Mesh>, degree: usize) -> Result<FunctionSpace> {
        if degree == 0 {
            return Err(Error::InvalidArgument("Lagrange degree must be at least 1".into()));
        }
        let dim = mesh.dim();
        let lattice = lattice_points(dim, degree);
        let nloc = lattice.len();
        let nv = mesh.num_vertices();

        let mut keys: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        let mut node_support: Vec<Vec<usize>> = (0..nv).map(|v| vec![v]).collect();
        let mut node_coords = vec![0.0; nv * dim];
        for v in 0..nv {
            node_coords[v * dim..(v + 1) * dim].copy_from_slice(mesh.vertex(v));
        }
        let mut cell_nodes = Vec::with_capacity(mesh.num_cells() * nloc);
        for cell in mesh.cells() {
            for alpha in &lattice {
                let support: Vec<usize> = (0..=dim).filter(|&i| alpha[i] > 0).collect();
                let node = if support.len() == 1 {
                    cell[support[0]]
                } else {
                    let mut key: Vec<(usize, usize)> = support.iter().map(|&i| (cell[i], alpha[i])).collect();
                    key.sort_unstable();
                    let next = node_support.len();
                    *keys.entry(key.clone()).or_insert_with(|| {
                        node_support.push(key.iter().map(|&(v, _)| v).collect());
                        let mut x = vec![0.0; dim];
                        for &(v, a) in &key {
                            for (xi, vi) in x.iter_mut().zip(mesh.vertex(v)) {
                                *xi += a as f64 * vi / degree as f64;
                            }
                        }
                        node_coords.extend(x);
                        next
                    })
                };
                cell_nodes.push(node);
            }
        }

        // A node is on ∂Ω iff it has zero weight on the vertex opposite a boundary facet.
        let boundary_facets: HashSet<Vec<usize>> = mesh.boundary_facets().into_iter().collect();
        let num_nodes = node_support.len();
        let mut node_boundary = vec![false; num_nodes];
        for (c, cell) in mesh.cells().enumerate() {
            for opposite in 0..=dim {
                let mut facet: Vec<usize> = (0..=dim).filter(|&i| i != opposite).map(|i| cell[i]).collect();
                facet.sort_unstable();
                if boundary_facets.contains(&facet) {
                    for (a, alpha) in lattice.iter().enumerate() {
                        if alpha[opposite] == 0 {
                            node_boundary[cell_nodes[c * nloc + a]] = true;
                        }
                    }
                }
            }
        }
        let mut interior_index = vec![NOT_INTERIOR; num_nodes];
        let mut interior_nodes = Vec::new();
        for node in 0..num_nodes {
            if !node_boundary[node] {
                interior_index[node] = interior_nodes.len();
                interior_nodes.push(node);
            }
        }
        Ok(FunctionSpace {
            mesh,
            degree,
            lattice,
            cell_nodes,
            node_support,
            node_coords,
            node_boundary,
            interior_index,
            interior_nodes,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of vector components (the mesh dimension).
    pub fn components(&self) -> usize {
        self.mesh.dim()
    }

    pub fn lattice(&self) -> &[Vec<usize>] {
        &self.lattice
    }

    pub fn nodes_per_cell(&self) -> usize {
        self.lattice.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.node_support.len()
    }

    pub fn num_dofs(&self) -> usize {
        self.num_nodes() * self.components()
    }

    pub fn num_interior_nodes(&self) -> usize {
        self.interior_nodes.len()
    }

    pub fn num_interior_dofs(&self) -> usize {
        self.interior_nodes.len() * self.components()
    }

    pub fn cell_nodes(&self, c: usize) -> &[usize] {
        let n = self.nodes_per_cell();
        &self.cell_nodes[c * n..(c + 1) * n]
    }

    pub fn node_coords(&self, node: usize) -> &[f64] {
        let d = self.components();
        &self.node_coords[node * d..(node + 1) * d]
    }

    /// Sorted mesh vertices of the sub-simplex whose relative interior holds the node.
    pub fn node_support(&self, node: usize) -> &[usize] {
        &self.node_support[node]
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.node_boundary[node]
    }

    /// Position of the node in the interior numbering, or [`NOT_INTERIOR`].
    pub fn interior_index(&self, node: usize) -> usize {
        self.interior_index[node]
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    /// Global (unreduced) dof indices of every interior dof, in reduced order.
    pub fn interior_dofs(&self) -> Vec<usize> {
        let d = self.components();
        self.interior_nodes.iter().flat_map(|&n| (0..d).map(move |c| n * d + c)).collect()
    }

    /// Full vector → interior entries.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        assert_eq!(full.len(), self.num_dofs());
        let d = self.components();
        let mut out = Vec::with_capacity(self.num_interior_dofs());
        for &n in &self.interior_nodes {
            out.extend_from_slice(&full[n * d..(n + 1) * d]);
        }
        out
    }

    /// Interior vector → full vector with zero boundary values.
    pub fn extend(&self, reduced: &[f64]) -> Vec<f64> {
        assert_eq!(reduced.len(), self.num_interior_dofs());
        let d = self.components();
        let mut out = vec![0.0; self.num_dofs()];
        for (r, &n) in self.interior_nodes.iter().enumerate() {
            out[n * d..(n + 1) * d].copy_from_slice(&reduced[r * d..(r + 1) * d]);
        }
        out
    }

    /// Gradients of the barycentric coordinates (`(dim+1) × dim`, row per vertex) and
    /// the volume of cell `c`.
    pub fn cell_geometry(&self, c: usize) -> ([[f64; 3]; 4], f64) {
        let mesh = &self.mesh;
        let d = mesh.dim();
        let cell = mesh.cell(c);
        let x0 = mesh.vertex(cell[0]);
        let mut jac = [[0.0; 3]; 3];
        for (col, &v) in cell[1..].iter().enumerate() {
            let x = mesh.vertex(v);
            for row in 0..d {
                jac[row][col] = x[row] - x0[row];
            }
        }
        let mut grads = [[0.0; 3]; 4];
        if d == 2 {
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            // rows of J⁻¹
            grads[1] = [jac[1][1] / det, -jac[0][1] / det, 0.0];
            grads[2] = [-jac[1][0] / det, jac[0][0] / det, 0.0];
        } else {
            let inv = crate::mesh::inv3(&jac);
            grads[1] = inv[0];
            grads[2] = inv[1];
            grads[3] = inv[2];
        }
        for i in 0..d {
            grads[0][i] = -(1..=d).map(|r| grads[r][i]).sum::<f64>();
        }
        (grads, mesh.signed_volume(c).abs())
    }

    /// Value of the finite element function with full coefficient vector `full` at the
    /// barycentric point `lambda` of cell `c`.
    pub fn evaluate(&self, full: &[f64], c: usize, lambda: &[f64]) -> Vec<f64> {
        let d = self.components();
        let mut out = vec![0.0; d];
        for (alpha, &node) in self.lattice.iter().zip(self.cell_nodes(c)) {
            let phi = eval_basis(self.degree, alpha, lambda);
            for comp in 0..d {
                out[comp] += phi * full[node * d + comp];
            }
        }
        out
    }
}
