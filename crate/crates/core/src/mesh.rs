//! Structured simplicial meshes of the unit square and unit cube.
//!
//! Three families are generated from an `N × N` (or `N × N × N`) grid:
//!
//! * [`MeshFamily::TypeI`]: every square split by its bottom-left to top-right diagonal.
//! * [`MeshFamily::Malkus`]: every square split by both diagonals, with a new vertex
//!   at the square center (the "crossed" or Type II mesh).
//! * [`MeshFamily::Freudenthal`]: every cube split into the 6 Kuhn simplices
//!   `{x_π(0) ≥ x_π(1) ≥ x_π(2)}`.
//!
//! Grid vertices are numbered lexicographically with `x` running fastest, then `y`,
//! then `z`; Malkus centers are appended after the grid vertices.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for geometric containment tests on the unit box.
pub const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFamily {
    #[serde(rename = "type1")]
    TypeI,
    Malkus,
    Freudenthal,
}

impl MeshFamily {
    pub fn dim(self) -> usize {
        match self {
            MeshFamily::TypeI | MeshFamily::Malkus => 2,
            MeshFamily::Freudenthal => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeshFamily::TypeI => "type1",
            MeshFamily::Malkus => "malkus",
            MeshFamily::Freudenthal => "freudenthal",
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for MeshFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "type1" | "typei" | "type-i" => Ok(MeshFamily::TypeI),
            "malkus" | "type2" | "typeii" => Ok(MeshFamily::Malkus),
            "freudenthal" | "kuhn" => Ok(MeshFamily::Freudenthal),
            other => Err(Error::InvalidArgument(format!("unknown mesh family `{other}`"))),
        }
    }
}

/// A conforming simplicial mesh of `[0,1]^dim`.
#[derive(Debug, Clone)]
pub struct Mesh {
    family: MeshFamily,
    n: usize,
    dim: usize,
    coords: Vec<f64>,
    cells: Vec<usize>,
}

/// The cells containing a given vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexStar {
    pub vertex: usize,
    pub cells: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct MeshExport {
    family: MeshFamily,
    n: usize,
    vertices: Vec<Vec<f64>>,
    cells: Vec<Vec<usize>>,
}

impl Mesh {
    /// Generates the structured mesh of the given family on an `n`-per-axis grid.
    pub fn build(family: MeshFamily, n: usize) -> Result<Mesh> {
        if n == 0 {
            return Err(Error::InvalidArgument("subdivision parameter n must be positive".into()));
        }
        let mesh = match family {
            MeshFamily::TypeI => build_type1(n),
            MeshFamily::Malkus => build_malkus(n),
            MeshFamily::Freudenthal => build_freudenthal(n),
        };
        Ok(mesh)
    }

    pub fn family(&self) -> MeshFamily {
        self.family
    }

    /// Cells per axis of the underlying square/cube grid.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.coords[v * self.dim..(v + 1) * self.dim]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.cells[c * k..(c + 1) * k]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.cells.chunks_exact(self.dim + 1)
    }

    /// Signed volume of a cell (positive for every generated cell).
    pub fn signed_volume(&self, c: usize) -> f64 {
        let cell = self.cell(c);
        let x0 = self.vertex(cell[0]);
        let mut jac = [[0.0; 3]; 3];
        for (col, &v) in cell[1..].iter().enumerate() {
            let x = self.vertex(v);
            for row in 0..self.dim {
                jac[row][col] = x[row] - x0[row];
            }
        }
        match self.dim {
            2 => 0.5 * (jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]),
            _ => det3(&jac) / 6.0,
        }
    }

    /// Barycentric coordinates of `point` with respect to cell `c`.
    pub fn barycentric(&self, c: usize, point: &[f64]) -> Vec<f64> {
        let cell = self.cell(c);
        let d = self.dim;
        let x0 = self.vertex(cell[0]);
        let mut jac = [[0.0; 3]; 3];
        for (col, &v) in cell[1..].iter().enumerate() {
            let x = self.vertex(v);
            for row in 0..d {
                jac[row][col] = x[row] - x0[row];
            }
        }
        let rhs: Vec<f64> = (0..d).map(|i| point[i] - x0[i]).collect();
        let local = if d == 2 {
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            vec![
                (rhs[0] * jac[1][1] - rhs[1] * jac[0][1]) / det,
                (jac[0][0] * rhs[1] - jac[1][0] * rhs[0]) / det,
            ]
        } else {
            let inv = inv3(&jac);
            (0..3).map(|i| (0..3).map(|j| inv[i][j] * rhs[j]).sum()).collect()
        };
        let mut bary = Vec::with_capacity(d + 1);
        bary.push(1.0 - local.iter().sum::<f64>());
        bary.extend(local);
        bary
    }

    /// Whether `point` lies in the closure of cell `c`.
    pub fn cell_contains(&self, c: usize, point: &[f64], tol: f64) -> bool {
        self.barycentric(c, point).iter().all(|&l| l >= -tol)
    }

    /// First cell (in cell order) whose closure contains `point`.
    pub fn locate(&self, point: &[f64]) -> Option<usize> {
        (0..self.num_cells()).find(|&c| self.cell_contains(c, point, 1e-10))
    }

    /// Cells containing vertex `v`.
    pub fn vertex_star(&self, v: usize) -> Result<VertexStar> {
        if v >= self.num_vertices() {
            return Err(Error::IndexOutOfRange { index: v, len: self.num_vertices() });
        }
        let cells = self
            .cells()
            .enumerate()
            .filter(|(_, cell)| cell.contains(&v))
            .map(|(c, _)| c)
            .collect();
        Ok(VertexStar { vertex: v, cells })
    }

    /// Stars of every vertex, computed in one pass over the cells.
    pub fn vertex_stars(&self) -> Vec<Vec<usize>> {
        let mut stars = vec![Vec::new(); self.num_vertices()];
        for (c, cell) in self.cells().enumerate() {
            for &v in cell {
                stars[v].push(c);
            }
        }
        stars
    }

    /// Every sub-simplex with `size` vertices, as sorted vertex tuples, with the
    /// number of cells that contain it.
    pub fn entities(&self, size: usize) -> HashMap<Vec<usize>, usize> {
        let mut out = HashMap::new();
        let k = self.dim + 1;
        for cell in self.cells() {
            for subset in subsets(k, size) {
                let mut key: Vec<usize> = subset.iter().map(|&i| cell[i]).collect();
                key.sort_unstable();
                *out.entry(key).or_insert(0) += 1;
            }
        }
        out
    }

    pub fn num_edges(&self) -> usize {
        self.entities(2).len()
    }

    /// Facets (sorted vertex tuples) that belong to exactly one cell.
    pub fn boundary_facets(&self) -> Vec<Vec<usize>> {
        let mut facets: Vec<Vec<usize>> = self
            .entities(self.dim)
            .into_iter()
            .filter(|(_, count)| *count == 1)
            .map(|(f, _)| f)
            .collect();
        facets.sort();
        facets
    }

    pub fn is_boundary_point(&self, x: &[f64]) -> bool {
        x.iter().any(|&c| c.abs() < GEOM_TOL || (c - 1.0).abs() < GEOM_TOL)
    }

    /// Plain-text JSON export `{family, n, vertices, cells}`.
    pub fn to_json(&self) -> Result<String> {
        let export = MeshExport {
            family: self.family,
            n: self.n,
            vertices: (0..self.num_vertices()).map(|v| self.vertex(v).to_vec()).collect(),
            cells: self.cells().map(|c| c.to_vec()).collect(),
        };
        Ok(serde_json::to_string(&export)?)
    }
}

/// Coarse mesh on the `n` grid and fine mesh on the `n·2^refinements` grid.
///
/// Only the Type I and Freudenthal families are self-similar under regular
/// refinement; Malkus meshes are rejected.
pub fn nested_pair(family: MeshFamily, n: usize, refinements: u32) -> Result<(Mesh, Mesh)> {
    if family == MeshFamily::Malkus {
        return Err(Error::InvalidArgument(
            "nested pairs are only available for type1 and freudenthal meshes".into(),
        ));
    }
    let coarse = Mesh::build(family, n)?;
    let fine = Mesh::build(family, n << refinements)?;
    Ok((coarse, fine))
}

fn grid_index2(n: usize, i: usize, j: usize) -> usize {
    j * (n + 1) + i
}

fn grid_index3(n: usize, i: usize, j: usize, k: usize) -> usize {
    (k * (n + 1) + j) * (n + 1) + i
}

fn grid_coords(n: usize, dim: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let mut coords = Vec::with_capacity((n + 1).pow(dim as u32) * dim);
    if dim == 2 {
        for j in 0..=n {
            for i in 0..=n {
                coords.extend([i as f64 * h, j as f64 * h]);
            }
        }
    } else {
        for k in 0..=n {
            for j in 0..=n {
                for i in 0..=n {
                    coords.extend([i as f64 * h, j as f64 * h, k as f64 * h]);
                }
            }
        }
    }
    coords
}

fn build_type1(n: usize) -> Mesh {
    let coords = grid_coords(n, 2);
    let mut cells = Vec::with_capacity(6 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = grid_index2(n, i, j);
            let v10 = grid_index2(n, i + 1, j);
            let v01 = grid_index2(n, i, j + 1);
            let v11 = grid_index2(n, i + 1, j + 1);
            cells.extend([v00, v10, v11]);
            cells.extend([v00, v11, v01]);
        }
    }
    Mesh { family: MeshFamily::TypeI, n, dim: 2, coords, cells }
}

fn build_malkus(n: usize) -> Mesh {
    let mut coords = grid_coords(n, 2);
    let h = 1.0 / n as f64;
    let offset = (n + 1) * (n + 1);
    for j in 0..n {
        for i in 0..n {
            coords.extend([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
        }
    }
    let mut cells = Vec::with_capacity(12 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = grid_index2(n, i, j);
            let v10 = grid_index2(n, i + 1, j);
            let v01 = grid_index2(n, i, j + 1);
            let v11 = grid_index2(n, i + 1, j + 1);
            let c = offset + j * n + i;
            cells.extend([v00, v10, c]);
            cells.extend([v10, v11, c]);
            cells.extend([v11, v01, c]);
            cells.extend([v01, v00, c]);
        }
    }
    Mesh { family: MeshFamily::Malkus, n, dim: 2, coords, cells }
}

const PERMUTATIONS3: [[usize; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn build_freudenthal(n: usize) -> Mesh {
    let coords = grid_coords(n, 3);
    let mut cells = Vec::with_capacity(24 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for perm in PERMUTATIONS3 {
                    // Walk from the cube origin to the opposite corner, one axis at a time.
                    let mut corner = [i, j, k];
                    let mut simplex = [grid_index3(n, i, j, k); 4];
                    for (step, &axis) in perm.iter().enumerate() {
                        corner[axis] += 1;
                        simplex[step + 1] = grid_index3(n, corner[0], corner[1], corner[2]);
                    }
                    if permutation_is_odd(perm) {
                        simplex.swap(2, 3);
                    }
                    cells.extend(simplex);
                }
            }
        }
    }
    Mesh { family: MeshFamily::Freudenthal, n, dim: 3, coords, cells }
}

fn permutation_is_odd(p: [usize; 3]) -> bool {
    let mut inversions = 0;
    for a in 0..3 {
        for b in a + 1..3 {
            if p[a] > p[b] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}

/// Index subsets of `0..k` with exactly `size` elements, in lexicographic order.
pub(crate) fn subsets(k: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << k) {
        if mask.count_ones() as usize == size {
            out.push((0..k).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out.sort();
    out
}

pub(crate) fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub(crate) fn inv3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = det3(m);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    inv
}
