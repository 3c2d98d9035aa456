//! Assembly of the vector Laplacian `a(u,v) = ∫ ∇u : ∇v`, the div-div form
//! `b(u,v) = ∫ div u div v`, constant loads, interpolation and prolongation.

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

use super::element::{eval_basis, ReferenceElement};
use super::space::{FunctionSpace, NOT_INTERIOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilinearForm {
    /// `∫ ∇u : ∇v`
    Gradient,
    /// `∫ div u div v`
    DivDiv,
}

/// Which dofs index the rows and columns of an assembled operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofSet {
    All,
    /// Homogeneous Dirichlet dofs eliminated.
    Interior,
}

/// Default quadrature degree: the forms need `2k − 2`, two more are added as margin.
pub fn default_quadrature_degree(k: usize) -> usize {
    2 * k
}

pub fn assemble_grad(space: &FunctionSpace) -> CsrMatrix {
    assemble(space, BilinearForm::Gradient, DofSet::Interior, default_quadrature_degree(space.degree()))
}

pub fn assemble_divdiv(space: &FunctionSpace) -> CsrMatrix {
    assemble(space, BilinearForm::DivDiv, DofSet::Interior, default_quadrature_degree(space.degree()))
}

pub fn assemble_grad_full(space: &FunctionSpace) -> CsrMatrix {
    assemble(space, BilinearForm::Gradient, DofSet::All, default_quadrature_degree(space.degree()))
}

pub fn assemble_divdiv_full(space: &FunctionSpace) -> CsrMatrix {
    assemble(space, BilinearForm::DivDiv, DofSet::All, default_quadrature_degree(space.degree()))
}

/// Node → row-block index for the chosen dof set.
fn node_map(space: &FunctionSpace, set: DofSet) -> (Vec<usize>, usize) {
    match set {
        DofSet::All => ((0..space.num_nodes()).collect(), space.num_nodes()),
        DofSet::Interior => {
            ((0..space.num_nodes()).map(|n| space.interior_index(n)).collect(), space.num_interior_nodes())
        }
    }
}

/// Sparsity pattern over the selected nodes; `coupled` adds every component pair.
fn build_pattern(space: &FunctionSpace, map: &[usize], nsel: usize, coupled: bool) -> (Vec<usize>, Vec<u32>) {
    let d = space.components();
    let mut neighbours: Vec<Vec<u32>> = vec![Vec::new(); nsel];
    let mesh = space.mesh();
    for c in 0..mesh.num_cells() {
        let nodes = space.cell_nodes(c);
        for &a in nodes {
            let ra = map[a];
            if ra == NOT_INTERIOR {
                continue;
            }
            for &b in nodes {
                let rb = map[b];
                if rb != NOT_INTERIOR {
                    neighbours[ra].push(rb as u32);
                }
            }
        }
    }
    for list in &mut neighbours {
        list.sort_unstable();
        list.dedup();
    }
    let mut row_ptr = Vec::with_capacity(nsel * d + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::new();
    for list in &neighbours {
        for comp in 0..d {
            for &nb in list {
                if coupled {
                    for c2 in 0..d {
                        col_idx.push(nb * d as u32 + c2 as u32);
                    }
                } else {
                    col_idx.push(nb * d as u32 + comp as u32);
                }
            }
            row_ptr.push(col_idx.len());
        }
    }
    (row_ptr, col_idx)
}

/// Assembles a bilinear form with the given quadrature degree.
pub fn assemble(space: &FunctionSpace, form: BilinearForm, set: DofSet, quadrature_degree: usize) -> CsrMatrix {
    let d = space.components();
    let nb = d + 1;
    let element = ReferenceElement::new(d, space.degree(), quadrature_degree);
    let nloc = element.num_nodes();
    let (map, nsel) = node_map(space, set);
    let coupled = form == BilinearForm::DivDiv;
    let (row_ptr, col_idx) = build_pattern(space, &map, nsel, coupled);
    let mut values = vec![0.0; col_idx.len()];

    // local[(a * nloc + b) * d * d + c * d + c2]
    let mut local = vec![0.0; nloc * nloc * d * d];
    let mut positions = vec![0usize; nloc];
    for cell in 0..space.mesh().num_cells() {
        let (grads, vol) = space.cell_geometry(cell);
        local.iter_mut().for_each(|v| *v = 0.0);
        for a in 0..nloc {
            for b in 0..nloc {
                let m = element.grad_moment(a, b);
                let out = &mut local[(a * nloc + b) * d * d..(a * nloc + b + 1) * d * d];
                // (Gᵀ M G)_{c,c2} = Σ_ij G_ic M_ij G_jc2
                for i in 0..nb {
                    for j in 0..nb {
                        let mij = m[i * nb + j] * vol;
                        if mij == 0.0 {
                            continue;
                        }
                        for c in 0..d {
                            let gi = grads[i][c] * mij;
                            for c2 in 0..d {
                                out[c * d + c2] += gi * grads[j][c2];
                            }
                        }
                    }
                }
            }
        }
        let nodes = space.cell_nodes(cell);
        for (a, &na) in nodes.iter().enumerate() {
            let ra = map[na];
            if ra == NOT_INTERIOR {
                continue;
            }
            for comp in 0..d {
                let row = ra * d + comp;
                let cols = &col_idx[row_ptr[row]..row_ptr[row + 1]];
                for (b, &nbn) in nodes.iter().enumerate() {
                    let rb = map[nbn];
                    if rb == NOT_INTERIOR {
                        positions[b] = usize::MAX;
                        continue;
                    }
                    let first = if coupled { rb * d } else { rb * d + comp };
                    positions[b] = row_ptr[row] + cols.binary_search(&(first as u32)).expect("pattern covers cell");
                }
                for (b, &pos) in positions.iter().enumerate() {
                    if pos == usize::MAX {
                        continue;
                    }
                    let block = &local[(a * nloc + b) * d * d..(a * nloc + b + 1) * d * d];
                    match form {
                        BilinearForm::Gradient => {
                            let trace: f64 = (0..d).map(|c| block[c * d + c]).sum();
                            values[pos] += trace;
                        }
                        BilinearForm::DivDiv => {
                            for c2 in 0..d {
                                values[pos + c2] += block[comp * d + c2];
                            }
                        }
                    }
                }
            }
        }
    }
    let n = nsel * d;
    CsrMatrix::from_raw_unchecked(n, n, row_ptr, col_idx, values)
}

/// Nodal interpolant of a vector field; returns the full coefficient vector.
pub fn interpolate(space: &FunctionSpace, field: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let d = space.components();
    let mut out = vec![0.0; space.num_dofs()];
    for node in 0..space.num_nodes() {
        let v = field(space.node_coords(node));
        out[node * d..(node + 1) * d].copy_from_slice(&v[..d]);
    }
    out
}

/// `∫ value · φ_i` for every dof (full numbering).
pub fn assemble_constant_load_full(space: &FunctionSpace, value: f64) -> Vec<f64> {
    let d = space.components();
    let element = ReferenceElement::new(d, space.degree(), default_quadrature_degree(space.degree()));
    let mut out = vec![0.0; space.num_dofs()];
    for cell in 0..space.mesh().num_cells() {
        let vol = space.mesh().signed_volume(cell).abs();
        for (a, &node) in space.cell_nodes(cell).iter().enumerate() {
            let contribution = value * vol * element.mean(a);
            for comp in 0..d {
                out[node * d + comp] += contribution;
            }
        }
    }
    out
}

/// `∫ value · φ_i` over interior dofs, `value` applied to every component.
pub fn assemble_constant_load(space: &FunctionSpace, value: f64) -> Vec<f64> {
    space.restrict(&assemble_constant_load_full(space, value))
}

/// `‖div v‖²_{L²}` of a full coefficient vector, evaluated by quadrature.
pub fn divergence_norm_sq(space: &FunctionSpace, full: &[f64]) -> f64 {
    let d = space.components();
    let nb = d + 1;
    let element = ReferenceElement::new(d, space.degree(), default_quadrature_degree(space.degree()));
    let rule = element.quadrature();
    let scale = 1.0 / rule.reference_volume();
    let mut total = 0.0;
    for cell in 0..space.mesh().num_cells() {
        let (grads, vol) = space.cell_geometry(cell);
        let nodes = space.cell_nodes(cell);
        for q in 0..rule.len() {
            let mut div = 0.0;
            for (a, &node) in nodes.iter().enumerate() {
                let g = element.bary_grad(q, a);
                for c in 0..d {
                    let dphi: f64 = (0..nb).map(|i| g[i] * grads[i][c]).sum();
                    div += dphi * full[node * d + c];
                }
            }
            total += rule.weights()[q] * scale * vol * div * div;
        }
    }
    total
}

/// Nodal-interpolation prolongation from `coarse` to `fine` over interior dofs.
///
/// Row `(node, c)` of the fine space holds the coarse basis functions of component
/// `c` evaluated at the fine node. The meshes must be nested: every fine cell has
/// to lie inside a single coarse cell.
pub fn prolongation(coarse: &FunctionSpace, fine: &FunctionSpace) -> Result<CsrMatrix> {
    if coarse.degree() != fine.degree() {
        return Err(Error::InvalidArgument("prolongation requires equal degrees".into()));
    }
    if coarse.components() != fine.components() {
        return Err(Error::DimensionMismatch { expected: coarse.components(), got: fine.components() });
    }
    let cmesh = coarse.mesh();
    let fmesh = fine.mesh();
    for fc in 0..fmesh.num_cells() {
        let verts = fmesh.cell(fc);
        let contained = (0..cmesh.num_cells())
            .any(|cc| verts.iter().all(|&v| cmesh.cell_contains(cc, fmesh.vertex(v), 1e-12)));
        if !contained {
            return Err(Error::NotNested { fine_cell: fc });
        }
    }
    let d = fine.components();
    let k = coarse.degree();
    let mut triplets = Vec::new();
    for (row_node, &fnode) in fine.interior_nodes().iter().enumerate() {
        let x = fine.node_coords(fnode);
        let cc = cmesh.locate(x).ok_or(Error::NotNested { fine_cell: usize::MAX })?;
        let lambda = cmesh.barycentric(cc, x);
        for (alpha, &cnode) in coarse.lattice().iter().zip(coarse.cell_nodes(cc)) {
            let col_node = coarse.interior_index(cnode);
            if col_node == NOT_INTERIOR {
                continue;
            }
            let phi = eval_basis(k, alpha, &lambda);
            if phi.abs() < 1e-13 {
                continue;
            }
            for c in 0..d {
                triplets.push((row_node * d + c, col_node * d + c, phi));
            }
        }
    }
    CsrMatrix::from_triplets(fine.num_interior_dofs(), coarse.num_interior_dofs(), &triplets)
}
