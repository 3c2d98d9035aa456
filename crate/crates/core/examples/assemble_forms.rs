//! Assembles the vector Laplacian and the div-div form on a Lagrange space and
//! checks a few identities: symmetric operators, divergence of a linear field,
//! and the sparse Cholesky solve of the Dirichlet Laplacian.
//!
//! `cargo run --example assemble_forms -- type1 4 3`

use std::sync::Arc;

use svstab::fem::{assemble_constant_load, assemble_divdiv, assemble_divdiv_full, assemble_grad, interpolate, FunctionSpace};
use svstab::linalg::{factorize_spd, norm2};
use svstab::mesh::{Mesh, MeshFamily};

fn main() -> svstab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let family: MeshFamily = args.first().map(|s| s.parse()).transpose()?.unwrap_or(MeshFamily::TypeI);
    let n = args.get(1).map_or(4, |s| s.parse().expect("n"));
    let k = args.get(2).map_or(3, |s| s.parse().expect("degree"));

    let space = FunctionSpace::new(Arc::new(Mesh::build(family, n)?), k)?;
    let a = assemble_grad(&space);
    let b = assemble_divdiv(&space);
    println!("{family} N={n} k={k}: {} nodes, {} interior dofs", space.num_nodes(), space.num_interior_dofs());
    println!("A: nnz {} symmetry defect {:.1e}", a.nnz(), a.symmetry_defect());
    println!("B: nnz {} symmetry defect {:.1e}", b.nnz(), b.symmetry_defect());

    let identity = interpolate(&space, |x| x.to_vec());
    let div_sq = assemble_divdiv_full(&space).quad_form(&identity);
    println!("||div x||^2 = {div_sq:.12} (expected {})", (space.components() * space.components()) as f64);

    let f = assemble_constant_load(&space, 1.0);
    let factor = factorize_spd(&a)?;
    let u = factor.solve(&f);
    let residual: Vec<f64> = a.mul_vec(&u).iter().zip(&f).map(|(x, y)| x - y).collect();
    println!("Cholesky: nnz(L) = {}, relative residual {:.1e}", factor.nnz(), norm2(&residual) / norm2(&f));
    Ok(())
}
