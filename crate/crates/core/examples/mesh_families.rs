//! Builds each structured mesh family and prints entity counts and vertex stars.
//!
//! `cargo run --example mesh_families -- 3`

use svstab::mesh::{nested_pair, Mesh, MeshFamily};

fn main() -> svstab::Result<()> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse().expect("n must be an integer")).unwrap_or(2);
    for family in [MeshFamily::TypeI, MeshFamily::Malkus, MeshFamily::Freudenthal] {
        let mesh = Mesh::build(family, n)?;
        let stars = mesh.vertex_stars();
        let largest = stars.iter().map(Vec::len).max().unwrap_or(0);
        println!(
            "{family:>12}: dim {} vertices {:>5} edges {:>5} cells {:>5} boundary facets {:>4} largest star {largest}",
            mesh.dim(),
            mesh.num_vertices(),
            mesh.num_edges(),
            mesh.num_cells(),
            mesh.boundary_facets().len(),
        );
    }
    let (coarse, fine) = nested_pair(MeshFamily::Freudenthal, 1, 1)?;
    println!("nested Freudenthal pair: {} coarse cells, {} fine cells", coarse.num_cells(), fine.num_cells());
    println!("{}", Mesh::build(MeshFamily::TypeI, 1)?.to_json()?);
    Ok(())
}
