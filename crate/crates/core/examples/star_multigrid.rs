//! Iteration counts of CG with the vertex-star two-grid preconditioner for the
//! grad-div problem as the penalty weight grows.
//!
//! `cargo run --release --example star_multigrid -- type1 4 2,4`

use svstab::mesh::MeshFamily;
use svstab::multigrid::ElasticityProblem;

fn main() -> svstab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let family: MeshFamily = args.first().map(|s| s.parse()).transpose()?.unwrap_or(MeshFamily::TypeI);
    let coarse_n = args.get(1).map_or(4, |s| s.parse().expect("coarse n"));
    let degrees: Vec<usize> =
        args.get(2).map_or(vec![2, 4], |s| s.split(',').map(|d| d.parse().expect("degree")).collect());
    let gammas = [0.0, 1.0, 1e1, 1e2, 1e3, 1e4, 1e5];
    print!("{:>3}", "k");
    for g in gammas {
        print!(" {:>6}", format!("{g:e}"));
    }
    println!();
    for k in degrees {
        let problem = ElasticityProblem::build(family, coarse_n, 1, k)?;
        print!("{k:>3}");
        for g in gammas {
            let report = problem.solve(g, 1e-8, 1000)?;
            print!(" {:>6}", report.cg_iterations);
        }
        println!("   ({} fine dofs)", problem.fine_space().num_interior_dofs());
    }
    Ok(())
}
