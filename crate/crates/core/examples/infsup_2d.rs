//! Inf-sup constants on two-dimensional meshes: a row per mesh size, showing the
//! degenerating Type I quadratics next to the stable quartics.
//!
//! `cargo run --release --example infsup_2d`

use svstab::infsup::{InfSupConfig, InfSupProblem};
use svstab::mesh::MeshFamily;

fn main() -> svstab::Result<()> {
    println!("{:>12} {:>2} {:>3} {:>10} {:>11} {:>9} {:>9}", "mesh", "k", "N", "iterations", "lambda1", "beta >=", "beta <=");
    for (family, k, sizes, eps) in [
        (MeshFamily::Malkus, 1, vec![5, 10], 1e-7),
        (MeshFamily::Malkus, 2, vec![5, 10], 1e-7),
        (MeshFamily::TypeI, 2, vec![4, 8], 1e-10),
        (MeshFamily::TypeI, 4, vec![5, 10], 1e-7),
    ] {
        for n in sizes {
            let problem = InfSupProblem::build(family, n, k, 1e4)?;
            let report = problem.estimate(&InfSupConfig::new(family, n, k).with_eps(eps))?;
            println!(
                "{family:>12} {k:>2} {n:>3} {:>10} {:>11.3e} {:>9.4} {:>9.4}",
                report.iterations, report.lambda1, report.beta_lower, report.beta_upper
            );
        }
    }
    Ok(())
}
