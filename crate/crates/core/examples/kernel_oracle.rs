//! Cross-checks the power method against a dense eigensolver restricted to an
//! explicit basis of the complement of the divergence-free subspace.
//!
//! `cargo run --example kernel_oracle`

use svstab::infsup::{InfSupConfig, InfSupProblem};
use svstab::linalg::kernel_split;
use svstab::mesh::MeshFamily;

fn main() -> svstab::Result<()> {
    for (family, n, k) in [(MeshFamily::Malkus, 2, 1), (MeshFamily::Malkus, 3, 1), (MeshFamily::TypeI, 2, 2), (MeshFamily::TypeI, 3, 3)] {
        let problem = InfSupProblem::build(family, n, k, 1e4)?;
        let split = kernel_split(problem.b(), problem.a(), 1e-10)?;
        let dense = problem.dense_spectrum()?;
        let report = problem.estimate(&InfSupConfig::new(family, n, k).with_eps(1e-12))?;
        println!(
            "{family:>7} N={n} k={k}: dim ker B {:>4}, complement {:>4}, dense {:.10e}, power {:.10e}, rel diff {:.1e}",
            split.kernel.ncols(),
            split.complement.ncols(),
            dense[0],
            report.lambda1,
            ((report.lambda1 - dense[0]) / dense[0]).abs()
        );
    }
    Ok(())
}
