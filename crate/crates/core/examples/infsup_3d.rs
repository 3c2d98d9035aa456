//! Inf-sup constants on the Freudenthal tetrahedral mesh of the unit cube, and the
//! unshifted iteration that converges to the top of the spectrum instead.
//!
//! `cargo run --release --example infsup_3d -- 2 4`

use svstab::infsup::{InfSupConfig, InfSupProblem};
use svstab::mesh::MeshFamily;

fn main() -> svstab::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|s| s.parse().expect("integer argument")).collect();
    let n = args.first().copied().unwrap_or(2);
    let k = args.get(1).copied().unwrap_or(4);
    let family = MeshFamily::Freudenthal;
    let problem = InfSupProblem::build(family, n, k, 1e4)?;
    println!("Freudenthal N={n} k={k}: {} interior dofs", problem.space().num_interior_dofs());

    let cfg = InfSupConfig::new(family, n, k).with_eps(1e-7);
    let low = problem.estimate(&cfg)?;
    println!("sigma=0.6: lambda1 = {:.4e} after {} iterations, {} restarts", low.lambda1, low.iterations, low.restarts);
    let high = problem.estimate(&cfg.with_sigma(0.0))?;
    println!("sigma=0  : lambda_max = {:.8} after {} iterations", high.lambda1, high.iterations);
    Ok(())
}
