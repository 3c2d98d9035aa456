use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use svstab::infsup::InfSupConfig;
use svstab::mesh::MeshFamily;
use svstab::multigrid::{ElasticityConfig, ElasticityProblem};
use svstab::report::{
    elasticity_table, infsup_table, oracle_table, run_elasticity, run_infsup, run_oracle, OracleConfig, RunRecord,
};
use svstab::Error;

#[derive(Parser)]
#[command(name = "svstab", version, about = "Inf-sup constants and vertex-star two-grid solves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate inf-sup constants by the shifted power method.
    Infsup(InfsupArgs),
    /// Two-grid preconditioned CG for the grad-div problem over a range of gamma.
    Elasticity(ElasticityArgs),
    /// Compare the power method with a dense eigensolver on a small mesh.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_parser = parse_family)]
    mesh: MeshFamily,
    /// Polynomial degree(s), comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    degree: Vec<usize>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long, default_value_t = 0.6)]
    sigma: f64,
    #[arg(long, default_value_t = 1e4)]
    rho: f64,
    #[arg(long, default_value_t = 1e-14)]
    tau: f64,
    #[arg(long, default_value_t = 1e-12)]
    zeta: f64,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
}

#[derive(Args)]
struct InfsupArgs {
    #[command(flatten)]
    common: Common,
    /// Mesh size(s), comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Initial-field frequency (or frequencies), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10")]
    omega: Vec<f64>,
    #[command(flatten)]
    power: PowerArgs,
}

#[derive(Args)]
struct ElasticityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    coarse_n: usize,
    #[arg(long, default_value_t = 1)]
    refinements: u32,
    /// Grad-div weight(s), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,1e1,1e2,1e3,1e4,1e5")]
    gamma: Vec<f64>,
    #[arg(long, default_value_t = 1e-8)]
    rtol: f64,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 10.0)]
    omega: f64,
    #[command(flatten)]
    power: PowerArgs,
    /// Replace the div-div form by the Laplacian; every eigenvalue is then one.
    #[arg(long)]
    identity_pencil: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_family(s: &str) -> Result<MeshFamily, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn power_config(family: MeshFamily, n: usize, degree: usize, omega: f64, p: &PowerArgs, max: Option<usize>) -> InfSupConfig {
    let mut c = InfSupConfig::new(family, n, degree).with_sigma(p.sigma).with_omega(omega).with_eps(p.eps);
    c.rho = p.rho;
    c.tau = p.tau;
    c.zeta = p.zeta;
    if let Some(m) = max {
        c.max_iterations = m;
    }
    c
}

fn emit(records: &[RunRecord], format: Format, table: fn(&[RunRecord]) -> String) -> svstab::Result<()> {
    match format {
        Format::Table => print!("{}", table(records)),
        Format::Json => {
            for r in records {
                println!("{}", r.to_json()?);
            }
        }
    }
    Ok(())
}

fn run(command: Command) -> svstab::Result<Vec<RunRecord>> {
    let mut records = Vec::new();
    match command {
        Command::Infsup(args) => {
            let c = &args.common;
            for &k in &c.degree {
                for &n in &args.n {
                    for &omega in &args.omega {
                        let cfg = power_config(c.mesh, n, k, omega, &args.power, c.max_iters);
                        records.push(run_infsup(&cfg)?);
                    }
                }
            }
            emit(&records, c.format, infsup_table)?;
        }
        Command::Elasticity(args) => {
            let c = &args.common;
            for &k in &c.degree {
                let problem = ElasticityProblem::build(c.mesh, args.coarse_n, args.refinements, k)?;
                for &gamma in &args.gamma {
                    let mut cfg = ElasticityConfig::new(c.mesh, args.coarse_n, args.refinements, k, gamma);
                    cfg.rtol = args.rtol;
                    if let Some(m) = c.max_iters {
                        cfg.max_iterations = m;
                    }
                    records.push(run_elasticity(&problem, &cfg)?);
                }
            }
            emit(&records, c.format, elasticity_table)?;
        }
        Command::Oracle(args) => {
            let c = &args.common;
            for &k in &c.degree {
                for &n in &args.n {
                    let power = power_config(c.mesh, n, k, args.omega, &args.power, c.max_iters);
                    let cfg = OracleConfig { power, identity_pencil: args.identity_pencil, seed: args.seed };
                    records.push(run_oracle(&cfg)?);
                }
            }
            emit(&records, c.format, oracle_table)?;
        }
    }
    Ok(records)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(records) if records.iter().all(RunRecord::converged) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(2),
        Err(e @ Error::PenaltyNotConverged { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
