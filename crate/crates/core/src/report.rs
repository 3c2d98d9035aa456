//! Run records, text tables and JSON output for the command-line front end.

use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infsup::{InfSupConfig, InfSupProblem, TraceEntry};
use crate::linalg::{dense_generalized_eig, kernel_split, DENSE_LIMIT};
use crate::multigrid::{ElasticityConfig, ElasticityProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfSupResult {
    pub lambda1: f64,
    pub beta_lower: f64,
    pub beta_upper: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    pub interior_dofs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticityResult {
    pub iterations: usize,
    pub final_relative_residual: f64,
    pub converged: bool,
    pub fine_dofs: usize,
    pub coarse_dofs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Settings of the power-method run being checked.
    pub power: InfSupConfig,
    /// Replace `B` by `A`, for which every eigenvalue is one.
    pub identity_pencil: bool,
    /// Seed for the random kernel vectors used in the orthogonality check.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub dense_lambda1: f64,
    pub dense_lambda_max: f64,
    pub power_lambda1: Option<f64>,
    pub relative_difference: Option<f64>,
    pub kernel_dim: usize,
    pub complement_dim: usize,
    /// Largest `|a(u, v)| / (‖u‖_A ‖v‖_A)` between the final power iterate and ten
    /// random kernel vectors.
    pub kernel_orthogonality: Option<f64>,
    pub converged: bool,
}

/// One experiment: the configuration, its outcome and the convergence trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "lowercase")]
pub enum RunRecord {
    Infsup { config: InfSupConfig, result: InfSupResult, trace: Vec<TraceEntry>, seconds: f64 },
    Elasticity { config: ElasticityConfig, result: ElasticityResult, trace: Vec<f64>, seconds: f64 },
    Oracle { config: OracleConfig, result: OracleResult, trace: Vec<TraceEntry>, seconds: f64 },
}

impl RunRecord {
    pub fn converged(&self) -> bool {
        match self {
            RunRecord::Infsup { result, .. } => result.converged,
            RunRecord::Elasticity { result, .. } => result.converged,
            RunRecord::Oracle { result, .. } => result.converged,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<RunRecord> {
        Ok(serde_json::from_str(text)?)
    }

    /// Runs the recorded configuration again.
    pub fn rerun(&self) -> Result<RunRecord> {
        match self {
            RunRecord::Infsup { config, .. } => run_infsup(config),
            RunRecord::Elasticity { config, .. } => {
                let problem = ElasticityProblem::build(config.family, config.coarse_n, config.refinements, config.degree)?;
                run_elasticity(&problem, config)
            }
            RunRecord::Oracle { config, .. } => run_oracle(config),
        }
    }
}

pub fn run_infsup(config: &InfSupConfig) -> Result<RunRecord> {
    config.validate()?;
    let start = Instant::now();
    let problem = InfSupProblem::build(config.family, config.n, config.degree, config.rho)?;
    let report = problem.estimate(config)?;
    Ok(RunRecord::Infsup {
        config: config.clone(),
        result: InfSupResult {
            lambda1: report.lambda1,
            beta_lower: report.beta_lower,
            beta_upper: report.beta_upper,
            iterations: report.iterations,
            restarts: report.restarts,
            converged: report.converged,
            interior_dofs: report.interior_dofs,
        },
        trace: report.trace,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Solves one `γ` on an already assembled problem matching `config`.
pub fn run_elasticity(problem: &ElasticityProblem, config: &ElasticityConfig) -> Result<RunRecord> {
    config.validate()?;
    let start = Instant::now();
    let report = problem.solve(config.gamma, config.rtol, config.max_iterations)?;
    Ok(RunRecord::Elasticity {
        config: config.clone(),
        result: ElasticityResult {
            iterations: report.cg_iterations,
            final_relative_residual: report.final_relative_residual,
            converged: report.converged,
            fine_dofs: report.fine_dofs,
            coarse_dofs: report.coarse_dofs,
        },
        trace: report.residual_history,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_oracle(config: &OracleConfig) -> Result<RunRecord> {
    let power = &config.power;
    power.validate()?;
    let start = Instant::now();
    let problem = InfSupProblem::build(power.family, power.n, power.degree, power.rho)?;
    let n = problem.a().nrows();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { dofs: n, limit: DENSE_LIMIT });
    }
    if config.identity_pencil {
        let eig = dense_generalized_eig(problem.a(), problem.a(), &DMatrix::identity(n, n))?;
        return Ok(RunRecord::Oracle {
            config: config.clone(),
            result: OracleResult {
                dense_lambda1: eig.eigenvalues[0],
                dense_lambda_max: eig.eigenvalues[n - 1],
                power_lambda1: None,
                relative_difference: None,
                kernel_dim: 0,
                complement_dim: n,
                kernel_orthogonality: None,
                converged: true,
            },
            trace: Vec::new(),
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let split = kernel_split(problem.b(), problem.a(), 1e-10)?;
    let eig = dense_generalized_eig(problem.b(), problem.a(), &split.complement)?;
    let (report, state) = problem.estimate_with_state(power)?;
    let dense_lambda1 = eig.eigenvalues[0];
    let au = DVector::from_vec(problem.a().mul_vec(&state.u_hat));
    let a_dense = problem.a().to_dense();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut orthogonality: f64 = 0.0;
    if split.kernel.ncols() > 0 {
        for _ in 0..10 {
            let coeffs = DVector::from_fn(split.kernel.ncols(), |_, _| rng.gen::<f64>() - 0.5);
            let v = &split.kernel * coeffs;
            let vnorm = (v.transpose() * &a_dense * &v)[(0, 0)].sqrt();
            orthogonality = orthogonality.max(au.dot(&v).abs() / vnorm);
        }
    }
    Ok(RunRecord::Oracle {
        config: config.clone(),
        result: OracleResult {
            dense_lambda1,
            dense_lambda_max: *eig.eigenvalues.last().unwrap_or(&f64::NAN),
            power_lambda1: Some(report.lambda1),
            relative_difference: Some(((report.lambda1 - dense_lambda1) / dense_lambda1).abs()),
            kernel_dim: split.kernel.ncols(),
            complement_dim: split.complement.ncols(),
            kernel_orthogonality: Some(orthogonality),
            converged: report.converged,
        },
        trace: report.trace,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Inf-sup rows in the layout `k  N  ω  iterations  λ₁  mesh  restarts`.
pub fn infsup_table(records: &[RunRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>2} {:>4} {:>6} {:>10} {:>12} {:>12} {:>9} {:>5}",
        "k", "N", "omega", "iterations", "lambda1", "mesh", "restarts", "conv"
    );
    for record in records {
        if let RunRecord::Infsup { config, result, .. } = record {
            let _ = writeln!(
                out,
                "{:>2} {:>4} {:>6} {:>10} {:>12.3e} {:>12} {:>9} {:>5}",
                config.degree,
                config.n,
                config.omega,
                result.iterations,
                result.lambda1,
                config.family.name(),
                result.restarts,
                if result.converged { "yes" } else { "no" }
            );
        }
    }
    out
}

/// CG iteration counts with one row per degree and one column per `γ`.
pub fn elasticity_table(records: &[RunRecord]) -> String {
    let mut gammas: Vec<f64> = Vec::new();
    let mut degrees: Vec<usize> = Vec::new();
    for record in records {
        if let RunRecord::Elasticity { config, .. } = record {
            if !gammas.contains(&config.gamma) {
                gammas.push(config.gamma);
            }
            if !degrees.contains(&config.degree) {
                degrees.push(config.degree);
            }
        }
    }
    let mut out = String::new();
    let _ = write!(out, "{:>3}", "k");
    for g in &gammas {
        let _ = write!(out, " {:>8}", format!("{g:e}"));
    }
    out.push('\n');
    for &k in &degrees {
        let _ = write!(out, "{k:>3}");
        for &g in &gammas {
            let cell = records.iter().find_map(|r| match r {
                RunRecord::Elasticity { config, result, .. } if config.degree == k && config.gamma == g => {
                    Some(if result.converged { result.iterations.to_string() } else { format!("{}*", result.iterations) })
                }
                _ => None,
            });
            let _ = write!(out, " {:>8}", cell.unwrap_or_else(|| "-".into()));
        }
        out.push('\n');
    }
    out
}

pub fn oracle_table(records: &[RunRecord]) -> String {
    let mut out = String::new();
    for record in records {
        if let RunRecord::Oracle { config, result, .. } = record {
            let p = &config.power;
            let _ = writeln!(out, "mesh {} N={} k={}", p.family, p.n, p.degree);
            let _ = writeln!(out, "  dim ker B          {}", result.kernel_dim);
            let _ = writeln!(out, "  dim complement     {}", result.complement_dim);
            let _ = writeln!(out, "  dense lambda1      {:.12e}", result.dense_lambda1);
            let _ = writeln!(out, "  dense lambda max   {:.12e}", result.dense_lambda_max);
            if let (Some(pl), Some(rd)) = (result.power_lambda1, result.relative_difference) {
                let _ = writeln!(out, "  power lambda1      {pl:.12e}");
                let _ = writeln!(out, "  relative diff      {rd:.3e}");
            }
            if let Some(o) = result.kernel_orthogonality {
                let _ = writeln!(out, "  kernel a-coupling  {o:.3e}");
            }
        }
    }
    out
}
