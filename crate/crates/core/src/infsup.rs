//! Shifted power iteration for the smallest eigenvalue `κ` of
//! `(div u, div v) = κ (∇u, ∇v)` on the `A`-orthogonal complement of the
//! discretely divergence-free subspace, with iterated-penalty restarts.
//!
//! `A` is the vector Laplacian and `B` the div-div form, both on interior dofs.
//! The inf-sup constant `β` of the Scott–Vogelius pair then satisfies
//! `√κ ≤ β ≤ 2√κ`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{assemble_divdiv, assemble_divdiv_full, assemble_grad, interpolate, FunctionSpace};
use crate::linalg::{dense_generalized_eig, factorize_spd, kernel_split, CholeskyFactor, CsrMatrix};
use crate::mesh::{Mesh, MeshFamily};

/// Parameters of one inf-sup estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfSupConfig {
    pub family: MeshFamily,
    pub n: usize,
    pub degree: usize,
    /// Spectral shift `σ`; `σ = 0` targets the largest eigenvalue instead.
    pub sigma: f64,
    /// Frequency of the initial field.
    pub omega: f64,
    /// Penalty parameter `ρ`.
    pub rho: f64,
    /// Divergence tolerance `τ` ending the penalty iteration.
    pub tau: f64,
    /// Relative size `ζ` of the kernel component that triggers a restart.
    pub zeta: f64,
    /// Eigenvalue increment `ε` that ends the power iteration.
    pub eps: f64,
    pub max_iterations: usize,
    pub max_penalty_iterations: usize,
    /// Run the kernel projection every this many power steps (1 = every step).
    pub restart_check_interval: usize,
}

impl InfSupConfig {
    pub fn new(family: MeshFamily, n: usize, degree: usize) -> InfSupConfig {
        InfSupConfig {
            family,
            n,
            degree,
            sigma: 0.6,
            omega: 10.0,
            rho: 1e4,
            tau: 1e-14,
            zeta: 1e-12,
            eps: 1e-8,
            max_iterations: 200_000,
            max_penalty_iterations: 10_000,
            restart_check_interval: 1,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("rho", self.rho), ("tau", self.tau), ("zeta", self.zeta), ("eps", self.eps)];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {value}")));
            }
        }
        if !(0.0..1.0).contains(&self.sigma) {
            return Err(Error::InvalidArgument(format!("sigma must lie in [0, 1), got {}", self.sigma)));
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidArgument("omega must be finite".into()));
        }
        if self.n == 0 || self.degree == 0 {
            return Err(Error::InvalidArgument("n and degree must be positive".into()));
        }
        if self.max_iterations == 0 || self.max_penalty_iterations == 0 || self.restart_check_interval == 0 {
            return Err(Error::InvalidArgument("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

/// Current power iterate.
#[derive(Debug, Clone)]
pub struct PowerState {
    /// Unnormalized iterate `uⁿ`.
    pub u: Vec<f64>,
    /// `uⁿ / ‖uⁿ‖_A`.
    pub u_hat: Vec<f64>,
    /// Rayleigh quotient `uᵀBu / uᵀAu`.
    pub lambda: f64,
    pub iteration: usize,
    pub restarts: usize,
}

/// Result of the iterated-penalty projection onto `ker B`.
#[derive(Debug, Clone)]
pub struct KernelProjection {
    pub z: Vec<f64>,
    pub iterations: usize,
    /// `‖div z‖_{L²}` of the returned iterate.
    pub divergence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub lambda: f64,
    pub restarted: bool,
    /// Penalty iterations spent on the kernel check (0 when skipped).
    pub penalty_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfSupReport {
    pub lambda1: f64,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    pub beta_lower: f64,
    pub beta_upper: f64,
    pub interior_dofs: usize,
    pub trace: Vec<TraceEntry>,
}

/// Assembled and factorized operators for one mesh and degree, reusable across runs.
pub struct InfSupProblem {
    space: FunctionSpace,
    a: CsrMatrix,
    b: CsrMatrix,
    a_factor: CholeskyFactor,
    rho: f64,
    penalty_factor: CholeskyFactor,
}

impl InfSupProblem {
    pub fn new(space: FunctionSpace, rho: f64) -> Result<InfSupProblem> {
        if !(rho > 0.0) {
            return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
        }
        let a = assemble_grad(&space);
        let b = assemble_divdiv(&space);
        let a_factor = factorize_spd(&a)?;
        let penalty_factor = factorize_spd(&a.add_scaled(&b, rho))?;
        Ok(InfSupProblem { space, a, b, a_factor, rho, penalty_factor })
    }

    pub fn build(family: MeshFamily, n: usize, degree: usize, rho: f64) -> Result<InfSupProblem> {
        let mesh = Arc::new(Mesh::build(family, n)?);
        InfSupProblem::new(FunctionSpace::new(mesh, degree)?, rho)
    }

    pub fn space(&self) -> &FunctionSpace {
        &self.space
    }

    /// Vector Laplacian on interior dofs.
    pub fn a(&self) -> &CsrMatrix {
        &self.a
    }

    /// Div-div form on interior dofs.
    pub fn b(&self) -> &CsrMatrix {
        &self.b
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn energy_norm(&self, u: &[f64]) -> f64 {
        self.a.quad_form(u).max(0.0).sqrt()
    }

    /// Normalizes `u` and evaluates its Rayleigh quotient.
    pub fn state_from(&self, u: Vec<f64>, iteration: usize, restarts: usize) -> Result<PowerState> {
        let norm = self.energy_norm(&u);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Degenerate(format!("iterate {iteration} has energy norm {norm:e}")));
        }
        let lambda = self.b.quad_form(&u) / (norm * norm);
        let u_hat = u.iter().map(|v| v / norm).collect();
        Ok(PowerState { u, u_hat, lambda, iteration, restarts })
    }

    /// Starting iterate `u⁰ = A⁻¹ B w` for the interpolant `w` of
    /// `(sin ωx, cos ωy)` in 2D or `(sin ωx, cos ωy, sin ωz)` in 3D, boundary values
    /// of `w` included. `u⁰` lies in the range of `A⁻¹B` and hence in `(ker B)^⊥`.
    pub fn initialize(&self, omega: f64) -> Result<PowerState> {
        let w = interpolate(&self.space, |x| {
            let mut v = vec![(omega * x[0]).sin(), (omega * x[1]).cos()];
            if x.len() == 3 {
                v.push((omega * x[2]).sin());
            }
            v
        });
        let b_full = assemble_divdiv_full(&self.space);
        let bw = self.space.restrict(&b_full.mul_vec(&w));
        let w_max = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bw_max = bw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let degenerate =
            || Error::Degenerate(format!("initial iterate vanishes for omega = {omega}; choose another omega"));
        if bw_max <= 1e-12 * b_full.max_abs() * w_max {
            return Err(degenerate());
        }
        let u0 = self.a_factor.solve(&bw);
        self.state_from(u0, 0, 0).map_err(|_| degenerate())
    }

    /// `A⁻¹ B û − σ û`.
    pub fn apply_shifted(&self, u_hat: &[f64], sigma: f64) -> Vec<f64> {
        let mut u = self.a_factor.solve(&self.b.mul_vec(u_hat));
        for (ui, vi) in u.iter_mut().zip(u_hat) {
            *ui -= sigma * vi;
        }
        u
    }

    /// One shifted power step without kernel monitoring.
    pub fn power_step(&self, state: &PowerState, sigma: f64) -> Result<PowerState> {
        let u = self.apply_shifted(&state.u_hat, sigma);
        self.state_from(u, state.iteration + 1, state.restarts)
    }

    /// Approximates the `A`-orthogonal projection of `u` onto `ker B` by the iterated
    /// penalty method: `(A + ρB) z_ℓ = A u − B w_ℓ`, `w_{ℓ+1} = w_ℓ + ρ z_ℓ`, `w₀ = 0`,
    /// stopping once `‖div z_ℓ‖ ≤ τ`.
    pub fn project_kernel(&self, u: &[f64], tau: f64, max_iterations: usize) -> Result<KernelProjection> {
        let mut rhs = self.a.mul_vec(u);
        let mut divergence = f64::INFINITY;
        for it in 1..=max_iterations {
            let z = self.penalty_factor.solve(&rhs);
            let bz = self.b.mul_vec(&z);
            divergence = crate::linalg::dot(&z, &bz).max(0.0).sqrt();
            if !divergence.is_finite() {
                break;
            }
            if divergence <= tau {
                return Ok(KernelProjection { z, iterations: it, divergence });
            }
            crate::linalg::axpy(-self.rho, &bz, &mut rhs);
        }
        Err(Error::PenaltyNotConverged { iterations: max_iterations, achieved: divergence })
    }

    /// Applies the restart rule: subtracts the kernel component when
    /// `‖z‖_A ≥ ζ ‖u‖_A`.
    /// Returns whether a subtraction happened and the penalty iteration count.
    fn restart_if_needed(&self, u: &mut [f64], config: &InfSupConfig) -> Result<(bool, usize)> {
        let proj = self.project_kernel(u, config.tau, config.max_penalty_iterations)?;
        let subtract = self.energy_norm(&proj.z) >= config.zeta * self.energy_norm(u);
        if subtract {
            crate::linalg::axpy(-1.0, &proj.z, u);
        }
        Ok((subtract, proj.iterations))
    }

    /// Runs the monitored power iteration.
    pub fn estimate(&self, config: &InfSupConfig) -> Result<InfSupReport> {
        Ok(self.estimate_with_state(config)?.0)
    }

    /// As [`InfSupProblem::estimate`], also returning the final iterate.
    pub fn estimate_with_state(&self, config: &InfSupConfig) -> Result<(InfSupReport, PowerState)> {
        config.validate()?;
        let mut restarts = 0;
        let mut trace = Vec::new();
        let mut u = self.initialize(config.omega)?.u;
        let (restarted, penalty_iterations) = self.restart_if_needed(&mut u, config)?;
        restarts += restarted as usize;
        let mut state = self.state_from(u, 0, restarts)?;
        trace.push(TraceEntry { iteration: 0, lambda: state.lambda, restarted, penalty_iterations });
        let mut converged = false;
        for n in 1..=config.max_iterations {
            let mut u = self.apply_shifted(&state.u_hat, config.sigma);
            let (mut restarted, mut penalty_iterations) = (false, 0);
            if n % config.restart_check_interval == 0 {
                (restarted, penalty_iterations) = self.restart_if_needed(&mut u, config)?;
                restarts += restarted as usize;
            }
            let previous = state.lambda;
            state = self.state_from(u, n, restarts)?;
            trace.push(TraceEntry { iteration: n, lambda: state.lambda, restarted, penalty_iterations });
            if (state.lambda - previous).abs() <= config.eps {
                converged = true;
                break;
            }
        }
        let lambda1 = state.lambda;
        let report = InfSupReport {
            lambda1,
            iterations: state.iteration,
            restarts,
            converged,
            beta_lower: lambda1.max(0.0).sqrt(),
            beta_upper: 2.0 * lambda1.max(0.0).sqrt(),
            interior_dofs: self.space.num_interior_dofs(),
            trace,
        };
        Ok((report, state))
    }

    /// Dense reference: all eigenvalues of `B v = λ A v` on `A⁻¹ range(B)`, ascending.
    pub fn dense_spectrum(&self) -> Result<Vec<f64>> {
        let split = kernel_split(&self.b, &self.a, 1e-10)?;
        Ok(dense_generalized_eig(&self.b, &self.a, &split.complement)?.eigenvalues)
    }
}

/// Builds the problem described by `config` and runs the estimate.
pub fn estimate_infsup(config: &InfSupConfig) -> Result<InfSupReport> {
    config.validate()?;
    InfSupProblem::build(config.family, config.n, config.degree, config.rho)?.estimate(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, KernelSplit};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(family: MeshFamily, n: usize, k: usize) -> InfSupProblem {
        InfSupProblem::build(family, n, k, 1e4).unwrap()
    }

    fn split(p: &InfSupProblem) -> KernelSplit {
        kernel_split(p.b(), p.a(), 1e-10).unwrap()
    }

    fn column(m: &nalgebra::DMatrix<f64>, j: usize) -> Vec<f64> {
        m.column(j).iter().copied().collect()
    }

    #[test]
    fn initial_iterate_is_orthogonal_to_kernel() {
        let p = problem(MeshFamily::Malkus, 5, 1);
        let s = split(&p);
        let st = p.initialize(10.0).unwrap();
        assert!((p.energy_norm(&st.u_hat) - 1.0).abs() < 1e-12);
        let au = p.a().mul_vec(&st.u);
        let unorm = p.energy_norm(&st.u);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let coeffs = DVector::from_fn(s.kernel.ncols(), |_, _| rng.gen::<f64>() - 0.5);
            let v: Vec<f64> = (&s.kernel * coeffs).iter().copied().collect();
            assert!(dot(&au, &v).abs() <= 1e-10 * unorm * p.energy_norm(&v));
        }
    }

    #[test]
    fn zero_frequency_is_rejected() {
        let p = problem(MeshFamily::Malkus, 3, 1);
        assert!(matches!(p.initialize(0.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn eigenvector_is_a_fixed_point() {
        let p = problem(MeshFamily::Malkus, 2, 1);
        let s = split(&p);
        let eig = dense_generalized_eig(p.b(), p.a(), &s.complement).unwrap();
        let v = column(&eig.eigenvectors, 0);
        let st = p.state_from(v.clone(), 0, 0).unwrap();
        let next = p.power_step(&st, 0.6).unwrap();
        assert!((next.lambda - eig.eigenvalues[0]).abs() < 1e-10);
        let sign = dot(&next.u_hat, p.a().mul_vec(&st.u_hat).as_slice()).signum();
        for (a, b) in next.u_hat.iter().zip(&st.u_hat) {
            assert!((a - sign * b).abs() < 1e-8);
        }
    }

    #[test]
    fn two_steps_match_dense_operator() {
        let p = problem(MeshFamily::Malkus, 2, 1);
        let s = split(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let coeffs = DVector::from_fn(s.complement.ncols(), |_, _| rng.gen::<f64>() - 0.5);
        let start: Vec<f64> = (&s.complement * coeffs).iter().copied().collect();
        let st0 = p.state_from(start, 0, 0).unwrap();
        let st2 = p.power_step(&p.power_step(&st0, 0.6).unwrap(), 0.6).unwrap();

        let ad = p.a().to_dense();
        let bd = p.b().to_dense();
        let op: nalgebra::DMatrix<f64> =
            ad.clone().cholesky().unwrap().solve(&bd) - 0.6 * nalgebra::DMatrix::<f64>::identity(ad.nrows(), ad.nrows());
        let x = DVector::from_vec(st0.u_hat.clone());
        let y = &op * (&op * x);
        let ynorm = (y.transpose() * &ad * &y)[(0, 0)].sqrt();
        for (a, b) in st2.u_hat.iter().zip(y.iter()) {
            assert!((a - b / ynorm).abs() < 1e-10);
        }
    }

    #[test]
    fn rayleigh_quotients_are_bounded_by_one() {
        let p = problem(MeshFamily::TypeI, 3, 2);
        let mut cfg = InfSupConfig::new(MeshFamily::TypeI, 3, 2);
        cfg.max_iterations = 50;
        let report = p.estimate(&cfg).unwrap();
        assert!(report.trace.iter().all(|t| t.lambda >= 0.0 && t.lambda <= 1.0 + 1e-8));
    }

    #[test]
    fn projection_of_kernel_vector_is_identity() {
        let p = problem(MeshFamily::Malkus, 2, 2);
        let s = split(&p);
        let v = column(&s.kernel, 0);
        let proj = p.project_kernel(&v, 1e-14, 10_000).unwrap();
        let diff: Vec<f64> = proj.z.iter().zip(&v).map(|(a, b)| a - b).collect();
        assert!(p.energy_norm(&diff) <= 1e-10 * p.energy_norm(&v));
    }

    #[test]
    fn projection_of_complement_vector_vanishes() {
        let p = problem(MeshFamily::Malkus, 5, 1);
        let st = p.initialize(10.0).unwrap();
        let proj = p.project_kernel(&st.u, 1e-14, 10_000).unwrap();
        assert!(p.energy_norm(&proj.z) <= 1e-10 * p.energy_norm(&st.u));
    }

    #[test]
    fn projection_residual_is_orthogonal_to_kernel() {
        let p = problem(MeshFamily::Malkus, 2, 1);
        let s = split(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u: Vec<f64> = (0..p.a().nrows()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let proj = p.project_kernel(&u, 1e-14, 10_000).unwrap();
        let diff: Vec<f64> = proj.z.iter().zip(&u).map(|(a, b)| a - b).collect();
        let ad = p.a().mul_vec(&diff);
        for j in 0..s.kernel.ncols() {
            let v = column(&s.kernel, j);
            assert!(dot(&ad, &v).abs() <= 1e-8 * p.energy_norm(&u) * p.energy_norm(&v));
        }
    }

    #[test]
    fn penalty_cap_is_reported() {
        let p = problem(MeshFamily::Malkus, 3, 1);
        let st = p.initialize(10.0).unwrap();
        let err = p.project_kernel(&st.u, 0.0, 3).unwrap_err();
        assert!(matches!(err, Error::PenaltyNotConverged { iterations: 3, .. }));
    }

    #[test]
    fn agrees_with_dense_oracle_on_tiny_mesh() {
        let cfg = InfSupConfig::new(MeshFamily::Malkus, 2, 1).with_eps(1e-12);
        let p = problem(MeshFamily::Malkus, 2, 1);
        let report = p.estimate(&cfg).unwrap();
        let dense = p.dense_spectrum().unwrap();
        assert!(report.converged);
        assert!(((report.lambda1 - dense[0]) / dense[0]).abs() < 1e-6);
        assert!(report.lambda1 > 0.0);
        assert_eq!(report.beta_upper, 2.0 * report.beta_lower);
    }

    #[test]
    fn unshifted_iteration_finds_the_top_of_the_spectrum() {
        for (family, n, k) in [(MeshFamily::TypeI, 4, 2), (MeshFamily::Malkus, 5, 1)] {
            let report = estimate_infsup(&InfSupConfig::new(family, n, k).with_sigma(0.0)).unwrap();
            assert!((report.lambda1 - 1.0).abs() < 1e-6, "{family}: {}", report.lambda1);
        }
    }

    #[test]
    fn unshifted_iteration_matches_dense_maximum_on_coarse_mesh() {
        let p = problem(MeshFamily::TypeI, 2, 2);
        let top = *p.dense_spectrum().unwrap().last().unwrap();
        let report = p.estimate(&InfSupConfig::new(MeshFamily::TypeI, 2, 2).with_sigma(0.0).with_eps(1e-13)).unwrap();
        assert!(top < 0.99);
        assert!((report.lambda1 - top).abs() < 1e-8);
    }

    #[test]
    fn config_validation() {
        let base = InfSupConfig::new(MeshFamily::TypeI, 2, 2);
        assert!(base.validate().is_ok());
        assert!(base.clone().with_sigma(1.5).validate().is_err());
        let mut c = base.clone();
        c.tau = 0.0;
        assert!(c.validate().is_err());
        let mut c = base;
        c.restart_check_interval = 0;
        assert!(c.validate().is_err());
    }
}
