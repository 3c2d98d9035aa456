//! Two-grid preconditioned CG for `(∇u, ∇v) + γ (div u, div v) = (f, v)` with a
//! damped additive Schwarz smoother over vertex-star patches.

use std::sync::Arc;

use nalgebra::{Cholesky, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{assemble_constant_load, assemble_divdiv, assemble_grad, prolongation, FunctionSpace};
use crate::linalg::{factorize_spd, pcg, CholeskyFactor, CsrMatrix};
use crate::mesh::{nested_pair, MeshFamily};

struct Patch {
    dofs: Vec<usize>,
    factor: Cholesky<f64, Dyn>,
}

/// Local subspaces with factorized restrictions of one global operator.
pub struct PatchDecomposition {
    size: usize,
    damping: f64,
    patches: Vec<Patch>,
}

/// Interior dofs whose basis function is supported in the star of each vertex,
/// i.e. whose Lagrange node has that vertex in its support sub-simplex.
pub fn vertex_patch_dofs(space: &FunctionSpace) -> Vec<Vec<usize>> {
    let d = space.components();
    let mut sets = vec![Vec::new(); space.mesh().num_vertices()];
    for (i, &node) in space.interior_nodes().iter().enumerate() {
        for &v in space.node_support(node) {
            sets[v].extend((0..d).map(|c| i * d + c));
        }
    }
    sets
}

impl PatchDecomposition {
    /// Vertex-star decomposition damped by `1/(d+1)`.
    pub fn build(space: &FunctionSpace, operator: &CsrMatrix) -> Result<PatchDecomposition> {
        if operator.nrows() != space.num_interior_dofs() {
            return Err(Error::DimensionMismatch { expected: space.num_interior_dofs(), got: operator.nrows() });
        }
        let damping = 1.0 / (space.components() + 1) as f64;
        PatchDecomposition::from_dof_sets(operator, vertex_patch_dofs(space), damping)
    }

    /// Arbitrary decomposition; empty sets are skipped.
    pub fn from_dof_sets(operator: &CsrMatrix, sets: Vec<Vec<usize>>, damping: f64) -> Result<PatchDecomposition> {
        let size = operator.nrows();
        let mut local_of = vec![usize::MAX; size];
        let mut patches = Vec::with_capacity(sets.len());
        for dofs in sets.into_iter().filter(|s| !s.is_empty()) {
            if let Some(&bad) = dofs.iter().find(|&&i| i >= size) {
                return Err(Error::IndexOutOfRange { index: bad, len: size });
            }
            let block = operator.dense_block(&dofs, &mut local_of);
            let factor = Cholesky::new(block).ok_or(Error::NotPositiveDefinite { column: dofs[0], pivot: f64::NAN })?;
            patches.push(Patch { dofs, factor });
        }
        Ok(PatchDecomposition { size, damping, patches })
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn patch_dofs(&self, j: usize) -> &[usize] {
        &self.patches[j].dofs
    }

    /// `out = damping · Σ_j R_jᵀ K_j⁻¹ R_j r`.
    pub fn apply(&self, r: &[f64], out: &mut [f64]) {
        assert_eq!(r.len(), self.size);
        out.iter_mut().for_each(|v| *v = 0.0);
        for patch in &self.patches {
            let mut local = DVector::from_iterator(patch.dofs.len(), patch.dofs.iter().map(|&i| r[i]));
            patch.factor.solve_mut(&mut local);
            for (&i, v) in patch.dofs.iter().zip(local.iter()) {
                out[i] += self.damping * v;
            }
        }
    }
}

/// Symmetric two-grid cycle: Schwarz pre-smoothing, exact coarse correction,
/// Schwarz post-smoothing, applied to a residual from a zero initial guess.
pub struct TwoGrid<'a> {
    operator: &'a CsrMatrix,
    smoother: &'a PatchDecomposition,
    coarse: &'a CholeskyFactor,
    prolongation: &'a CsrMatrix,
}

impl<'a> TwoGrid<'a> {
    pub fn new(
        operator: &'a CsrMatrix,
        smoother: &'a PatchDecomposition,
        coarse: &'a CholeskyFactor,
        prolongation: &'a CsrMatrix,
    ) -> Result<TwoGrid<'a>> {
        let n = operator.nrows();
        if prolongation.nrows() != n || smoother.size != n {
            return Err(Error::DimensionMismatch { expected: n, got: prolongation.nrows() });
        }
        if coarse.dim() != prolongation.ncols() {
            return Err(Error::DimensionMismatch { expected: prolongation.ncols(), got: coarse.dim() });
        }
        Ok(TwoGrid { operator, smoother, coarse, prolongation })
    }

    pub fn apply(&self, rhs: &[f64], x: &mut [f64]) {
        let n = rhs.len();
        let mut correction = vec![0.0; n];
        let mut residual = vec![0.0; n];
        self.smoother.apply(rhs, x);

        self.residual(rhs, x, &mut residual);
        let coarse_rhs = self.prolongation.transpose_mul_vec(&residual);
        let coarse_sol = self.coarse.solve(&coarse_rhs);
        self.prolongation.mul_vec_into(&coarse_sol, &mut correction);
        x.iter_mut().zip(&correction).for_each(|(xi, ci)| *xi += ci);

        self.residual(rhs, x, &mut residual);
        self.smoother.apply(&residual, &mut correction);
        x.iter_mut().zip(&correction).for_each(|(xi, ci)| *xi += ci);
    }

    fn residual(&self, rhs: &[f64], x: &[f64], out: &mut [f64]) {
        self.operator.mul_vec_into(x, out);
        out.iter_mut().zip(rhs).for_each(|(o, b)| *o = b - *o);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticityConfig {
    pub family: MeshFamily,
    pub coarse_n: usize,
    pub refinements: u32,
    pub degree: usize,
    pub gamma: f64,
    pub rtol: f64,
    pub max_iterations: usize,
}

impl ElasticityConfig {
    pub fn new(family: MeshFamily, coarse_n: usize, refinements: u32, degree: usize, gamma: f64) -> ElasticityConfig {
        ElasticityConfig { family, coarse_n, refinements, degree, gamma, rtol: 1e-8, max_iterations: 500 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        if !(self.rtol > 0.0) {
            return Err(Error::InvalidArgument(format!("rtol must be positive, got {}", self.rtol)));
        }
        if self.refinements == 0 {
            return Err(Error::InvalidArgument("at least one refinement is needed for two grids".into()));
        }
        if self.coarse_n == 0 || self.degree == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidArgument("coarse_n, degree and max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub gamma: f64,
    pub cg_iterations: usize,
    pub final_relative_residual: f64,
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub fine_dofs: usize,
    pub coarse_dofs: usize,
}

/// Assembled forms on a nested pair of spaces, reusable across values of `γ`.
pub struct ElasticityProblem {
    fine: FunctionSpace,
    coarse: FunctionSpace,
    a_fine: CsrMatrix,
    b_fine: CsrMatrix,
    a_coarse: CsrMatrix,
    b_coarse: CsrMatrix,
    prolongation: CsrMatrix,
    load: Vec<f64>,
}

impl ElasticityProblem {
    pub fn build(family: MeshFamily, coarse_n: usize, refinements: u32, degree: usize) -> Result<ElasticityProblem> {
        let (cm, fm) = nested_pair(family, coarse_n, refinements)?;
        let coarse = FunctionSpace::new(Arc::new(cm), degree)?;
        let fine = FunctionSpace::new(Arc::new(fm), degree)?;
        let prolongation = prolongation(&coarse, &fine)?;
        Ok(ElasticityProblem {
            a_fine: assemble_grad(&fine),
            b_fine: assemble_divdiv(&fine),
            a_coarse: assemble_grad(&coarse),
            b_coarse: assemble_divdiv(&coarse),
            load: assemble_constant_load(&fine, 1.0),
            fine,
            coarse,
            prolongation,
        })
    }

    pub fn fine_space(&self) -> &FunctionSpace {
        &self.fine
    }

    pub fn coarse_space(&self) -> &FunctionSpace {
        &self.coarse
    }

    pub fn prolongation(&self) -> &CsrMatrix {
        &self.prolongation
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    /// `A + γB` on the fine level.
    pub fn fine_operator(&self, gamma: f64) -> CsrMatrix {
        self.a_fine.add_scaled(&self.b_fine, gamma)
    }

    /// `A + γB` re-assembled on the coarse level.
    pub fn coarse_operator(&self, gamma: f64) -> CsrMatrix {
        self.a_coarse.add_scaled(&self.b_coarse, gamma)
    }

    /// CG with the two-grid preconditioner for the constant load `f = (1, …, 1)`.
    pub fn solve(&self, gamma: f64, rtol: f64, max_iterations: usize) -> Result<SolveReport> {
        let k = self.fine_operator(gamma);
        let smoother = PatchDecomposition::build(&self.fine, &k)?;
        let coarse_factor = factorize_spd(&self.coarse_operator(gamma))?;
        let cycle = TwoGrid::new(&k, &smoother, &coarse_factor, &self.prolongation)?;
        let out = pcg(|x, y| k.mul_vec_into(x, y), |r, z| cycle.apply(r, z), &self.load, rtol, max_iterations)?;
        Ok(SolveReport {
            gamma,
            cg_iterations: out.iterations,
            final_relative_residual: *out.residual_history.last().unwrap_or(&0.0),
            residual_history: out.residual_history,
            converged: out.converged,
            fine_dofs: self.fine.num_interior_dofs(),
            coarse_dofs: self.coarse.num_interior_dofs(),
        })
    }
}

pub fn solve_elasticity(config: &ElasticityConfig) -> Result<SolveReport> {
    config.validate()?;
    ElasticityProblem::build(config.family, config.coarse_n, config.refinements, config.degree)?.solve(
        config.gamma,
        config.rtol,
        config.max_iterations,
    )
}
