use super::sparse::{axpy, dot, norm2};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PcgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `‖b − A x_i‖₂ / ‖b‖₂` for `i = 0, 1, …`
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

/// Preconditioned conjugate gradients from a zero initial guess.
///
/// Stops once the unpreconditioned residual satisfies `‖b − A x‖₂ ≤ rtol·‖b‖₂`
/// or after `max_iterations` steps.
pub fn pcg(
    mut apply_op: impl FnMut(&[f64], &mut [f64]),
    mut apply_prec: impl FnMut(&[f64], &mut [f64]),
    rhs: &[f64],
    rtol: f64,
    max_iterations: usize,
) -> Result<PcgOutcome> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let bnorm = norm2(rhs);
    if bnorm == 0.0 {
        return Ok(PcgOutcome { solution: x, iterations: 0, residual_history: vec![0.0], converged: true });
    }
    let mut r = rhs.to_vec();
    let mut z = vec![0.0; n];
    apply_prec(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut history = vec![1.0];
    for it in 1..=max_iterations {
        apply_op(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() || pap <= 0.0 {
            return Err(Error::Breakdown(format!("pᵀAp = {pap:e} at iteration {it}")));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rel = norm2(&r) / bnorm;
        if !rel.is_finite() {
            return Err(Error::Breakdown(format!("non-finite residual at iteration {it}")));
        }
        history.push(rel);
        if rel <= rtol {
            return Ok(PcgOutcome { solution: x, iterations: it, residual_history: history, converged: true });
        }
        apply_prec(&r, &mut z);
        let rz_new = dot(&r, &z);
        if !rz_new.is_finite() || rz_new <= 0.0 {
            return Err(Error::Breakdown(format!("preconditioner is not positive definite (rᵀz = {rz_new:e})")));
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Ok(PcgOutcome { solution: x, iterations: max_iterations, residual_history: history, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrMatrix;

    #[test]
    fn identity_converges_in_one_step() {
        let b = vec![1.0, -2.0, 3.0];
        let out = pcg(|x, y| y.copy_from_slice(x), |x, y| y.copy_from_slice(x), &b, 1e-12, 10).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(out.converged);
        assert_eq!(out.solution, b);
    }

    #[test]
    fn exact_diagonal_preconditioner() {
        let d = [1.0, 10.0, 100.0, 1000.0];
        let m = CsrMatrix::from_diagonal(&d);
        let b = vec![1.0; 4];
        let out = pcg(
            |x, y| m.mul_vec_into(x, y),
            |x, y| {
                for i in 0..4 {
                    y[i] = x[i] / d[i];
                }
            },
            &b,
            1e-12,
            10,
        )
        .unwrap();
        assert_eq!(out.iterations, 1);
        for i in 0..4 {
            assert!((out.solution[i] - 1.0 / d[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_rhs() {
        let out = pcg(|x, y| y.copy_from_slice(x), |x, y| y.copy_from_slice(x), &[0.0; 3], 1e-8, 5).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.solution.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn indefinite_operator_is_reported() {
        let m = CsrMatrix::from_diagonal(&[1.0, -1.0]);
        let r = pcg(|x, y| m.mul_vec_into(x, y), |x, y| y.copy_from_slice(x), &[1.0, 1.0], 1e-8, 5);
        assert!(matches!(r, Err(Error::Breakdown(_))));
    }
}
