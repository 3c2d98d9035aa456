//! Equispaced Lagrange elements on the reference simplex.
//!
//! The basis is written in barycentric coordinates with the product formula
//! `φ_α(λ) = Π_i Π_{j<α_i} (kλ_i − j)/(j + 1)`, which is exactly the Lagrange
//! basis of the lattice `{α/k : |α| = k}`.

use super::quadrature::QuadratureRule;

/// Degree-`k` Lagrange element on the `dim`-simplex, tabulated at a quadrature rule.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    dim: usize,
    degree: usize,
    /// Multi-indices `α` (length `dim + 1`, summing to `degree`), one per local node.
    lattice: Vec<Vec<usize>>,
    quadrature: QuadratureRule,
    /// `values[q * n + a]`
    values: Vec<f64>,
    /// `bary_grads[(q * n + a) * (dim + 1) + i] = ∂φ_a/∂λ_i`
    bary_grads: Vec<f64>,
    /// `grad_moments[((a * n + b) * (dim + 1) + i) * (dim + 1) + j]`
    /// = Σ_q w_q ∂_iφ_a ∂_jφ_b / |ref|.
    grad_moments: Vec<f64>,
    /// Mean value of each basis function over the simplex.
    means: Vec<f64>,
}

impl ReferenceElement {
    pub fn new(dim: usize, degree: usize, quadrature_degree: usize) -> ReferenceElement {
        assert!(degree >= 1);
        let lattice = lattice_points(dim, degree);
        let quadrature = QuadratureRule::simplex(dim, quadrature_degree);
        let n = lattice.len();
        let nb = dim + 1;
        let nq = quadrature.len();
        let mut values = vec![0.0; nq * n];
        let mut bary_grads = vec![0.0; nq * n * nb];
        for q in 0..nq {
            let lambda = quadrature.point(q);
            for (a, alpha) in lattice.iter().enumerate() {
                values[q * n + a] = eval_basis(degree, alpha, lambda);
                eval_basis_bary_grad(degree, alpha, lambda, &mut bary_grads[(q * n + a) * nb..(q * n + a + 1) * nb]);
            }
        }
        let vol = quadrature.reference_volume();
        let mut grad_moments = vec![0.0; n * n * nb * nb];
        let mut means = vec![0.0; n];
        for q in 0..nq {
            let w = quadrature.weights()[q] / vol;
            for a in 0..n {
                means[a] += w * values[q * n + a];
                let ga = &bary_grads[(q * n + a) * nb..(q * n + a + 1) * nb];
                for b in 0..n {
                    let gb = &bary_grads[(q * n + b) * nb..(q * n + b + 1) * nb];
                    let block = &mut grad_moments[(a * n + b) * nb * nb..(a * n + b + 1) * nb * nb];
                    for i in 0..nb {
                        let wi = w * ga[i];
                        for j in 0..nb {
                            block[i * nb + j] += wi * gb[j];
                        }
                    }
                }
            }
        }
        ReferenceElement { dim, degree, lattice, quadrature, values, bary_grads, grad_moments, means }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_nodes(&self) -> usize {
        self.lattice.len()
    }

    pub fn lattice(&self) -> &[Vec<usize>] {
        &self.lattice
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quadrature
    }

    pub fn value(&self, q: usize, a: usize) -> f64 {
        self.values[q * self.num_nodes() + a]
    }

    pub fn bary_grad(&self, q: usize, a: usize) -> &[f64] {
        let nb = self.dim + 1;
        let i = q * self.num_nodes() + a;
        &self.bary_grads[i * nb..(i + 1) * nb]
    }

    /// `(dim+1)²` block of barycentric gradient moments of the pair `(a, b)`.
    pub fn grad_moment(&self, a: usize, b: usize) -> &[f64] {
        let nb = self.dim + 1;
        let i = a * self.num_nodes() + b;
        &self.grad_moments[i * nb * nb..(i + 1) * nb * nb]
    }

    pub fn mean(&self, a: usize) -> f64 {
        self.means[a]
    }

    /// Evaluates every basis function at the barycentric point `lambda`.
    pub fn eval_all(&self, lambda: &[f64], out: &mut [f64]) {
        for (a, alpha) in self.lattice.iter().enumerate() {
            out[a] = eval_basis(self.degree, alpha, lambda);
        }
    }

    /// Barycentric gradients of every basis function at `lambda`, `(dim+1)` per node.
    pub fn eval_all_bary_grads(&self, lambda: &[f64], out: &mut [f64]) {
        let nb = self.dim + 1;
        for (a, alpha) in self.lattice.iter().enumerate() {
            eval_basis_bary_grad(self.degree, alpha, lambda, &mut out[a * nb..(a + 1) * nb]);
        }
    }
}

/// All multi-indices of length `dim + 1` summing to `degree`, vertices first.
pub fn lattice_points(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0; dim + 1];
    fill_lattice(&mut current, 0, degree, &mut out);
    // Sort by the number of nonzero entries (vertex, edge, face, interior), then lexicographically
    // descending so vertex i precedes vertex i + 1.
    out.sort_by(|a, b| {
        let sa = a.iter().filter(|&&x| x > 0).count();
        let sb = b.iter().filter(|&&x| x > 0).count();
        sa.cmp(&sb).then_with(|| b.cmp(a))
    });
    out
}

fn fill_lattice(current: &mut Vec<usize>, pos: usize, remaining: usize, out: &mut Vec<Vec<usize>>) {
    if pos == current.len() - 1 {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for v in 0..=remaining {
        current[pos] = v;
        fill_lattice(current, pos + 1, remaining - v, out);
    }
}

/// `Π_{j<m} (k t − j)/(j + 1)` and its derivative in `t`.
fn factor_with_derivative(k: usize, m: usize, t: f64) -> (f64, f64) {
    let mut value = 1.0;
    let mut deriv = 0.0;
    for j in 0..m {
        let f = (k as f64 * t - j as f64) / (j as f64 + 1.0);
        let df = k as f64 / (j as f64 + 1.0);
        deriv = deriv * f + value * df;
        value *= f;
    }
    (value, deriv)
}

pub fn eval_basis(k: usize, alpha: &[usize], lambda: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(lambda)
        .map(|(&m, &t)| factor_with_derivative(k, m, t).0)
        .product()
}

pub fn eval_basis_bary_grad(k: usize, alpha: &[usize], lambda: &[f64], out: &mut [f64]) {
    let nb = alpha.len();
    let mut vals = [0.0; 4];
    let mut ders = [0.0; 4];
    for i in 0..nb {
        let (v, d) = factor_with_derivative(k, alpha[i], lambda[i]);
        vals[i] = v;
        ders[i] = d;
    }
    for i in 0..nb {
        let mut g = ders[i];
        for j in 0..nb {
            if j != i {
                g *= vals[j];
            }
        }
        out[i] = g;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_sizes() {
        for k in 1..=7 {
            assert_eq!(lattice_points(2, k).len(), (k + 1) * (k + 2) / 2);
            assert_eq!(lattice_points(3, k).len(), (k + 1) * (k + 2) * (k + 3) / 6);
        }
        let l = lattice_points(2, 2);
        assert_eq!(&l[..3], &[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]]);
    }

    #[test]
    fn kronecker_property() {
        for dim in [2, 3] {
            for k in 1..=6 {
                let lattice = lattice_points(dim, k);
                for (a, alpha) in lattice.iter().enumerate() {
                    for (b, beta) in lattice.iter().enumerate() {
                        let lambda: Vec<f64> = beta.iter().map(|&x| x as f64 / k as f64).collect();
                        let v = eval_basis(k, alpha, &lambda);
                        let expected = if a == b { 1.0 } else { 0.0 };
                        assert!((v - expected).abs() < 1e-12, "dim={dim} k={k} a={a} b={b} v={v}");
                    }
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_and_gradient_sum() {
        let el = ReferenceElement::new(3, 4, 8);
        let nb = 4;
        for q in 0..el.quadrature().len() {
            let s: f64 = (0..el.num_nodes()).map(|a| el.value(q, a)).sum();
            assert!((s - 1.0).abs() < 1e-12);
            // Σ_a φ_a ≡ 1 ⇒ the physical gradient vanishes; in barycentric terms every
            // component of Σ_a ∂φ_a/∂λ_i is the same number.
            let mut sums = [0.0; 4];
            for a in 0..el.num_nodes() {
                for i in 0..nb {
                    sums[i] += el.bary_grad(q, a)[i];
                }
            }
            for i in 1..nb {
                assert!((sums[i] - sums[0]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bary_gradient_matches_finite_differences() {
        let k = 5;
        let alpha = [2, 1, 1, 1];
        let lambda = [0.13, 0.31, 0.27, 0.29];
        let mut g = [0.0; 4];
        eval_basis_bary_grad(k, &alpha, &lambda, &mut g);
        for i in 0..4 {
            let h = 1e-6;
            let mut lp = lambda;
            let mut lm = lambda;
            lp[i] += h;
            lm[i] -= h;
            let fd = (eval_basis(k, &alpha, &lp) - eval_basis(k, &alpha, &lm)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7, "i={i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn p1_means() {
        let el = ReferenceElement::new(2, 1, 2);
        for a in 0..3 {
            assert!((el.mean(a) - 1.0 / 3.0).abs() < 1e-14);
        }
    }
}
