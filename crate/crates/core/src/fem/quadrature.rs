//! Collapsed-coordinate Gauss rules on the reference simplex.

/// A quadrature rule on the reference simplex with vertices `0, e_1, …, e_d`.
///
/// Points are stored in barycentric coordinates (`d + 1` entries per point);
/// weights sum to the reference volume `1/d!`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    degree: usize,
}

impl QuadratureRule {
    /// Conical product rule exact for polynomials of total degree `degree`.
    pub fn simplex(dim: usize, degree: usize) -> QuadratureRule {
        assert!(dim == 2 || dim == 3, "only triangles and tetrahedra are supported");
        let npts = (degree + dim).div_ceil(2);
        let (x, w) = gauss_legendre_unit(npts.max(1));
        let mut points = Vec::new();
        let mut weights = Vec::new();
        if dim == 2 {
            for (&u, &wu) in x.iter().zip(&w) {
                for (&v, &wv) in x.iter().zip(&w) {
                    let px = u;
                    let py = v * (1.0 - u);
                    points.extend([1.0 - px - py, px, py]);
                    weights.push(wu * wv * (1.0 - u));
                }
            }
        } else {
            for (&u, &wu) in x.iter().zip(&w) {
                for (&v, &wv) in x.iter().zip(&w) {
                    for (&s, &ws) in x.iter().zip(&w) {
                        let px = u;
                        let py = v * (1.0 - u);
                        let pz = s * (1.0 - u) * (1.0 - v);
                        points.extend([1.0 - px - py - pz, px, py, pz]);
                        weights.push(wu * wv * ws * (1.0 - u) * (1.0 - u) * (1.0 - v));
                    }
                }
            }
        }
        QuadratureRule { dim, points, weights, degree }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn exactness_degree(&self) -> usize {
        self.degree
    }

    /// Barycentric coordinates of point `q`.
    pub fn point(&self, q: usize) -> &[f64] {
        &self.points[q * (self.dim + 1)..(q + 1) * (self.dim + 1)]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn reference_volume(&self) -> f64 {
        if self.dim == 2 {
            0.5
        } else {
            1.0 / 6.0
        }
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    /// ∫_ref x^a y^b z^c = a! b! c! / (a + b + c + d)!
    fn exact_monomial(exps: &[usize]) -> f64 {
        let num: f64 = exps.iter().map(|&e| factorial(e)).product();
        num / factorial(exps.iter().sum::<usize>() + exps.len())
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..10 {
            let (x, w) = gauss_legendre_unit(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for p in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                assert!((q - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn simplex_rules_are_exact() {
        for dim in [2, 3] {
            for degree in 0..=16 {
                let rule = QuadratureRule::simplex(dim, degree);
                let total: f64 = rule.weights().iter().sum();
                assert!((total - rule.reference_volume()).abs() < 1e-14);
                for a in 0..=degree {
                    for b in 0..=degree - a {
                        let cs: Vec<usize> = if dim == 2 { vec![0] } else { (0..=degree - a - b).collect() };
                        for &c in &cs {
                            let exps: Vec<usize> = if dim == 2 { vec![a, b] } else { vec![a, b, c] };
                            let q: f64 = (0..rule.len())
                                .map(|i| {
                                    let p = rule.point(i);
                                    rule.weights()[i]
                                        * exps.iter().enumerate().map(|(k, &e)| p[k + 1].powi(e as i32)).product::<f64>()
                                })
                                .sum();
                            let exact = exact_monomial(&exps);
                            assert!(((q - exact) / exact).abs() < 1e-13, "dim={dim} deg={degree} {exps:?}");
                        }
                    }
                }
            }
        }
    }
}
