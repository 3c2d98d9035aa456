use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;

use svstab::fem::{assemble_divdiv_full, assemble_grad, eval_basis, interpolate, lattice_points, FunctionSpace, QuadratureRule};
use svstab::linalg::{factorize_spd, pcg, CsrMatrix};
use svstab::mesh::{Mesh, MeshFamily};

fn family() -> impl Strategy<Value = MeshFamily> {
    prop_oneof![Just(MeshFamily::TypeI), Just(MeshFamily::Malkus), Just(MeshFamily::Freudenthal)]
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_cell_has_positive_volume(family in family(), n in 1usize..5) {
        let n = if family == MeshFamily::Freudenthal { n.min(3) } else { n };
        let mesh = Mesh::build(family, n).unwrap();
        let total: f64 = (0..mesh.num_cells()).map(|c| mesh.signed_volume(c)).sum();
        prop_assert!((0..mesh.num_cells()).all(|c| mesh.signed_volume(c) > 0.0));
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn node_count_matches_entity_formula(family in family(), n in 1usize..4, k in 1usize..5) {
        let mesh = Arc::new(Mesh::build(family, n).unwrap());
        let d = mesh.dim();
        let mut expected = mesh.num_vertices();
        for size in 2..=d + 1 {
            expected += mesh.entities(size).len() * binomial(k - 1, size - 1);
        }
        let space = FunctionSpace::new(mesh, k).unwrap();
        prop_assert_eq!(space.num_nodes(), expected);
    }

    #[test]
    fn basis_is_a_partition_of_unity(dim in 2usize..4, k in 1usize..7, a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        let raw = if dim == 2 { vec![a, b, 1.0] } else { vec![a, b, c, 1.0] };
        let s: f64 = raw.iter().sum();
        let lambda: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let total: f64 = lattice_points(dim, k).iter().map(|alpha| eval_basis(k, alpha, &lambda)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_integrates_products_of_barycentrics(dim in 2usize..4, p in 0usize..5, q in 0usize..5) {
        let rule = QuadratureRule::simplex(dim, p + q);
        let approx: f64 = (0..rule.len()).map(|i| rule.weights()[i] * rule.point(i)[0].powi(p as i32) * rule.point(i)[dim].powi(q as i32)).sum();
        let fact = |n: usize| (1..=n).map(|v| v as f64).product::<f64>();
        let exact = fact(p) * fact(q) / fact(p + q + dim);
        prop_assert!((approx - exact).abs() <= 1e-13 * exact.max(1e-3));
    }

    #[test]
    fn csr_products_match_dense(entries in prop::collection::vec((0usize..12, 0usize..9, -1.0f64..1.0), 0..60), x in prop::collection::vec(-1.0f64..1.0, 9)) {
        let m = CsrMatrix::from_triplets(12, 9, &entries).unwrap();
        let dense = m.to_dense();
        let y = m.mul_vec(&x);
        let yd = &dense * nalgebra::DVector::from_vec(x.clone());
        for i in 0..12 {
            prop_assert!((y[i] - yd[i]).abs() < 1e-12);
        }
        let t = m.transpose().to_dense();
        prop_assert!((t - dense.transpose()).amax() < 1e-15);
    }

    #[test]
    fn cholesky_solves_shifted_laplacians(n in 2usize..6, shift in 0.0f64..10.0, seed in 0u64..1000) {
        let space = FunctionSpace::new(Arc::new(Mesh::build(MeshFamily::TypeI, n).unwrap()), 2).unwrap();
        let a = assemble_grad(&space);
        let m = a.add_scaled(&CsrMatrix::identity(a.nrows()), shift);
        let b: Vec<f64> = (0..m.nrows()).map(|i| (((i as u64 + seed) * 2654435761) % 1000) as f64 / 1000.0).collect();
        let x = factorize_spd(&m).unwrap().solve(&b);
        let r = m.mul_vec(&x);
        for i in 0..b.len() {
            prop_assert!((r[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn divergence_free_fields_are_in_the_kernel(family in family(), n in 1usize..3, k in 2usize..4) {
        // solenoidal polynomial fields of degree at most k are interpolated exactly
        let space = FunctionSpace::new(Arc::new(Mesh::build(family, n).unwrap()), k).unwrap();
        let b = assemble_divdiv_full(&space);
        let w = interpolate(&space, |x| {
            if x.len() == 2 {
                vec![x[0] * x[1].powi(k as i32 - 1), -x[1].powi(k as i32) / k as f64]
            } else {
                vec![x[1] * x[2], x[0] * x[2] + x[0] * x[0], x[0] * x[1]]
            }
        });
        let divergence = b.quad_form(&w);
        let w_div: Vec<f64> = interpolate(&space, |x| x.to_vec());
        let nonzero = b.quad_form(&w_div);
        prop_assert!(divergence.abs() < 1e-10 * nonzero);
    }
}

#[test]
fn pcg_energy_error_decreases_monotonically() {
    let space = FunctionSpace::new(Arc::new(Mesh::build(MeshFamily::Malkus, 3).unwrap()), 2).unwrap();
    let a = assemble_grad(&space);
    let b: Vec<f64> = (0..a.nrows()).map(|i| ((i % 5) as f64) - 2.0).collect();
    let exact = factorize_spd(&a).unwrap().solve(&b);
    let d = a.diagonal();
    let mut previous = f64::INFINITY;
    for it in 1..=a.nrows() {
        let out = pcg(
            |x, y| a.mul_vec_into(x, y),
            |r, z| z.iter_mut().zip(r).zip(&d).for_each(|((z, r), d)| *z = r / d),
            &b,
            1e-14,
            it,
        )
        .unwrap();
        let e: Vec<f64> = out.solution.iter().zip(&exact).map(|(x, y)| x - y).collect();
        let energy = a.quad_form(&e).sqrt();
        assert!(energy <= previous * (1.0 + 1e-10));
        previous = energy;
        if out.converged {
            break;
        }
    }
    assert_relative_eq!(previous, 0.0, epsilon = 1e-6);
}
