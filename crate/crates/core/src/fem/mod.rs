//! Continuous vector Lagrange spaces and the forms used throughout the crate.

mod assembly;
mod element;
mod quadrature;
mod space;

pub use assembly::{
    assemble, assemble_constant_load, assemble_constant_load_full, assemble_divdiv, assemble_divdiv_full,
    assemble_grad, assemble_grad_full, default_quadrature_degree, divergence_norm_sq, interpolate, prolongation,
    BilinearForm, DofSet,
};
pub use element::{eval_basis, lattice_points, ReferenceElement};
pub use quadrature::{gauss_legendre_unit, QuadratureRule};
pub use space::{FunctionSpace, NOT_INTERIOR};
