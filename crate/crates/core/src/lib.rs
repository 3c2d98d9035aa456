pub mod error;
pub mod fem;
pub mod infsup;
pub mod linalg;
pub mod mesh;
pub mod multigrid;
pub mod report;

pub use error::{Error, Result};
