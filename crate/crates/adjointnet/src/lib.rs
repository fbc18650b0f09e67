pub mod darcy;
pub mod error;
pub mod mesh;
pub mod mlp;
pub mod tridiag;
