//! Dirichlet-to-Neumann, Robin and Wentzell operators for second-order
//! elliptic operators on triangulated Riemannian surfaces with boundary.
//!
//! The crate discretizes a divergence-form operator with P1 finite elements,
//! builds the Dirichlet-to-Neumann matrix and the Wentzell generator, and
//! provides spectral, resolvent and semigroup diagnostics for both.

pub mod acceptance;
pub mod cli;
pub mod coefficients;
pub mod config;
pub mod dense;
pub mod dtn;
pub mod elliptic;
pub mod error;
pub mod fem;
pub mod field;
pub mod mesh;
pub mod metric;
pub mod plot;
pub mod rng;
pub mod sparse;
pub mod spectral;
pub mod suite;
pub mod tensor;
pub mod wentzell;

pub use coefficients::{CoefficientSet, Cutoff};
pub use error::{Error, Result};
pub use fem::{assemble, Assembly};
pub use field::{parse_field, FieldExpr};
pub use mesh::{builtin_mesh, extract_boundary, BoundaryMesh, BuiltinKind, Mesh};
pub use num_complex::Complex64;

/// Crate version reported by the command-line tool.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `--version` text: crate version and output format version.
pub const VERSION_STRING: &str = concat!(env!("CARGO_PKG_VERSION"), " (output format 1)");
