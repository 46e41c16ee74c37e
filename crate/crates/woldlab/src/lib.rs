//! woldlab: a numerical laboratory for Wold-type decompositions of
//! left-inverse commuting operator tuples and for Dirichlet-type model
//! spaces `D_E(mu1, mu2)` on the bidisc.
//!
//! Everything is finite-dimensional: operators act on inner-product
//! spaces carrying an explicit Gram matrix, subspaces are orthonormal
//! column frames, and every structural identity is turned into a
//! residual that can be checked against a tolerance policy.

pub mod dirichlet;
pub mod error;
pub mod gallery;
pub mod measure;
pub mod operator;
pub mod oracle;
pub mod report;
pub mod space;
pub mod subspace;
pub mod tol;
pub mod wold;

pub use error::WoldlabError;
pub use operator::Operator;
pub use space::Space;
pub use subspace::Subspace;
pub use tol::TolerancePolicy;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
