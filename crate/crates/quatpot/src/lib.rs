//! Quaternionic linear algebra, twisted exterior forms, and the second-order
//! differential calculus of plurisubharmonic functions on flat H^n.
//!
//! The library is organized bottom-up:
//!
//! - [`quat`]: quaternions, the complex splitting `q = z1 + z2 j`, and the
//!   quaternionic structure map J on C^{2n};
//! - [`qlinalg`]: quaternionic matrices, the complex embedding, Moore and
//!   Dieudonné determinants, mixed determinants;
//! - [`exterior`]: twisted exterior forms on C^{2n} with the real structure
//!   induced by J, and the correspondence between Hermitian matrices and
//!   real (1,1)-type forms;
//! - [`cones`]: weakly and strongly positive cones inside the real forms,
//!   with sampling-based membership checks and certificates;
//! - [`calculus`]: the first-order operators d and d_J, the second-order
//!   operator they generate, and its matrix form, the quaternionic Hessian;
//! - [`pluripotential`]: plurisubharmonicity tests, Monge-Ampère densities,
//!   pairings against test functions, convergence and L1-bound experiments;
//! - [`quadrature`]: deterministic tensor-product and quasi-Monte-Carlo
//!   integration used by the experiments;
//! - [`fields`]: a tiny text language for describing the scalar fields the
//!   command-line tools operate on;
//! - [`oracle`]: slow, independent reference implementations used by the
//!   test suite to cross-check the fast paths. Not part of the public
//!   contract; kept compiled so the checks cannot rot.
//!
//! Everything is deterministic: experiments take explicit seeds and all
//! parallel reductions are order-fixed, so repeated runs produce identical
//! bytes.

pub mod error;
pub mod scalar;
pub mod quat;
pub mod qlinalg;
pub mod exterior;
pub mod calculus;
pub mod cones;
pub mod fields;
pub mod oracle;
pub mod pluripotential;
pub mod quadrature;

pub use error::{Error, Result};

/// Library version, recorded in every CLI result envelope.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
