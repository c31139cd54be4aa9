//! Exact p-local model of the endomorphism dga of the compact generator of Franke's model
//! for the K(1)-local category at an odd prime.
//!
//! Everything is computed modulo p^M on Theta-basis sequences truncated at length N, with
//! rational components in Q/p^M Z_(p).

pub mod arith;
pub mod complex;
pub mod error;
pub mod homology;
pub mod oracle;
pub mod products;
pub mod theta;

pub use arith::{adams_unit, Context, ContextBuilder, Modulus, PadicFraction, PadicInt, ScalarMode, Valuation};
pub use complex::{differential, is_cycle, verify_dd, window, Body, Cochain, CochainRecord, ComplexWindow, Shape, VerificationReport};
pub use error::{Error, Result};
pub use homology::{
    boundary_witness, certify_group, class_of, class_order, homology_group, BoundaryCheck, Certification,
    ClassInvariant, ClassOrder, GroupDescriptor, HomologyClass, Obstruction, WitnessCheck,
};
pub use oracle::{dense_matrix, solve_boundary, DenseMap, OracleAnswer, Solver};
pub use products::{cohomology_product, massey, massey_from_witnesses, MasseyResult, RepresentativeMode};
pub use theta::ThetaSeq;

/// Crate version, embedded in certificates.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
