//! An exact engine for relative algebraic cobordism over finitely presented
//! geometric sites.
//!
//! A *site* is a finite, declared presentation of a category of symbolic
//! "schemes": objects with dimensions, morphisms with proper/smooth flags, a
//! composition table, fiber squares, line bundles with pullback/tensor/iso
//! tables, section data and resolutions. On top of a site the crate builds
//! the free graded abelian group on cobordism cycles `[V -> X; L1..Lr]` over
//! a theory arrow `X -> Y`, together with the bivariant operations (product,
//! pushforward, pullback, Chern operator, external product over a base,
//! smooth pullback). A truncated Lazard ring with its universal formal group
//! law feeds the three-stage quotient (dimension, section, formal group law
//! relations) whose per-degree structure is computed exactly with integer
//! lattice normal forms.
//!
//! Everything is exact: coefficients are arbitrary-precision integers,
//! equality of classes is decided by Hermite normal form membership, and any
//! operation that would need an undeclared composite, square or pullback
//! fails with an error naming exactly what is missing instead of inventing
//! data.

pub mod analysis;
pub mod cycles;
pub mod error;
pub mod expr;
pub mod intmat;
pub mod lazard;
pub mod quotient;
pub mod report;
pub mod site;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Default cap on lattice/universe sizes, overridable through the
/// `COBORD_RESOURCE_LIMIT` environment variable (see the CLI).
pub const DEFAULT_RESOURCE_LIMIT: usize = 2_000_000;
