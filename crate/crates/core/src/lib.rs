//! Quotient differential algebras of generalized functions with singularities
//! concentrated on nowhere dense or first-category sets.
//!
//! A generalized function is a class `t + J` where `t` is a family of smooth
//! functions indexed by a right-directed order and `J` is the ideal of
//! families that vanish, with all derivatives, eventually at every point off a
//! singular set. Smooth functions are symbolic ([`SmoothExpr`]) so that
//! vanishing can be certified structurally instead of by floating-point
//! smallness.
//!
//! ```
//! # fn main() -> Result<(), foam_core::FoamError> {
//! use foam_core::algebra::{embed_smooth, eq_mod_ideal};
//! use foam_core::{IdealDescriptor, IndexOrder, MembershipConfig, OpenSet, Point, SingularSet, SmoothExpr};
//!
//! let d = OpenSet::interval_i(-1, 1)?;
//! let sigma = SingularSet::points(d, vec![Point(vec![0.0])])?;
//! let ideal = IdealDescriptor::single(IndexOrder::Nat, sigma)?;
//! let x = embed_smooth(SmoothExpr::coord(0), &ideal)?;
//! let square = embed_smooth(SmoothExpr::coord(0).pow(2), &ideal)?;
//! assert!(eq_mod_ideal(&x.mul(&x)?, &square, &MembershipConfig::default())?.is_verified());
//! # Ok(())
//! # }
//! ```
//!
//! The crate is `no_std` and only needs `alloc`. File formats, scenario
//! handling and the command-line front end live in the `foam` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod atlas;
pub mod bump;
pub mod distribution;
pub mod domain;
pub mod error;
pub mod expr;
pub mod membership;
pub mod orders;
pub mod poly;
pub mod quadrature;
pub mod scalar;
pub mod sequence;
pub mod sheaf;
pub mod simplify;
pub mod singular;

pub use algebra::{DiagonalElement, GenFunction};
pub use domain::{Bound, BoxRegion, Interval, MultiIndex, OpenSet, Point};
pub use error::FoamError;
pub use expr::{Analytic, Node, SmoothExpr};
pub use membership::{
    check_membership, Certificate, IdealDescriptor, IdealMode, Membership, MembershipConfig,
    Refutation,
};
pub use orders::{CofinalEmbedding, Index, IndexOrder};
pub use scalar::{Rational, Scalar};
pub use sequence::{FoamSequence, Piece, Term};
pub use singular::{FamilyLabel, SingularSet, SingularityFamily};

/// Values at or below this magnitude count as zero.
pub const NUMERIC_ZERO: f64 = 1e-12;
/// Values above this magnitude refute a vanishing claim.
pub const REFUTE_THRESHOLD: f64 = 1e-9;
