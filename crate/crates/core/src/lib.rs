//! Computes K-theoretic invariants of Henselian CM local rings of finite
//! Cohen-Macaulay type from their Auslander-Reiten quiver data: the
//! Grothendieck group `K0'(R)` presented by AR relation vectors, `K0` of the
//! matrix-factorization category of a hypersurface, symbolic `K1`
//! presentations over a residue field, and K0-level verification of the
//! localization sequence of a Krull-Schmidt category.
//!
//! The computational core is exact integer linear algebra ([`zmodule`]);
//! everything downstream is cokernels of integer matrices read off a quiver
//! ([`arquiver`]), assembled into groups and symbolic expressions
//! ([`ktheory`], [`localization`]). The `A_{2n}` curve-singularity family
//! ships as a built-in catalogue ([`catalogue`]).

pub mod arquiver;
pub mod catalogue;
pub mod cli;
pub mod ktheory;
pub mod localization;
pub mod report;
pub mod zmodule;
