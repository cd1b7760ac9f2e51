//! Exact arithmetic for partial stochastic maps.
//!
//! A partial map between finite sets is a domain of definition together
//! with a kernel on it; scalars come from an entire zerosumfree semiring
//! (`qnonneg` exact rationals, `bool` relations, `nat` functions), so every
//! comparison in the crate is exact equality — there are no tolerances.
//!
//! The modules, roughly in dependency order:
//!
//! - [`semiring`], [`object`], [`kernel`] — scalars, finite label sets,
//!   and total kernels with copy/discard/swap structure;
//! - [`parmap`] — partial maps as spans, composition via the support
//!   condition, the domain operator, and the extension order;
//! - [`lawsuite`] — a seeded, shrinking harness that checks the structural
//!   laws (restriction axioms, positivity, enrichment, and friends);
//! - [`substochastic`] — the deliberately wrong matrix semantics used as a
//!   comparison point;
//! - [`conditionals`], [`idempotents`], [`representability`],
//!   [`products`] — conditionals, idempotent splittings, distribution
//!   objects with partial algebras, and lax product families;
//! - [`term`], [`textform`] — a small term language and a plain-text
//!   declaration format, shared with the `parstoch` CLI.
//!
//! The guide in `book/` walks through all of this with runnable examples;
//! its code blocks are compiled as doctests of this crate.

pub mod conditionals;
pub mod error;
pub mod idempotents;
pub mod kernel;
pub mod lawsuite;
pub mod object;
pub mod parmap;
pub mod products;
pub mod representability;
pub mod semiring;
pub mod substochastic;
pub mod term;
pub mod textform;

pub use error::{Error, Result};
pub use kernel::Kernel;
pub use object::{FinObject, Label};
pub use parmap::{ParMap, Subobject};
pub use semiring::{Semiring, SemiringValue};

// Compile the guide's code blocks as doctests so the book cannot drift
// from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/semirings-and-kernels.md")]
    pub struct SemiringsAndKernels;
    #[doc = include_str!("../../../book/src/partial-maps.md")]
    pub struct PartialMaps;
    #[doc = include_str!("../../../book/src/laws-and-orders.md")]
    pub struct LawsAndOrders;
    #[doc = include_str!("../../../book/src/conditionals.md")]
    pub struct Conditionals;
    #[doc = include_str!("../../../book/src/idempotents.md")]
    pub struct Idempotents;
    #[doc = include_str!("../../../book/src/distribution-objects.md")]
    pub struct DistributionObjects;
    #[doc = include_str!("../../../book/src/product-families.md")]
    pub struct ProductFamilies;
    #[doc = include_str!("../../../book/src/cli-and-text-formats.md")]
    pub struct CliAndTextFormats;
}
