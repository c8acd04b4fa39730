//! Explicit density-independent families of subsets of ω.
//!
//! A family `{A_α}` of subsets of the naturals is *density-independent* when
//! every set in the field it generates has an asymptotic density and every
//! finite boolean atom obeys the product rule
//! `d(⋂ A_α^{σ(α)}) = ∏ (σ(α)·d(A_α) + (1−σ(α))·(1 − d(A_α)))`.
//!
//! This crate builds such families explicitly and checks them on finite
//! prefixes with exact integer counting:
//!
//! - [`omega`]: sets as pure membership oracles, with complement, scaling,
//!   thinning and boolean expressions;
//! - [`density`]: exact prefix densities over geometric window schedules;
//! - [`constructors`]: Kronecker–Weyl threshold sets, the coded classical
//!   family, the parity block transform, the biased-coin extension, the gap
//!   family and greedy atom packing;
//! - [`independence`]: per-atom product-rule checks and the generated field's
//!   density image;
//! - [`reaping`]: half-bisection tests, thin extension, non-independence witnesses.
//!
//! ```
//! use dindep::constructors::{kw_family, KwSeed};
//! use dindep::density::WindowSchedule;
//! use dindep::independence::verify_independence;
//!
//! let family = kw_family(&[
//!     KwSeed::with_decimal(2, 0.3)?,
//!     KwSeed::with_decimal(3, 0.5)?,
//! ])?;
//! let schedule = WindowSchedule::ending_at(100_000, 2.0, 6)?;
//! let report = verify_independence(&family, &["sqrt2", "sqrt3"], &schedule, 5e-3)?;
//! assert!(report.pass);
//! # Ok::<(), dindep::Error>(())
//! ```

pub mod constructors;
pub mod density;
mod error;
mod exact;
pub mod family;
pub mod independence;
pub mod omega;
mod pattern;
pub mod reaping;
pub mod sweep;

pub use error::{Error, Result};
pub use exact::Density;
pub use family::{Family, Member};
pub use omega::{Descriptor, OmegaSet, Oracle, SetExpr};
pub use pattern::SignPattern;

// The book's chapters compile as doctests so their snippets stay current.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/omega-sets.md")]
    mod omega_sets {}
    #[doc = include_str!("../../../book/src/density.md")]
    mod density {}
    #[doc = include_str!("../../../book/src/kronecker-weyl.md")]
    mod kronecker_weyl {}
    #[doc = include_str!("../../../book/src/blocks.md")]
    mod blocks {}
    #[doc = include_str!("../../../book/src/extensions.md")]
    mod extensions {}
    #[doc = include_str!("../../../book/src/field-image.md")]
    mod field_image {}
    #[doc = include_str!("../../../book/src/packing.md")]
    mod packing {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
