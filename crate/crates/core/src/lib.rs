//! Finite-scale laboratory for matrix-valued dyadic Calderón–Zygmund theory.
//!
//! Functions are piecewise constant on a dyadic grid of `[0,1)ⁿ` with values
//! in `M_d`. On top of that model the crate builds Cuculescu projections, the
//! four-part CZ decomposition, row/column splits through triangular
//! truncations, dyadic operators and Hardy/BMO functionals, and checks the
//! resulting identities and inequalities numerically.

pub mod cuculescu;
pub mod dyadic;
pub mod error;
pub mod hardy;
pub mod ncalg;
pub mod operators;
pub mod probes;
pub mod report;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/matrices.md")]
    mod matrices {}
    #[doc = include_str!("../../../book/src/dyadic.md")]
    mod dyadic {}
    #[doc = include_str!("../../../book/src/cuculescu.md")]
    mod cuculescu {}
    #[doc = include_str!("../../../book/src/lacunary.md")]
    mod lacunary {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/hardy.md")]
    mod hardy {}
    #[doc = include_str!("../../../book/src/probes.md")]
    mod probes {}
}
