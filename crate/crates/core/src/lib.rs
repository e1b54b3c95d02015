//! Exact invariants of the Fermat Jacobians `y^2 = x^m + 1`: Mumford-Tate
//! equations, algebraic Gamma values, monodromy fields, Frobenius values and
//! Sato-Tate data.
//!
//! ```
//! use fermat_core::monodromy_field::report;
//!
//! let r = report(21).unwrap();
//! assert_eq!((r.rank, r.degree_over_q), (1, 24));
//! ```

pub mod arith;
pub mod arithmetic_verify;
pub mod cyclotomic;
pub mod error;
pub mod ffield;
pub mod gamma_exact;
pub mod characters;
pub mod linalg;
pub mod monodromy_field;
pub mod mumford_tate;
pub mod numeric;
pub mod padic;
pub mod sato_tate;

pub use error::{Error, Result};

// The book's snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/cyclotomic.md")]
    mod cyclotomic {}
    #[doc = include_str!("../../../book/src/characters.md")]
    mod characters {}
    #[doc = include_str!("../../../book/src/mumford_tate.md")]
    mod mumford_tate {}
    #[doc = include_str!("../../../book/src/gamma_values.md")]
    mod gamma_values {}
    #[doc = include_str!("../../../book/src/monodromy.md")]
    mod monodromy {}
    #[doc = include_str!("../../../book/src/frobenius.md")]
    mod frobenius {}
    #[doc = include_str!("../../../book/src/sato_tate.md")]
    mod sato_tate {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
