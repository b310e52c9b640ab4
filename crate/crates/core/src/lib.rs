//! Exact-rational toolkit for Steiner tree lower bounds via the bidirected
//! cut relaxation.
//!
//! The pipeline: model an instance ([`instance`]), build the terminal merge
//! forest ([`merge`]), grow duals for the undirected relaxation ([`ucr`]) and
//! the bidirected relaxation ([`growth`]), and run the scale-or-contract loop
//! ([`gap`]) that emits a Steiner tree together with a dual certificate whose
//! cost ratio stays below 1.9988. Independent references (exact LP solves,
//! Dreyfus-Wagner, brute-force drops) live in [`oracles`]; the structural
//! audits over growth traces live in [`diagnostics`].
//!
//! Everything is computed over arbitrary-precision rationals; there is no
//! floating point anywhere in this crate.

pub mod diagnostics;
pub mod dual;
pub mod error;
pub mod gap;
pub mod growth;
pub mod instance;
pub mod merge;
pub mod oracles;
pub mod rat;
pub mod ucr;

pub use error::Error;
pub use rat::Rat;

pub type Result<T> = std::result::Result<T, Error>;
