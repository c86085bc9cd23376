//! Congruence subgroups of hyperbolic triangle groups.
//!
//! Exact cyclotomic and abelian field arithmetic, `PSL2`/`PGL2` over finite
//! fields, Macbeath's trace-triple classification, the PSL2-versus-PGL2 decision
//! for congruence covers, and a census of low-genus Galois Belyi curves.

pub mod abelian_fields;
pub mod arith;
pub mod census;
pub mod cli;
pub mod congruence;
pub mod cyclotomic;
pub mod error;
pub mod macbeath;
pub mod poly;
pub mod projective_linear;
pub mod triangle;
pub mod verify;

pub use error::{Result, TridentError};
