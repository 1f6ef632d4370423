//! Finite universal algebra and digraph toolkit.
//!
//! The crate covers polymorphism and strong Maltsev condition search over
//! finite digraphs, product and power decomposition of relational
//! structures, congruence lattices of finite algebras, and the free-algebra
//! construction that turns a non-Taylor algebra into a compatible disjoint
//! union of powers of the reflexive directed triangle.

pub mod algebra;
pub mod cli;
pub mod conditions;
pub mod decomposition;
pub mod error;
pub mod hom_search;
pub mod structures;

pub use error::{Error, Result};
