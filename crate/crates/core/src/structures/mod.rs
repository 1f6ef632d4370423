//! Finite digraphs and the constructions performed on them: powers,
//! products, disjoint unions, spanned subdigraphs, components, quotients
//! and isomorphism.
//!
//! Tuples of vertices are encoded lexicographically with the first
//! coordinate most significant; every module relies on that convention.

mod digraph;
mod enumerate;
mod iso;
mod partition;
mod vertex_map;

pub use digraph::{
    decode, decode_into, disjoint_union, encode, power, product, Digraph, StructurePredicates,
};
pub use enumerate::nonisomorphic_digraphs;
pub use iso::is_isomorphic;
pub use partition::{Partition, UnionFind};
pub use vertex_map::VertexMap;

