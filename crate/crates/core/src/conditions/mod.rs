//! Strong Maltsev conditions as identity systems, and the search for
//! polymorphisms of a digraph satisfying them.

pub mod builtin;
mod search;
mod table;
mod taylor;
mod term;

pub use builtin::builtin;
pub use search::{find_binary_with_unit, find_polymorphisms, PolymorphismSearch, SearchOutcome};
pub(crate) use table::advance as advance_tuple;
pub(crate) use table::table_len;
pub use table::{check_identities, eval_term, Counterexample, IdentityCheck, OperationTable, Tables};
pub use taylor::{search_taylor, TaylorWitness};
pub use term::{Identity, IdentitySystem, Symbol, Term};
