//! Static non-termination inference for binary CLP clauses over linear
//! rational arithmetic.
//!
//! For a recursive clause `p(X̃) ← c ◇ p(Ỹ)` the analyzer searches for a
//! derivation-neutral filter: a set of argument positions whose values can
//! be changed (within a condition) without affecting derivations. The
//! logical criterion for neutrality is decided exactly by quantifier
//! elimination, and every looping query that is reported is also replayed
//! through a derivation engine.

pub mod analyzer;
pub mod dnlog;
pub mod engine;
pub mod error;
pub mod filters;
pub mod linarith;
pub mod syntax;

pub use error::{EngineError, LinError, SyntaxError};
