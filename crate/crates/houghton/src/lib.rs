//! The pure graph Houghton group `PB_r` realized as eventually rigid
//! automorphisms of a free group of infinite rank, together with its finite
//! presentation, flux maps via Stallings foldings, and a word-problem
//! pipeline with length/area accounting.

pub mod autom;
pub mod cli;
pub mod folding;
pub mod presentation;
pub mod rewrite;
pub mod words;

pub use autom::{AutError, EventuallyRigidAut, GeneratorKind, DEFAULT_CEILING};
pub use words::{GeneratorIndex, Letter, Word, WordParseError};
