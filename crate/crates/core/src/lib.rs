pub mod fixtures;
pub mod metamodel;
pub mod mtl;
pub mod source;
pub mod analyzer;
pub mod footprint;
pub mod edits;
pub mod search;
pub mod refine;
pub mod harness;
pub mod cli;
