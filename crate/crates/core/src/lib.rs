//! Generation of multilingual maintenance instructions from a knowledge base
//! of technical objects, their states, and the plans that act on them.

pub mod document;
pub mod emit;
pub mod fixtures;
pub mod interact;
pub mod kb;
pub mod pipeline;
pub mod plan;
pub mod realize;
pub mod sentence;
pub mod simulate;
