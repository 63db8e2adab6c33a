pub mod attributes;
pub mod bench;
pub mod classify;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod dedup;
pub mod error;
pub mod lexicon;
pub mod pipeline;
pub mod runtime;
pub mod synth;
pub mod table;
pub mod tweets;

pub use error::{Error, Result};
