//! Exact word-space Markov chains on weighted self-similar fractals.

pub mod adjacency;
pub mod audit;
pub mod boundary;
pub mod chain;
pub mod error;
pub mod fixtures;
pub mod ifs;
pub mod kernel;
pub mod linalg;
pub mod osc;
pub mod rat;
pub mod word;

pub use error::Error;
