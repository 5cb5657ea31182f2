//! Hardy and BMO spaces on weighted graphs: operators, square functions,
//! tent spaces, atomic and molecular decompositions and the Riesz transform.

pub mod calculus;
pub mod covering;
pub mod error;
pub mod functions;
pub mod geometry;
pub mod graph;
pub mod hardy_bmo;
pub mod operators;
pub mod parallel;
pub mod plot;
pub mod quadratic;
pub mod riesz;
pub mod selftest;
pub mod tent;
pub mod zoo;

pub use error::{Error, Result};
pub use functions::{EdgeFunction, SpaceTimeFunction, VertexFunction};
pub use graph::{Ball, WeightedGraph};
