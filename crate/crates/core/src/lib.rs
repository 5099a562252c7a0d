//! Discrete-event simulation of graph-processing accelerators on a
//! cycle-level DRAM model.

pub mod accel;
pub mod algorithms;
pub mod dram;
pub mod error;
pub mod flow;
pub mod graph;
pub mod metrics;
pub mod partition;

pub use algorithms::{Problem, ProblemSpec, VertexValues};
pub use error::{Error, Result};
pub use graph::Graph;
