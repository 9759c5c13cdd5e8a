//! Half-θ6-graphs: construction, bounded-degree subgraphs, competitive local
//! routing, and a brute-force harness that measures every ratio.

pub mod cli;
pub mod degree_bounded;
pub mod geometry;
pub mod graph;
pub mod harness;
pub mod router;

pub use geometry::{Cone, ConeSystem, Point};
pub use graph::{Flavor, Graph};
