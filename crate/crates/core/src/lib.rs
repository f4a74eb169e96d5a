//! Heat kernel, flow gradients and Riesz transform kernel of the flow
//! Laplacian on the homogeneous tree, with certified evaluation of the
//! weighted `L^1` sums that control them.

pub mod cli;
pub mod error;
pub mod estimates;
pub mod numeric;
pub mod oracle;
pub mod quad;
pub mod report;
pub mod riesz;
pub mod tree;
pub mod treeheat;
pub mod verify;
pub mod zheat;

pub use error::{Error, Result};
pub use tree::{RelPos, SphereStratum, TreeParams, VertexWord};
