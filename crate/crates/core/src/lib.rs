//! Generalized blockmodeling of binary networks under structural equivalence,
//! a mechanism-driven network evolution model, and the tooling to measure how
//! close generated networks come to the symmetric core-cohesive, cohesive and
//! symmetric core-periphery blockmodel types.

pub mod blockmodel;
pub mod error;
pub mod fitmetrics;
pub mod harness;
pub mod io;
pub mod mechanisms;
pub mod nem;
pub mod network;
pub mod plot;
pub mod seed;

pub use blockmodel::{BlockImage, BlockType, BlockmodelFit, FitOptions, Model, Partition};
pub use error::{Error, Result};
pub use fitmetrics::{IdealType, RfReport};
pub use mechanisms::MechanismWeights;
pub use network::{BinaryNetwork, CountNetwork};
