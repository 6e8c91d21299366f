//! Contractive Markov systems: iterated function systems over a directed
//! multigraph with place-dependent probabilities.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the usual `f64` instantiation.

pub mod coding;
pub mod error;
pub mod expr;
pub mod graph;
pub mod io;
pub mod operator;
pub mod rng;
pub mod scalar;
pub mod simulate;
pub mod system;
pub mod thermo;

pub use error::{Error, Result};
pub use expr::Expression;
pub use graph::{Digraph, EdgeId, ValidationReport, VertexId};
pub use operator::{Particle, ParticleMeasure, TestFunction};
pub use scalar::Scalar;
pub use simulate::Trajectory;
pub use system::{Backend, MapSpec, MarkovSystem, Point, SystemParts};

pub type System = MarkovSystem<f64>;
pub type System32 = MarkovSystem<f32>;
pub type Measure = ParticleMeasure<f64>;
pub type Measure32 = ParticleMeasure<f32>;
pub type State = Point<f64>;
