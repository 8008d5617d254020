//! Workload traces for dynamic virtual machine placement: the 16-environment
//! lattice, a seeded trace generator, the four worked example fixtures, a JSON
//! Lines trace format, and validation, classification and statistics over traces.

pub mod analysis;
pub mod cli;
pub mod environments;
pub mod generator;
pub mod model;
pub mod quantity;
pub mod rng;
pub mod trace_io;

pub use environments::{enumerate_environments, Capabilities, EnvironmentId};
pub use generator::{generate, paper_fixture, FixtureId, GeneratorConfig};
pub use model::{Trace, VmId};
pub use quantity::Quantity;
