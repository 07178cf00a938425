pub mod bundle;
pub mod cam;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod focus;
pub mod manifest;
pub mod minicnn;
pub mod overlay;
pub mod report;
pub mod rng;
pub mod splits;
pub mod stats;
pub mod synth;
pub mod tensor;

pub use error::{Error, ErrorKind, Result};
