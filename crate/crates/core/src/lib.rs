pub mod chain;
pub mod cli;
pub mod coarse;
pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod iad;
pub mod io;
pub mod linalg;
pub mod models;

pub use error::{Error, Result};
