pub mod besov;
pub mod config;
pub mod cover;
pub mod equiv;
pub mod error;
pub mod growth;
pub mod matgroup;
pub mod metric;
pub mod par;

pub use config::{RunConfig, Tolerances};
pub use error::{Error, Result};
