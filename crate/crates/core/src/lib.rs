pub mod error;
pub mod grad;
pub mod harness;
pub mod model;
pub mod moldata;
pub mod numfmt;
pub mod sim;

pub use error::{Error, Result};
