pub mod cli;
pub mod config;
pub mod dissipativity;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod lti;
pub mod polymat;
pub mod signals;

pub use error::{Error, Result};
