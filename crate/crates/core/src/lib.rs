pub mod error;
pub mod field;

pub use error::{Error, Result};
pub mod ball;
pub mod quat;
pub mod vol;
pub mod poly;
pub mod group;
pub mod reduce;
pub mod lattice;
pub mod basis;
pub mod master;
pub mod config;
pub mod export;
