//! File formats, configuration, the experiment driver and table rendering
//! around [`earnvol_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod render;

pub use error::Error;
