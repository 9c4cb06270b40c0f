pub mod config;
pub mod error;
pub mod generate;
pub mod geometry;
pub mod layout_init;
pub mod models;
pub mod pipeline;
pub mod pose;
pub mod posterior;
pub mod projection;
pub mod render;
pub mod sampler;
pub mod scene;

pub use error::{Error, Result};
