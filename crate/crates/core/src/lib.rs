pub mod cocycle;
pub mod cone;
pub mod domination;
pub mod error;
pub mod format;
pub mod hull;
pub mod matalg;
pub mod pressure;
pub mod sft;
pub mod spectrum;
pub mod sweep;
pub mod table;
pub mod typicality;

pub use error::{Error, Result};
